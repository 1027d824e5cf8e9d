//! Run configuration and the simulate / train / detect steps shared by the
//! command-line tool and the tests.
//!
//! Every random choice derives from the run seed: the dataset uses
//! `derive_seed(seed, "dataset", 0)`, the train/test split
//! `derive_seed(seed, "split", 0)` and penalty-factor cross-validation
//! `derive_seed(seed, "cv", 0)`.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{format_real, split, ClassCode, DataMatrix, Normalizer, SplitSpec};
use crate::error::{Error, Result};
use crate::eval::{build_report, Decision, DetectionReport};
use crate::fda::{classify, discriminant, fit_fda, FdaModel};
use crate::hifsim::{generate_dataset, simulate_feeder, DatasetConfig, WaveformSet};
use crate::numerics::derive_seed;
use crate::pca::{fit_pca, t2_statistic, t2_threshold, PcaModel, ThresholdDof};
use crate::svm::{
    cross_validate_c, decision_value, log_grid, predict_multiclass, train_binary, train_multiclass,
    CvResult, MulticlassSvm, Strategy, SvmClassifier, TrainParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    Pca,
    Fda,
    Svm,
    #[default]
    Msvm,
}

impl Detector {
    pub fn name(self) -> &'static str {
        match self {
            Detector::Pca => "pca",
            Detector::Fda => "fda",
            Detector::Svm => "svm",
            Detector::Msvm => "msvm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub detector: Detector,
    pub dataset: DatasetConfig,
    pub simulate: SimulateConfig,
    pub split: SplitConfig,
    pub pca: PcaConfig,
    pub fda: FdaConfig,
    pub svm: SvmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            detector: Detector::default(),
            dataset: DatasetConfig::default(),
            simulate: SimulateConfig::default(),
            split: SplitConfig::default(),
            pca: PcaConfig::default(),
            fda: FdaConfig::default(),
            svm: SvmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Leading cycles of each scenario written to the waveform files; 0
    /// disables waveform output.
    pub waveform_cycles: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { waveform_cycles: 2 }
    }
}

/// `[train, test]` rows per class. Unset entries take the detector's
/// default: PCA trains on 60 normal rows and tests on the other 40 plus all
/// fault rows; FDA and SVM use 60/40; the multiclass SVM uses 50/50.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub normal: Option<[usize; 2]>,
    pub fault: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcaConfig {
    pub variance_target: f64,
    pub alpha: f64,
    pub dof: ThresholdDof,
}

impl Default for PcaConfig {
    fn default() -> Self {
        PcaConfig {
            variance_target: 0.98,
            alpha: 0.001,
            dof: ThresholdDof::Retained,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdaConfig {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    #[serde(flatten)]
    pub params: TrainParams,
    pub strategy: Strategy,
    /// Choose C by cross-validation (binary detector only).
    pub cv: bool,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_count: usize,
    pub folds: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            params: TrainParams::default(),
            strategy: Strategy::OneVsOne,
            cv: false,
            grid_min: 0.1,
            grid_max: 100.0,
            grid_count: 1000,
            folds: 3,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let p = &self.pca;
        if !(p.variance_target > 0.0 && p.variance_target <= 1.0) {
            return bad(format!("pca.variance_target must lie in (0, 1], got {}", p.variance_target));
        }
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            return bad(format!("pca.alpha must lie in (0, 1), got {}", p.alpha));
        }
        self.svm.params.validate().map_err(|e| Error::Config(format!("svm: {e}")))?;
        if self.svm.folds < 2 {
            return bad(format!("svm.folds must be >= 2, got {}", self.svm.folds));
        }
        log_grid(self.svm.grid_min, self.svm.grid_max, self.svm.grid_count)
            .map_err(|e| Error::Config(format!("svm grid: {e}")))?;
        Ok(())
    }

    pub fn split_spec(&self) -> SplitSpec {
        let (normal, fault) = match self.detector {
            Detector::Pca => ([60, 40], [0, 100]),
            Detector::Fda | Detector::Svm => ([60, 40], [60, 40]),
            Detector::Msvm => ([50, 50], [50, 50]),
        };
        let normal = self.split.normal.unwrap_or(normal);
        let fault = self.split.fault.unwrap_or(fault);
        SplitSpec {
            per_class: ClassCode::ALL
                .into_iter()
                .map(|c| {
                    let [tr, te] = if c.is_fault() { fault } else { normal };
                    (c, (tr, te))
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Generates the labeled feature dataset for a run.
pub fn simulate(cfg: &RunConfig) -> Result<DataMatrix> {
    generate_dataset(&cfg.dataset, derive_seed(cfg.seed, "dataset", 0))
}

/// The raw waveforms behind each dataset scenario block, in block order.
pub fn scenario_waveforms(cfg: &RunConfig) -> Result<Vec<WaveformSet>> {
    let seed = derive_seed(cfg.seed, "dataset", 0);
    (0..cfg.dataset.scenarios.len())
        .into_par_iter()
        .map(|i| simulate_feeder(&cfg.dataset.scenario(i, seed)?))
        .collect()
}

/// Writes the first `cycles` cycles of `w` as `t,<channels>,arc_current`.
pub fn write_waveform_csv(w: &WaveformSet, cycles: usize, path: &Path) -> Result<()> {
    let spc = (w.sample_rate / w.system_frequency).round() as usize;
    let n = (cycles * spc).min(w.len());
    let io = |e| Error::io(path, e);
    let file = fs::File::create(path).map_err(io)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "t,{},arc_current", w.channel_names.join(",")).map_err(io)?;
    for k in 0..n {
        let mut line = format_real(w.time[k]);
        for ch in &w.channels {
            line.push(',');
            line.push_str(&format_real(ch[k]));
        }
        line.push(',');
        line.push_str(&format_real(w.arc_current[k]));
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Stratified train/test split for the configured detector.
pub fn split_dataset(cfg: &RunConfig, data: &DataMatrix) -> Result<(DataMatrix, DataMatrix)> {
    split(data, &cfg.split_spec(), derive_seed(cfg.seed, "split", 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case")]
pub enum TrainedModel {
    Pca {
        channel_names: Vec<String>,
        alpha: f64,
        model: PcaModel,
    },
    Fda {
        channel_names: Vec<String>,
        model: FdaModel,
    },
    Svm {
        channel_names: Vec<String>,
        normalizer: Normalizer,
        classifier: SvmClassifier,
        cv: Option<CvResult>,
    },
    Msvm {
        channel_names: Vec<String>,
        normalizer: Normalizer,
        model: MulticlassSvm,
    },
}

impl TrainedModel {
    pub fn detector(&self) -> Detector {
        match self {
            TrainedModel::Pca { .. } => Detector::Pca,
            TrainedModel::Fda { .. } => Detector::Fda,
            TrainedModel::Svm { .. } => Detector::Svm,
            TrainedModel::Msvm { .. } => Detector::Msvm,
        }
    }

    pub fn channel_names(&self) -> &[String] {
        match self {
            TrainedModel::Pca { channel_names, .. }
            | TrainedModel::Fda { channel_names, .. }
            | TrainedModel::Svm { channel_names, .. }
            | TrainedModel::Msvm { channel_names, .. } => channel_names,
        }
    }

    /// One-paragraph fit summary for the console.
    pub fn summary(&self) -> String {
        match self {
            TrainedModel::Pca { model, alpha, .. } => {
                let limit = t2_threshold(model, *alpha)
                    .map(|t| format!("{t:.4}"))
                    .unwrap_or_else(|e| format!("unavailable ({e})"));
                format!(
                    "pca: a = {} of {} components, variance captured {:.4}, T² limit {limit} at alpha {alpha}",
                    model.a,
                    model.dim(),
                    model.variance_captured
                )
            }
            TrainedModel::Fda { model, .. } => format!(
                "fda: {} classes, eigenvalues [{}]",
                model.class_codes.len(),
                model
                    .eigenvalues
                    .iter()
                    .map(|v| format!("{v:.4e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            TrainedModel::Svm { classifier, cv, .. } => {
                let mut s = format!(
                    "svm: {} support vectors, C = {}, kernel {:?}",
                    classifier.n_support(),
                    classifier.c,
                    classifier.kernel
                );
                if let Some(cv) = cv {
                    s.push_str(&format!(
                        ", C chosen by {}-fold CV over {} values",
                        cv.folds,
                        cv.curve.len()
                    ));
                }
                s
            }
            TrainedModel::Msvm { model, .. } => {
                let first = &model.members[0].classifier;
                format!(
                    "msvm: {} classifiers ({:?}), C = {}, kernel {:?}, support vectors [{}]",
                    model.members.len(),
                    model.strategy,
                    first.c,
                    first.kernel,
                    model
                        .members
                        .iter()
                        .map(|m| m.classifier.n_support().to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            }
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("serializing model: {e}")))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: Some(e.line()),
            msg: e.to_string(),
        })
    }
}

fn binary_labels(labels: &[ClassCode]) -> Vec<i8> {
    labels.iter().map(|c| if c.is_fault() { 1 } else { -1 }).collect()
}

/// Fits the configured detector on a training split.
pub fn train(cfg: &RunConfig, data: &DataMatrix) -> Result<TrainedModel> {
    let channel_names = data.channel_names().to_vec();
    match cfg.detector {
        Detector::Pca => {
            let labels = data.require_labels()?;
            if labels.iter().all(|l| l.is_fault()) {
                return Err(Error::invalid(
                    "pca trains on normal rows, but the training data holds only fault rows",
                ));
            }
            let normal = data.filter_classes(|c| !c.is_fault());
            let model = fit_pca(&normal, cfg.pca.variance_target)?.with_threshold_dof(cfg.pca.dof);
            Ok(TrainedModel::Pca {
                channel_names,
                alpha: cfg.pca.alpha,
                model,
            })
        }
        Detector::Fda => Ok(TrainedModel::Fda {
            channel_names,
            model: fit_fda(data)?,
        }),
        Detector::Svm => {
            let y = binary_labels(data.require_labels()?);
            let normalizer = Normalizer::fit(data.observations())?;
            let x = normalizer.apply_matrix(data.observations())?;
            let mut params = cfg.svm.params;
            let cv = if cfg.svm.cv {
                let grid = log_grid(cfg.svm.grid_min, cfg.svm.grid_max, cfg.svm.grid_count)?;
                let res = cross_validate_c(
                    &x,
                    &y,
                    &params,
                    &grid,
                    cfg.svm.folds,
                    derive_seed(cfg.seed, "cv", 0),
                )?;
                params.c = res.best_c;
                Some(res)
            } else {
                None
            };
            Ok(TrainedModel::Svm {
                channel_names,
                normalizer,
                classifier: train_binary(&x, &y, &params)?,
                cv,
            })
        }
        Detector::Msvm => {
            data.require_labels()?;
            let normalizer = Normalizer::fit(data.observations())?;
            let x = DataMatrix::new(
                normalizer.apply_matrix(data.observations())?,
                channel_names.clone(),
                data.labels().map(<[ClassCode]>::to_vec),
            )?;
            Ok(TrainedModel::Msvm {
                channel_names,
                normalizer,
                model: train_multiclass(&x, cfg.svm.strategy, &cfg.svm.params)?,
            })
        }
    }
}

/// Per-row decisions and statistics plus the threshold, if the detector has
/// one.
pub fn decide(model: &TrainedModel, data: &DataMatrix) -> Result<(Vec<Decision>, Vec<f64>, Option<f64>)> {
    if data.channel_names() != model.channel_names() {
        return Err(Error::invalid(format!(
            "test data has {} channels ({}...), model was trained on {} ({}...)",
            data.n_cols(),
            data.channel_names().first().map(String::as_str).unwrap_or(""),
            model.channel_names().len(),
            model.channel_names().first().map(String::as_str).unwrap_or("")
        )));
    }
    let n = data.n_rows();
    let mut decisions = Vec::with_capacity(n);
    let mut stats = Vec::with_capacity(n);
    let threshold = match model {
        TrainedModel::Pca { model, alpha, .. } => {
            let limit = t2_threshold(model, *alpha)?;
            for i in 0..n {
                let t2 = t2_statistic(model, data.row(i))?;
                decisions.push(if t2 > limit {
                    Decision::Fault
                } else {
                    Decision::Class(ClassCode::Normal)
                });
                stats.push(t2);
            }
            Some(limit)
        }
        TrainedModel::Fda { model, .. } => {
            for i in 0..n {
                let g = discriminant(model, data.row(i))?;
                let c = classify(model, data.row(i))?;
                decisions.push(Decision::Class(c));
                stats.push(g.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            }
            None
        }
        TrainedModel::Svm {
            normalizer,
            classifier,
            ..
        } => {
            for i in 0..n {
                let f = decision_value(classifier, &normalizer.apply_row(data.row(i))?)?;
                decisions.push(if f >= 0.0 {
                    Decision::Fault
                } else {
                    Decision::Class(ClassCode::Normal)
                });
                stats.push(f);
            }
            Some(0.0)
        }
        TrainedModel::Msvm {
            normalizer, model, ..
        } => {
            for i in 0..n {
                let c = predict_multiclass(model, &normalizer.apply_row(data.row(i))?)?;
                decisions.push(Decision::Class(c));
                stats.push(c.code() as f64);
            }
            None
        }
    };
    Ok((decisions, stats, threshold))
}

/// Runs a trained model over labeled test rows and assembles the report.
pub fn detect(cfg: &RunConfig, model: &TrainedModel, test: &DataMatrix) -> Result<DetectionReport> {
    let actual = test.require_labels()?;
    let (decisions, stats, threshold) = decide(model, test)?;
    build_report(
        model.detector().name(),
        cfg.seed,
        threshold,
        actual,
        &decisions,
        &stats,
        cfg.to_json(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.dataset.scenarios.len(), 20);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in ["seed = -1", "[pca]\nalpha = 2.0", "bogus = 1", "[svm]\nc = 0.0", "[svm]\nfolds = 1"] {
            let e = RunConfig::from_toml_str(text).unwrap_err();
            assert!(e.is_io_or_config(), "{text}: {e}");
        }
    }

    #[test]
    fn split_defaults_follow_detector() {
        let mut cfg = RunConfig {
            detector: Detector::Pca,
            ..RunConfig::default()
        };
        assert_eq!(cfg.split_spec().per_class[&ClassCode::FaultA], (0, 100));
        cfg.detector = Detector::Msvm;
        assert_eq!(cfg.split_spec().per_class[&ClassCode::Normal], (50, 50));
        cfg.split.normal = Some([10, 5]);
        assert_eq!(cfg.split_spec().per_class[&ClassCode::Normal], (10, 5));
    }
}
