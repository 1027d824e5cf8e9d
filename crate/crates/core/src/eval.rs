//! Detection metrics, confusion tables and run reports.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataio::{format_real, ClassCode};
use crate::error::{Error, Result};

/// A detector's output for one row: a class, or a bare fault flag from
/// detectors that do not locate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decision {
    Class(ClassCode),
    Fault,
}

impl Decision {
    pub fn is_fault(self) -> bool {
        match self {
            Decision::Class(c) => c.is_fault(),
            Decision::Fault => true,
        }
    }
}

impl From<ClassCode> for Decision {
    fn from(c: ClassCode) -> Self {
        Decision::Class(c)
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Class(c) => write!(f, "{}", c.name()),
            Decision::Fault => f.write_str("Fault"),
        }
    }
}

impl FromStr for Decision {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "Fault" {
            return Ok(Decision::Fault);
        }
        ClassCode::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .map(Decision::Class)
            .ok_or_else(|| Error::invalid(format!("unknown decision {s:?}")))
    }
}

impl Serialize for Decision {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decision {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Counts of actual (row) against predicted (column) labels over the sorted
/// union of labels seen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub labels: Vec<Decision>,
    pub counts: Vec<Vec<usize>>,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

pub fn confusion<P, A>(pred: &[P], actual: &[A]) -> Result<Confusion>
where
    P: Copy + Into<Decision>,
    A: Copy + Into<Decision>,
{
    check_lengths(pred.len(), actual.len())?;
    let pairs: Vec<(Decision, Decision)> = actual
        .iter()
        .zip(pred)
        .map(|(&a, &p)| (a.into(), p.into()))
        .collect();
    let mut labels: Vec<Decision> = pairs.iter().flat_map(|&(a, p)| [a, p]).collect();
    labels.sort();
    labels.dedup();
    let pos = |d: Decision| labels.binary_search(&d).expect("label collected");
    let mut counts = vec![vec![0; labels.len()]; labels.len()];
    for &(a, p) in &pairs {
        counts[pos(a)][pos(p)] += 1;
    }
    Ok(Confusion { labels, counts })
}

fn check_lengths(p: usize, a: usize) -> Result<()> {
    if p != a {
        return Err(Error::invalid(format!("{p} predictions for {a} actual labels")));
    }
    Ok(())
}

fn ratio(hit: usize, total: usize) -> f64 {
    hit as f64 / total as f64
}

/// Fraction of actual normal rows predicted normal.
pub fn security<P: Copy + Into<Decision>>(pred: &[P], actual: &[ClassCode]) -> Result<f64> {
    check_lengths(pred.len(), actual.len())?;
    let normals: Vec<Decision> = actual
        .iter()
        .zip(pred)
        .filter(|(a, _)| !a.is_fault())
        .map(|(_, &p)| p.into())
        .collect();
    if normals.is_empty() {
        return Err(Error::UndefinedMetric("security needs at least one actual normal row".into()));
    }
    let hit = normals.iter().filter(|p| !p.is_fault()).count();
    Ok(ratio(hit, normals.len()))
}

/// Fraction of actual fault rows predicted as any fault.
pub fn dependability<P: Copy + Into<Decision>>(pred: &[P], actual: &[ClassCode]) -> Result<f64> {
    check_lengths(pred.len(), actual.len())?;
    let faults: Vec<Decision> = actual
        .iter()
        .zip(pred)
        .filter(|(a, _)| a.is_fault())
        .map(|(_, &p)| p.into())
        .collect();
    if faults.is_empty() {
        return Err(Error::UndefinedMetric("dependability needs at least one actual fault row".into()));
    }
    let hit = faults.iter().filter(|p| p.is_fault()).count();
    Ok(ratio(hit, faults.len()))
}

/// Fraction of actual fault rows assigned their exact fault class.
pub fn location_accuracy<P: Copy + Into<Decision>>(pred: &[P], actual: &[ClassCode]) -> Result<f64> {
    check_lengths(pred.len(), actual.len())?;
    let faults: Vec<(ClassCode, Decision)> = actual
        .iter()
        .zip(pred)
        .filter(|(a, _)| a.is_fault())
        .map(|(&a, &p)| (a, p.into()))
        .collect();
    if faults.is_empty() {
        return Err(Error::UndefinedMetric("location accuracy needs at least one actual fault row".into()));
    }
    let hit = faults.iter().filter(|(a, p)| *p == Decision::Class(*a)).count();
    Ok(ratio(hit, faults.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub actual: ClassCode,
    pub predicted: Decision,
    /// Detector statistic: T² for PCA, the winning discriminant score for
    /// FDA, the decision value for a binary SVM, the predicted class code for
    /// a multiclass SVM.
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub detector: String,
    pub seed: u64,
    pub threshold: Option<f64>,
    pub per_sample: Vec<SampleRecord>,
    pub confusion: Confusion,
    /// `None` when the test set has no actual normal rows.
    pub security: Option<f64>,
    /// `None` when the test set has no actual fault rows.
    pub dependability: Option<f64>,
    /// `None` for detectors that do not locate, or without fault rows.
    pub location_accuracy: Option<f64>,
    pub config_echo: serde_json::Value,
}

fn optional(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn build_report(
    detector: &str,
    seed: u64,
    threshold: Option<f64>,
    actual: &[ClassCode],
    predicted: &[Decision],
    statistics: &[f64],
    config_echo: serde_json::Value,
) -> Result<DetectionReport> {
    check_lengths(predicted.len(), actual.len())?;
    if statistics.len() != actual.len() {
        return Err(Error::invalid(format!(
            "{} statistics for {} rows",
            statistics.len(),
            actual.len()
        )));
    }
    let locates = !predicted.contains(&Decision::Fault);
    Ok(DetectionReport {
        detector: detector.to_string(),
        seed,
        threshold,
        per_sample: (0..actual.len())
            .map(|i| SampleRecord {
                index: i,
                actual: actual[i],
                predicted: predicted[i],
                statistic: statistics[i],
            })
            .collect(),
        confusion: confusion(predicted, actual)?,
        security: optional(security(predicted, actual))?,
        dependability: optional(dependability(predicted, actual))?,
        location_accuracy: if locates {
            optional(location_accuracy(predicted, actual))?
        } else {
            None
        },
        config_echo,
    })
}

impl DetectionReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("serializing report: {e}")))?;
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

    /// `index,actual,predicted,statistic` rows.
    pub fn write_samples_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("index,actual,predicted,statistic\n");
        for s in &self.per_sample {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.index,
                s.actual.name(),
                s.predicted,
                format_real(s.statistic)
            ));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Two-column `index statistic` file, plus a matching threshold line when
    /// the report has one. Returns the paths written.
    pub fn write_plot_files(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        let mut written = Vec::new();
        let stat = dir.join(format!("plot_{}_statistic.dat", self.detector));
        write_columns(&stat, self.per_sample.iter().map(|s| (s.index, s.statistic)))?;
        written.push(stat);
        if let Some(t) = self.threshold {
            let line = dir.join(format!("plot_{}_threshold.dat", self.detector));
            write_columns(&line, self.per_sample.iter().map(|s| (s.index, t)))?;
            written.push(line);
        }
        let truth = dir.join(format!("plot_{}_actual.dat", self.detector));
        write_columns(
            &truth,
            self.per_sample.iter().map(|s| (s.index, s.actual.code() as f64)),
        )?;
        written.push(truth);
        Ok(written)
    }
}

fn write_columns(path: &Path, rows: impl Iterator<Item = (usize, f64)>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for (i, v) in rows {
        writeln!(w, "{i} {}", format_real(v)).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Published security / dependability figures (percent) for other HIF
/// detection approaches, for side-by-side display.
pub const REFERENCE_TABLE: [(&str, f64, f64); 5] = [
    ("Wavelet transform", 68.5, 72.0),
    ("Time-frequency analysis", 81.5, 98.3),
    ("Morphological gradient", 96.3, 98.3),
    ("Mathematical morphology", 100.0, 100.0),
    ("Multiclass SVM", 100.0, 100.0),
];
