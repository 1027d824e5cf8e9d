//! Labeled observation matrices, z-score normalization, stratified splits and
//! CSV persistence.
//!
//! CSV layout: one header line with the channel names, plus a trailing
//! `label` column when the matrix is labeled; one observation per line after
//! that. Values are written with 17 significant digits so a write/read cycle
//! restores every `f64` bit for bit. Labels are integer class codes 0-3.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngState};

/// Operating condition of a row: normal, or a high-impedance fault at one of
/// three feeder locations.
///
/// Codes are 0-3 with `Normal = 0`. The legacy 4/3/2/1 numbering (normal
/// last, location C first) is available through
/// [`ClassCode::to_legacy_label`] and [`ClassCode::from_legacy_label`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ClassCode {
    Normal = 0,
    FaultA = 1,
    FaultB = 2,
    FaultC = 3,
}

impl ClassCode {
    pub const ALL: [ClassCode; 4] = [
        ClassCode::Normal,
        ClassCode::FaultA,
        ClassCode::FaultB,
        ClassCode::FaultC,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        ClassCode::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::invalid(format!("class code must be 0-3, got {code}")))
    }

    pub fn is_fault(self) -> bool {
        self != ClassCode::Normal
    }

    /// 4 = normal, 3 = A, 2 = B, 1 = C.
    pub fn to_legacy_label(self) -> u8 {
        match self {
            ClassCode::Normal => 4,
            ClassCode::FaultA => 3,
            ClassCode::FaultB => 2,
            ClassCode::FaultC => 1,
        }
    }

    pub fn from_legacy_label(label: u8) -> Result<Self> {
        match label {
            4 => Ok(ClassCode::Normal),
            3 => Ok(ClassCode::FaultA),
            2 => Ok(ClassCode::FaultB),
            1 => Ok(ClassCode::FaultC),
            other => Err(Error::invalid(format!("legacy label must be 1-4, got {other}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassCode::Normal => "Normal",
            ClassCode::FaultA => "A",
            ClassCode::FaultB => "B",
            ClassCode::FaultC => "C",
        }
    }
}

impl fmt::Display for ClassCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<ClassCode> for u8 {
    fn from(c: ClassCode) -> u8 {
        c.code()
    }
}

impl TryFrom<u8> for ClassCode {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        ClassCode::from_code(v)
    }
}

/// `n×m` observations with channel names and optional per-row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    observations: Matrix,
    channel_names: Vec<String>,
    labels: Option<Vec<ClassCode>>,
}

impl DataMatrix {
    pub fn new(
        observations: Matrix,
        channel_names: Vec<String>,
        labels: Option<Vec<ClassCode>>,
    ) -> Result<Self> {
        if channel_names.len() != observations.cols() {
            return Err(Error::invalid(format!(
                "{} channel names for {} columns",
                channel_names.len(),
                observations.cols()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != observations.rows() {
                return Err(Error::invalid(format!(
                    "{} labels for {} rows",
                    l.len(),
                    observations.rows()
                )));
            }
        }
        Ok(DataMatrix {
            observations,
            channel_names,
            labels,
        })
    }

    /// Unlabeled matrix with channels named `x0, x1, …`.
    pub fn unnamed(observations: Matrix) -> Self {
        let names = (0..observations.cols()).map(|j| format!("x{j}")).collect();
        DataMatrix {
            observations,
            channel_names: names,
            labels: None,
        }
    }

    pub fn observations(&self) -> &Matrix {
        &self.observations
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn labels(&self) -> Option<&[ClassCode]> {
        self.labels.as_deref()
    }

    pub fn n_rows(&self) -> usize {
        self.observations.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.observations.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.observations.row(i)
    }

    pub fn with_labels(mut self, labels: Vec<ClassCode>) -> Result<Self> {
        if labels.len() != self.n_rows() {
            return Err(Error::invalid(format!(
                "{} labels for {} rows",
                labels.len(),
                self.n_rows()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn require_labels(&self) -> Result<&[ClassCode]> {
        self.labels()
            .ok_or_else(|| Error::invalid("operation needs a labeled data matrix"))
    }

    /// Rows by index, labels carried along.
    pub fn select_rows(&self, idx: &[usize]) -> DataMatrix {
        DataMatrix {
            observations: self.observations.select_rows(idx),
            channel_names: self.channel_names.clone(),
            labels: self
                .labels
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Rows whose label satisfies `keep`. Unlabeled matrices yield no rows.
    pub fn filter_classes(&self, keep: impl Fn(ClassCode) -> bool) -> DataMatrix {
        let idx: Vec<usize> = match &self.labels {
            Some(l) => (0..l.len()).filter(|&i| keep(l[i])).collect(),
            None => Vec::new(),
        };
        self.select_rows(&idx)
    }

    /// Row counts per class, ascending by code.
    pub fn class_counts(&self) -> BTreeMap<ClassCode, usize> {
        let mut out = BTreeMap::new();
        for &c in self.labels().unwrap_or(&[]) {
            *out.entry(c).or_insert(0) += 1;
        }
        out
    }

    /// Vertical concatenation. Channel names must agree; labels are kept only
    /// if both parts carry them.
    pub fn vstack(&self, other: &DataMatrix) -> Result<DataMatrix> {
        if self.channel_names != other.channel_names {
            return Err(Error::invalid("cannot stack matrices with different channels"));
        }
        let mut data = self.observations.as_slice().to_vec();
        data.extend_from_slice(other.observations.as_slice());
        let obs = Matrix::new(self.n_rows() + other.n_rows(), self.n_cols(), data)?;
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        DataMatrix::new(obs, self.channel_names.clone(), labels)
    }
}

/// Standard deviations below this are replaced by it, so constant channels
/// normalize to zero instead of dividing by zero.
pub const STD_FLOOR: f64 = 1e-12;

/// Per-channel z-score statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Normalizer {
    /// Column means and sample standard deviations (divisor `n − 1`).
    pub fn fit(x: &Matrix) -> Result<Self> {
        let n = x.rows();
        if n < 2 {
            return Err(Error::invalid(format!(
                "normalization needs at least 2 rows, got {n}"
            )));
        }
        let m = x.cols();
        let mut means = vec![0.0; m];
        for r in x.row_iter() {
            for (mu, v) in means.iter_mut().zip(r) {
                *mu += v;
            }
        }
        means.iter_mut().for_each(|mu| *mu /= n as f64);
        let mut var = vec![0.0; m];
        for r in x.row_iter() {
            for ((s, v), mu) in var.iter_mut().zip(r).zip(&means) {
                let d = v - mu;
                *s += d * d;
            }
        }
        let stds = var
            .into_iter()
            .map(|s| (s / (n - 1) as f64).sqrt().max(STD_FLOOR))
            .collect();
        Ok(Normalizer { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::invalid(format!(
                "row has {} values, normalizer expects {}",
                row.len(),
                self.dim()
            )));
        }
        Ok(row
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, mu), sd)| (v - mu) / sd)
            .collect())
    }

    pub fn apply_matrix(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::invalid(format!(
                "matrix has {} columns, normalizer expects {}",
                x.cols(),
                self.dim()
            )));
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, mu), sd) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.stds) {
                *v = (*v - mu) / sd;
            }
        }
        Ok(out)
    }
}

pub fn normalize_fit(x: &DataMatrix) -> Result<Normalizer> {
    Normalizer::fit(x.observations())
}

pub fn normalize_apply(norm: &Normalizer, x: &DataMatrix) -> Result<DataMatrix> {
    Ok(DataMatrix {
        observations: norm.apply_matrix(x.observations())?,
        channel_names: x.channel_names.clone(),
        labels: x.labels.clone(),
    })
}

/// Train/test row counts per class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub per_class: BTreeMap<ClassCode, (usize, usize)>,
}

impl SplitSpec {
    /// The same `(train, test)` counts for each listed class.
    pub fn uniform(classes: &[ClassCode], train: usize, test: usize) -> Self {
        SplitSpec {
            per_class: classes.iter().map(|&c| (c, (train, test))).collect(),
        }
    }
}

/// Stratified random split. Within each class the row order is shuffled with
/// a seed-derived stream; the chosen train and test rows are then emitted in
/// class order, ascending original index within a class.
pub fn split(x: &DataMatrix, spec: &SplitSpec, seed: u64) -> Result<(DataMatrix, DataMatrix)> {
    let labels = x.require_labels()?;
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (&class, &(n_train, n_test)) in &spec.per_class {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if rows.len() < n_train + n_test {
            return Err(Error::invalid(format!(
                "class {class} has {} rows, split needs {}",
                rows.len(),
                n_train + n_test
            )));
        }
        let mut rng = RngState::seeded(crate::numerics::derive_seed(seed, "split", class.code() as u64));
        rng.shuffle(&mut rows);
        let mut tr = rows[..n_train].to_vec();
        let mut te = rows[n_train..n_train + n_test].to_vec();
        tr.sort_unstable();
        te.sort_unstable();
        train_idx.extend(tr);
        test_idx.extend(te);
    }
    Ok((x.select_rows(&train_idx), x.select_rows(&test_idx)))
}

/// 17 significant digits: enough to restore any `f64` exactly.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(x: &DataMatrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = x.channel_names.join(",");
    if x.labels.is_some() {
        header.push_str(",label");
    }
    let io = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for i in 0..x.n_rows() {
        let mut line = x
            .row(i)
            .iter()
            .map(|&v| format_real(v))
            .collect::<Vec<_>>()
            .join(",");
        if let Some(l) = &x.labels {
            line.push(',');
            line.push_str(&l[i].code().to_string());
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_csv(path: &Path) -> Result<DataMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: Option<usize>, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| parse_err(Some(1), e.to_string()))?,
        None => return Err(parse_err(Some(1), "missing header".into())),
    };
    let mut names: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    let labeled = names.last().map(|s| s == "label").unwrap_or(false);
    if labeled {
        names.pop();
    }
    if names.is_empty() || names.iter().any(|n| n.is_empty()) {
        return Err(parse_err(Some(1), "header must name every channel".into()));
    }
    let width = names.len() + usize::from(labeled);

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0;
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize);
        if rec.len() == 1 && rec.get(0).map(|s| s.trim().is_empty()).unwrap_or(false) {
            continue;
        }
        if rec.len() != width {
            return Err(parse_err(
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (j, field) in rec.iter().take(names.len()).enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                parse_err(line, format!("column {} ({}): not a number: {field:?}", j + 1, names[j]))
            })?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {}: non-finite value", j + 1)));
            }
            data.push(v);
        }
        if labeled {
            let field = rec.get(names.len()).unwrap_or("").trim();
            let code: u8 = field
                .parse()
                .map_err(|_| parse_err(line, format!("label {field:?} is not an integer 0-3")))?;
            labels.push(ClassCode::from_code(code).map_err(|e| parse_err(line, e.to_string()))?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(None, "no data rows".into()));
    }
    let obs = Matrix::new(rows, names.len(), data)?;
    DataMatrix::new(obs, names, labeled.then_some(labels))
}
