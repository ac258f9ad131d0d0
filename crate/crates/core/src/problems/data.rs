//! Dataset sources for logistic regression: seeded Gaussian clusters and libsvm files.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::problems::logistic::LogisticProblem;
use crate::problems::seeded_rng;

pub const DEFAULT_LAMBDA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub classes: usize,
    /// Scale of the random class centres; zero makes classes indistinguishable.
    pub separation: f64,
    pub seed: u64,
    pub lambda: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self { n: 500, d: 20, classes: 3, separation: 1.0, seed: 0, lambda: DEFAULT_LAMBDA }
    }
}

/// Raw features and labels of a synthetic spec, before the bias column.
pub fn synthetic_data(spec: &SyntheticSpec) -> Result<(DMatrix<f64>, Vec<usize>)> {
    if spec.n == 0 || spec.d == 0 || spec.classes < 2 {
        return Err(Error::InvalidInput(format!(
            "synthetic data needs n, d >= 1 and at least 2 classes, got n = {}, d = {}, C = {}",
            spec.n, spec.d, spec.classes
        )));
    }
    if !(spec.separation >= 0.0 && spec.separation.is_finite()) {
        return Err(Error::InvalidInput(format!("separation must be finite and >= 0, got {}", spec.separation)));
    }
    let mut rng = seeded_rng(spec.seed);
    let centres = DMatrix::<f64>::from_fn(spec.classes, spec.d, |_, _| {
        spec.separation * rng.sample::<f64, _>(StandardNormal)
    });
    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.classes).collect();
    let mut a = DMatrix::<f64>::zeros(spec.n, spec.d);
    for i in 0..spec.n {
        for j in 0..spec.d {
            a[(i, j)] = centres[(labels[i], j)] + rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok((a, labels))
}

/// Gaussian clusters around per-class centres, with a bias column appended.
pub fn gen_synthetic_classification(spec: &SyntheticSpec) -> Result<LogisticProblem> {
    let (a, labels) = synthetic_data(spec)?;
    LogisticProblem::with_bias(a, labels, spec.classes, spec.lambda)
}

/// Parsed libsvm file: dense features (no bias), dense labels, original label values.
#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmData {
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
    /// `label_values[c]` is the raw label mapped to class `c`.
    pub label_values: Vec<f64>,
}

impl LibsvmData {
    pub fn n_classes(&self) -> usize {
        self.label_values.len()
    }

    pub fn into_problem(self, lambda: f64) -> Result<LogisticProblem> {
        let c = self.n_classes();
        LogisticProblem::with_bias(self.features, self.labels, c, lambda)
    }
}

/// Parses `label idx:val ...` lines; `n_features` defaults to the largest index seen.
pub fn parse_libsvm(text: &str, n_features: Option<usize>) -> Result<LibsvmData> {
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse { line: line_no, message };
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| perr(format!("non-numeric label `{label_tok}`")))?;
        if !label.is_finite() {
            return Err(perr(format!("non-finite label `{label_tok}`")));
        }
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| perr(format!("expected `index:value`, got `{tok}`")))?;
            let idx: usize = idx.parse().map_err(|_| perr(format!("bad feature index `{idx}`")))?;
            if idx == 0 {
                return Err(perr("feature indices are 1-based".into()));
            }
            let val: f64 = val.parse().map_err(|_| perr(format!("bad feature value `{val}`")))?;
            if !val.is_finite() {
                return Err(perr(format!("non-finite feature value `{val}`")));
            }
            if entries.iter().any(|&(j, _)| j == idx) {
                return Err(perr(format!("duplicate feature index {idx}")));
            }
            if let Some(d) = n_features {
                if idx > d {
                    return Err(perr(format!("feature index {idx} exceeds declared dimension {d}")));
                }
            }
            max_index = max_index.max(idx);
            entries.push((idx, val));
        }
        rows.push((label, entries));
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, message: "no samples".into() });
    }
    let d = n_features.unwrap_or(max_index).max(1);
    let mut label_values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    label_values.sort_by(f64::total_cmp);
    label_values.dedup();
    let mut features = DMatrix::zeros(rows.len(), d);
    let mut labels = Vec::with_capacity(rows.len());
    for (i, (label, entries)) in rows.iter().enumerate() {
        labels.push(label_values.iter().position(|v| v == label).expect("label was collected"));
        for &(j, v) in entries {
            features[(i, j - 1)] = v;
        }
    }
    Ok(LibsvmData { features, labels, label_values })
}

pub fn read_libsvm(path: &Path, n_features: Option<usize>) -> Result<LibsvmData> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_libsvm(&text, n_features)
}

/// Loads a libsvm file as a logistic problem with a bias column.
pub fn load_libsvm(path: &Path, lambda: f64) -> Result<LogisticProblem> {
    read_libsvm(path, None)?.into_problem(lambda)
}
