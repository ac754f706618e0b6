//! Train/test splitting, k-fold cross-validation, and classification
//! metrics.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::models::ModelError;
use crate::rng::{derive_seed, rng_from, DEFAULT_SEED};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test fraction must be in (0, 1), got {fraction}")]
    BadFraction { fraction: f64 },
    #[error("need 2 <= k <= n, got k={k}, n={n}")]
    BadK { k: usize, n: usize },
    #[error("gold and predicted label sequences differ in length: {gold} vs {predicted}")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("label {label} does not appear in the class list")]
    UnknownLabel { label: u8 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: DEFAULT_SEED,
            stratified: false,
        }
    }
}

impl SplitSpec {
    fn validate(&self) -> Result<(), EvalError> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(EvalError::BadFraction {
                fraction: self.test_fraction,
            });
        }
        Ok(())
    }
}

/// Disjoint, exhaustive (train, test) index sets with
/// `|test| = round(n * test_fraction)`, both sorted.
pub fn train_test_split(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    spec.validate()?;
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = rng_from(spec.seed);
    indices.shuffle(&mut rng);
    let n_test = (n as f64 * spec.test_fraction).round() as usize;
    let mut test: Vec<usize> = indices[..n_test].to_vec();
    let mut train: Vec<usize> = indices[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Stratified variant: per-class test counts are `round(count_c * fraction)`,
/// so they differ from the exact proportion by at most one.
pub fn stratified_split(labels: &[u8], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    spec.validate()?;
    let classes: BTreeSet<u8> = labels.iter().copied().collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in classes {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        let mut rng = rng_from(derive_seed(spec.seed, class as u64));
        members.shuffle(&mut rng);
        let n_test = (members.len() as f64 * spec.test_fraction).round() as usize;
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Partition `0..n` into k seeded folds whose sizes differ by at most one.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::BadK { k, n });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = rng_from(seed);
    indices.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        let mut fold: Vec<usize> = indices[at..at + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        at += size;
    }
    Ok(folds)
}

/// Per-class and aggregate classification metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub classes: Vec<u8>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<usize>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// Gold rows by predicted columns, in `classes` order.
    pub confusion: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_fold_accuracy: Option<Vec<f64>>,
}

impl EvalReport {
    /// Table in the layout of a per-class score report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>8} {:>10} {:>10} {:>10} {:>10}",
            "class", "precision", "recall", "f1-score", "support"
        );
        for (i, c) in self.classes.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>8} {:>10.4} {:>10.4} {:>10.4} {:>10}",
                c, self.precision[i], self.recall[i], self.f1[i], self.support[i]
            );
        }
        let _ = writeln!(
            out,
            "{:>8} {:>10.4} {:>10.4} {:>10.4} {:>10}",
            "macro",
            self.macro_precision,
            self.macro_recall,
            self.macro_f1,
            self.support.iter().sum::<usize>()
        );
        let _ = writeln!(out, "accuracy {:.4}", self.accuracy);
        out.push_str("confusion matrix (gold rows x predicted columns)\n");
        for (i, row) in self.confusion.iter().enumerate() {
            let _ = write!(out, "{:>8}", self.classes[i]);
            for v in row {
                let _ = write!(out, " {v:>8}");
            }
            out.push('\n');
        }
        out
    }
}

/// Metrics over a fixed class list. Classes absent from both gold and
/// predictions keep zero scores and support 0, and zero-support classes are
/// excluded from the macro averages.
pub fn evaluate_with_classes(gold: &[u8], predicted: &[u8], classes: &[u8]) -> Result<EvalReport, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let index_of = |label: u8| {
        classes
            .iter()
            .position(|&c| c == label)
            .ok_or(EvalError::UnknownLabel { label })
    };
    let m = classes.len();
    let mut confusion = vec![vec![0usize; m]; m];
    for (&g, &p) in gold.iter().zip(predicted) {
        confusion[index_of(g)?][index_of(p)?] += 1;
    }
    let mut precision = vec![0.0; m];
    let mut recall = vec![0.0; m];
    let mut f1 = vec![0.0; m];
    let mut support = vec![0usize; m];
    for i in 0..m {
        let tp = confusion[i][i];
        let gold_total: usize = confusion[i].iter().sum();
        let pred_total: usize = confusion.iter().map(|row| row[i]).sum();
        support[i] = gold_total;
        precision[i] = if pred_total > 0 {
            tp as f64 / pred_total as f64
        } else {
            0.0
        };
        recall[i] = if gold_total > 0 {
            tp as f64 / gold_total as f64
        } else {
            0.0
        };
        f1[i] = if precision[i] + recall[i] > 0.0 {
            2.0 * precision[i] * recall[i] / (precision[i] + recall[i])
        } else {
            0.0
        };
    }
    let scored: Vec<usize> = (0..m).filter(|&i| support[i] > 0).collect();
    let macro_over = |v: &[f64]| {
        if scored.is_empty() {
            0.0
        } else {
            scored.iter().map(|&i| v[i]).sum::<f64>() / scored.len() as f64
        }
    };
    let correct: usize = (0..m).map(|i| confusion[i][i]).sum();
    let total = gold.len();
    Ok(EvalReport {
        classes: classes.to_vec(),
        macro_precision: macro_over(&precision),
        macro_recall: macro_over(&recall),
        macro_f1: macro_over(&f1),
        accuracy: if total > 0 {
            correct as f64 / total as f64
        } else {
            0.0
        },
        precision,
        recall,
        f1,
        support,
        confusion,
        per_fold_accuracy: None,
    })
}

/// Metrics over the union of labels seen in gold or predictions.
pub fn evaluate(gold: &[u8], predicted: &[u8]) -> Result<EvalReport, EvalError> {
    let classes: Vec<u8> = gold
        .iter()
        .chain(predicted)
        .copied()
        .collect::<BTreeSet<u8>>()
        .into_iter()
        .collect();
    evaluate_with_classes(gold, predicted, &classes)
}

/// Cross-validation outcome: per-fold reports plus their unweighted means.
#[derive(Debug, Clone, Serialize)]
pub struct CvOutcome {
    pub folds: Vec<EvalReport>,
    pub per_fold_accuracy: Vec<f64>,
    pub mean_macro_precision: f64,
    pub mean_macro_recall: f64,
    pub mean_macro_f1: f64,
    pub mean_accuracy: f64,
}

impl CvOutcome {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}-fold cross-validation: precision {:.4}  recall {:.4}  f1 {:.4}  accuracy {:.4}",
            self.folds.len(),
            self.mean_macro_precision,
            self.mean_macro_recall,
            self.mean_macro_f1,
            self.mean_accuracy
        );
        let accs: Vec<String> = self
            .per_fold_accuracy
            .iter()
            .map(|a| format!("{a:.4}"))
            .collect();
        let _ = writeln!(out, "per-fold accuracy: [{}]", accs.join(", "));
        out
    }
}

/// Run k-fold cross-validation.
///
/// `fit` sees only training indices, so anything built from the data
/// (vocabulary, idf) is rebuilt per fold and the held-out fold never leaks
/// into it. `predict` maps a fitted model and a sample index to a label.
pub fn cross_validate<M>(
    labels: &[u8],
    k: usize,
    seed: u64,
    mut fit: impl FnMut(&[usize]) -> Result<M, ModelError>,
    mut predict: impl FnMut(&M, usize) -> u8,
) -> Result<CvOutcome, EvalError> {
    let folds = kfold(labels.len(), k, seed)?;
    let classes: Vec<u8> = labels.iter().copied().collect::<BTreeSet<u8>>().into_iter().collect();
    let mut reports = Vec::with_capacity(k);
    for fold in &folds {
        let in_fold: std::collections::HashSet<usize> = fold.iter().copied().collect();
        let train_indices: Vec<usize> = (0..labels.len()).filter(|i| !in_fold.contains(i)).collect();
        let model = fit(&train_indices)?;
        let gold: Vec<u8> = fold.iter().map(|&i| labels[i]).collect();
        let predicted: Vec<u8> = fold.iter().map(|&i| predict(&model, i)).collect();
        reports.push(evaluate_with_classes(&gold, &predicted, &classes)?);
    }
    let mean = |f: fn(&EvalReport) -> f64| {
        reports.iter().map(f).sum::<f64>() / reports.len() as f64
    };
    Ok(CvOutcome {
        per_fold_accuracy: reports.iter().map(|r| r.accuracy).collect(),
        mean_macro_precision: mean(|r| r.macro_precision),
        mean_macro_recall: mean(|r| r.macro_recall),
        mean_macro_f1: mean(|r| r.macro_f1),
        mean_accuracy: mean(|r| r.accuracy),
        folds: reports,
    })
}
