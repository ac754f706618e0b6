//! Multinomial Naive Bayes, log-count ratios, and the NBSVM construction
//! (linear SVM over ratio-scaled binary features with weight interpolation).

use crate::features::{DocTermMatrix, SparseVector};
use crate::models::sgd::{train_binary, LossKind, SgdReport};
use crate::models::{FeatureMode, LinearModel, ModelError, ModelKind, TrainConfig};
use crate::rng::derive_seed;

fn sorted_classes(labels: &[u8]) -> Vec<u8> {
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    classes
}

/// Multinomial Naive Bayes with additive smoothing.
///
/// Per-class weights are smoothed log term likelihoods and the intercept is
/// the log class prior, so `argmax_c w_c . x + b_c` is the posterior
/// decision.
pub fn train_mnb(counts: &DocTermMatrix, labels: &[u8], alpha: f64) -> Result<LinearModel, ModelError> {
    if alpha <= 0.0 {
        return Err(ModelError::NonPositiveAlpha { alpha });
    }
    if counts.n_rows() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: counts.n_rows(),
            got: labels.len(),
        });
    }
    let classes = sorted_classes(labels);
    if classes.is_empty() {
        return Err(ModelError::NoTrainingData);
    }
    let dim = counts.dim();
    let n = labels.len() as f64;
    let mut weights = Vec::with_capacity(classes.len());
    let mut intercepts = Vec::with_capacity(classes.len());
    for &class in &classes {
        let mut term_counts = vec![0.0f64; dim];
        let mut total = 0.0f64;
        let mut n_class = 0usize;
        for (row, &label) in counts.rows().iter().zip(labels) {
            if label != class {
                continue;
            }
            n_class += 1;
            for &(j, v) in row.entries() {
                term_counts[j as usize] += v;
                total += v;
            }
        }
        debug_assert!(n_class > 0);
        let denom = (dim as f64) * alpha + total;
        let w: Vec<f64> = term_counts
            .into_iter()
            .map(|c| ((alpha + c) / denom).ln())
            .collect();
        weights.push(w);
        intercepts.push((n_class as f64 / n).ln());
    }
    Ok(LinearModel {
        kind: ModelKind::Mnb,
        classes,
        feature_mode: FeatureMode::Counts,
        weights,
        intercepts,
        nb_ratios: None,
    })
}

/// One class's log-count ratio against the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct NbRatio {
    /// Per-term log ratio of smoothed, L1-normalized indicator counts.
    pub r: Vec<f64>,
    /// Log prior ratio `ln(N_c / N_rest)`.
    pub b: f64,
}

/// Log-count ratio of binarized features for `class` versus the rest.
pub fn log_count_ratio(
    binary: &DocTermMatrix,
    labels: &[u8],
    class: u8,
    alpha: f64,
) -> Result<NbRatio, ModelError> {
    if alpha <= 0.0 {
        return Err(ModelError::NonPositiveAlpha { alpha });
    }
    if binary.n_rows() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: binary.n_rows(),
            got: labels.len(),
        });
    }
    let dim = binary.dim();
    let mut p = vec![alpha; dim];
    let mut q = vec![alpha; dim];
    let mut n_class = 0usize;
    let mut n_rest = 0usize;
    for (row, &label) in binary.rows().iter().zip(labels) {
        let (bucket, counter) = if label == class {
            (&mut p, &mut n_class)
        } else {
            (&mut q, &mut n_rest)
        };
        *counter += 1;
        for &(j, v) in row.entries() {
            bucket[j as usize] += v;
        }
    }
    if n_class == 0 {
        return Err(ModelError::EmptyClass { label: class });
    }
    if n_rest == 0 {
        return Err(ModelError::EmptyRest { label: class });
    }
    let p_norm: f64 = p.iter().sum();
    let q_norm: f64 = q.iter().sum();
    let r = p
        .iter()
        .zip(&q)
        .map(|(&pi, &qi)| ((pi / p_norm) / (qi / q_norm)).ln())
        .collect();
    Ok(NbRatio {
        r,
        b: (n_class as f64 / n_rest as f64).ln(),
    })
}

/// Scale a binary row elementwise by the ratio vector.
pub fn scale_by_ratio(row: &SparseVector, ratio: &[f64]) -> SparseVector {
    row.map_values(|j, v| v * ratio[j as usize])
}

/// One-vs-rest NBSVM: per class, a linear SVM is trained on ratio-scaled
/// binary features and its weights are interpolated toward their mean
/// absolute magnitude by `1 - beta`.
pub fn train_nbsvm(
    binary: &DocTermMatrix,
    labels: &[u8],
    config: &TrainConfig,
) -> Result<(LinearModel, Vec<SgdReport>), ModelError> {
    config.validate()?;
    let classes = sorted_classes(labels);
    if classes.is_empty() {
        return Err(ModelError::NoTrainingData);
    }
    if classes.len() < 2 {
        return Err(ModelError::EmptyRest { label: classes[0] });
    }
    let dim = binary.dim();
    let beta = config.nbsvm_beta;
    let mut weights = Vec::with_capacity(classes.len());
    let mut intercepts = Vec::with_capacity(classes.len());
    let mut ratios = Vec::with_capacity(classes.len());
    let mut reports = Vec::with_capacity(classes.len());
    for (class_index, &class) in classes.iter().enumerate() {
        let ratio = log_count_ratio(binary, labels, class, config.alpha)?;
        let scaled: Vec<SparseVector> = binary
            .rows()
            .iter()
            .map(|row| scale_by_ratio(row, &ratio.r))
            .collect();
        let targets: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let lambda = 1.0 / (config.svm_c * labels.len() as f64);
        let (w, b, report) = train_binary(
            LossKind::Hinge,
            &scaled,
            &targets,
            dim,
            config.learning_rate,
            config.epochs,
            lambda,
            derive_seed(config.seed, class_index as u64),
        );
        let mean_magnitude = if dim == 0 {
            0.0
        } else {
            w.iter().map(|x| x.abs()).sum::<f64>() / dim as f64
        };
        let interpolated: Vec<f64> = w
            .iter()
            .map(|&wi| (1.0 - beta) * mean_magnitude + beta * wi)
            .collect();
        weights.push(interpolated);
        intercepts.push(b);
        ratios.push(ratio.r);
        reports.push(report);
    }
    Ok((
        LinearModel {
            kind: ModelKind::Nbsvm,
            classes,
            feature_mode: FeatureMode::NbScaled,
            weights,
            intercepts,
            nb_ratios: Some(ratios),
        },
        reports,
    ))
}
