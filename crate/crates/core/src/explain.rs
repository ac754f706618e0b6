//! Per-prediction token attributions.
//!
//! Two routes: exact linear attribution (each in-vocabulary n-gram
//! contributes `weight * feature_value` so the pieces add up to the decision
//! score), and a perturbation-based local surrogate that fits a weighted
//! ridge model over token-presence masks and works for any predictor.

use serde::Serialize;
use thiserror::Error;

use crate::models::{AnyModel, Classifier, FeatureMode, ModelError};
use crate::rng::rng_from;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("text has no tokens to explain")]
    DegenerateText,
    #[error("surrogate explanation needs at least 10 samples, got {n}")]
    TooFewSamples { n: usize },
    #[error("label {label} is not one of the model's classes")]
    UnknownLabel { label: u8 },
    #[error("linear attribution requires a linear model")]
    NotLinear,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplainMethod {
    Linear,
    Surrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenWeight {
    pub token: String,
    pub weight: f64,
}

/// Top-k signed token contributions toward one class.
#[derive(Debug, Clone, Serialize)]
pub struct Explanation {
    pub label: u8,
    pub method: ExplainMethod,
    pub tokens: Vec<TokenWeight>,
}

/// Full linear attribution before truncation: every contributing term, the
/// intercept, and the decision score they add up to.
#[derive(Debug, Clone)]
pub struct Attribution {
    pub label: u8,
    pub terms: Vec<TokenWeight>,
    pub intercept: f64,
    pub score: f64,
}

fn sort_by_magnitude(terms: &mut [TokenWeight]) {
    terms.sort_by(|a, b| {
        b.weight
            .abs()
            .partial_cmp(&a.weight.abs())
            .unwrap()
            .then_with(|| a.token.cmp(&b.token))
    });
}

/// Exact attribution for a linear model: contribution of term `t` to the
/// target class is `w[t] * feature(t)` (with the class's log-count-ratio
/// scaling folded in for NBSVM). The intercept plus all contributions equals
/// the class decision score.
pub fn linear_attribution_full(
    model: &AnyModel,
    text: &str,
    target: Option<u8>,
) -> Result<Attribution, ExplainError> {
    let linear = match &model.classifier {
        Classifier::Linear(m) => m,
        Classifier::Forest(_) => return Err(ExplainError::NotLinear),
    };
    let x = model.vectorize(text);
    let (predicted, scores) = linear.predict(&x)?;
    let label = target.unwrap_or(predicted);
    let class_index = linear
        .classes
        .iter()
        .position(|&c| c == label)
        .ok_or(ExplainError::UnknownLabel { label })?;
    let weights = &linear.weights[class_index];
    let ratio = match (linear.feature_mode, &linear.nb_ratios) {
        (FeatureMode::NbScaled, Some(r)) => Some(&r[class_index]),
        _ => None,
    };
    let mut terms: Vec<TokenWeight> = x
        .entries()
        .iter()
        .map(|&(j, v)| {
            let scale = ratio.map(|r| r[j as usize]).unwrap_or(1.0);
            TokenWeight {
                token: model.vocabulary.term(j).to_string(),
                weight: weights[j as usize] * scale * v,
            }
        })
        .collect();
    sort_by_magnitude(&mut terms);
    Ok(Attribution {
        label,
        terms,
        intercept: linear.intercepts[class_index],
        score: scores[class_index],
    })
}

/// Top-k linear attribution. With `target` unset the predicted class is
/// explained.
pub fn linear_attribution(
    model: &AnyModel,
    text: &str,
    target: Option<u8>,
    k: usize,
) -> Result<Explanation, ExplainError> {
    let full = linear_attribution_full(model, text, target)?;
    let mut tokens = full.terms;
    tokens.truncate(k);
    Ok(Explanation {
        label: full.label,
        method: ExplainMethod::Linear,
        tokens,
    })
}

/// Settings for the perturbation surrogate.
#[derive(Debug, Clone, Copy)]
pub struct SurrogateConfig {
    /// Number of masked variants to sample (ignored when the text is short
    /// enough for exhaustive enumeration).
    pub n_samples: usize,
    /// Kernel width applied to cosine distances scaled by 100.
    pub kernel_width: f64,
    /// Ridge penalty on the token coefficients.
    pub ridge: f64,
    /// Texts with at most this many tokens are explained by enumerating
    /// every mask, which makes small cases exact.
    pub exhaustive_limit: usize,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            n_samples: 1000,
            kernel_width: 25.0,
            ridge: 1.0,
            exhaustive_limit: 12,
            seed: crate::rng::DEFAULT_SEED,
        }
    }
}

/// Explain an opaque per-class scorer by sampling token-presence masks.
///
/// Each token position is kept with probability 0.5; the predictor scores
/// every masked variant; a ridge model weighted by
/// `exp(-(100 * cosine_distance)^2 / width^2)` is fit over the presence
/// indicators; its coefficients for `target_label` are the attributions.
pub fn surrogate_explain<F>(
    predictor: F,
    text: &str,
    target_label: u8,
    classes: &[u8],
    config: &SurrogateConfig,
    k: usize,
) -> Result<Explanation, ExplainError>
where
    F: Fn(&str) -> Vec<f64>,
{
    let class_index = classes
        .iter()
        .position(|&c| c == target_label)
        .ok_or(ExplainError::UnknownLabel { label: target_label })?;
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let m = tokens.len();
    if m == 0 {
        return Err(ExplainError::DegenerateText);
    }
    if config.n_samples < 10 {
        return Err(ExplainError::TooFewSamples {
            n: config.n_samples,
        });
    }

    // enumeration above 2^20 masks would dwarf any sampling budget
    let masks: Vec<Vec<bool>> = if m <= config.exhaustive_limit.min(20) {
        (0u64..(1u64 << m))
            .map(|bits| (0..m).map(|j| bits & (1 << j) != 0).collect())
            .collect()
    } else {
        let mut rng = rng_from(config.seed);
        use rand::Rng;
        (0..config.n_samples)
            .map(|_| (0..m).map(|_| rng.random_bool(0.5)).collect())
            .collect()
    };

    let mut responses = Vec::with_capacity(masks.len());
    let mut sample_weights = Vec::with_capacity(masks.len());
    for mask in &masks {
        let kept: Vec<&str> = tokens
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(&t, _)| t)
            .collect();
        let variant = kept.join(" ");
        let scores = predictor(&variant);
        responses.push(scores.get(class_index).copied().unwrap_or(0.0));
        let kept_count = mask.iter().filter(|&&b| b).count();
        // cosine similarity of a binary mask to the all-ones mask is
        // sqrt(kept / m); distances are scaled by 100 before the kernel
        let similarity = if kept_count == 0 {
            0.0
        } else {
            (kept_count as f64 / m as f64).sqrt()
        };
        let distance = 100.0 * (1.0 - similarity);
        sample_weights.push((-(distance * distance) / (config.kernel_width * config.kernel_width)).exp());
    }

    let coefficients = weighted_ridge(&masks, &responses, &sample_weights, config.ridge);
    let mut weights: Vec<TokenWeight> = tokens
        .iter()
        .enumerate()
        .map(|(j, &t)| TokenWeight {
            token: t.to_string(),
            weight: coefficients[j + 1],
        })
        .collect();
    sort_by_magnitude(&mut weights);
    weights.truncate(k);
    Ok(Explanation {
        label: target_label,
        method: ExplainMethod::Surrogate,
        tokens: weights,
    })
}

/// Solve the weighted ridge normal equations over presence indicators with
/// an unpenalized intercept. Returns `[intercept, coef_0, ..., coef_m-1]`.
#[allow(clippy::needless_range_loop)]
fn weighted_ridge(masks: &[Vec<bool>], y: &[f64], w: &[f64], ridge: f64) -> Vec<f64> {
    let m = masks.first().map(Vec::len).unwrap_or(0);
    let p = m + 1;
    let mut ata = vec![vec![0.0f64; p]; p];
    let mut aty = vec![0.0f64; p];
    let mut row = vec![0.0f64; p];
    for ((mask, &yi), &wi) in masks.iter().zip(y).zip(w) {
        row[0] = 1.0;
        for (j, &bit) in mask.iter().enumerate() {
            row[j + 1] = if bit { 1.0 } else { 0.0 };
        }
        for a in 0..p {
            if row[a] == 0.0 {
                continue;
            }
            let wa = wi * row[a];
            aty[a] += wa * yi;
            for b in a..p {
                if row[b] != 0.0 {
                    ata[a][b] += wa * row[b];
                }
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            ata[a][b] = ata[b][a];
        }
    }
    for d in 1..p {
        ata[d][d] += ridge;
    }
    solve_linear(ata, aty)
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        if diag.abs() < 1e-12 {
            continue;
        }
        for row in (col + 1)..n {
            let factor = a[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in (col + 1)..n {
            sum -= a[col][k] * x[k];
        }
        x[col] = if a[col][col].abs() < 1e-12 {
            0.0
        } else {
            sum / a[col][col]
        };
    }
    x
}
