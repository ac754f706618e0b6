//! Classifiers over sparse n-gram features: Multinomial Naive Bayes,
//! logistic regression, linear SVM, NBSVM, and a shallow random forest,
//! plus the versioned model file format.

pub mod forest;
pub mod nb;
pub mod sgd;

pub use forest::{train_random_forest, ForestModel};
pub use nb::{log_count_ratio, train_mnb, train_nbsvm, NbRatio};
pub use sgd::{LossKind, SgdReport};

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{
    binarize_matrix, count_matrix, count_vector, idf_weights, tfidf_transform, tfidf_vector,
    DocTermMatrix, SparseVector,
};
use crate::rng::{derive_seed, DEFAULT_SEED};
use crate::text::{build_vocabulary, extract_features, NgramConfig, TextError, Vocabulary};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("smoothing parameter alpha must be positive, got {alpha}")]
    NonPositiveAlpha { alpha: f64 },
    #[error("class {label} has no training samples")]
    EmptyClass { label: u8 },
    #[error("no samples outside class {label}; need at least two classes")]
    EmptyRest { label: u8 },
    #[error("no training data")]
    NoTrainingData,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid training configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("model file version {found} is newer than supported version {supported}")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("corrupt model file: {reason}")]
    CorruptFile { reason: String },
    #[error("model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Text(#[from] TextError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mnb,
    Logreg,
    Svm,
    Nbsvm,
    Forest,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Mnb => "mnb",
            ModelKind::Logreg => "logreg",
            ModelKind::Svm => "svm",
            ModelKind::Nbsvm => "nbsvm",
            ModelKind::Forest => "forest",
        };
        f.write_str(s)
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mnb" => Ok(ModelKind::Mnb),
            "logreg" => Ok(ModelKind::Logreg),
            "svm" => Ok(ModelKind::Svm),
            "nbsvm" => Ok(ModelKind::Nbsvm),
            "forest" => Ok(ModelKind::Forest),
            other => Err(ModelError::InvalidConfig {
                reason: format!("unknown model kind {other:?}"),
            }),
        }
    }
}

/// How raw text features are turned into the vector a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Raw term counts (Naive Bayes).
    Counts,
    /// Smoothed idf weighting with L2 row normalization.
    Tfidf,
    /// Presence indicators.
    Binary,
    /// Presence indicators scaled per class by log-count ratios (NBSVM).
    NbScaled,
}

/// Hyperparameters shared by the trainers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Initial step size; decays as `1/sqrt(t)`.
    pub learning_rate: f64,
    /// L2 penalty for logistic regression.
    pub l2_lambda: f64,
    /// SVM cost; the effective L2 penalty is `1 / (svm_c * n)`.
    pub svm_c: f64,
    /// NBSVM interpolation toward the mean weight magnitude.
    pub nbsvm_beta: f64,
    /// Additive smoothing for Naive Bayes counts and log-count ratios.
    pub alpha: f64,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            learning_rate: 0.5,
            l2_lambda: 1e-4,
            svm_c: 1.0,
            nbsvm_beta: 0.25,
            alpha: 1.0,
            n_trees: 200,
            max_depth: 3,
            seed: DEFAULT_SEED,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: String| Err(ModelError::InvalidConfig { reason });
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !self.l2_lambda.is_finite() || self.l2_lambda < 0.0 {
            return fail(format!("l2_lambda must be non-negative, got {}", self.l2_lambda));
        }
        if !self.svm_c.is_finite() || self.svm_c <= 0.0 {
            return fail(format!("svm_c must be positive, got {}", self.svm_c));
        }
        if !(0.0..=1.0).contains(&self.nbsvm_beta) {
            return fail(format!("nbsvm_beta must be in [0, 1], got {}", self.nbsvm_beta));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(ModelError::NonPositiveAlpha { alpha: self.alpha });
        }
        if self.n_trees == 0 {
            return fail("n_trees must be at least 1".into());
        }
        Ok(())
    }
}

/// Per-class weight vectors and intercepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    /// Sorted label list; scores are reported in this order.
    pub classes: Vec<u8>,
    pub feature_mode: FeatureMode,
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    /// Per-class log-count ratio vectors (NBSVM only).
    pub nb_ratios: Option<Vec<Vec<f64>>>,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.first().map(|w| w.len()).unwrap_or(0)
    }

    /// Per-class decision scores in `classes` order.
    pub fn scores(&self, x: &SparseVector) -> Result<Vec<f64>, ModelError> {
        if x.dim() != self.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let scores = self
            .classes
            .iter()
            .enumerate()
            .map(|(ci, _)| {
                let w = &self.weights[ci];
                let dot = match (&self.feature_mode, &self.nb_ratios) {
                    (FeatureMode::NbScaled, Some(ratios)) => {
                        let r = &ratios[ci];
                        x.entries()
                            .iter()
                            .map(|&(j, v)| w[j as usize] * r[j as usize] * v)
                            .sum::<f64>()
                    }
                    _ => x.dot_dense(w),
                };
                dot + self.intercepts[ci]
            })
            .collect();
        Ok(scores)
    }

    /// Argmax label with ties broken by the lowest class index.
    pub fn predict(&self, x: &SparseVector) -> Result<(u8, Vec<f64>), ModelError> {
        let scores = self.scores(x)?;
        Ok((argmax_label(&self.classes, &scores), scores))
    }
}

pub(crate) fn argmax_label(classes: &[u8], scores: &[f64]) -> u8 {
    debug_assert_eq!(classes.len(), scores.len());
    let mut best = 0usize;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    classes[best]
}

/// Softmax with max subtraction; turns decision scores into a displayable
/// (uncalibrated) confidence distribution.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    if scores.is_empty() {
        return Vec::new();
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// The text-to-tokens settings a trained model carries with it, so that
/// prediction reproduces the training-time features exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "PipelineData", into = "PipelineData")]
pub struct PipelineSpec {
    ngram: NgramConfig,
    stopwords: Vec<String>,
    #[serde(skip)]
    stoplist: HashSet<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PipelineData {
    ngram: NgramConfig,
    stopwords: Vec<String>,
}

impl From<PipelineData> for PipelineSpec {
    fn from(d: PipelineData) -> Self {
        PipelineSpec::new(d.ngram, d.stopwords.into_iter().collect())
    }
}

impl From<PipelineSpec> for PipelineData {
    fn from(p: PipelineSpec) -> Self {
        PipelineData {
            ngram: p.ngram,
            stopwords: p.stopwords,
        }
    }
}

impl PipelineSpec {
    pub fn new(ngram: NgramConfig, stoplist: HashSet<String>) -> Self {
        let mut stopwords: Vec<String> = stoplist.iter().cloned().collect();
        stopwords.sort_unstable();
        PipelineSpec {
            ngram,
            stopwords,
            stoplist,
        }
    }

    pub fn ngram(&self) -> &NgramConfig {
        &self.ngram
    }

    pub fn stoplist(&self) -> &HashSet<String> {
        &self.stoplist
    }

    /// Text to n-gram features, exactly as at training time.
    pub fn features(&self, text: &str) -> Vec<String> {
        extract_features(text, &self.stoplist, &self.ngram)
    }
}

/// A trained classifier head.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classifier {
    Linear(LinearModel),
    Forest(ForestModel),
}

/// A complete trained model: preprocessing, vocabulary, optional idf table,
/// and the classifier head. This is the unit that is saved and loaded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnyModel {
    pub pipeline: PipelineSpec,
    pub vocabulary: Vocabulary,
    pub idf: Option<Vec<f64>>,
    pub classifier: Classifier,
}

impl AnyModel {
    pub fn kind(&self) -> ModelKind {
        match &self.classifier {
            Classifier::Linear(m) => m.kind,
            Classifier::Forest(_) => ModelKind::Forest,
        }
    }

    pub fn classes(&self) -> &[u8] {
        match &self.classifier {
            Classifier::Linear(m) => &m.classes,
            Classifier::Forest(m) => &m.classes,
        }
    }

    fn feature_mode(&self) -> FeatureMode {
        match &self.classifier {
            Classifier::Linear(m) => m.feature_mode,
            Classifier::Forest(_) => FeatureMode::Tfidf,
        }
    }

    /// Vectorize raw text under the model's pipeline, vocabulary and
    /// feature mode.
    pub fn vectorize(&self, text: &str) -> SparseVector {
        let grams = self.pipeline.features(text);
        let counts = count_vector(&grams, &self.vocabulary);
        match self.feature_mode() {
            FeatureMode::Counts => counts,
            FeatureMode::Tfidf => match &self.idf {
                Some(idf) => tfidf_vector(&counts, idf),
                None => counts,
            },
            FeatureMode::Binary | FeatureMode::NbScaled => crate::features::binarize(&counts),
        }
    }

    pub fn predict_features(&self, x: &SparseVector) -> Result<(u8, Vec<f64>), ModelError> {
        match &self.classifier {
            Classifier::Linear(m) => m.predict(x),
            Classifier::Forest(m) => m.predict(x),
        }
    }

    pub fn predict_text(&self, text: &str) -> Result<(u8, Vec<f64>), ModelError> {
        self.predict_features(&self.vectorize(text))
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        let bytes = self.to_bytes();
        std::fs::write(path, bytes).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let bytes = std::fs::read(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = serde_json::to_vec(self).expect("model serialization cannot fail");
        let mut bytes = Vec::with_capacity(payload.len() + 8);
        bytes.extend_from_slice(MODEL_MAGIC);
        bytes.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        bytes.extend_from_slice(&payload);
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        if bytes.len() < 8 {
            return Err(ModelError::CorruptFile {
                reason: format!("file of {} bytes is too short for the header", bytes.len()),
            });
        }
        if &bytes[0..4] != MODEL_MAGIC {
            return Err(ModelError::CorruptFile {
                reason: "bad magic header".into(),
            });
        }
        let version = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
        if version > MODEL_VERSION {
            return Err(ModelError::VersionMismatch {
                found: version,
                supported: MODEL_VERSION,
            });
        }
        serde_json::from_slice(&bytes[8..]).map_err(|e| ModelError::CorruptFile {
            reason: e.to_string(),
        })
    }
}

pub const MODEL_MAGIC: &[u8; 4] = b"PHLT";
pub const MODEL_VERSION: u32 = 1;

/// Save a model to the versioned `PHLT` container.
pub fn save_model(model: &AnyModel, path: &Path) -> Result<(), ModelError> {
    model.save(path)
}

/// Load a model saved by [`save_model`].
pub fn load_model(path: &Path) -> Result<AnyModel, ModelError> {
    AnyModel::load(path)
}

/// One-vs-rest L2-regularized logistic regression by seeded SGD.
pub fn train_logreg(
    tfidf: &DocTermMatrix,
    labels: &[u8],
    config: &TrainConfig,
) -> Result<(LinearModel, Vec<SgdReport>), ModelError> {
    train_ovr_linear(ModelKind::Logreg, LossKind::Logistic, tfidf, labels, config)
}

/// One-vs-rest L2-regularized hinge-loss linear classifier by seeded
/// subgradient descent.
pub fn train_linear_svm(
    tfidf: &DocTermMatrix,
    labels: &[u8],
    config: &TrainConfig,
) -> Result<(LinearModel, Vec<SgdReport>), ModelError> {
    train_ovr_linear(ModelKind::Svm, LossKind::Hinge, tfidf, labels, config)
}

fn train_ovr_linear(
    kind: ModelKind,
    loss: LossKind,
    features: &DocTermMatrix,
    labels: &[u8],
    config: &TrainConfig,
) -> Result<(LinearModel, Vec<SgdReport>), ModelError> {
    config.validate()?;
    if features.n_rows() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: features.n_rows(),
            got: labels.len(),
        });
    }
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.is_empty() {
        return Err(ModelError::NoTrainingData);
    }
    if classes.len() < 2 {
        return Err(ModelError::EmptyRest { label: classes[0] });
    }
    let lambda = match loss {
        LossKind::Logistic => config.l2_lambda,
        LossKind::Hinge => 1.0 / (config.svm_c * labels.len() as f64),
    };
    let mut weights = Vec::with_capacity(classes.len());
    let mut intercepts = Vec::with_capacity(classes.len());
    let mut reports = Vec::with_capacity(classes.len());
    for (class_index, &class) in classes.iter().enumerate() {
        let targets: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let (w, b, report) = sgd::train_binary(
            loss,
            features.rows(),
            &targets,
            features.dim(),
            config.learning_rate,
            config.epochs,
            lambda,
            derive_seed(config.seed, class_index as u64),
        );
        weights.push(w);
        intercepts.push(b);
        reports.push(report);
    }
    Ok((
        LinearModel {
            kind,
            classes,
            feature_mode: FeatureMode::Tfidf,
            weights,
            intercepts,
            nb_ratios: None,
        },
        reports,
    ))
}

/// Outcome of fitting a model on raw texts.
pub struct Trained {
    pub model: AnyModel,
    pub reports: Vec<SgdReport>,
}

/// Fit a model of the given kind on raw texts end to end: extract n-gram
/// features, build the vocabulary, vectorize per the kind's feature mode,
/// and train.
pub fn fit(
    kind: ModelKind,
    texts: &[&str],
    labels: &[u8],
    ngram: &NgramConfig,
    stoplist: &HashSet<String>,
    config: &TrainConfig,
) -> Result<Trained, ModelError> {
    ngram.validate()?;
    let pipeline = PipelineSpec::new(ngram.clone(), stoplist.clone());
    let documents: Vec<Vec<String>> = texts.iter().map(|t| pipeline.features(t)).collect();
    let vocabulary = build_vocabulary(&documents, ngram)?;
    fit_prepared(kind, documents, labels, pipeline, vocabulary, config)
}

/// Like [`fit`] but with a caller-supplied vocabulary (and thus idf table),
/// e.g. one built on a whole corpus before cross-validation.
pub fn fit_with_vocabulary(
    kind: ModelKind,
    texts: &[&str],
    labels: &[u8],
    ngram: &NgramConfig,
    stoplist: &HashSet<String>,
    vocabulary: Vocabulary,
    config: &TrainConfig,
) -> Result<Trained, ModelError> {
    ngram.validate()?;
    let pipeline = PipelineSpec::new(ngram.clone(), stoplist.clone());
    let documents: Vec<Vec<String>> = texts.iter().map(|t| pipeline.features(t)).collect();
    fit_prepared(kind, documents, labels, pipeline, vocabulary, config)
}

fn fit_prepared(
    kind: ModelKind,
    documents: Vec<Vec<String>>,
    labels: &[u8],
    pipeline: PipelineSpec,
    vocabulary: Vocabulary,
    config: &TrainConfig,
) -> Result<Trained, ModelError> {
    config.validate()?;
    if documents.len() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: documents.len(),
            got: labels.len(),
        });
    }
    let counts = count_matrix(&documents, &vocabulary);

    let (classifier, idf, reports) = match kind {
        ModelKind::Mnb => {
            let model = train_mnb(&counts, labels, config.alpha)?;
            (Classifier::Linear(model), None, Vec::new())
        }
        ModelKind::Logreg => {
            let tfidf = tfidf_transform(&counts, &vocabulary);
            let (model, reports) = train_logreg(&tfidf, labels, config)?;
            (
                Classifier::Linear(model),
                Some(idf_weights(&vocabulary)),
                reports,
            )
        }
        ModelKind::Svm => {
            let tfidf = tfidf_transform(&counts, &vocabulary);
            let (model, reports) = train_linear_svm(&tfidf, labels, config)?;
            (
                Classifier::Linear(model),
                Some(idf_weights(&vocabulary)),
                reports,
            )
        }
        ModelKind::Nbsvm => {
            let binary = binarize_matrix(&counts);
            let (model, reports) = train_nbsvm(&binary, labels, config)?;
            (Classifier::Linear(model), None, reports)
        }
        ModelKind::Forest => {
            let tfidf = tfidf_transform(&counts, &vocabulary);
            let model = train_random_forest(&tfidf, labels, config)?;
            (
                Classifier::Forest(model),
                Some(idf_weights(&vocabulary)),
                Vec::new(),
            )
        }
    };

    Ok(Trained {
        model: AnyModel {
            pipeline,
            vocabulary,
            idf,
            classifier,
        },
        reports,
    })
}
