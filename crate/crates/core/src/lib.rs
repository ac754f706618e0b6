//! Patent paragraph highlighting toolkit.
//!
//! Mines the tagged "advantageous effects / technical problem / solution"
//! sections out of USPTO full-text grant XML, builds a balanced labeled
//! corpus, trains sparse linear classifiers over n-gram features, and
//! highlights or explains predictions on new documents.
//!
//! ```
//! use phlt::models::{fit, ModelKind, TrainConfig};
//! use phlt::text::{default_stoplist, NgramConfig};
//!
//! let corpus = phlt::synthetic::generate_corpus(20, 42);
//! let texts: Vec<&str> = corpus.samples.iter().map(|s| s.text.as_str()).collect();
//! let labels: Vec<u8> = corpus.samples.iter().map(|s| s.label).collect();
//!
//! let trained = fit(
//!     ModelKind::Nbsvm,
//!     &texts,
//!     &labels,
//!     &NgramConfig::default(),
//!     &default_stoplist(),
//!     &TrainConfig::default(),
//! )?;
//!
//! let (label, scores) = trained
//!     .model
//!     .predict_text("according to the present invention the advantage is improved efficiency")?;
//! assert_eq!(label, 1);
//! assert_eq!(scores.len(), 3);
//! # Ok::<(), phlt::models::ModelError>(())
//! ```

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod explain;
pub mod features;
pub mod ingest;
pub mod models;
pub mod rng;
pub mod synthetic;
pub mod text;

pub use corpus::{Corpus, CorpusConfig, Sample};
pub use features::{DocTermMatrix, SparseVector};
pub use ingest::{GrantDocument, HeadingMatcher, RawBulkFile, TagClass, TaggedSegment};
pub use models::{AnyModel, LinearModel, ModelKind, TrainConfig};
pub use text::{NgramConfig, Vocabulary};
