//! The CLI's single configuration surface: one flat key-value file, with
//! every knob defaulted in [`AppConfig`]. Flags override file values.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::corpus::{CorpusConfig, LabelMap};
use crate::eval::SplitSpec;
use crate::ingest::{HeadingMatcher, TagClass};
use crate::models::TrainConfig;
use crate::text::{default_stoplist, parse_stoplist, NgramConfig};

use super::CliError;

/// Everything the CLI can be told, in one record.
#[derive(Debug, Clone)]
pub struct AppConfig {
    pub corpus: CorpusConfig,
    pub ngram: NgramConfig,
    pub train: TrainConfig,
    pub split: SplitSpec,
    /// Path to a one-term-per-line stopword file; the bundled English list
    /// when unset.
    pub stopwords_path: Option<PathBuf>,
    /// Heading patterns per tag (normalized at match time).
    pub headings_aei: Vec<String>,
    pub headings_tp: Vec<String>,
    pub headings_sp: Vec<String>,
    /// Surrogate explanation settings.
    pub surrogate_samples: usize,
    pub surrogate_kernel_width: f64,
    /// Highlight background colors per tag.
    pub color_aei: String,
    pub color_tp: String,
    pub color_sp: String,
}

impl Default for AppConfig {
    fn default() -> Self {
        let matcher = HeadingMatcher::default();
        let patterns_for = |tag: TagClass| {
            matcher
                .patterns()
                .iter()
                .filter(|(_, t)| *t == tag)
                .map(|(p, _)| p.clone())
                .collect()
        };
        AppConfig {
            corpus: CorpusConfig::default(),
            ngram: NgramConfig::default(),
            train: TrainConfig::default(),
            split: SplitSpec::default(),
            stopwords_path: None,
            headings_aei: patterns_for(TagClass::Aei),
            headings_tp: patterns_for(TagClass::Tp),
            headings_sp: patterns_for(TagClass::Sp),
            surrogate_samples: 1000,
            surrogate_kernel_width: 25.0,
            color_aei: "#c8e6c9".into(),
            color_tp: "#ffcdd2".into(),
            color_sp: "#e0e0e0".into(),
        }
    }
}

impl AppConfig {
    /// Load a config file and fold it over the defaults.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let contents = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = AppConfig::default();
        config.apply_file(&contents, path)?;
        Ok(config)
    }

    fn apply_file(&mut self, contents: &str, path: &Path) -> Result<(), CliError> {
        for (line_no, raw) in contents.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Runtime(format!(
                    "{}:{}: expected key = value, got {raw:?}",
                    path.display(),
                    line_no + 1
                )));
            };
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            self.set(key, value).map_err(|reason| {
                CliError::Runtime(format!("{}:{}: {reason}", path.display(), line_no + 1))
            })?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| format!("bad value for {key}: {e}"))
        }
        let patterns = |value: &str| -> Vec<String> {
            value
                .split('|')
                .map(|p| p.trim().to_string())
                .filter(|p| !p.is_empty())
                .collect()
        };
        match key {
            "min_word_count" => self.corpus.min_word_count = parse(key, value)?,
            "label_map" => self.corpus.label_map = parse_label_map(value)?,
            "balance" => self.corpus.balance = parse(key, value)?,
            "seed" => {
                let seed: u64 = parse(key, value)?;
                self.set_seed(seed);
            }
            "min_n" => self.ngram.min_n = parse(key, value)?,
            "max_n" => self.ngram.max_n = parse(key, value)?,
            "min_df" => self.ngram.min_df = parse(key, value)?,
            "max_vocab" => self.ngram.max_vocab = Some(parse(key, value)?),
            "stopwords" => self.stopwords_path = Some(PathBuf::from(value)),
            "epochs" => self.train.epochs = parse(key, value)?,
            "learning_rate" => self.train.learning_rate = parse(key, value)?,
            "l2_lambda" => self.train.l2_lambda = parse(key, value)?,
            "svm_c" => self.train.svm_c = parse(key, value)?,
            "nbsvm_beta" => self.train.nbsvm_beta = parse(key, value)?,
            "alpha" => self.train.alpha = parse(key, value)?,
            "n_trees" => self.train.n_trees = parse(key, value)?,
            "max_depth" => self.train.max_depth = parse(key, value)?,
            "test_fraction" => self.split.test_fraction = parse(key, value)?,
            "stratified" => self.split.stratified = parse(key, value)?,
            "headings_aei" => self.headings_aei = patterns(value),
            "headings_tp" => self.headings_tp = patterns(value),
            "headings_sp" => self.headings_sp = patterns(value),
            "surrogate_samples" => self.surrogate_samples = parse(key, value)?,
            "surrogate_kernel_width" => self.surrogate_kernel_width = parse(key, value)?,
            "color_aei" => self.color_aei = value.to_string(),
            "color_tp" => self.color_tp = value.to_string(),
            "color_sp" => self.color_sp = value.to_string(),
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// One seed drives every seeded stage.
    pub fn set_seed(&mut self, seed: u64) {
        self.corpus.seed = seed;
        self.train.seed = seed;
        self.split.seed = seed;
    }

    pub fn heading_matcher(&self) -> HeadingMatcher {
        let all = self
            .headings_aei
            .iter()
            .map(|p| (p.clone(), TagClass::Aei))
            .chain(self.headings_tp.iter().map(|p| (p.clone(), TagClass::Tp)))
            .chain(self.headings_sp.iter().map(|p| (p.clone(), TagClass::Sp)));
        HeadingMatcher::from_patterns(all)
    }

    pub fn stoplist(&self) -> Result<HashSet<String>, CliError> {
        match &self.stopwords_path {
            None => Ok(default_stoplist()),
            Some(path) => {
                let contents = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Runtime(format!("cannot read stopword file {}: {e}", path.display()))
                })?;
                Ok(parse_stoplist(&contents))
            }
        }
    }

    /// HTML background color for a label, via the tag it maps to.
    pub fn color_for_label(&self, label: u8) -> &str {
        match self.corpus.label_map.tag_for(label) {
            Some(TagClass::Aei) => &self.color_aei,
            Some(TagClass::Tp) => &self.color_tp,
            Some(TagClass::Sp) | None => &self.color_sp,
        }
    }
}

fn parse_label_map(value: &str) -> Result<LabelMap, String> {
    let mut map = LabelMap::default();
    for part in value.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some((tag, label)) = part.split_once(':') else {
            return Err(format!("label_map entries look like aei:1, got {part:?}"));
        };
        let label: u8 = label
            .trim()
            .parse()
            .map_err(|e| format!("bad label in label_map: {e}"))?;
        match tag.trim().to_ascii_lowercase().as_str() {
            "aei" => map.aei = label,
            "tp" => map.tp = label,
            "sp" => map.sp = label,
            other => return Err(format!("unknown tag {other:?} in label_map")),
        }
    }
    map.validate().map_err(|e| e.to_string())?;
    Ok(map)
}
