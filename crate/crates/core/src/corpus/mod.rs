//! Corpus construction: labeling, filtering, deduplication, class
//! balancing, and the CSV persistence format.

mod stats;

pub use stats::{compute_stats, CorpusStats, TokenSummary, TrigramCount};

use std::collections::HashSet;
use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{SegmentRecord, TagClass};
use crate::rng::{derive_seed, rng_from, DEFAULT_SEED};
use crate::text::{normalize, tokenize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("class {label} has no samples; cannot balance")]
    EmptyClass { label: u8 },
    #[error("corpus file {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus file {path}: {source}")]
    CsvFailure {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("corpus file {path}: expected header doc_num,title,text,label, found {found:?}")]
    SchemaMismatch { path: String, found: Vec<String> },
    #[error("corpus file {path} row {row}: label {value:?} is not one of 0, 1, 2")]
    BadLabel {
        path: String,
        row: usize,
        value: String,
    },
    #[error("label map {aei}/{tp}/{sp} is not a bijection onto {{0, 1, 2}}")]
    BadLabelMap { aei: u8, tp: u8, sp: u8 },
}

/// Tag-to-label assignment. Must be a bijection onto `{0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub aei: u8,
    pub tp: u8,
    pub sp: u8,
}

impl Default for LabelMap {
    fn default() -> Self {
        // Neutral boilerplate gets 0, effects 1, problems 2.
        LabelMap {
            aei: 1,
            tp: 2,
            sp: 0,
        }
    }
}

impl LabelMap {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut seen = [false; 3];
        for label in [self.aei, self.tp, self.sp] {
            if label > 2 || seen[label as usize] {
                return Err(CorpusError::BadLabelMap {
                    aei: self.aei,
                    tp: self.tp,
                    sp: self.sp,
                });
            }
            seen[label as usize] = true;
        }
        Ok(())
    }

    pub fn label_for(&self, tag: TagClass) -> u8 {
        match tag {
            TagClass::Aei => self.aei,
            TagClass::Tp => self.tp,
            TagClass::Sp => self.sp,
        }
    }

    pub fn tag_for(&self, label: u8) -> Option<TagClass> {
        TagClass::ALL.into_iter().find(|&t| self.label_for(t) == label)
    }
}

/// Knobs for corpus construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusConfig {
    /// Samples with fewer whitespace tokens than this (after normalization,
    /// before stopword removal) are dropped.
    pub min_word_count: usize,
    pub label_map: LabelMap,
    /// Downsample every class to the smallest class size.
    pub balance: bool,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            min_word_count: 10,
            label_map: LabelMap::default(),
            balance: true,
            seed: DEFAULT_SEED,
        }
    }
}

/// One labeled text record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub doc_number: String,
    pub title: String,
    pub text: String,
    pub label: u8,
    /// Number of paragraphs the text was joined from; 0 when read back from
    /// a corpus file, which does not persist it.
    pub paragraph_count: usize,
    /// Grant year; 0 when read back from a corpus file.
    pub year: i32,
}

/// An ordered collection of samples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub samples: Vec<Sample>,
}

impl Corpus {
    pub fn new(samples: Vec<Sample>) -> Self {
        Corpus { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn per_class_counts(&self) -> BTreeMap<u8, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            *counts.entry(s.label).or_insert(0) += 1;
        }
        counts
    }
}

/// Turn tagged segments into labeled samples.
///
/// Segments with at least one paragraph become one sample each; the text is
/// the paragraphs joined by a single space.
pub fn build_samples(records: &[SegmentRecord], config: &CorpusConfig) -> Vec<Sample> {
    records
        .iter()
        .filter(|r| !r.paragraphs.is_empty())
        .map(|r| Sample {
            doc_number: r.doc_number.clone(),
            title: r.title.clone(),
            text: r.paragraphs.join(" "),
            label: config.label_map.label_for(r.tag),
            paragraph_count: r.paragraphs.len(),
            year: r.year,
        })
        .collect()
}

/// Counts of samples removed by each filter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub removed_null: usize,
    pub removed_short: usize,
}

/// Drop null/empty texts and texts shorter than `min_word_count` tokens.
/// The output is a subsequence of the input.
pub fn filter_samples(samples: Vec<Sample>, config: &CorpusConfig) -> (Vec<Sample>, FilterReport) {
    let mut report = FilterReport::default();
    let kept = samples
        .into_iter()
        .filter(|s| {
            let norm = normalize(&s.text);
            if norm.is_empty() {
                report.removed_null += 1;
                return false;
            }
            if tokenize(&norm).len() < config.min_word_count {
                report.removed_short += 1;
                return false;
            }
            true
        })
        .collect();
    (kept, report)
}

/// Duplicates removed per class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DedupReport {
    pub per_class: BTreeMap<u8, usize>,
}

impl DedupReport {
    pub fn total(&self) -> usize {
        self.per_class.values().sum()
    }
}

/// Keep the first of every group of samples whose normalized text is
/// byte-identical, preserving input order. Idempotent.
pub fn deduplicate(samples: Vec<Sample>) -> (Vec<Sample>, DedupReport) {
    let mut seen: HashSet<String> = HashSet::with_capacity(samples.len());
    let mut report = DedupReport::default();
    let kept = samples
        .into_iter()
        .filter(|s| {
            if seen.insert(normalize(&s.text)) {
                true
            } else {
                *report.per_class.entry(s.label).or_insert(0) += 1;
                false
            }
        })
        .collect();
    (kept, report)
}

/// Downsample every class, without replacement, to the smallest class size.
///
/// Selection is driven by the seeded generator; survivors keep their input
/// order. With `balance` unset this is the identity.
pub fn balance(corpus: Corpus, config: &CorpusConfig) -> Result<Corpus, CorpusError> {
    config.label_map.validate()?;
    if !config.balance {
        return Ok(corpus);
    }
    let mut per_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for label in 0..3u8 {
        per_class.insert(label, Vec::new());
    }
    for (i, s) in corpus.samples.iter().enumerate() {
        per_class.entry(s.label).or_default().push(i);
    }
    let target = per_class
        .iter()
        .map(|(&label, idx)| {
            if idx.is_empty() {
                Err(CorpusError::EmptyClass { label })
            } else {
                Ok(idx.len())
            }
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .min()
        .unwrap_or(0);

    let mut keep: Vec<usize> = Vec::with_capacity(target * per_class.len());
    for (&label, indices) in &per_class {
        if indices.len() == target {
            keep.extend_from_slice(indices);
            continue;
        }
        let mut rng = rng_from(derive_seed(config.seed, label as u64));
        let chosen = sample_indices(&mut rng, indices.len(), target);
        keep.extend(chosen.into_iter().map(|i| indices[i]));
    }
    keep.sort_unstable();
    let mut samples = corpus.samples;
    let mut keep_iter = keep.into_iter().peekable();
    let filtered = samples
        .drain(..)
        .enumerate()
        .filter_map(|(i, s)| {
            if keep_iter.peek() == Some(&i) {
                keep_iter.next();
                Some(s)
            } else {
                None
            }
        })
        .collect();
    Ok(Corpus::new(filtered))
}

const CORPUS_HEADER: [&str; 4] = ["doc_num", "title", "text", "label"];

/// Write the corpus as UTF-8 CSV with header `doc_num,title,text,label`.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(&display, e))?;
    writer
        .write_record(CORPUS_HEADER)
        .map_err(|e| csv_err(&display, e))?;
    for s in &corpus.samples {
        writer
            .write_record([
                s.doc_number.as_str(),
                s.title.as_str(),
                s.text.as_str(),
                &s.label.to_string(),
            ])
            .map_err(|e| csv_err(&display, e))?;
    }
    writer.flush().map_err(|e| CorpusError::IoFailure {
        path: display,
        source: e,
    })?;
    Ok(())
}

/// Read a corpus file written by [`write_corpus`].
///
/// `paragraph_count` and `year` are not part of the file schema and come
/// back as 0.
pub fn read_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err(&display, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(&display, e))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if header != CORPUS_HEADER {
        return Err(CorpusError::SchemaMismatch {
            path: display,
            found: header,
        });
    }
    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(&display, e))?;
        let value = record.get(3).unwrap_or("").to_string();
        let label: u8 = value
            .parse()
            .ok()
            .filter(|l| *l <= 2)
            .ok_or_else(|| CorpusError::BadLabel {
                path: display.clone(),
                row: row + 2,
                value,
            })?;
        samples.push(Sample {
            doc_number: record.get(0).unwrap_or("").to_string(),
            title: record.get(1).unwrap_or("").to_string(),
            text: record.get(2).unwrap_or("").to_string(),
            label,
            paragraph_count: 0,
            year: 0,
        });
    }
    Ok(Corpus::new(samples))
}

fn csv_err(path: &str, e: csv::Error) -> CorpusError {
    CorpusError::CsvFailure {
        path: path.to_string(),
        source: e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(doc: &str, tag: TagClass, paragraphs: &[&str]) -> SegmentRecord {
        SegmentRecord {
            doc_number: doc.to_string(),
            title: format!("{doc} title"),
            tag,
            paragraphs: paragraphs.iter().map(|p| p.to_string()).collect(),
            year: 2020,
        }
    }

    fn sample(doc: &str, text: &str, label: u8) -> Sample {
        Sample {
            doc_number: doc.to_string(),
            title: String::new(),
            text: text.to_string(),
            label,
            paragraph_count: 1,
            year: 2020,
        }
    }

    #[test]
    fn build_samples_joins_and_labels() {
        let cfg = CorpusConfig::default();
        let out = build_samples(&[record("US1", TagClass::Aei, &["a", "b"])], &cfg);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].label, 1);
        assert_eq!(out[0].text, "a b");
        assert_eq!(out[0].paragraph_count, 2);
    }

    #[test]
    fn build_samples_drops_empty_segments() {
        let cfg = CorpusConfig::default();
        let out = build_samples(&[record("US1", TagClass::Tp, &[])], &cfg);
        assert!(out.is_empty());
    }

    #[test]
    fn build_samples_one_per_segment() {
        let cfg = CorpusConfig::default();
        let out = build_samples(
            &[
                record("US1", TagClass::Aei, &["x"]),
                record("US1", TagClass::Sp, &["y"]),
            ],
            &cfg,
        );
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].doc_number, out[1].doc_number);
        assert_eq!(out[0].label, 1);
        assert_eq!(out[1].label, 0);
    }

    #[test]
    fn filter_drops_short_keeps_boundary() {
        let cfg = CorpusConfig::default();
        let nine = sample("a", "one two three four five six seven eight nine", 0);
        let ten = sample("b", "one two three four five six seven eight nine ten", 1);
        let (kept, report) = filter_samples(vec![nine, ten.clone()], &cfg);
        assert_eq!(kept, vec![ten]);
        assert_eq!(report.removed_short, 1);
        assert_eq!(report.removed_null, 0);
    }

    #[test]
    fn filter_drops_empty_text() {
        let cfg = CorpusConfig::default();
        let (kept, report) = filter_samples(vec![sample("a", "", 0), sample("b", "  , ! 42 ", 1)], &cfg);
        assert!(kept.is_empty());
        assert_eq!(report.removed_null, 2);
    }

    #[test]
    fn dedup_keeps_first_of_identical_texts() {
        let a = sample("US10516895B2", "the same tagged content", 2);
        let b = sample("US9866861B2", "The same tagged CONTENT!", 2);
        let (kept, report) = deduplicate(vec![a.clone(), b]);
        assert_eq!(kept, vec![a]);
        assert_eq!(report.per_class.get(&2), Some(&1));
    }

    #[test]
    fn dedup_passes_unique_input_through() {
        let input = vec![sample("a", "one", 0), sample("b", "two", 1)];
        let (kept, report) = deduplicate(input.clone());
        assert_eq!(kept, input);
        assert_eq!(report.total(), 0);
    }

    #[test]
    fn dedup_counts_extra_copies() {
        let input = vec![
            sample("a", "same", 0),
            sample("b", "same", 0),
            sample("c", "same", 0),
        ];
        let (kept, report) = deduplicate(input);
        assert_eq!(kept.len(), 1);
        assert_eq!(report.total(), 2);
    }

    #[test]
    fn balance_downsamples_to_min_class() {
        let mut samples = Vec::new();
        for i in 0..5 {
            samples.push(sample(&format!("a{i}"), &format!("text zero {i}"), 0));
        }
        for i in 0..3 {
            samples.push(sample(&format!("b{i}"), &format!("text one {i}"), 1));
        }
        for i in 0..4 {
            samples.push(sample(&format!("c{i}"), &format!("text two {i}"), 2));
        }
        let cfg = CorpusConfig::default();
        let balanced = balance(Corpus::new(samples.clone()), &cfg).unwrap();
        let counts = balanced.per_class_counts();
        assert_eq!(counts.get(&0), Some(&3));
        assert_eq!(counts.get(&1), Some(&3));
        assert_eq!(counts.get(&2), Some(&3));
        // same seed, same selection
        let again = balance(Corpus::new(samples), &cfg).unwrap();
        assert_eq!(balanced, again);
        // every survivor existed in the input
        for s in &balanced.samples {
            assert!(again.samples.contains(s));
        }
    }

    #[test]
    fn balance_of_equal_classes_is_identity() {
        let samples = vec![
            sample("a", "x0", 0),
            sample("b", "x1", 1),
            sample("c", "x2", 2),
        ];
        let cfg = CorpusConfig::default();
        let out = balance(Corpus::new(samples.clone()), &cfg).unwrap();
        assert_eq!(out.samples, samples);
    }

    #[test]
    fn balance_errors_on_empty_class() {
        let samples = vec![sample("a", "x", 0), sample("b", "y", 1)];
        let cfg = CorpusConfig::default();
        assert!(matches!(
            balance(Corpus::new(samples), &cfg),
            Err(CorpusError::EmptyClass { label: 2 })
        ));
    }

    #[test]
    fn balance_disabled_is_identity() {
        let samples = vec![sample("a", "x", 0), sample("b", "y", 0)];
        let cfg = CorpusConfig {
            balance: false,
            ..CorpusConfig::default()
        };
        let out = balance(Corpus::new(samples.clone()), &cfg).unwrap();
        assert_eq!(out.samples, samples);
    }

    #[test]
    fn corpus_round_trips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.csv");
        let corpus = Corpus::new(vec![
            sample("US1", "plain text", 0),
            sample("US2", "comma, quote \" and\nnewline", 1),
            sample("US3", "third", 2),
        ]);
        write_corpus(&corpus, &path).unwrap();
        let back = read_corpus(&path).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in corpus.samples.iter().zip(&back.samples) {
            assert_eq!(a.doc_number, b.doc_number);
            assert_eq!(a.title, b.title);
            assert_eq!(a.text, b.text);
            assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn read_corpus_rejects_bad_label() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.csv");
        std::fs::write(&path, "doc_num,title,text,label\nUS1,t,x,5\n").unwrap();
        assert!(matches!(
            read_corpus(&path),
            Err(CorpusError::BadLabel { .. })
        ));
    }

    #[test]
    fn read_corpus_rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.csv");
        std::fs::write(&path, "id,title,text,label\nUS1,t,x,1\n").unwrap();
        assert!(matches!(
            read_corpus(&path),
            Err(CorpusError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn label_map_must_be_bijection() {
        assert!(LabelMap::default().validate().is_ok());
        assert!(LabelMap { aei: 1, tp: 1, sp: 0 }.validate().is_err());
        assert!(LabelMap { aei: 3, tp: 2, sp: 0 }.validate().is_err());
    }

    prop_compose! {
        fn arb_sample()(doc in "[a-z]{1,4}", text in "[a-z ]{0,30}", label in 0u8..3) -> Sample {
            Sample { doc_number: doc, title: String::new(), text, label, paragraph_count: 1, year: 2020 }
        }
    }

    proptest! {
        #[test]
        fn dedup_is_idempotent(samples in proptest::collection::vec(arb_sample(), 0..24)) {
            let (once, _) = deduplicate(samples);
            let (twice, report) = deduplicate(once.clone());
            prop_assert_eq!(once, twice);
            prop_assert_eq!(report.total(), 0);
        }

        #[test]
        fn filter_output_is_subsequence(samples in proptest::collection::vec(arb_sample(), 0..24), min in 0usize..6) {
            let cfg = CorpusConfig { min_word_count: min, ..CorpusConfig::default() };
            let (kept, report) = filter_samples(samples.clone(), &cfg);
            prop_assert_eq!(kept.len() + report.removed_null + report.removed_short, samples.len());
            // subsequence check
            let mut it = samples.iter();
            for k in &kept {
                prop_assert!(it.any(|s| s == k));
            }
        }

        #[test]
        fn csv_round_trips_awkward_text(
            rows in proptest::collection::vec(("[a-z]{1,6}", "[a-zA-Z0-9 ,\"\n.!?-]{0,40}", 0u8..3), 1..8)
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("c.csv");
            let corpus = Corpus::new(
                rows.iter()
                    .map(|(doc, text, label)| Sample {
                        doc_number: doc.clone(),
                        title: format!("{doc} title"),
                        text: text.clone(),
                        label: *label,
                        paragraph_count: 1,
                        year: 2020,
                    })
                    .collect(),
            );
            write_corpus(&corpus, &path).unwrap();
            let back = read_corpus(&path).unwrap();
            prop_assert_eq!(back.len(), corpus.len());
            for (a, b) in corpus.samples.iter().zip(&back.samples) {
                prop_assert_eq!(&a.doc_number, &b.doc_number);
                prop_assert_eq!(&a.title, &b.title);
                prop_assert_eq!(&a.text, &b.text);
                prop_assert_eq!(a.label, b.label);
            }
        }
    }
}
