//! Command implementations behind the `phlt` binary: corpus building,
//! statistics, training, cross-validation, highlighting and explanation.
//!
//! Commands are functions from arguments to a printable report so they can
//! be exercised directly in tests; the binary only parses flags and picks
//! exit codes. Every command is deterministic given its inputs and seed.

pub mod config;
pub mod html;

pub use config::AppConfig;

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{
    balance, build_samples, compute_stats, deduplicate, filter_samples, read_corpus, write_corpus,
    Corpus, CorpusError,
};
use crate::eval::{
    cross_validate, evaluate_with_classes, stratified_split, train_test_split, CvOutcome,
    EvalError,
};
use crate::explain::{
    linear_attribution, surrogate_explain, ExplainError, Explanation, SurrogateConfig,
};
use crate::ingest::{find_bulk_files, ingest_bulk_file, parse_grant, BodyElement, IngestError, RawBulkFile};
use crate::models::{fit, fit_with_vocabulary, load_model, softmax, AnyModel, ModelError, ModelKind, PipelineSpec};
use crate::text::build_vocabulary;

/// Failures split by exit code: usage errors exit 2, runtime errors exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

macro_rules! runtime_from {
    ($($err:ty),+) => {
        $(impl From<$err> for CliError {
            fn from(e: $err) -> Self {
                CliError::Runtime(e.to_string())
            }
        })+
    };
}

runtime_from!(IngestError, CorpusError, ModelError, EvalError, ExplainError, std::io::Error);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Html,
}

/// One classified unit of a highlighted document.
#[derive(Debug, Clone, Serialize)]
pub struct AnnotatedParagraph {
    pub text: String,
    pub label: u8,
    /// Raw decision scores, in the model's class order.
    pub scores: Vec<f64>,
    /// Softmax-normalized top score; uncalibrated.
    pub confidence: f64,
}

#[derive(Debug, Serialize)]
pub struct HighlightOutput {
    pub classes: Vec<u8>,
    pub paragraphs: Vec<AnnotatedParagraph>,
}

/// Build a corpus from a directory of USPTO bulk files and write it as CSV.
///
/// Prints per-pattern heading hits, per-year label counts before filtering,
/// each filter's removal count, dedup counts per class, and the final class
/// balance.
pub fn cmd_build_corpus(
    input_dir: &Path,
    config: &AppConfig,
    output: &Path,
    dump_segments: Option<&Path>,
) -> Result<String, CliError> {
    let files = find_bulk_files(input_dir)?;
    if files.is_empty() {
        return Err(CliError::Runtime(format!(
            "no bulk files found in {} (expected ipg*.xml or ipg*.zip)",
            input_dir.display()
        )));
    }
    let matcher = config.heading_matcher();
    let mut records = Vec::new();
    let mut pattern_hits: BTreeMap<String, usize> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut grants_seen = 0usize;
    for path in &files {
        let file = RawBulkFile::from_path(path)?;
        let outcome = ingest_bulk_file(&file, &matcher)?;
        grants_seen += outcome.grants_seen;
        for (pattern, count) in outcome.pattern_hits {
            *pattern_hits.entry(pattern).or_insert(0) += count;
        }
        warnings.extend(outcome.warnings);
        records.extend(outcome.records);
    }

    if let Some(dump_path) = dump_segments {
        let mut file = std::fs::File::create(dump_path)?;
        for record in &records {
            let line = serde_json::to_string(record)
                .map_err(|e| CliError::Runtime(format!("segment dump: {e}")))?;
            writeln!(file, "{line}")?;
        }
    }

    let samples = build_samples(&records, &config.corpus);
    let mut yearly: BTreeMap<i32, BTreeMap<u8, usize>> = BTreeMap::new();
    for s in &samples {
        *yearly.entry(s.year).or_default().entry(s.label).or_insert(0) += 1;
    }
    let (kept, filter_report) = filter_samples(samples, &config.corpus);
    let (kept, dedup_report) = deduplicate(kept);
    let corpus = balance(Corpus::new(kept), &config.corpus)?;
    write_corpus(&corpus, output)?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "scanned {} bulk file(s): {} grants, {} tagged segments",
        files.len(),
        grants_seen,
        records.len()
    );
    out.push_str("heading pattern hits:\n");
    for (pattern, count) in &pattern_hits {
        let _ = writeln!(out, "  {pattern}: {count}");
    }
    out.push_str("labels generated per year (before filtering):\n");
    for (year, counts) in &yearly {
        let _ = write!(out, "  {year}:");
        for (label, count) in counts {
            let _ = write!(out, " label {label}: {count}");
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "filter removals: null/empty {}, shorter than {} words {}",
        filter_report.removed_null, config.corpus.min_word_count, filter_report.removed_short
    );
    let _ = write!(out, "duplicates removed:");
    for label in 0..3u8 {
        let _ = write!(
            out,
            " label {label}: {}",
            dedup_report.per_class.get(&label).copied().unwrap_or(0)
        );
    }
    out.push('\n');
    let _ = write!(out, "final class counts:");
    for (label, count) in corpus.per_class_counts() {
        let _ = write!(out, " label {label}: {count}");
    }
    out.push('\n');
    let _ = writeln!(out, "wrote {} rows to {}", corpus.len(), output.display());
    for w in &warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    Ok(out)
}

/// Corpus statistics as a text table or JSON document.
pub fn cmd_stats(
    corpus_path: &Path,
    config: &AppConfig,
    format: OutputFormat,
    json_out: Option<&Path>,
) -> Result<String, CliError> {
    let corpus = read_corpus(corpus_path)?;
    if corpus.is_empty() {
        return Err(CliError::Runtime(format!(
            "corpus {} has no rows",
            corpus_path.display()
        )));
    }
    let stats = compute_stats(&corpus, &config.stoplist()?, 10);
    let json = serde_json::to_string_pretty(&stats)
        .map_err(|e| CliError::Runtime(format!("stats serialization: {e}")))?;
    if let Some(path) = json_out {
        std::fs::write(path, &json)?;
    }
    match format {
        OutputFormat::Json => Ok(json),
        OutputFormat::Text => Ok(stats.render_text()),
        OutputFormat::Html => Err(CliError::Usage("stats supports json or text output".into())),
    }
}

/// Split, train, persist the model, and report held-out metrics.
pub fn cmd_train(
    corpus_path: &Path,
    kind: ModelKind,
    config: &AppConfig,
    model_out: &Path,
    format: OutputFormat,
) -> Result<String, CliError> {
    let corpus = read_corpus(corpus_path)?;
    if corpus.len() < 2 {
        return Err(CliError::Runtime(format!(
            "corpus {} has {} rows; need at least 2 to split",
            corpus_path.display(),
            corpus.len()
        )));
    }
    let labels: Vec<u8> = corpus.samples.iter().map(|s| s.label).collect();
    let (train_idx, test_idx) = if config.split.stratified {
        stratified_split(&labels, &config.split)?
    } else {
        train_test_split(corpus.len(), &config.split)?
    };
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(CliError::Runtime(
            "split produced an empty train or test set; adjust test_fraction".into(),
        ));
    }
    let train_texts: Vec<&str> = train_idx.iter().map(|&i| corpus.samples[i].text.as_str()).collect();
    let train_labels: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
    let stoplist = config.stoplist()?;
    let trained = fit(
        kind,
        &train_texts,
        &train_labels,
        &config.ngram,
        &stoplist,
        &config.train,
    )?;
    trained.model.save(model_out)?;

    let gold: Vec<u8> = test_idx.iter().map(|&i| labels[i]).collect();
    let predicted: Vec<u8> = test_idx
        .iter()
        .map(|&i| {
            trained
                .model
                .predict_text(&corpus.samples[i].text)
                .map(|(label, _)| label)
        })
        .collect::<Result<_, _>>()?;
    let mut classes: Vec<u8> = labels.clone();
    classes.sort_unstable();
    classes.dedup();
    let report = evaluate_with_classes(&gold, &predicted, &classes)?;

    if format == OutputFormat::Html {
        return Err(CliError::Usage("train reports text or json output".into()));
    }
    if format == OutputFormat::Json {
        return serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Runtime(format!("report serialization: {e}")));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "trained {kind} on {} samples ({} features), tested on {}",
        train_idx.len(),
        trained.model.vocabulary.len(),
        test_idx.len()
    );
    for (i, r) in trained.reports.iter().enumerate() {
        if !r.converged {
            let _ = writeln!(
                out,
                "note: classifier {i} did not converge (final objective {:.6})",
                r.final_objective
            );
        }
    }
    let _ = writeln!(out, "model written to {}", model_out.display());
    out.push_str(&report.render_text());
    Ok(out)
}

/// K-fold cross-validation report.
///
/// With `global_features` the vocabulary and idf table are built once on the
/// full corpus (features leak across folds); the default rebuilds them
/// inside every fold.
pub fn cmd_eval(
    corpus_path: &Path,
    kind: ModelKind,
    folds: usize,
    config: &AppConfig,
    global_features: bool,
    format: OutputFormat,
) -> Result<String, CliError> {
    if folds < 2 {
        return Err(CliError::Usage(format!("--folds must be at least 2, got {folds}")));
    }
    if format == OutputFormat::Html {
        return Err(CliError::Usage("eval reports text or json output".into()));
    }
    let corpus = read_corpus(corpus_path)?;
    let labels: Vec<u8> = corpus.samples.iter().map(|s| s.label).collect();
    if labels.len() < folds {
        return Err(CliError::Runtime(format!(
            "corpus has {} rows, fewer than {folds} folds",
            labels.len()
        )));
    }
    let texts: Vec<&str> = corpus.samples.iter().map(|s| s.text.as_str()).collect();
    let stoplist = config.stoplist()?;

    let outcome: CvOutcome = if global_features {
        let pipeline = PipelineSpec::new(config.ngram.clone(), stoplist.clone());
        let documents: Vec<Vec<String>> = texts.iter().map(|t| pipeline.features(t)).collect();
        let vocabulary = build_vocabulary(&documents, &config.ngram).map_err(ModelError::from)?;
        cross_validate(
            &labels,
            folds,
            config.split.seed,
            |train_idx| {
                let fold_texts: Vec<&str> = train_idx.iter().map(|&i| texts[i]).collect();
                let fold_labels: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
                fit_with_vocabulary(
                    kind,
                    &fold_texts,
                    &fold_labels,
                    &config.ngram,
                    &stoplist,
                    vocabulary.clone(),
                    &config.train,
                )
                .map(|t| t.model)
            },
            |model: &AnyModel, i| {
                model
                    .predict_text(texts[i])
                    .map(|(label, _)| label)
                    .expect("prediction dimension matches the trained vocabulary")
            },
        )?
    } else {
        cross_validate(
            &labels,
            folds,
            config.split.seed,
            |train_idx| {
                let fold_texts: Vec<&str> = train_idx.iter().map(|&i| texts[i]).collect();
                let fold_labels: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
                fit(
                    kind,
                    &fold_texts,
                    &fold_labels,
                    &config.ngram,
                    &stoplist,
                    &config.train,
                )
                .map(|t| t.model)
            },
            |model: &AnyModel, i| {
                model
                    .predict_text(texts[i])
                    .map(|(label, _)| label)
                    .expect("prediction dimension matches the trained vocabulary")
            },
        )?
    };

    if format == OutputFormat::Json {
        return serde_json::to_string_pretty(&outcome)
            .map_err(|e| CliError::Runtime(format!("report serialization: {e}")));
    }
    let mut out = format!("{kind}: {}", outcome.render_text());
    out.push_str("mean of per-fold reports; per-fold details follow\n");
    for (i, fold) in outcome.folds.iter().enumerate() {
        let _ = writeln!(out, "fold {i}: accuracy {:.4}", fold.accuracy);
    }
    Ok(out)
}

fn split_paragraphs(content: &str) -> Vec<String> {
    let mut paragraphs = Vec::new();
    let mut current = String::new();
    for line in content.lines() {
        if line.trim().is_empty() {
            if !current.trim().is_empty() {
                paragraphs.push(current.trim().to_string());
            }
            current.clear();
        } else {
            if !current.is_empty() {
                current.push(' ');
            }
            current.push_str(line.trim());
        }
    }
    if !current.trim().is_empty() {
        paragraphs.push(current.trim().to_string());
    }
    paragraphs
}

/// Period/question/exclamation splitter for `--sentences` mode.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        current.push(ch);
        if matches!(ch, '.' | '?' | '!') {
            let trimmed = current.trim();
            if !trimmed.is_empty() {
                sentences.push(trimmed.to_string());
            }
            current.clear();
        }
    }
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        sentences.push(trimmed.to_string());
    }
    sentences
}

fn looks_like_grant_xml(content: &str) -> bool {
    let head = content.trim_start();
    head.starts_with("<?xml") || head.starts_with("<us-patent-grant")
}

/// Split input into units (paragraphs or sentences) and classify each one.
pub fn annotate_content(
    model: &AnyModel,
    content: &str,
    sentences: bool,
) -> Result<Vec<AnnotatedParagraph>, CliError> {
    if content.trim().is_empty() {
        return Err(CliError::Runtime("empty input: nothing to highlight".into()));
    }
    let paragraphs: Vec<String> = if looks_like_grant_xml(content) {
        parse_grant(content)?
            .body
            .into_iter()
            .filter_map(|e| match e {
                BodyElement::Paragraph { text, .. } if !text.trim().is_empty() => Some(text),
                _ => None,
            })
            .collect()
    } else {
        split_paragraphs(content)
    };
    let units: Vec<String> = if sentences {
        paragraphs.iter().flat_map(|p| split_sentences(p)).collect()
    } else {
        paragraphs
    };
    if units.is_empty() {
        return Err(CliError::Runtime("empty input: no paragraphs found".into()));
    }
    units
        .into_iter()
        .map(|text| {
            let (label, scores) = model.predict_text(&text)?;
            let probs = softmax(&scores);
            let confidence = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(AnnotatedParagraph {
                text,
                label,
                scores,
                confidence,
            })
        })
        .collect()
}

/// Classify each paragraph (or sentence) of a document and emit JSON or
/// HTML. Output is byte-deterministic for a fixed model and input.
pub fn cmd_highlight(
    model_path: &Path,
    input_path: &Path,
    format: OutputFormat,
    sentences: bool,
    config: &AppConfig,
) -> Result<String, CliError> {
    let model = load_model(model_path)?;
    let content = std::fs::read_to_string(input_path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", input_path.display())))?;
    let paragraphs = annotate_content(&model, &content, sentences)?;
    match format {
        OutputFormat::Html => Ok(html::render_highlight(&paragraphs, |label| {
            config.color_for_label(label)
        })),
        OutputFormat::Json => {
            let output = HighlightOutput {
                classes: model.classes().to_vec(),
                paragraphs,
            };
            serde_json::to_string_pretty(&output)
                .map_err(|e| CliError::Runtime(format!("highlight serialization: {e}")))
        }
        OutputFormat::Text => Err(CliError::Usage("highlight emits json or html output".into())),
    }
}

/// Token attributions for one text: exact linear attribution by default, or
/// the perturbation surrogate on request.
pub fn explain_text(
    model: &AnyModel,
    text: &str,
    k: usize,
    surrogate: bool,
    config: &AppConfig,
) -> Result<Explanation, CliError> {
    if surrogate {
        let (label, _) = model.predict_text(text)?;
        let surrogate_config = SurrogateConfig {
            n_samples: config.surrogate_samples,
            kernel_width: config.surrogate_kernel_width,
            seed: config.train.seed,
            ..SurrogateConfig::default()
        };
        let predictor = |variant: &str| {
            model
                .predict_text(variant)
                .map(|(_, scores)| scores)
                .unwrap_or_default()
        };
        Ok(surrogate_explain(
            predictor,
            text,
            label,
            model.classes(),
            &surrogate_config,
            k,
        )?)
    } else {
        match linear_attribution(model, text, None, k) {
            Err(ExplainError::NotLinear) => Err(CliError::Usage(
                "forest models have no linear attribution; pass --surrogate".into(),
            )),
            other => Ok(other?),
        }
    }
}

pub fn cmd_explain(
    model_path: &Path,
    text: &str,
    k: usize,
    surrogate: bool,
    format: OutputFormat,
    config: &AppConfig,
) -> Result<String, CliError> {
    let model = load_model(model_path)?;
    let explanation = explain_text(&model, text, k, surrogate, config)?;
    match format {
        OutputFormat::Html => Ok(html::render_explanation(text, &explanation)),
        OutputFormat::Json => serde_json::to_string_pretty(&explanation)
            .map_err(|e| CliError::Runtime(format!("explanation serialization: {e}"))),
        OutputFormat::Text => Err(CliError::Usage("explain emits json or html output".into())),
    }
}
