//! Descriptive corpus statistics: token-length summaries, paragraph-count
//! histograms, top tri-grams, per-year label counts.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::Corpus;
use crate::text::{ngrams, normalize, remove_stopwords, tokenize, NgramConfig};

/// Distribution summary of per-sample token counts, pandas-describe style:
/// quartiles by linear interpolation, standard deviation with n-1 degrees of
/// freedom (0 for a single sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TokenSummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub std: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigramCount {
    pub trigram: String,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    /// Token-length summary per label, stopwords removed.
    pub token_summary: BTreeMap<u8, TokenSummary>,
    /// paragraph count -> number of samples, per label.
    pub paragraph_hist: BTreeMap<u8, BTreeMap<usize, usize>>,
    /// Most frequent tri-grams per label, stopwords removed.
    pub top_trigrams: BTreeMap<u8, Vec<TrigramCount>>,
    /// year -> label -> sample count.
    pub yearly: BTreeMap<i32, BTreeMap<u8, usize>>,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

fn summarize(lengths: &[usize]) -> TokenSummary {
    let mut values: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    TokenSummary {
        count: n,
        mean,
        min: values[0],
        q25: quantile(&values, 0.25),
        q50: quantile(&values, 0.50),
        q75: quantile(&values, 0.75),
        std,
        max: values[n - 1],
    }
}

/// Compute per-class statistics over a corpus. `top_k` bounds how many
/// tri-grams are reported per class.
pub fn compute_stats(corpus: &Corpus, stoplist: &HashSet<String>, top_k: usize) -> CorpusStats {
    let mut lengths: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    let mut paragraph_hist: BTreeMap<u8, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut trigram_counts: BTreeMap<u8, HashMap<String, usize>> = BTreeMap::new();
    let mut yearly: BTreeMap<i32, BTreeMap<u8, usize>> = BTreeMap::new();
    let trigram_cfg = NgramConfig {
        min_n: 3,
        max_n: 3,
        ..NgramConfig::default()
    };

    for s in &corpus.samples {
        let norm = normalize(&s.text);
        let tokens = tokenize(&norm);
        let kept = remove_stopwords(&tokens, stoplist);
        lengths.entry(s.label).or_default().push(kept.len());
        *paragraph_hist
            .entry(s.label)
            .or_default()
            .entry(s.paragraph_count)
            .or_insert(0) += 1;
        let grams = ngrams(&kept, &trigram_cfg);
        let counter = trigram_counts.entry(s.label).or_default();
        for g in grams {
            *counter.entry(g).or_insert(0) += 1;
        }
        *yearly
            .entry(s.year)
            .or_default()
            .entry(s.label)
            .or_insert(0) += 1;
    }

    let token_summary = lengths
        .into_iter()
        .map(|(label, ls)| (label, summarize(&ls)))
        .collect();
    let top_trigrams = trigram_counts
        .into_iter()
        .map(|(label, counter)| {
            let mut entries: Vec<TrigramCount> = counter
                .into_iter()
                .map(|(trigram, count)| TrigramCount { trigram, count })
                .collect();
            entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.trigram.cmp(&b.trigram)));
            entries.truncate(top_k);
            (label, entries)
        })
        .collect();

    CorpusStats {
        token_summary,
        paragraph_hist,
        top_trigrams,
        yearly,
    }
}

impl CorpusStats {
    /// Plain-text rendering of the summary tables.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let labels: Vec<u8> = self.token_summary.keys().copied().collect();

        out.push_str("Token length distribution (stopwords removed)\n");
        let _ = write!(out, "{:>8}", "stat");
        for l in &labels {
            let _ = write!(out, "{:>12}", format!("label {l}"));
        }
        out.push('\n');
        type StatRow = (&'static str, fn(&TokenSummary) -> f64);
        let rows: [StatRow; 7] = [
            ("mean", |s| s.mean),
            ("min", |s| s.min),
            ("25%", |s| s.q25),
            ("50%", |s| s.q50),
            ("75%", |s| s.q75),
            ("std", |s| s.std),
            ("max", |s| s.max),
        ];
        for (name, f) in rows {
            let _ = write!(out, "{name:>8}");
            for l in &labels {
                let _ = write!(out, "{:>12.2}", f(&self.token_summary[l]));
            }
            out.push('\n');
        }

        out.push_str("\nTop tri-grams per label\n");
        for (label, entries) in &self.top_trigrams {
            for e in entries {
                let _ = writeln!(out, "  label {label}  {:<40} {}", e.trigram, e.count);
            }
        }

        out.push_str("\nSamples per year and label\n");
        let _ = write!(out, "{:>6}", "year");
        for l in &labels {
            let _ = write!(out, "{:>12}", format!("label {l}"));
        }
        out.push('\n');
        for (year, counts) in &self.yearly {
            let _ = write!(out, "{year:>6}");
            for l in &labels {
                let _ = write!(out, "{:>12}", counts.get(l).copied().unwrap_or(0));
            }
            out.push('\n');
        }

        out.push_str("\nParagraph-count histogram (paragraphs: samples)\n");
        for (label, hist) in &self.paragraph_hist {
            let _ = write!(out, "  label {label}:");
            for (pars, count) in hist {
                let _ = write!(out, " {pars}:{count}");
            }
            out.push('\n');
        }
        out
    }
}
