//! Seeded synthetic corpus with class-determining keyword distributions.
//!
//! Each class carries a signature phrase and a private word pool on top of
//! shared patent-flavored filler, so a linear rule separates the classes and
//! end-to-end runs have a known-good target.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::corpus::{Corpus, Sample};
use crate::rng::rng_from;

const SHARED: [&str; 20] = [
    "device", "system", "method", "apparatus", "material", "surface", "layer", "portion",
    "member", "unit", "signal", "element", "structure", "component", "process", "section",
    "example", "form", "case", "value",
];

const NEUTRAL_POOL: [&str; 10] = [
    "aspect", "embodiment", "configured", "provided", "comprising", "arrangement", "disposed",
    "formed", "includes", "thereof",
];

const POSITIVE_POOL: [&str; 10] = [
    "advantage", "advantageous", "effect", "improved", "improvement", "efficiency", "benefit",
    "enhanced", "superior", "reliability",
];

const NEGATIVE_POOL: [&str; 10] = [
    "problem", "problems", "difficulty", "drawback", "conventional", "failure", "degradation",
    "defect", "insufficient", "costly",
];

/// The contiguous phrase every document of a class contains.
pub fn signature_phrase(label: u8) -> &'static str {
    match label {
        1 => "according present invention",
        2 => "object present invention",
        _ => "aspect present invention",
    }
}

fn pool(label: u8) -> &'static [&'static str] {
    match label {
        1 => &POSITIVE_POOL,
        2 => &NEGATIVE_POOL,
        _ => &NEUTRAL_POOL,
    }
}

fn synthesize_text(label: u8, rng: &mut rand_chacha::ChaCha8Rng) -> String {
    let mut words: Vec<&str> = Vec::new();
    for _ in 0..rng.random_range(3..7) {
        words.push(SHARED.choose(rng).unwrap());
    }
    words.extend(signature_phrase(label).split_whitespace());
    for _ in 0..rng.random_range(4..9) {
        words.push(pool(label).choose(rng).unwrap());
    }
    for _ in 0..rng.random_range(3..7) {
        words.push(SHARED.choose(rng).unwrap());
    }
    words.join(" ")
}

/// Generate a balanced 3-class corpus of `n_per_class` samples per label.
pub fn generate_corpus(n_per_class: usize, seed: u64) -> Corpus {
    let mut rng = rng_from(seed);
    let mut samples = Vec::with_capacity(3 * n_per_class);
    for i in 0..n_per_class {
        for label in [0u8, 1, 2] {
            samples.push(Sample {
                doc_number: format!("SYN{:05}{label}", i + 1),
                title: format!("Synthetic grant {label}-{}", i + 1),
                text: synthesize_text(label, &mut rng),
                label,
                paragraph_count: 1,
                year: 2020,
            });
        }
    }
    Corpus::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_balanced_and_reproducible() {
        let corpus = generate_corpus(20, 7);
        assert_eq!(corpus.len(), 60);
        let counts = corpus.per_class_counts();
        assert!(counts.values().all(|&c| c == 20));
        assert_eq!(generate_corpus(20, 7), corpus);
        for s in &corpus.samples {
            assert!(s.text.contains(signature_phrase(s.label)));
            assert!(s.text.split_whitespace().count() >= 10);
        }
    }
}
