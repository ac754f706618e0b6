//! Sparse vectorization: raw counts, tf-idf, and binarized indicators.

use serde::{Deserialize, Serialize};

use crate::text::Vocabulary;

/// Sparse vector with strictly increasing indices and nonzero values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Build from arbitrary (index, value) pairs; zero values are dropped,
    /// duplicate indices are summed.
    pub fn from_entries(dim: usize, mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            debug_assert!((i as usize) < dim, "index {i} out of dimension {dim}");
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        SparseVector {
            dim,
            entries: merged,
        }
    }

    pub fn empty(dim: usize) -> Self {
        SparseVector {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    /// Value at an index (0.0 when absent).
    pub fn get(&self, index: u32) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Dot product against a dense weight vector.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        debug_assert_eq!(dense.len(), self.dim);
        self.entries
            .iter()
            .map(|&(i, v)| v * dense[i as usize])
            .sum()
    }

    /// Map nonzero values, dropping any that become zero.
    pub fn map_values(&self, mut f: impl FnMut(u32, f64) -> f64) -> SparseVector {
        let entries = self
            .entries
            .iter()
            .map(|&(i, v)| (i, f(i, v)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        SparseVector {
            dim: self.dim,
            entries,
        }
    }
}

/// Rows of one shared dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    dim: usize,
    rows: Vec<SparseVector>,
}

impl DocTermMatrix {
    pub fn new(dim: usize, rows: Vec<SparseVector>) -> Self {
        assert!(rows.iter().all(|r| r.dim() == dim), "row dimension mismatch");
        DocTermMatrix { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseVector {
        &self.rows[i]
    }
}

/// Count occurrences of in-vocabulary terms; out-of-vocabulary terms are
/// ignored.
pub fn count_vector(ngrams: &[String], vocab: &Vocabulary) -> SparseVector {
    let entries: Vec<(u32, f64)> = ngrams
        .iter()
        .filter_map(|g| vocab.index_of(g))
        .map(|i| (i, 1.0))
        .collect();
    SparseVector::from_entries(vocab.len(), entries)
}

/// Count matrix over per-document n-gram sequences.
pub fn count_matrix(documents: &[Vec<String>], vocab: &Vocabulary) -> DocTermMatrix {
    let rows = documents.iter().map(|d| count_vector(d, vocab)).collect();
    DocTermMatrix::new(vocab.len(), rows)
}

/// Smoothed inverse document frequency: `idf(t) = ln((1+N)/(1+df(t))) + 1`.
pub fn idf_weights(vocab: &Vocabulary) -> Vec<f64> {
    let n = vocab.n_docs() as f64;
    (0..vocab.len() as u32)
        .map(|i| ((1.0 + n) / (1.0 + vocab.doc_frequency(i) as f64)).ln() + 1.0)
        .collect()
}

/// Scale one count row by idf and L2-normalize; zero rows stay zero.
pub fn tfidf_vector(counts: &SparseVector, idf: &[f64]) -> SparseVector {
    let weighted = counts.map_values(|i, v| v * idf[i as usize]);
    let norm = weighted.l2_norm();
    if norm == 0.0 {
        return weighted;
    }
    weighted.map_values(|_, v| v / norm)
}

/// Apply `tfidf_vector` to every row of a counts matrix.
pub fn tfidf_transform(counts: &DocTermMatrix, vocab: &Vocabulary) -> DocTermMatrix {
    let idf = idf_weights(vocab);
    let rows = counts.rows().iter().map(|r| tfidf_vector(r, &idf)).collect();
    DocTermMatrix::new(counts.dim(), rows)
}

/// Every nonzero value becomes 1.
pub fn binarize(vector: &SparseVector) -> SparseVector {
    vector.map_values(|_, _| 1.0)
}

/// Binarize every row.
pub fn binarize_matrix(matrix: &DocTermMatrix) -> DocTermMatrix {
    let rows = matrix.rows().iter().map(binarize).collect();
    DocTermMatrix::new(matrix.dim(), rows)
}
