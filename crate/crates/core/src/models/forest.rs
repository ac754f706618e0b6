//! Depth-limited random forest with Gini splits over sparse rows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::{DocTermMatrix, SparseVector};
use crate::models::{argmax_label, ModelError, TrainConfig};
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        /// Class distribution in `classes` order.
        dist: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Root is node 0.
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    fn leaf_dist<'a>(&'a self, x: &SparseVector) -> &'a [f64] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { dist } => return dist,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(*feature) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub classes: Vec<u8>,
    pub trees: Vec<Tree>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl ForestModel {
    /// Averaged leaf distributions, in `classes` order.
    pub fn scores(&self, x: &SparseVector) -> Result<Vec<f64>, ModelError> {
        let mut mean = vec![0.0f64; self.classes.len()];
        for tree in &self.trees {
            for (m, d) in mean.iter_mut().zip(tree.leaf_dist(x)) {
                *m += d;
            }
        }
        let n = self.trees.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        Ok(mean)
    }

    pub fn predict(&self, x: &SparseVector) -> Result<(u8, Vec<f64>), ModelError> {
        let scores = self.scores(x)?;
        Ok((argmax_label(&self.classes, &scores), scores))
    }
}

fn gini(class_counts: &[usize]) -> f64 {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - class_counts
        .iter()
        .map(|&c| {
            let p = c as f64 / t;
            p * p
        })
        .sum::<f64>()
}

struct TreeBuilder<'a> {
    rows: &'a [SparseVector],
    class_of: &'a [usize],
    n_classes: usize,
    max_depth: usize,
    n_sampled_features: usize,
    nodes: Vec<TreeNode>,
}

impl TreeBuilder<'_> {
    fn class_counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &s in samples {
            counts[self.class_of[s]] += 1;
        }
        counts
    }

    fn leaf(&mut self, counts: &[usize]) -> u32 {
        let total: usize = counts.iter().sum();
        let dist = counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
            .collect();
        self.nodes.push(TreeNode::Leaf { dist });
        (self.nodes.len() - 1) as u32
    }

    fn build(&mut self, samples: &[usize], depth: usize, rng: &mut rand_chacha::ChaCha8Rng) -> u32 {
        let counts = self.class_counts(samples);
        let parent_gini = gini(&counts);
        if depth >= self.max_depth || samples.len() < 2 || parent_gini == 0.0 {
            return self.leaf(&counts);
        }
        let dim = self.rows[0].dim();
        let candidates = rand::seq::index::sample(rng, dim, self.n_sampled_features.min(dim));

        let mut best: Option<(f64, u32, f64)> = None; // (weighted gini, feature, threshold)
        let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
        for feature in candidates {
            let feature = feature as u32;
            pairs.clear();
            pairs.extend(
                samples
                    .iter()
                    .map(|&s| (self.rows[s].get(feature), self.class_of[s])),
            );
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            if pairs[0].0 == pairs[pairs.len() - 1].0 {
                continue;
            }
            // one ascending sweep; a midpoint threshold is evaluated at
            // every boundary between distinct values
            let mut left_counts = vec![0usize; self.n_classes];
            let mut right_counts = counts.clone();
            for i in 0..pairs.len() - 1 {
                let (value, class) = pairs[i];
                left_counts[class] += 1;
                right_counts[class] -= 1;
                let next = pairs[i + 1].0;
                if next == value {
                    continue;
                }
                let threshold = 0.5 * (value + next);
                let nl = i + 1;
                let nr = pairs.len() - nl;
                let weighted = (nl as f64 * gini(&left_counts) + nr as f64 * gini(&right_counts))
                    / samples.len() as f64;
                let better = match best {
                    None => weighted < parent_gini - 1e-12,
                    Some((bw, _, _)) => weighted < bw - 1e-12,
                };
                if better {
                    best = Some((weighted, feature, threshold));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            return self.leaf(&counts);
        };
        let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| self.rows[s].get(feature) <= threshold);
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { dist: Vec::new() }); // placeholder
        let left = self.build(&left_samples, depth + 1, rng);
        let right = self.build(&right_samples, depth + 1, rng);
        self.nodes[at] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at as u32
    }
}

/// Train a forest of depth-limited trees on seeded bootstrap samples, with
/// `ceil(sqrt(V))` candidate features per node.
pub fn train_random_forest(
    features: &DocTermMatrix,
    labels: &[u8],
    config: &TrainConfig,
) -> Result<ForestModel, ModelError> {
    config.validate()?;
    if features.n_rows() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: features.n_rows(),
            got: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(ModelError::NoTrainingData);
    }
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let class_of: Vec<usize> = labels
        .iter()
        .map(|l| classes.iter().position(|c| c == l).unwrap())
        .collect();
    let n = labels.len();
    let dim = features.dim();
    let n_sampled = (dim as f64).sqrt().ceil() as usize;

    let mut trees = Vec::with_capacity(config.n_trees);
    for tree_index in 0..config.n_trees {
        let mut rng = rng_from(derive_seed(config.seed, tree_index as u64));
        let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut builder = TreeBuilder {
            rows: features.rows(),
            class_of: &class_of,
            n_classes: classes.len(),
            max_depth: config.max_depth,
            n_sampled_features: n_sampled.max(1),
            nodes: Vec::new(),
        };
        let root = builder.build(&bootstrap, 0, &mut rng);
        debug_assert_eq!(root, 0);
        trees.push(Tree {
            nodes: builder.nodes,
        });
    }
    Ok(ForestModel {
        classes,
        trees,
        n_trees: config.n_trees,
        max_depth: config.max_depth,
        seed: config.seed,
    })
}
