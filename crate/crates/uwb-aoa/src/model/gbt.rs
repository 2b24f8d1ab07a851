//! Gradient-boosted regression trees for a scalar target: squared-loss
//! boosting where every tree greedily fits the current residuals with exact
//! variance-reduction splits over sorted unique feature values. No
//! subsampling anywhere, so training is deterministic by construction.

use super::ModelError;
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegressionTree {
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict(&self, features: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match self.nodes[idx] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if features[feature as usize] < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], idx: usize) -> usize {
            match nodes[idx] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_estimators: 100,
            max_depth: 4,
            learning_rate: 0.1,
        }
    }
}

/// Boosted ensemble for one scalar output:
/// prediction = base + learning_rate · Σ tree(x).
#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    pub base_prediction: f64,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub trees: Vec<RegressionTree>,
}

impl GbtModel {
    pub fn predict(&self, features: &[f64]) -> f64 {
        let mut acc = self.base_prediction;
        for tree in &self.trees {
            acc += self.learning_rate * tree.predict(features);
        }
        acc
    }

    pub fn n_estimators(&self) -> usize {
        self.trees.len()
    }
}

/// Trains one boosted model on a scalar target.
pub fn train_gbt(
    features: &[FeatureVector],
    targets: &[f64],
    cfg: &GbtConfig,
) -> Result<GbtModel, ModelError> {
    if features.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if features.len() != targets.len() {
        return Err(ModelError::DimensionMismatch {
            expected: features.len(),
            got: targets.len(),
        });
    }
    if cfg.n_estimators == 0 || cfg.max_depth == 0 || cfg.learning_rate <= 0.0 {
        return Err(ModelError::InvalidArchitecture(
            "GBT needs n_estimators >= 1, max_depth >= 1, learning_rate > 0",
        ));
    }
    let width = features[0].values.len();
    if features.iter().any(|f| f.values.len() != width) {
        return Err(ModelError::DimensionMismatch {
            expected: width,
            got: 0,
        });
    }

    let n = features.len();
    let base_prediction = targets.iter().sum::<f64>() / n as f64;
    let mut residuals: Vec<f64> = targets.iter().map(|t| t - base_prediction).collect();

    // Per-feature sample order, sorted once and partitioned down the tree.
    let root_order: Vec<Vec<u32>> = (0..width)
        .map(|f| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                features[a as usize].values[f]
                    .partial_cmp(&features[b as usize].values[f])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    let mut model = GbtModel {
        base_prediction,
        learning_rate: cfg.learning_rate,
        max_depth: cfg.max_depth,
        trees: Vec::with_capacity(cfg.n_estimators),
    };
    for _ in 0..cfg.n_estimators {
        let mut builder = TreeBuilder {
            features,
            residuals: &residuals,
            max_depth: cfg.max_depth,
            nodes: Vec::new(),
        };
        builder.grow(root_order.clone(), 0);
        let tree = RegressionTree {
            nodes: builder.nodes,
        };
        for (i, f) in features.iter().enumerate() {
            residuals[i] -= cfg.learning_rate * tree.predict(&f.values);
        }
        model.trees.push(tree);
    }
    Ok(model)
}

struct TreeBuilder<'a> {
    features: &'a [FeatureVector],
    residuals: &'a [f64],
    max_depth: usize,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
    left_count: usize,
}

impl TreeBuilder<'_> {
    /// Grows a subtree from the samples in `order` (per-feature sorted index
    /// lists, all holding the same sample set) and returns its node index.
    fn grow(&mut self, order: Vec<Vec<u32>>, depth: usize) -> usize {
        let samples = &order[0];
        let count = samples.len() as f64;
        let sum: f64 = samples.iter().map(|&i| self.residuals[i as usize]).sum();

        let split = if depth < self.max_depth && samples.len() >= 2 {
            self.find_best_split(&order, sum)
        } else {
            None
        };

        match split {
            None => {
                self.nodes.push(TreeNode::Leaf { value: sum / count });
                self.nodes.len() - 1
            }
            Some(best) => {
                // Route samples by the chosen feature, preserving each
                // feature list's sort order.
                let feature = best.feature;
                let mut goes_left = vec![false; self.features.len()];
                for &i in order[feature].iter().take(best.left_count) {
                    goes_left[i as usize] = true;
                }
                let mut left_order = Vec::with_capacity(order.len());
                let mut right_order = Vec::with_capacity(order.len());
                for list in &order {
                    let mut l = Vec::with_capacity(best.left_count);
                    let mut r = Vec::with_capacity(list.len() - best.left_count);
                    for &i in list {
                        if goes_left[i as usize] {
                            l.push(i);
                        } else {
                            r.push(i);
                        }
                    }
                    left_order.push(l);
                    right_order.push(r);
                }
                drop(order);

                let node_index = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { value: 0.0 }); // placeholder
                let left = self.grow(left_order, depth + 1);
                let right = self.grow(right_order, depth + 1);
                self.nodes[node_index] = TreeNode::Split {
                    feature: feature as u32,
                    threshold: best.threshold,
                    left: left as u32,
                    right: right as u32,
                };
                node_index
            }
        }
    }

    /// Exact greedy scan: for every feature, every boundary between distinct
    /// sorted values is a candidate; gain is the variance-reduction score
    /// sum_L²/n_L + sum_R²/n_R - sum²/n. Ties keep the first candidate
    /// (lowest feature, then lowest threshold).
    fn find_best_split(&self, order: &[Vec<u32>], total_sum: f64) -> Option<BestSplit> {
        let n = order[0].len() as f64;
        let parent_score = total_sum * total_sum / n;
        // Guard against rounding-level "gains" on pure nodes.
        let min_gain = 1e-12 * (1.0 + parent_score.abs());
        let mut best: Option<BestSplit> = None;

        for (feature, list) in order.iter().enumerate() {
            let mut left_sum = 0.0;
            for k in 0..list.len() - 1 {
                let i = list[k] as usize;
                left_sum += self.residuals[i];
                let x_here = self.features[i].values[feature];
                let x_next = self.features[list[k + 1] as usize].values[feature];
                if x_here == x_next {
                    continue;
                }
                let n_left = (k + 1) as f64;
                let n_right = n - n_left;
                let right_sum = total_sum - left_sum;
                let gain = left_sum * left_sum / n_left + right_sum * right_sum / n_right
                    - parent_score;
                if gain > min_gain && best.as_ref().map_or(true, |b| gain > b.gain) {
                    best = Some(BestSplit {
                        gain,
                        feature,
                        threshold: 0.5 * (x_here + x_next),
                        left_count: k + 1,
                    });
                }
            }
        }
        best
    }
}
