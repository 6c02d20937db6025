//! CART regression tree grown greedily by variance reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_leaf: 5,
        }
    }
}

/// Relative tolerance for comparing split reductions, so that numerically equal
/// candidates resolve to the lowest feature and threshold.
const REDUCTION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        samples: usize,
    },
}

/// Nodes are stored in preorder; the root is `nodes[0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub params: TreeParams,
}

impl TreeModel {
    /// Rows with `x[feature] <= threshold` go left.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    /// Index of the leaf a row lands in.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut at = 0;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } = self.nodes[at]
        {
            at = if row[feature] <= threshold {
                left
            } else {
                right
            };
        }
        at
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

pub fn fit_tree(x: &Matrix, y: &[f64], params: &TreeParams) -> Result<TreeModel> {
    if x.rows() == 0 {
        return Err(Error::DegenerateInput(
            "a tree needs at least one row".into(),
        ));
    }
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    if params.min_leaf == 0 {
        return Err(Error::DegenerateInput("min_leaf must be at least 1".into()));
    }
    let mut grower = Grower {
        x,
        y,
        params,
        nodes: Vec::new(),
        pairs: Vec::with_capacity(x.rows()),
    };
    let mut rows: Vec<usize> = (0..x.rows()).collect();
    grower.grow(&mut rows, 0);
    Ok(TreeModel {
        nodes: grower.nodes,
        n_features: x.cols(),
        params: *params,
    })
}

struct Grower<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    params: &'a TreeParams,
    nodes: Vec<Node>,
    pairs: Vec<(f64, f64)>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    reduction: f64,
}

impl Grower<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let n = rows.len();
        let mean = rows.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: mean,
            samples: n,
        });
        if depth >= self.params.max_depth || n < 2 * self.params.min_leaf {
            return at;
        }
        let Some(split) = self.best_split(rows, mean) else {
            return at;
        };
        let (feature, threshold) = (split.feature, split.threshold);
        let mut mid = 0;
        for k in 0..n {
            if self.x.get(rows[k], feature) <= threshold {
                rows.swap(k, mid);
                mid += 1;
            }
        }
        let (l, r) = rows.split_at_mut(mid);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
            samples: n,
        };
        at
    }

    /// Highest variance reduction `S_L²/n_L + S_R²/n_R − S²/n` over centered
    /// targets, scanning features and thresholds in ascending order.
    fn best_split(&mut self, rows: &[usize], mean: f64) -> Option<Candidate> {
        let n = rows.len();
        let min_leaf = self.params.min_leaf;
        let sse: f64 = rows.iter().map(|&i| (self.y[i] - mean).powi(2)).sum();
        if sse <= 0.0 {
            return None;
        }
        let mut best: Option<Candidate> = None;
        for feature in 0..self.x.cols() {
            self.pairs.clear();
            self.pairs.extend(
                rows.iter()
                    .map(|&i| (self.x.get(i, feature), self.y[i] - mean)),
            );
            self.pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let total: f64 = self.pairs.iter().map(|p| p.1).sum();
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.pairs[k].1;
                let (lo, hi) = (self.pairs[k].0, self.pairs[k + 1].0);
                let n_left = k + 1;
                if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let reduction = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / (n - n_left) as f64
                    - total * total / n as f64;
                let accept = match &best {
                    None => reduction > REDUCTION_TOLERANCE * sse,
                    Some(b) => reduction > b.reduction * (1.0 + REDUCTION_TOLERANCE),
                };
                if accept {
                    best = Some(Candidate {
                        feature,
                        threshold: midpoint(lo, hi),
                        reduction,
                    });
                }
            }
        }
        best
    }
}

/// Midpoint of two adjacent distinct values, kept strictly below `hi` so that
/// `hi` routes right.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}
