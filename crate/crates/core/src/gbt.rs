//! Gradient-boosted regression trees with squared-error loss.
//!
//! Trees are grown depth-first by exact greedy search over every feature
//! and every midpoint between consecutive distinct values. With residual
//! sums `S = Σ(yᵢ − ŷᵢ)` and counts `H`, leaves take
//! `w = soft(S, α)/(H + λ)` and a split scores
//! `½[soft(S_L)²/(H_L+λ) + soft(S_R)²/(H_R+λ) − soft(S)²/(H+λ)]`.
//! Only splits with strictly positive gain are taken; ties keep the lowest
//! feature index and then the lowest threshold.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_estimators: usize,
    pub l1_alpha: f64,
    pub l2_lambda: f64,
    pub min_samples_leaf: usize,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_depth: 6,
            n_estimators: 100,
            l1_alpha: 0.0,
            l2_lambda: 1.0,
            min_samples_leaf: 1,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::config(format!("learning_rate must lie in (0, 1], got {}", self.learning_rate)));
        }
        if self.max_depth < 1 {
            return Err(Error::config("max_depth must be >= 1"));
        }
        if !(self.l1_alpha >= 0.0 && self.l1_alpha.is_finite()) {
            return Err(Error::config("l1_alpha must be finite and >= 0"));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::config("l2_lambda must be finite and >= 0"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::config("min_samples_leaf must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// `x[feature] < threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { weight: f64 },
}

/// Flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf_value(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
                Node::Leaf { weight } => return weight,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { weight } => Some(*weight),
            Node::Split { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub config: GbtConfig,
    pub base_score: f64,
    pub n_features: usize,
    pub mode: Mode,
    pub trees: Vec<RegressionTree>,
}

impl GbtModel {
    /// `base_score + η·Σ leaf(x)`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.leaf_value(x)).sum();
        Ok(self.base_score + self.config.learning_rate * sum)
    }
}

/// A trained model plus the training MSE after each round (index 0 is the
/// base score alone).
#[derive(Debug, Clone)]
pub struct GbtFit {
    pub model: GbtModel,
    pub train_mse: Vec<f64>,
}

#[inline]
fn soft_threshold(s: f64, alpha: f64) -> f64 {
    if s > alpha {
        s - alpha
    } else if s < -alpha {
        s + alpha
    } else {
        0.0
    }
}

struct Grower<'a> {
    cols: &'a [Vec<f64>],
    residual: &'a [f64],
    cfg: &'a GbtConfig,
    nodes: Vec<Node>,
    /// Leaf weight assigned to each sample in this round.
    assigned: Vec<f64>,
}

impl Grower<'_> {
    fn leaf_weight(&self, s: f64, h: f64) -> f64 {
        soft_threshold(s, self.cfg.l1_alpha) / (h + self.cfg.l2_lambda)
    }

    fn score(&self, s: f64, h: f64) -> f64 {
        let t = soft_threshold(s, self.cfg.l1_alpha);
        let d = h + self.cfg.l2_lambda;
        if d == 0.0 {
            0.0
        } else {
            t * t / d
        }
    }

    /// Grows the subtree over `lists` (one sorted sample list per feature)
    /// and returns its node index.
    fn grow(&mut self, lists: Vec<Vec<u32>>, depth: usize) -> usize {
        let members = &lists[0];
        let h = members.len() as f64;
        let s: f64 = members.iter().map(|&i| self.residual[i as usize]).sum();
        let msl = self.cfg.min_samples_leaf;

        let mut best: Option<(usize, f64, usize)> = None;
        let mut best_gain = 0.0;
        if depth < self.cfg.max_depth && members.len() >= 2 * msl {
            let parent = self.score(s, h);
            for (f, list) in lists.iter().enumerate() {
                let col = &self.cols[f];
                let mut s_left = 0.0;
                for k in 0..list.len() - 1 {
                    s_left += self.residual[list[k] as usize];
                    let n_left = k + 1;
                    if n_left < msl || list.len() - n_left < msl {
                        continue;
                    }
                    let lo = col[list[k] as usize];
                    let hi = col[list[k + 1] as usize];
                    if lo >= hi {
                        continue;
                    }
                    let threshold = lo + (hi - lo) / 2.0;
                    if !(lo < threshold && threshold < hi) {
                        continue;
                    }
                    let h_left = n_left as f64;
                    let gain = 0.5
                        * (self.score(s_left, h_left) + self.score(s - s_left, h - h_left) - parent);
                    if gain > best_gain {
                        best_gain = gain;
                        best = Some((f, threshold, n_left));
                    }
                }
            }
        }

        let id = self.nodes.len();
        let Some((feature, threshold, _)) = best else {
            let weight = self.leaf_weight(s, h);
            for &i in members {
                self.assigned[i as usize] = weight;
            }
            self.nodes.push(Node::Leaf { weight });
            return id;
        };

        self.nodes.push(Node::Leaf { weight: 0.0 });
        let col = &self.cols[feature];
        let mut left_lists = Vec::with_capacity(lists.len());
        let mut right_lists = Vec::with_capacity(lists.len());
        for list in lists {
            let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&i| col[i as usize] < threshold);
            left_lists.push(l);
            right_lists.push(r);
        }
        let left = self.grow(left_lists, depth + 1);
        let right = self.grow(right_lists, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Trains an ensemble on `rows` (already standardized by the caller).
///
/// Rows are first put into a canonical order so the result does not
/// depend on the order the caller supplies them in.
pub fn train<R: AsRef<[f64]>>(rows: &[R], targets: &[f64], config: &GbtConfig, mode: Mode) -> Result<GbtFit> {
    config.validate()?;
    if rows.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if rows.len() != targets.len() {
        return Err(Error::Shape {
            expected: rows.len(),
            got: targets.len(),
        });
    }
    if rows.len() > u32::MAX as usize {
        return Err(Error::config("training set too large"));
    }
    let n_features = rows[0].as_ref().len();
    for r in rows {
        if r.as_ref().len() != n_features {
            return Err(Error::Shape {
                expected: n_features,
                got: r.as_ref().len(),
            });
        }
    }
    if n_features == 0 {
        return Err(Error::config("rows need at least one feature"));
    }

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        lexicographic(rows[a].as_ref(), rows[b].as_ref()).then(targets[a].total_cmp(&targets[b]))
    });
    let y: Vec<f64> = order.iter().map(|&i| targets[i]).collect();
    let cols: Vec<Vec<f64>> = (0..n_features)
        .map(|f| order.iter().map(|&i| rows[i].as_ref()[f]).collect())
        .collect();
    let sorted: Vec<Vec<u32>> = cols
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..y.len() as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            idx
        })
        .collect();

    let n = y.len() as f64;
    let base_score = y.iter().sum::<f64>() / n;
    let eta = config.learning_rate;
    let mut leaf_sum = alloc::vec![0.0; y.len()];
    let mut residual: Vec<f64> = y.iter().map(|t| t - base_score).collect();
    let mse = |r: &[f64]| r.iter().map(|e| e * e).sum::<f64>() / n;
    let mut train_mse = alloc::vec![mse(&residual)];
    let mut trees = Vec::with_capacity(config.n_estimators);

    for _ in 0..config.n_estimators {
        let mut grower = Grower {
            cols: &cols,
            residual: &residual,
            cfg: config,
            nodes: Vec::new(),
            assigned: alloc::vec![0.0; y.len()],
        };
        grower.grow(sorted.clone(), 0);
        let Grower { nodes, assigned, .. } = grower;
        for i in 0..y.len() {
            leaf_sum[i] += assigned[i];
            residual[i] = y[i] - (base_score + eta * leaf_sum[i]);
        }
        train_mse.push(mse(&residual));
        trees.push(RegressionTree { nodes });
    }

    Ok(GbtFit {
        model: GbtModel {
            config: *config,
            base_score,
            n_features,
            mode,
            trees,
        },
        train_mse,
    })
}
