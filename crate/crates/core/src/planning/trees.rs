//! An ensemble of extremely randomized regression trees.
//!
//! At each node every feature with spread proposes one uniformly random
//! threshold; the candidate with the best variance reduction wins. Splitting
//! stops once no candidate can leave `min_leaf` samples on both sides, and
//! leaves predict the mean target. The ensemble averages its trees.

use rand::Rng;

use crate::rng::RngStream;

#[derive(Debug, Clone, Copy)]
pub struct ExtraTreesConfig {
    pub n_trees: usize,
    pub min_leaf: usize,
}

impl Default for ExtraTreesConfig {
    fn default() -> Self {
        Self {
            n_trees: 25,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Tree {
    fn fit(
        xs: &[&[f64]],
        ys: &[f64],
        indices: Vec<usize>,
        min_leaf: usize,
        rng: &mut RngStream,
    ) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow(xs, ys, indices, min_leaf, rng);
        tree
    }

    fn best_candidate(
        xs: &[&[f64]],
        ys: &[f64],
        indices: &[usize],
        min_leaf: usize,
        rng: &mut RngStream,
    ) -> Option<Candidate> {
        let n_features = xs[0].len();
        let mut best: Option<Candidate> = None;
        for feature in 0..n_features {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in indices {
                lo = lo.min(xs[i][feature]);
                hi = hi.max(xs[i][feature]);
            }
            if !(hi > lo) {
                continue;
            }
            let threshold = lo + (hi - lo) * rng.random::<f64>();
            let mut n_left = 0usize;
            let mut sum_left = 0.0;
            let mut sum_right = 0.0;
            for &i in indices {
                if xs[i][feature] <= threshold {
                    n_left += 1;
                    sum_left += ys[i];
                } else {
                    sum_right += ys[i];
                }
            }
            let n_right = indices.len() - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            // Maximizing between-group sum of squares is equivalent to
            // minimizing the within-group squared error.
            let score = sum_left * sum_left / n_left as f64
                + sum_right * sum_right / n_right as f64;
            if best.as_ref().is_none_or(|b| score > b.score) {
                best = Some(Candidate {
                    feature,
                    threshold,
                    score,
                });
            }
        }
        best
    }

    fn grow(
        &mut self,
        xs: &[&[f64]],
        ys: &[f64],
        indices: Vec<usize>,
        min_leaf: usize,
        rng: &mut RngStream,
    ) -> u32 {
        let id = self.nodes.len() as u32;
        if indices.len() < 2 * min_leaf {
            self.nodes.push(Node::Leaf {
                value: mean(ys, &indices),
            });
            return id;
        }
        let Some(candidate) = Self::best_candidate(xs, ys, &indices, min_leaf, rng) else {
            self.nodes.push(Node::Leaf {
                value: mean(ys, &indices),
            });
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| xs[i][candidate.feature] <= candidate.threshold);
        self.nodes.push(Node::Split {
            feature: candidate.feature,
            threshold: candidate.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(xs, ys, left_idx, min_leaf, rng);
        let right = self.grow(xs, ys, right_idx, min_leaf, rng);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[id as usize]
        {
            *l = left;
            *r = right;
        }
        id
    }

    fn predict(&self, x: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

fn mean(ys: &[f64], indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    indices.iter().map(|&i| ys[i]).sum::<f64>() / indices.len() as f64
}

#[derive(Debug, Clone)]
pub struct ExtraTreesRegressor {
    trees: Vec<Tree>,
}

impl ExtraTreesRegressor {
    /// Fit on rows `xs` with targets `ys`. Tree `i` draws its thresholds
    /// from the stream `(seed, stream_base + i)`, so a fit is a pure
    /// function of the data and the key.
    pub fn fit(
        xs: &[&[f64]],
        ys: &[f64],
        config: &ExtraTreesConfig,
        seed: u64,
        stream_base: u64,
    ) -> Self {
        assert_eq!(xs.len(), ys.len());
        let trees = (0..config.n_trees)
            .map(|i| {
                let mut rng = RngStream::new(seed, stream_base + i as u64);
                Tree::fit(
                    xs,
                    ys,
                    (0..xs.len()).collect(),
                    config.min_leaf.max(1),
                    &mut rng,
                )
            })
            .collect();
        Self { trees }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_data(f: impl Fn(f64) -> f64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let xs: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| f(x[0])).collect();
        (xs, ys)
    }

    #[test]
    fn constant_targets_predict_the_constant() {
        let (xs, _) = grid_data(|_| 0.0, 64);
        let ys = vec![3.25; 64];
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let model = ExtraTreesRegressor::fit(&refs, &ys, &ExtraTreesConfig::default(), 1, 0);
        assert_eq!(model.predict(&[0.3]), 3.25);
        assert_eq!(model.predict(&[10.0]), 3.25);
    }

    #[test]
    fn step_function_is_recovered() {
        let (xs, ys) = grid_data(|x| if x < 0.5 { -1.0 } else { 2.0 }, 400);
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let model = ExtraTreesRegressor::fit(&refs, &ys, &ExtraTreesConfig::default(), 2, 0);
        assert!((model.predict(&[0.2]) - -1.0).abs() < 0.2);
        assert!((model.predict(&[0.8]) - 2.0).abs() < 0.2);
    }

    #[test]
    fn informative_feature_wins_over_noise_features() {
        // Target depends on feature 0 only; four noise features must not
        // wash the signal out.
        let mut rng = RngStream::new(9, 0);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..600 {
            let x0: f64 = rng.random();
            let row = vec![
                x0,
                rng.random::<f64>(),
                rng.random::<f64>(),
                rng.random::<f64>(),
                rng.random::<f64>(),
            ];
            ys.push(if x0 > 0.7 { 5.0 } else { 0.0 });
            xs.push(row);
        }
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let model = ExtraTreesRegressor::fit(&refs, &ys, &ExtraTreesConfig::default(), 10, 0);
        let high = model.predict(&[0.9, 0.5, 0.5, 0.5, 0.5]);
        let low = model.predict(&[0.2, 0.5, 0.5, 0.5, 0.5]);
        assert!(high > 3.5, "high-region prediction {high}");
        assert!(low < 1.5, "low-region prediction {low}");
    }

    #[test]
    fn fit_is_deterministic_in_the_key() {
        let (xs, ys) = grid_data(|x| x * x, 200);
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let a = ExtraTreesRegressor::fit(&refs, &ys, &ExtraTreesConfig::default(), 7, 100);
        let b = ExtraTreesRegressor::fit(&refs, &ys, &ExtraTreesConfig::default(), 7, 100);
        for i in 0..50 {
            let x = [i as f64 / 50.0];
            assert_eq!(a.predict(&x), b.predict(&x));
        }
    }

    #[test]
    fn tiny_datasets_become_a_single_leaf() {
        let xs = vec![vec![0.0], vec![1.0]];
        let ys = vec![1.0, 3.0];
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let model = ExtraTreesRegressor::fit(&refs, &ys, &ExtraTreesConfig::default(), 3, 0);
        assert_eq!(model.predict(&[0.0]), 2.0);
    }
}
