//! Discretized posterior over a bounded transition parameter.
//!
//! The support is a product grid over `[0.01, 0.99]` per dimension with a
//! uniform prior. Every observation in this crate is a Bernoulli outcome in
//! exactly one parameter component, so the likelihood separates across
//! dimensions and the joint posterior is the product of its per-dimension
//! marginals. Weights are therefore stored per dimension; the joint array
//! over the product grid can be materialized with [`GridPosterior::joint_log_weights`].

use crate::envs::{PARAM_HI, PARAM_LO};
use crate::rng::RngStream;
use rand::Rng;

use super::{InferenceError, SufficientCounts};

/// Normalization tolerance: after normalization the weights of each
/// dimension (and hence of the joint grid) sum to one within this bound.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GridPosterior {
    grids: Vec<Vec<f64>>,
    log_weights: Vec<Vec<f64>>,
    normalized: bool,
}

fn uniform_grid(resolution: usize) -> Vec<f64> {
    assert!(resolution >= 2, "grid needs at least two points");
    let step = (PARAM_HI - PARAM_LO) / (resolution - 1) as f64;
    (0..resolution)
        .map(|i| {
            if i + 1 == resolution {
                PARAM_HI
            } else {
                PARAM_LO + step * i as f64
            }
        })
        .collect()
}

fn normalize_in_place(log_weights: &mut [f64]) {
    let max = log_weights.iter().fold(f64::NEG_INFINITY, |m, &w| m.max(w));
    for w in log_weights.iter_mut() {
        *w -= max;
    }
    // Max subtraction plus a refinement pass: with extreme counts the raw
    // log weights carry ~1e5-magnitude terms whose rounding would otherwise
    // leave a residual above the normalization tolerance.
    for _ in 0..3 {
        let total: f64 = log_weights.iter().map(|&w| w.exp()).sum();
        if (total - 1.0).abs() <= NORMALIZATION_TOL / 4.0 {
            break;
        }
        let log_total = total.ln();
        for w in log_weights.iter_mut() {
            *w -= log_total;
        }
    }
}

impl GridPosterior {
    /// Uniform prior over `dim` dimensions, each discretized with
    /// `resolution` equally spaced points spanning the parameter bounds.
    pub fn uniform(dim: usize, resolution: usize) -> Self {
        let grids: Vec<Vec<f64>> = (0..dim).map(|_| uniform_grid(resolution)).collect();
        let log_weights = grids
            .iter()
            .map(|g| {
                let w = -(g.len() as f64).ln();
                vec![w; g.len()]
            })
            .collect();
        Self {
            grids,
            log_weights,
            normalized: true,
        }
    }

    /// All mass on the grid point closest to `theta` in each dimension.
    pub fn point_mass_at(dim: usize, resolution: usize, theta: &[f64]) -> Self {
        assert_eq!(theta.len(), dim);
        let mut post = Self::uniform(dim, resolution);
        for (d, grid) in post.grids.iter().enumerate() {
            let nearest = grid
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - theta[d]).abs().total_cmp(&(*b - theta[d]).abs())
                })
                .map(|(i, _)| i)
                .expect("grid is nonempty");
            for (i, w) in post.log_weights[d].iter_mut().enumerate() {
                *w = if i == nearest { 0.0 } else { f64::NEG_INFINITY };
            }
        }
        post
    }

    /// Unnormalized posterior from explicit per-dimension log weights; call
    /// [`GridPosterior::normalize`] before sampling.
    pub fn from_raw_log_weights(grids: Vec<Vec<f64>>, log_weights: Vec<Vec<f64>>) -> Self {
        assert_eq!(grids.len(), log_weights.len());
        for (g, w) in grids.iter().zip(log_weights.iter()) {
            assert_eq!(g.len(), w.len());
        }
        Self {
            grids,
            log_weights,
            normalized: false,
        }
    }

    pub fn normalize(&mut self) {
        for lw in self.log_weights.iter_mut() {
            normalize_in_place(lw);
        }
        self.normalized = true;
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn dim(&self) -> usize {
        self.grids.len()
    }

    pub fn grid(&self, d: usize) -> &[f64] {
        &self.grids[d]
    }

    /// Posterior recomputed from scratch for the given sufficient counts:
    /// the log weight of grid point `g` in dimension `d` is
    /// `succ_d * ln(g) + fail_d * ln(1 - g)` plus the flat prior, then
    /// renormalized in log space (max subtraction, so underflow cannot
    /// produce NaN).
    pub fn updated(&self, counts: &SufficientCounts) -> GridPosterior {
        assert_eq!(
            counts.dim(),
            self.dim(),
            "counts dimension must match the grid"
        );
        let mut log_weights = Vec::with_capacity(self.dim());
        for (d, grid) in self.grids.iter().enumerate() {
            let succ = counts.success(d) as f64;
            let fail = counts.failure(d) as f64;
            let mut lw: Vec<f64> = grid
                .iter()
                .map(|&g| succ * g.ln() + fail * (1.0 - g).ln())
                .collect();
            normalize_in_place(&mut lw);
            log_weights.push(lw);
        }
        GridPosterior {
            grids: self.grids.clone(),
            log_weights,
            normalized: true,
        }
    }

    /// Inverse-CDF draw over the grid; returns the grid point itself, with
    /// no within-cell jitter.
    pub fn sample(&self, rng: &mut RngStream) -> Result<Vec<f64>, InferenceError> {
        if !self.normalized {
            return Err(InferenceError::NotNormalized);
        }
        let mut theta = Vec::with_capacity(self.dim());
        for (grid, lw) in self.grids.iter().zip(self.log_weights.iter()) {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = grid.len() - 1;
            for (i, &w) in lw.iter().enumerate() {
                acc += w.exp();
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            theta.push(grid[chosen]);
        }
        Ok(theta)
    }

    /// Posterior mean per dimension.
    pub fn mean(&self) -> Vec<f64> {
        self.grids
            .iter()
            .zip(self.log_weights.iter())
            .map(|(g, lw)| g.iter().zip(lw.iter()).map(|(x, w)| x * w.exp()).sum())
            .collect()
    }

    /// Probability weights of one dimension.
    pub fn marginal_weights(&self, d: usize) -> Vec<f64> {
        self.log_weights[d].iter().map(|w| w.exp()).collect()
    }

    /// Materialize the joint log weights over the product grid in row-major
    /// order (last dimension fastest).
    pub fn joint_log_weights(&self) -> Vec<f64> {
        let mut joint = vec![0.0];
        for lw in &self.log_weights {
            let mut next = Vec::with_capacity(joint.len() * lw.len());
            for &a in &joint {
                for &b in lw {
                    next.push(a + b);
                }
            }
            joint = next;
        }
        joint
    }
}
