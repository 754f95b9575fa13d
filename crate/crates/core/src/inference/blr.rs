//! Conjugate Bayesian linear regression with known noise variance.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::InferenceError;
use crate::rng::RngStream;

/// Symmetry tolerance of the stored covariance matrix.
pub const COV_SYMMETRY_TOL: f64 = 1e-10;

/// Gaussian posterior over regression coefficients with known noise
/// standard deviation.
#[derive(Debug, Clone)]
pub struct GaussianPosterior {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    noise_sd: f64,
}

impl GaussianPosterior {
    pub fn new(
        mean: DVector<f64>,
        covariance: DMatrix<f64>,
        noise_sd: f64,
    ) -> Result<Self, InferenceError> {
        let n = mean.len();
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(InferenceError::DimensionMismatch(format!(
                "mean has {n} entries but covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > COV_SYMMETRY_TOL {
                    return Err(InferenceError::NotPositiveDefinite(format!(
                        "covariance asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        if Cholesky::new(covariance.clone()).is_none() {
            return Err(InferenceError::NotPositiveDefinite(describe(&covariance)));
        }
        Ok(Self {
            mean,
            covariance,
            noise_sd,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }
}

fn describe(m: &DMatrix<f64>) -> String {
    let diag_min = m.diagonal().iter().cloned().fold(f64::INFINITY, f64::min);
    let diag_max = m
        .diagonal()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    format!(
        "{}x{} matrix, diagonal range [{diag_min:.3e}, {diag_max:.3e}]",
        m.nrows(),
        m.ncols()
    )
}

/// The `N(0, I/4)` prior over the nine glucose regression coefficients.
pub fn default_beta_prior() -> (DVector<f64>, DMatrix<f64>) {
    (DVector::zeros(9), DMatrix::identity(9, 9) * 0.25)
}

/// Conjugate update with known noise: posterior precision is
/// `prior_cov^-1 + X'X / noise_sd^2` and the posterior mean solves the
/// corresponding normal equations through a Cholesky factorization.
pub fn blr_update(
    prior_mean: &DVector<f64>,
    prior_cov: &DMatrix<f64>,
    rows: &[Vec<f64>],
    responses: &[f64],
    noise_sd: f64,
) -> Result<GaussianPosterior, InferenceError> {
    let p = prior_mean.len();
    if prior_cov.nrows() != p || prior_cov.ncols() != p {
        return Err(InferenceError::DimensionMismatch(format!(
            "prior covariance is {}x{}, expected {p}x{p}",
            prior_cov.nrows(),
            prior_cov.ncols()
        )));
    }
    if rows.len() != responses.len() {
        return Err(InferenceError::DimensionMismatch(format!(
            "{} design rows but {} responses",
            rows.len(),
            responses.len()
        )));
    }
    let prior_chol = Cholesky::new(prior_cov.clone())
        .ok_or_else(|| InferenceError::NotPositiveDefinite(describe(prior_cov)))?;
    let prior_precision = prior_chol.inverse();

    let noise_var = noise_sd * noise_sd;
    let mut precision = prior_precision.clone();
    let mut rhs = &prior_precision * prior_mean;
    for (row, &y) in rows.iter().zip(responses.iter()) {
        if row.len() != p {
            return Err(InferenceError::DimensionMismatch(format!(
                "design row has {} entries, expected {p}",
                row.len()
            )));
        }
        let x = DVector::from_column_slice(row);
        precision += &x * x.transpose() / noise_var;
        rhs += x * (y / noise_var);
    }

    let chol = Cholesky::new(precision.clone())
        .ok_or_else(|| InferenceError::NotPositiveDefinite(describe(&precision)))?;
    let mean = chol.solve(&rhs);
    let mut covariance = chol.inverse();
    // Re-symmetrize: the inverse picks up last-bit asymmetry.
    covariance = (covariance.clone() + covariance.transpose()) * 0.5;
    GaussianPosterior::new(mean, covariance, noise_sd)
}

/// Draw `mean + L z` where `L` is a Cholesky factor of the covariance and
/// `z` is standard normal.
pub fn blr_sample(
    post: &GaussianPosterior,
    rng: &mut RngStream,
) -> Result<DVector<f64>, InferenceError> {
    let chol = Cholesky::new(post.covariance().clone())
        .ok_or_else(|| InferenceError::NotPositiveDefinite(describe(post.covariance())))?;
    let z = DVector::from_fn(post.dim(), |_, _| StandardNormal.sample(rng));
    Ok(post.mean() + chol.l() * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_data_returns_the_prior() {
        let (mean, cov) = default_beta_prior();
        let post = blr_update(&mean, &cov, &[], &[], 5.0).unwrap();
        assert_eq!(post.mean(), &mean);
        for i in 0..9 {
            for j in 0..9 {
                assert_abs_diff_eq!(post.covariance()[(i, j)], cov[(i, j)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_unit_row_moves_only_that_component() {
        // One row e_i with response noise_sd^2: the posterior precision is
        // diagonal with 4 + 1/sd^2 at i, so the mean is e_i / (4 + 1/sd^2).
        let (mean, cov) = default_beta_prior();
        let sd = 5.0;
        for i in 0..9 {
            let mut row = vec![0.0; 9];
            row[i] = 1.0;
            let post = blr_update(&mean, &cov, &[row], &[sd * sd], sd).unwrap();
            let expected = 1.0 / (4.0 + 1.0 / (sd * sd));
            for j in 0..9 {
                let want = if j == i { expected } else { 0.0 };
                assert_abs_diff_eq!(post.mean()[j], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn covariance_stays_symmetric_positive_definite() {
        let (mean, cov) = default_beta_prior();
        let mut rng = RngStream::new(11, 0);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                (0..9)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        100.0 * z
                    })
                    .collect()
            })
            .collect();
        let ys: Vec<f64> = (0..40)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z
            })
            .collect();
        let post = blr_update(&mean, &cov, &rows, &ys, 5.0).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                assert!(
                    (post.covariance()[(i, j)] - post.covariance()[(j, i)]).abs()
                        < COV_SYMMETRY_TOL
                );
            }
        }
        assert!(Cholesky::new(post.covariance().clone()).is_some());
    }

    #[test]
    fn non_spd_prior_is_reported() {
        let mean = DVector::zeros(2);
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]); // indefinite
        let err = blr_update(&mean, &cov, &[], &[], 1.0).unwrap_err();
        assert!(matches!(err, InferenceError::NotPositiveDefinite(_)));
    }

    #[test]
    fn near_degenerate_covariance_samples_collapse_to_mean() {
        let mean = DVector::from_element(9, 1.5);
        let cov = DMatrix::identity(9, 9) * 1e-20;
        let post = GaussianPosterior::new(mean.clone(), cov, 5.0).unwrap();
        let mut rng = RngStream::new(12, 0);
        for _ in 0..100 {
            let draw = blr_sample(&post, &mut rng).unwrap();
            for j in 0..9 {
                assert!((draw[j] - mean[j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn identity_covariance_samples_have_unit_variance() {
        let post =
            GaussianPosterior::new(DVector::zeros(9), DMatrix::identity(9, 9), 5.0).unwrap();
        let mut rng = RngStream::new(13, 0);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let draw = blr_sample(&post, &mut rng).unwrap();
            sum += draw[0];
            sum_sq += draw[0] * draw[0];
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn prior_samples_have_half_unit_standard_deviation() {
        let (mean, cov) = default_beta_prior();
        let post = GaussianPosterior::new(mean, cov, 5.0).unwrap();
        let mut rng = RngStream::new(14, 0);
        let n = 100_000;
        let mut sums = [0.0_f64; 9];
        let mut sq = [0.0_f64; 9];
        for _ in 0..n {
            let draw = blr_sample(&post, &mut rng).unwrap();
            for j in 0..9 {
                sums[j] += draw[j];
                sq[j] += draw[j] * draw[j];
            }
        }
        for j in 0..9 {
            let mean = sums[j] / n as f64;
            let sd = (sq[j] / n as f64 - mean * mean).sqrt();
            assert!((sd - 0.5).abs() < 0.02, "component {j} sd {sd}");
        }
    }
}
