//! Contrast-based hypothesis tests: a scaled distance between two fitted
//! parameter sets is asymptotically chi-square under the null of equal laws.

use crate::distances::{self, DistanceMeasure};
use crate::error::{Error, Result};
use crate::estimation;
use crate::specfun;
use crate::wishart::{MatrixSample, WishartParams};

/// Outcome of one two-sample test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// (significance level, reject?) in the order the levels were given.
    pub reject_at: Vec<(f64, bool)>,
}

/// h'(0)·φ''(1) for the measure, the factor converting a distance into an
/// asymptotically chi-square statistic.
pub fn scaling_constant(measure: DistanceMeasure) -> f64 {
    let spec = distances::table_hphi(measure);
    spec.h_prime_at_zero() * spec.phi_second_at_one()
}

/// Degrees of freedom: one per free parameter, so p² for the covariance plus
/// one more when the looks are estimated rather than imposed.
pub fn degrees_of_freedom(p: usize, looks_estimated: bool) -> usize {
    p * p + usize::from(looks_estimated)
}

fn check_sizes(n_a: usize, n_b: usize) -> Result<()> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::DomainError(
            "test statistic needs at least one observation per sample".into(),
        ));
    }
    Ok(())
}

/// Converts an already-computed distance into the test statistic
/// 2·n_a·n_b/(n_a+n_b) · d / (h'(0)·φ''(1)).
pub fn statistic_from_distance(
    measure: DistanceMeasure,
    distance: f64,
    n_a: usize,
    n_b: usize,
) -> Result<f64> {
    check_sizes(n_a, n_b)?;
    if !(distance >= 0.0) {
        return Err(Error::DomainError(format!(
            "distance must be nonnegative, got {distance}"
        )));
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let balance = 2.0 * na * nb / (na + nb);
    Ok(balance * distance / scaling_constant(measure))
}

/// Test statistic from fitted parameters and the sizes of the samples that
/// produced them.
pub fn test_statistic(
    measure: DistanceMeasure,
    fitted_a: &WishartParams,
    fitted_b: &WishartParams,
    n_a: usize,
    n_b: usize,
) -> Result<f64> {
    let d = distances::distance(measure, fitted_a, fitted_b)?;
    statistic_from_distance(measure, d, n_a, n_b)
}

fn check_alphas(alpha_levels: &[f64]) -> Result<()> {
    for &alpha in alpha_levels {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::DomainError(format!(
                "significance level must lie strictly between 0 and 1, got {alpha}"
            )));
        }
    }
    Ok(())
}

/// Assembles p-value and per-level decisions for a statistic.
pub fn outcome_from_statistic(
    statistic: f64,
    dof: usize,
    alpha_levels: &[f64],
) -> Result<TestOutcome> {
    check_alphas(alpha_levels)?;
    let p_value = specfun::chi_square_sf(statistic, dof)?;
    let reject_at = alpha_levels
        .iter()
        .map(|&alpha| (alpha, p_value <= alpha))
        .collect();
    Ok(TestOutcome {
        statistic,
        dof,
        p_value,
        reject_at,
    })
}

fn run_with_fits(
    measure: DistanceMeasure,
    fitted_a: &WishartParams,
    fitted_b: &WishartParams,
    n_a: usize,
    n_b: usize,
    looks_estimated: bool,
    alpha_levels: &[f64],
) -> Result<TestOutcome> {
    let statistic = test_statistic(measure, fitted_a, fitted_b, n_a, n_b)?;
    let dof = degrees_of_freedom(fitted_a.dim(), looks_estimated);
    outcome_from_statistic(statistic, dof, alpha_levels)
}

/// Full two-sample test with both parameter sets fitted by maximum
/// likelihood, looks included.
pub fn run_test(
    measure: DistanceMeasure,
    sample_a: &MatrixSample,
    sample_b: &MatrixSample,
    alpha_levels: &[f64],
) -> Result<TestOutcome> {
    check_alphas(alpha_levels)?;
    let fit_a = estimation::fit(sample_a)?;
    let fit_b = estimation::fit(sample_b)?;
    run_with_fits(
        measure,
        &fit_a.params,
        &fit_b.params,
        sample_a.len(),
        sample_b.len(),
        true,
        alpha_levels,
    )
}

/// Two-sample test with a known, imposed number of looks; only the
/// covariances are estimated, which drops one degree of freedom.
pub fn run_test_fixed_looks(
    measure: DistanceMeasure,
    sample_a: &MatrixSample,
    sample_b: &MatrixSample,
    looks: f64,
    alpha_levels: &[f64],
) -> Result<TestOutcome> {
    check_alphas(alpha_levels)?;
    let fit_a = estimation::fit_fixed_looks(sample_a, looks)?;
    let fit_b = estimation::fit_fixed_looks(sample_b, looks)?;
    run_with_fits(
        measure,
        &fit_a.params,
        &fit_b.params,
        sample_a.len(),
        sample_b.len(),
        false,
        alpha_levels,
    )
}
