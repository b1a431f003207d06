//! Maximum-likelihood estimation of (L, Σ) and the associated Fisher
//! information and Cramér–Rao bounds.
//!
//! Σ̂ is the sample mean in closed form; L̂ solves the profile score equation
//! by safeguarded Newton–Raphson with a bisection fallback.

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::specfun;
use crate::wishart::{MatrixSample, WishartParams};

/// Lower bracket offset above p − 1 for the looks root search.
const BRACKET_MARGIN: f64 = 1e-4;
/// Upper bracket for the looks root search.
const BRACKET_UPPER: f64 = 1e5;
/// Score magnitude accepted as converged.
const SCORE_TOL: f64 = 1e-10;
/// Relative step size accepted as converged.
const STEP_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// A fitted model: parameter estimates plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct MLFit {
    /// Estimated (L̂, Σ̂).
    pub params: WishartParams,
    /// Newton iterations spent on the looks score (0 when looks were fixed).
    pub iterations: usize,
    /// Score value at the returned L̂; for fixed-looks fits this is the score
    /// at the imposed L, which need not be small.
    pub score_residual: f64,
    /// Cramér–Rao variance bound for L̂ at the fitted parameters.
    pub crlb_looks_variance: f64,
}

/// Block-diagonal Fisher information of (L, vec Σ).
#[derive(Debug, Clone)]
pub struct FisherInfo {
    /// Scalar information for L: Σ_{i=0}^{p−1} ψ'(L−i) − p/L.
    pub looks_block: f64,
    /// p²×p² information for vec Σ: L·(Σ⁻¹ ⊗ Σ⁻¹).
    pub sigma_block: HermitianMatrix,
    /// L-vs-Σ cross information; identically zero.
    pub cross_block: Vec<f64>,
}

/// Inverse of the Fisher information, blockwise.
#[derive(Debug, Clone)]
pub struct CramerRaoBound {
    /// Variance floor for unbiased estimation of L.
    pub looks_variance: f64,
    /// p²×p² block (Σ ⊗ Σ)/L.
    pub sigma_block: HermitianMatrix,
}

/// Elementwise arithmetic mean of the sample matrices.
pub fn estimate_sigma(sample: &MatrixSample) -> Result<HermitianMatrix> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let weight = 1.0 / sample.len() as f64;
    let mut iter = sample.iter();
    let mut acc = iter.next().expect("nonempty").scale(weight);
    for item in iter {
        acc = HermitianMatrix::weighted_sum(1.0, &acc, weight, item)?;
    }
    Ok(acc)
}

/// Profile score for L at fixed Σ̂:
/// p·log L + mean_log_det − log_det_sigma_hat − Σ_{i=0}^{p−1} ψ(L−i).
pub fn looks_score(
    looks: f64,
    p: usize,
    mean_log_det: f64,
    log_det_sigma_hat: f64,
) -> Result<f64> {
    check_looks_domain(looks, p)?;
    let mut digamma_sum = 0.0;
    for i in 0..p {
        digamma_sum += specfun::digamma(looks - i as f64)?;
    }
    Ok(p as f64 * looks.ln() + mean_log_det - log_det_sigma_hat - digamma_sum)
}

/// Derivative of `looks_score` in L: p/L − Σ_{i=0}^{p−1} ψ'(L−i).
/// Strictly negative on L > p − 1, so the score is strictly decreasing.
pub fn looks_score_derivative(looks: f64, p: usize) -> Result<f64> {
    check_looks_domain(looks, p)?;
    let mut trigamma_sum = 0.0;
    for i in 0..p {
        trigamma_sum += specfun::trigamma(looks - i as f64)?;
    }
    Ok(p as f64 / looks - trigamma_sum)
}

fn check_looks_domain(looks: f64, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::DomainError("dimension p must be at least 1".into()));
    }
    if !looks.is_finite() || looks <= (p - 1) as f64 {
        return Err(Error::DomainError(format!(
            "looks score requires L > p - 1 = {}, got {looks}",
            p - 1
        )));
    }
    Ok(())
}

/// Safeguarded Newton–Raphson for the root of the looks score.
fn solve_looks(p: usize, mean_log_det: f64, log_det_sigma_hat: f64) -> Result<(f64, usize, f64)> {
    let mut lo = (p - 1) as f64 + BRACKET_MARGIN;
    let mut hi = BRACKET_UPPER;
    let score_lo = looks_score(lo, p, mean_log_det, log_det_sigma_hat)?;
    let score_hi = looks_score(hi, p, mean_log_det, log_det_sigma_hat)?;
    if !(score_lo > 0.0 && score_hi < 0.0) {
        // The score decreases strictly, so a sign change is all that matters.
        return Err(Error::NoRootInBracket);
    }

    // Asymptotically score(L) ≈ c + p²/(2L) with c the log-dispersion gap,
    // giving a good starting point near the root.
    let gap = log_det_sigma_hat - mean_log_det;
    let mut looks = if gap > 0.0 {
        (p as f64 * p as f64 / (2.0 * gap)).clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    };

    for iteration in 1..=MAX_ITER {
        let score = looks_score(looks, p, mean_log_det, log_det_sigma_hat)?;
        if score.abs() < SCORE_TOL {
            return Ok((looks, iteration, score));
        }
        if score > 0.0 {
            lo = looks;
        } else {
            hi = looks;
        }
        let derivative = looks_score_derivative(looks, p)?;
        let mut next = looks - score / derivative;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - looks).abs() < STEP_TOL * looks {
            let residual = looks_score(next, p, mean_log_det, log_det_sigma_hat)?;
            return Ok((next, iteration, residual));
        }
        looks = next;
    }
    Err(Error::NumericalFailure("looks root search did not converge"))
}

fn mean_log_det(sample: &MatrixSample) -> Result<f64> {
    let mut total = 0.0;
    for item in sample.iter() {
        total += item.log_det()?;
    }
    Ok(total / sample.len() as f64)
}

/// ML estimate of the look count given Σ̂ (usually the sample mean).
pub fn estimate_looks(sample: &MatrixSample, sigma_hat: &HermitianMatrix) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mld = mean_log_det(sample)?;
    let lds = sigma_hat.log_det()?;
    Ok(solve_looks(sample.dim(), mld, lds)?.0)
}

/// Full ML fit of both parameters.
pub fn fit(sample: &MatrixSample) -> Result<MLFit> {
    let sigma_hat = estimate_sigma(sample)?;
    let mld = mean_log_det(sample)?;
    let lds = sigma_hat.log_det()?;
    let (looks, iterations, score_residual) = solve_looks(sample.dim(), mld, lds)?;
    let params = WishartParams::new(looks, sigma_hat)?;
    let crlb_looks_variance = cramer_rao(&params)?.looks_variance;
    Ok(MLFit {
        params,
        iterations,
        score_residual,
        crlb_looks_variance,
    })
}

/// Fit with a known look count: Σ̂ is still the sample mean, the root search
/// is skipped, and `score_residual` reports the score at the imposed L.
pub fn fit_fixed_looks(sample: &MatrixSample, looks: f64) -> Result<MLFit> {
    let sigma_hat = estimate_sigma(sample)?;
    let mld = mean_log_det(sample)?;
    let lds = sigma_hat.log_det()?;
    let score_residual = looks_score(looks, sample.dim(), mld, lds)?;
    let params = WishartParams::new(looks, sigma_hat)?;
    let crlb_looks_variance = cramer_rao(&params)?.looks_variance;
    Ok(MLFit {
        params,
        iterations: 0,
        score_residual,
        crlb_looks_variance,
    })
}

/// Fisher information of (L, vec Σ) at the given parameters.
pub fn fisher_info(params: &WishartParams) -> Result<FisherInfo> {
    let p = params.dim();
    let looks = params.looks();
    let mut trigamma_sum = 0.0;
    for i in 0..p {
        trigamma_sum += specfun::trigamma(looks - i as f64)?;
    }
    let looks_block = trigamma_sum - p as f64 / looks;
    let sigma_inv = params.sigma().inverse()?;
    let sigma_block = sigma_inv.kronecker(&sigma_inv).scale(looks);
    Ok(FisherInfo {
        looks_block,
        sigma_block,
        cross_block: vec![0.0; p * p],
    })
}

/// Cramér–Rao bound: blockwise inverse of the Fisher information.
pub fn cramer_rao(params: &WishartParams) -> Result<CramerRaoBound> {
    let info = fisher_info(params)?;
    if info.looks_block <= 0.0 {
        return Err(Error::DomainError(format!(
            "nonpositive looks information {} at L = {}",
            info.looks_block,
            params.looks()
        )));
    }
    let sigma = params.sigma();
    let sigma_block = sigma.kronecker(sigma).scale(1.0 / params.looks());
    Ok(CramerRaoBound {
        looks_variance: 1.0 / info.looks_block,
        sigma_block,
    })
}
