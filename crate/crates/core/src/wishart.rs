//! The scaled multilook complex Wishart law W(L, Σ) with E(Z) = Σ:
//! log-density, gamma marginals, exact sampling, and ε-contaminated sampling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{CholeskyFactor, HermitianMatrix};
use crate::rng;
use crate::specfun;

/// Margin added to p−1 so the multivariate gamma normalization stays finite.
const LOOKS_GUARD: f64 = 1e-6;

/// Stream salt for matrix draws within one observation.
const SALT_DRAW: u64 = 0;
/// Stream salt for the contamination coin of one observation.
const SALT_MIX: u64 = 1;

/// Parameter pair (L, Σ): equivalent number of looks and covariance.
#[derive(Debug, Clone)]
pub struct WishartParams {
    looks: f64,
    sigma: HermitianMatrix,
}

impl WishartParams {
    /// Validates L > p − 1 (with a small guard) and Σ positive definite.
    pub fn new(looks: f64, sigma: HermitianMatrix) -> Result<Self> {
        let p = sigma.dim() as f64;
        if !looks.is_finite() || looks < p - 1.0 + LOOKS_GUARD {
            return Err(Error::DomainError(format!(
                "looks must exceed p - 1 = {} for a {p}-channel law, got {looks}",
                p - 1.0
            )));
        }
        sigma.cholesky()?;
        Ok(WishartParams { looks, sigma })
    }

    pub fn looks(&self) -> f64 {
        self.looks
    }

    pub fn sigma(&self) -> &HermitianMatrix {
        &self.sigma
    }

    /// Number of polarimetric channels p.
    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }
}

/// An ordered collection of same-dimension positive definite draws.
#[derive(Debug, Clone)]
pub struct MatrixSample {
    dim: usize,
    items: Vec<HermitianMatrix>,
}

impl MatrixSample {
    /// Validates nonemptiness, uniform dimension, and positive definiteness.
    pub fn new(items: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = match items.first() {
            Some(first) => first.dim(),
            None => return Err(Error::EmptySample),
        };
        for item in &items {
            if item.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: item.dim(),
                });
            }
            item.cholesky()?;
        }
        Ok(MatrixSample { dim, items })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[HermitianMatrix] {
        &self.items
    }

    pub fn iter(&self) -> std::slice::Iter<'_, HermitianMatrix> {
        self.items.iter()
    }
}

/// Mixture contamination: draw from W(L, scale·Σ) with probability epsilon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContaminationSpec {
    epsilon: f64,
    scale: f64,
}

impl ContaminationSpec {
    pub fn new(epsilon: f64, scale: f64) -> Result<Self> {
        if !epsilon.is_finite() || !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::DomainError(format!(
                "contamination probability must lie in [0, 1], got {epsilon}"
            )));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::DomainError(format!(
                "contamination scale must be positive, got {scale}"
            )));
        }
        Ok(ContaminationSpec { epsilon, scale })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Log of the W(L, Σ) density at a positive definite matrix z:
/// pL·log L + (L−p)·log|z| − L·log|Σ| − log Γ_p(L) − L·tr(Σ⁻¹z).
pub fn log_density(params: &WishartParams, z: &HermitianMatrix) -> Result<f64> {
    let p = params.dim();
    if z.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: z.dim(),
        });
    }
    let l = params.looks;
    let pf = p as f64;
    let log_det_z = z.log_det()?;
    let log_det_sigma = params.sigma.log_det()?;
    let trace = params.sigma.inverse()?.trace_of_product(z)?;
    Ok(pf * l * l.ln() + (l - pf) * log_det_z
        - l * log_det_sigma
        - specfun::ln_multivariate_gamma(p, l)?
        - l * trace)
}

/// Log-density of a diagonal channel Z_ii: a gamma law with shape L and
/// mean sigma_ii, so that E(Z_ii) = Σ_ii matches E(Z) = Σ.
pub fn gamma_marginal_log_density(sigma_ii: f64, looks: f64, z: f64) -> Result<f64> {
    for (name, v) in [("sigma_ii", sigma_ii), ("looks", looks), ("z", z)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::DomainError(format!(
                "gamma marginal requires positive {name}, got {v}"
            )));
        }
    }
    Ok((looks - 1.0) * z.ln() - looks * (sigma_ii / looks).ln() - specfun::ln_gamma(looks)?
        - z * looks / sigma_ii)
}

/// The sampler needs a physical (integer) look count of at least p so the
/// averaged outer products are almost surely positive definite.
fn integer_looks(params: &WishartParams) -> Result<usize> {
    let l = params.looks;
    if l.fract() != 0.0 || l < params.dim() as f64 {
        return Err(Error::DomainError(format!(
            "sampling requires an integer look count >= p = {}, got {l}",
            params.dim()
        )));
    }
    Ok(l as usize)
}

/// One draw Z = (1/L)·Σ_k s_k s_k^H with s_k = F·g_k, g_k circular complex
/// standard Gaussian; the observation gets its own counter-derived stream.
fn draw_one(factor: &CholeskyFactor, looks: usize, seed: u64, index: u64) -> HermitianMatrix {
    let mut stream = rng::stream(&[seed, index, SALT_DRAW]);
    let p = factor.dim();
    let mut acc = vec![Complex64::new(0.0, 0.0); p * p];
    let mut g = vec![Complex64::new(0.0, 0.0); p];
    for _ in 0..looks {
        for slot in g.iter_mut() {
            let re: f64 = stream.sample(StandardNormal);
            let im: f64 = stream.sample(StandardNormal);
            // 1/√2 scaling gives E|g_i|² = 1.
            *slot = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
        let s = factor.apply(&g);
        for r in 0..p {
            for c in 0..=r {
                acc[r * p + c] += s[r] * s[c].conj();
            }
        }
    }
    let inv_looks = 1.0 / looks as f64;
    let mut data = vec![Complex64::new(0.0, 0.0); p * p];
    for r in 0..p {
        for c in 0..r {
            let v = acc[r * p + c] * inv_looks;
            data[r * p + c] = v;
            data[c * p + r] = v.conj();
        }
        data[r * p + r] = Complex64::new(acc[r * p + r].re * inv_looks, 0.0);
    }
    HermitianMatrix::from_raw_unchecked(p, data)
}

/// Draws n independent observations from W(L, Σ), deterministic in `seed`.
pub fn sample(params: &WishartParams, n: usize, seed: u64) -> Result<MatrixSample> {
    let looks = integer_looks(params)?;
    let factor = params.sigma.cholesky()?;
    let items = (0..n)
        .map(|k| draw_one(&factor, looks, seed, k as u64))
        .collect();
    MatrixSample::new(items)
}

/// Draws n observations where each is independently taken from
/// W(L, scale·Σ) with probability epsilon, else from W(L, Σ).
///
/// The contamination coin uses a stream separate from the matrix draw, so
/// epsilon = 0 reproduces `sample` bitwise and epsilon = 1 reproduces
/// `sample` under the scaled covariance bitwise.
pub fn sample_contaminated(
    params: &WishartParams,
    spec: &ContaminationSpec,
    n: usize,
    seed: u64,
) -> Result<MatrixSample> {
    let looks = integer_looks(params)?;
    let clean = params.sigma.cholesky()?;
    let scaled = params.sigma.scale(spec.scale).cholesky()?;
    let items = (0..n)
        .map(|k| {
            let k = k as u64;
            let contaminated = spec.epsilon > 0.0
                && rng::stream(&[seed, k, SALT_MIX]).gen::<f64>() < spec.epsilon;
            let factor = if contaminated { &scaled } else { &clean };
            draw_one(factor, looks, seed, k)
        })
        .collect();
    MatrixSample::new(items)
}
