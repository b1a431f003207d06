//! Dense Hermitian matrices over `Complex<f64>` with the small-dimension
//! linear algebra needed for covariance work: Cholesky factorization,
//! log-determinants, inverses, traces of products, and Kronecker products.
//!
//! Matrices here are tiny (polarimetric covariances are 3x3 or 4x4), so
//! everything is direct dense arithmetic with no blocking or pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for accepting input as Hermitian.
const HERMITIAN_REL_TOL: f64 = 1e-9;

/// Relative Cholesky pivot tolerance. Covariance entries span many orders of
/// magnitude, so the pivot floor scales with the largest diagonal entry.
const PIVOT_REL_TOL: f64 = 1e-14;

/// A Hermitian matrix stored as a full row-major `dim * dim` buffer.
///
/// Construction validates Hermitian symmetry and then stores the exactly
/// symmetrized part `(m + m^H) / 2`, so `entry(i, j)` is always the exact
/// conjugate of `entry(j, i)` and diagonal entries are exactly real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Builds a matrix from row-major entries, validating finiteness and
    /// Hermitian symmetry (relative to the largest entry magnitude), then
    /// symmetrizing exactly.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DomainError("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let mut scale: f64 = 0.0;
        for z in &entries {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::ValidationError("matrix entry is not finite".into()));
            }
            scale = scale.max(z.norm());
        }
        let tol = HERMITIAN_REL_TOL * scale;
        for i in 0..dim {
            for j in i..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                if (a - b.conj()).norm() > tol {
                    return Err(Error::ValidationError(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate within relative tolerance {HERMITIAN_REL_TOL:e}"
                    )));
                }
            }
        }
        let mut data = entries;
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(data[i * dim + i].re, 0.0);
            for j in (i + 1)..dim {
                let sym = (data[i * dim + j] + data[j * dim + i].conj()) * 0.5;
                data[i * dim + j] = sym;
                data[j * dim + i] = sym.conj();
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from entries already known to be exactly Hermitian
    /// (sampler output, inverses, Kronecker products of Hermitian factors).
    pub(crate) fn from_raw_unchecked(dim: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    /// The identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    /// A real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::DomainError("matrix dimension must be positive".into()));
        }
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::ValidationError("diagonal entry is not finite".into()));
        }
        let dim = diag.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, d) in diag.iter().enumerate() {
            data[i * dim + i] = Complex64::new(*d, 0.0);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    /// Row-major view of all entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Largest entry magnitude.
    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `c * self`. Negative `c` is allowed; definiteness is not tracked here.
    pub fn scale(&self, c: f64) -> Self {
        let data = self.data.iter().map(|z| z * c).collect();
        Self { dim: self.dim, data }
    }

    /// `wa * a + wb * b` with real weights, which stays exactly Hermitian.
    pub fn weighted_sum(wa: f64, a: &Self, wb: f64, b: &Self) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
        }
        let data = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| x * wa + y * wb)
            .collect();
        Ok(Self { dim: a.dim, data })
    }

    /// Real trace (diagonal entries are exactly real by construction).
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i).re).sum()
    }

    /// Lower Cholesky factor `F` with `self = F F^H`.
    ///
    /// Fails with [`Error::NotPositiveDefinite`] when any pivot drops below
    /// the relative tolerance times the largest diagonal entry.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        let n = self.dim;
        let max_diag = (0..n).map(|i| self.entry(i, i).re).fold(0.0_f64, f64::max);
        if max_diag <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let floor = PIVOT_REL_TOL * max_diag;
        let mut lower = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut pivot = self.entry(j, j).re;
            for k in 0..j {
                pivot -= lower[j * n + k].norm_sqr();
            }
            if pivot <= floor {
                return Err(Error::NotPositiveDefinite);
            }
            let ljj = pivot.sqrt();
            lower[j * n + j] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = self.entry(i, j);
                for k in 0..j {
                    s -= lower[i * n + k] * lower[j * n + k].conj();
                }
                lower[i * n + j] = s / ljj;
            }
        }
        Ok(CholeskyFactor { dim: n, lower })
    }

    /// Natural log of the determinant, via Cholesky. Errors when the matrix
    /// is not positive definite.
    pub fn log_det(&self) -> Result<f64> {
        Ok(self.cholesky()?.log_det())
    }

    /// Inverse via the Cholesky factor; the result is exactly Hermitian.
    pub fn inverse(&self) -> Result<HermitianMatrix> {
        let factor = self.cholesky()?;
        let n = self.dim;
        let l = &factor.lower;
        // m = l^{-1}, lower triangular, by forward substitution.
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            m[j * n + j] = Complex64::new(1.0 / l[j * n + j].re, 0.0);
            for i in (j + 1)..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in j..i {
                    s += l[i * n + k] * m[k * n + j];
                }
                m[i * n + j] = -s / l[i * n + i].re;
            }
        }
        // inverse = m^H m; entry (i, j) = sum_k conj(m[k][i]) m[k][j].
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in j.max(i)..n {
                    s += m[k * n + i].conj() * m[k * n + j];
                }
                if i == j {
                    s = Complex64::new(s.re, 0.0);
                }
                data[i * n + j] = s;
                data[j * n + i] = s.conj();
            }
        }
        Ok(HermitianMatrix::from_raw_unchecked(n, data))
    }

    /// Real part of `tr(self * other)`, which is exactly real for Hermitian
    /// operands. The imaginary residue is a rounding artifact only.
    pub fn trace_of_product(&self, other: &HermitianMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let n = self.dim;
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..n {
            for j in 0..n {
                let prod = self.entry(i, j) * other.entry(j, i);
                re += prod.re;
                im += prod.im;
            }
        }
        debug_assert!(im.abs() <= 1e-9 * re.abs().max(f64::MIN_POSITIVE));
        let _ = im;
        Ok(re)
    }

    /// Kronecker product; the product of Hermitian factors is Hermitian.
    pub fn kronecker(&self, other: &HermitianMatrix) -> HermitianMatrix {
        let (pa, pb) = (self.dim, other.dim);
        let n = pa * pb;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i1 in 0..pa {
            for j1 in 0..pa {
                let a = self.entry(i1, j1);
                for i2 in 0..pb {
                    for j2 in 0..pb {
                        data[(i1 * pb + i2) * n + (j1 * pb + j2)] = a * other.entry(i2, j2);
                    }
                }
            }
        }
        HermitianMatrix::from_raw_unchecked(n, data)
    }
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<Complex64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry of the lower factor (zero above the diagonal).
    pub fn lower_entry(&self, i: usize, j: usize) -> Complex64 {
        if j > i {
            Complex64::new(0.0, 0.0)
        } else {
            self.lower[i * self.dim + j]
        }
    }

    /// Log-determinant of the factored matrix: `2 * sum(log diag)`.
    pub fn log_det(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.lower[i * self.dim + i].re.ln())
            .sum::<f64>()
            * 2.0
    }

    /// `F v` for a length-`dim` vector; used to color white Gaussian draws.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        debug_assert_eq!(v.len(), n);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..=i {
                s += self.lower[i * n + j] * v[j];
            }
            out[i] = s;
        }
        out
    }

    /// `F F^H`, for round-trip checks.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..=j.min(i) {
                    s += self.lower[i * n + k] * self.lower[j * n + k].conj();
                }
                if i == j {
                    s = Complex64::new(s.re, 0.0);
                }
                data[i * n + j] = s;
                data[j * n + i] = s.conj();
            }
        }
        HermitianMatrix::from_raw_unchecked(n, data)
    }
}
