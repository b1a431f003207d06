//! Adaptive Simpson quadrature on a finite interval.
//!
//! Used by the scalar divergence oracle and the density normalization
//! checks. The integrands there are smooth except possibly at the left
//! endpoint, which callers smooth away with a substitution.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    (fa + 4.0 * fm + fb) * h / 6.0
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        return Err(Error::QuadratureFailure);
    }
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::QuadratureFailure);
    }
    // Standard Richardson acceptance: Simpson error shrinks 16x per split.
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?;
    Ok(l + r)
}

/// Integrates `f` over `[a, b]` to roughly `rel_tol` relative accuracy
/// (with `abs_floor` as an absolute floor for near-zero integrals).
pub(crate) fn integrate(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::QuadratureFailure);
    }
    // Seed pass over a few panels so a spiky integrand cannot hide from the
    // first Simpson estimate, then refine each panel adaptively.
    let panels = 32;
    let h = (b - a) / panels as f64;
    let mut coarse = 0.0;
    let mut evals = Vec::with_capacity(2 * panels + 1);
    for i in 0..=(2 * panels) {
        let x = a + 0.5 * h * i as f64;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::QuadratureFailure);
        }
        evals.push(v);
    }
    for i in 0..panels {
        coarse += simpson(evals[2 * i], evals[2 * i + 1], evals[2 * i + 2], h);
    }
    let eps = (rel_tol * coarse.abs()).max(abs_floor) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let (pa, pb) = (a + h * i as f64, a + h * (i + 1) as f64);
        let whole = simpson(evals[2 * i], evals[2 * i + 1], evals[2 * i + 2], h);
        total += recurse(
            f,
            pa,
            pb,
            evals[2 * i],
            evals[2 * i + 1],
            evals[2 * i + 2],
            whole,
            eps,
            MAX_DEPTH,
        )?;
    }
    Ok(total)
}
