//! Minimal double-double arithmetic (~31 significant digits).
//!
//! The log-gamma contract in this crate is an absolute-error bound that is
//! tighter than one f64 ulp of the result over part of its domain, so the
//! Stirling evaluation runs in compensated arithmetic and rounds once at the
//! end. Only the handful of operations that evaluation needs are provided.

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `two_sum` when `|a| >= |b|` is known.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Error-free product via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact sum of two f64 values as a Dd.
    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    /// Exact ratio of two f64 values (numerator and denominator exact).
    pub fn from_ratio(num: f64, den: f64) -> Dd {
        Dd::from_f64(num).div(Dd::from_f64(den))
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, other: f64) -> Dd {
        let (s, e) = two_sum(self.hi, other);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        let (p, e) = two_prod(self.hi, other);
        let e = e + self.lo * other;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }

    /// Reciprocal.
    pub fn recip(self) -> Dd {
        Dd::ONE.div(self)
    }
}

/// `ln 2` to double-double precision.
const LN2: Dd = Dd { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };

/// Natural log of a positive, finite, normal f64, to double-double accuracy.
///
/// Splits `x = m * 2^e` with `m` in `[sqrt(1/2), sqrt(2))` and sums the
/// `atanh` series for `ln m` in compensated arithmetic.
pub(crate) fn ln_dd(x: f64) -> Dd {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    if bits >> 52 == 0 {
        // Subnormal: rescale by an exact power of two, correct afterwards.
        return ln_dd(x * 2f64.powi(108)).sub(LN2.mul_f64(108.0));
    }
    let mut e = ((bits >> 52) & 0x7ff) as i64 - 1022;
    // Mantissa in [0.5, 1): same significand with a fixed exponent.
    let mut m = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | (1022_u64 << 52));
    if m < std::f64::consts::FRAC_1_SQRT_2 {
        m *= 2.0; // exact
        e -= 1;
    }
    // ln m = 2 atanh(t), t = (m - 1) / (m + 1); both endpoints exact:
    // m - 1 by Sterbenz (m in [0.7, 1.42)), m + 1 via two_sum.
    let t = Dd::from_f64(m - 1.0).div(Dd::from_sum(m, 1.0));
    let t2 = t.mul(t);
    let mut term = t;
    let mut sum = t;
    let mut k = 1_u32;
    loop {
        term = term.mul(t2);
        let contrib = term.div(Dd::from_f64((2 * k + 1) as f64));
        sum = sum.add(contrib);
        if contrib.hi.abs() <= 1e-35 * sum.hi.abs() || k > 30 {
            break;
        }
        k += 1;
    }
    sum.mul_f64(2.0).add(LN2.mul_f64(e as f64))
}

/// Natural log of a positive Dd value.
pub(crate) fn ln_dd_of_dd(z: Dd) -> Dd {
    let u = z.lo / z.hi;
    // ln(hi + lo) = ln(hi) + ln(1 + u), with |u| ~ 1e-16.
    ln_dd(z.hi).add_f64(u - 0.5 * u * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_round_trips() {
        let a = Dd::from_ratio(1.0, 3.0);
        let b = a.mul_f64(3.0);
        assert!((b.to_f64() - 1.0).abs() < 1e-30);
        let c = a.add(a).add(a).sub(Dd::ONE);
        assert!(c.to_f64().abs() < 1e-30);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Dd::from_sum(7.0, 3e-17);
        let b = Dd::from_sum(11.0, -5e-18);
        let q = a.mul(b).div(b);
        assert!((q.hi - a.hi).abs() == 0.0 && (q.lo - a.lo).abs() < 1e-30);
    }

    #[test]
    fn ln_matches_known_double_double_values() {
        // ln 2 and ln 10 as (hi, lo) pairs.
        let l2 = ln_dd(2.0);
        assert_eq!(l2.hi, 0.6931471805599453);
        assert!((l2.lo - 2.3190468138462996e-17).abs() < 1e-32);
        let l10 = ln_dd(10.0);
        assert_eq!(l10.hi, 2.302585092994046);
        assert!((l10.lo - -2.1707562233822494e-16).abs() < 1e-31);
    }

    #[test]
    fn ln_handles_wide_range() {
        for &x in &[0.1, 0.9, 1.0 + 1e-9, 3.5, 1e6, 1e13] {
            let v = ln_dd(x);
            assert!((v.to_f64() - x.ln()).abs() <= 2.0 * f64::EPSILON * v.hi.abs().max(1e-300));
        }
        assert_eq!(ln_dd(1.0).to_f64(), 0.0);
    }
}
