//! Minimal double-double arithmetic (about 106 significant bits), used where
//! `x * theta mod 1` has to be classified against a window edge for large `x`.

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn renormalized(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    /// (sqrt(5) - 1) / 2 to double-double accuracy.
    pub fn inverse_golden_mean() -> Self {
        let s = 5f64.sqrt();
        let (p, e) = two_prod(s, s);
        // one Newton step on s^2 = 5; 5 - p is exact
        let corr = ((5.0 - p) - e) / (2.0 * s);
        Self::renormalized((s - 1.0) / 2.0, corr / 2.0)
    }

    /// Fractional part of `x * self + offset`, returned as a double-double in [0, 1).
    pub fn frac_of_affine(self, x: f64, offset: f64) -> Self {
        let (ph, pl) = two_prod(x, self.hi);
        let pl = pl + x * self.lo;
        let (s, e) = two_sum(ph, offset);
        let lo = pl + e;
        let int = s.floor();
        // s - floor(s) is exact
        let mut out = Self::renormalized(s - int, lo);
        if out.hi < 0.0 || (out.hi == 0.0 && out.lo < 0.0) {
            out = Self::renormalized(out.hi + 1.0, out.lo);
        } else if out.hi >= 1.0 {
            out = Self::renormalized(out.hi - 1.0, out.lo);
        }
        out
    }

    /// Sign of `self + other - 1` evaluated in double-double.
    pub fn sum_minus_one_is_nonnegative(self, other: Self) -> bool {
        let (a, ae) = two_sum(self.hi, other.hi);
        let (b, be) = two_sum(a, -1.0);
        let tail = ae + be + self.lo + other.lo;
        b + tail >= 0.0
    }
}
