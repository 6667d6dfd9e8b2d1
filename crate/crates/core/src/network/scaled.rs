//! Extended-range non-negative reals for normalization constants.
//!
//! A [`Scaled`] value is `mantissa * 2^exponent` where the mantissa is kept in
//! `[2^-LADDER, 2^LADDER)` by shifting whole rungs of `2^LADDER`. Rung shifts
//! are exact powers of two, so rescaling never loses precision.

use std::cmp::Ordering;

const LADDER: i32 = 256;
const RUNG: f64 = 1.157_920_892_373_162e77; // 2^256
const INV_RUNG: f64 = 8.636_168_555_094_445e-78; // 2^-256

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    mantissa: f64,
    exponent: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mantissa: 0.0, exponent: 0 };
    pub const ONE: Scaled = Scaled { mantissa: 1.0, exponent: 0 };

    /// `None` for negative, NaN or infinite input.
    pub fn from_f64(value: f64) -> Option<Scaled> {
        if !(value >= 0.0) || !value.is_finite() {
            return None;
        }
        Some(Scaled { mantissa: value, exponent: 0 }.normalized())
    }

    fn normalized(mut self) -> Scaled {
        if self.mantissa == 0.0 {
            return Scaled::ZERO;
        }
        while self.mantissa >= RUNG {
            self.mantissa *= INV_RUNG;
            self.exponent += LADDER as i64;
        }
        while self.mantissa < INV_RUNG {
            self.mantissa *= RUNG;
            self.exponent -= LADDER as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.is_finite()
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    /// Binary exponent of the rung the mantissa sits on.
    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn mul(self, rhs: Scaled) -> Scaled {
        Scaled { mantissa: self.mantissa * rhs.mantissa, exponent: self.exponent + rhs.exponent }.normalized()
    }

    pub fn mul_f64(self, rhs: f64) -> Scaled {
        Scaled { mantissa: self.mantissa * rhs, exponent: self.exponent }.normalized()
    }

    pub fn add(self, rhs: Scaled) -> Scaled {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exponent >= rhs.exponent { (self, rhs) } else { (rhs, self) };
        let shift = lo.exponent - hi.exponent;
        if shift < -1100 {
            return hi;
        }
        let mantissa = hi.mantissa + lo.mantissa * pow2(shift);
        Scaled { mantissa, exponent: hi.exponent }.normalized()
    }

    /// Nearest `f64`; saturates to `inf` or `0` outside the double range.
    pub fn to_f64(self) -> f64 {
        self.mantissa * pow2(self.exponent)
    }

    /// Natural logarithm, `-inf` for zero.
    pub fn ln(self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.ln() + self.exponent as f64 * std::f64::consts::LN_2
    }

    /// `self / rhs` as a plain double.
    pub fn ratio(self, rhs: Scaled) -> f64 {
        (self.mantissa / rhs.mantissa) * pow2(self.exponent - rhs.exponent)
    }
}

impl PartialOrd for Scaled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_zero() || other.is_zero() {
            return self.mantissa.partial_cmp(&other.mantissa);
        }
        match self.exponent.cmp(&other.exponent) {
            Ordering::Equal => self.mantissa.partial_cmp(&other.mantissa),
            // mantissas on adjacent rungs can still overlap
            _ => self.ln().partial_cmp(&other.ln()),
        }
    }
}

fn pow2(exp: i64) -> f64 {
    if exp > 2000 {
        f64::INFINITY
    } else if exp < -2000 {
        0.0
    } else {
        // split to stay inside the exponent range of powi
        let half = exp / 2;
        2f64.powi(half as i32) * 2f64.powi((exp - half) as i32)
    }
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ exp(v)`, `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rung_constants_are_exact() {
        assert_eq!(RUNG, 2f64.powi(256));
        assert_eq!(INV_RUNG, 2f64.powi(-256));
    }

    #[test]
    fn round_trip_and_arithmetic() {
        let a = Scaled::from_f64(3.0).unwrap();
        let b = Scaled::from_f64(0.25).unwrap();
        assert_eq!(a.mul(b).to_f64(), 0.75);
        assert_eq!(a.add(b).to_f64(), 3.25);
        assert_eq!(a.ratio(b), 12.0);
        assert!(Scaled::from_f64(-1.0).is_none());
        assert!(Scaled::from_f64(f64::NAN).is_none());
        assert!(Scaled::from_f64(f64::INFINITY).is_none());
    }

    #[test]
    fn survives_beyond_double_range() {
        let tiny = Scaled::from_f64(1e-200).unwrap();
        let prod = tiny.mul(tiny).mul(tiny); // 1e-600
        assert_eq!(prod.to_f64(), 0.0);
        assert!((prod.ln() - (-600.0 * 10f64.ln())).abs() < 1e-9);
        let big = Scaled::from_f64(1e200).unwrap().mul(Scaled::from_f64(1e200).unwrap());
        assert!((prod.mul(big).to_f64() - 1e-200).abs() < 1e-212);
        assert!(big.ratio(prod).is_infinite());
    }

    #[test]
    fn add_across_rungs() {
        let x = Scaled::from_f64(1e300).unwrap().mul(Scaled::from_f64(1e300).unwrap());
        let y = Scaled::from_f64(1e299).unwrap().mul(Scaled::from_f64(1e300).unwrap());
        let s = x.add(y);
        assert!((s.ln() - (1.1f64.ln() + 600.0 * 10f64.ln())).abs() < 1e-12);
        assert!(s > x);
        assert!(y < x);
    }

    #[test]
    fn log_helpers() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.0), 1.0);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[0.0, 0.0, 0.0]) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
