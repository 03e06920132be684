//! Arbitrary-precision foundation: precision contexts, Gauss–Legendre
//! quadrature, safeguarded Newton root finding and dense elimination.
//!
//! All reals are MPFR floats ([`rug::Float`]). A [`PrecisionContext`] carries
//! the binary working precision together with the absolute tolerance that
//! iterative procedures (quadrature doubling, root polishing) must reach.

mod linalg;
mod quadrature;
mod roots;

pub use linalg::{determinant, full_pivot_eliminate, Elimination, Matrix};
pub use quadrature::{
    gauss_legendre_rule, integrate, integrate_from, integrate_on, integrate_vec, integrate_vec_on,
    GaussLegendre,
    MAX_DOUBLINGS,
};
pub use roots::{find_root, find_root_fdf, Bracket};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float};

use crate::error::{Error, Result};

/// Binary working precision and acceptance tolerance.
///
/// Invariants: `bits >= 64` and `target_tol >= 2^(16 - bits)`.
#[derive(Clone, Debug)]
pub struct PrecisionContext {
    bits: u32,
    target_tol: Float,
}

impl PrecisionContext {
    pub const DEFAULT_BITS: u32 = 256;
    pub const MIN_BITS: u32 = 64;

    /// Context with the default tolerance `2^(32 - bits)`.
    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::InvalidPrecision(format!(
                "bits = {bits} is below the minimum of {}",
                Self::MIN_BITS
            )));
        }
        let tol = Float::with_val(bits, 1) >> (bits as i32 - 32);
        Ok(PrecisionContext {
            bits,
            target_tol: tol,
        })
    }

    /// Context with an explicit absolute tolerance.
    pub fn with_tolerance(bits: u32, target_tol: f64) -> Result<Self> {
        let mut ctx = Self::new(bits)?;
        let tol = Float::with_val(bits, target_tol);
        let floor = Float::with_val(bits, 1) >> (bits as i32 - 16);
        if !(tol.is_finite() && tol >= floor) {
            return Err(Error::InvalidPrecision(format!(
                "target_tol = {target_tol:e} is below 2^(16-{bits})"
            )));
        }
        ctx.target_tol = tol;
        Ok(ctx)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn tol(&self) -> &Float {
        &self.target_tol
    }

    pub fn tol_f64(&self) -> f64 {
        self.target_tol.to_f64()
    }

    /// Same tolerance, `extra` more bits of working precision.
    pub fn raised(&self, extra: u32) -> Self {
        let bits = self.bits + extra;
        PrecisionContext {
            bits,
            target_tol: Float::with_val(bits, &self.target_tol),
        }
    }

    /// A float at this context's precision.
    pub fn float<T>(&self, value: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits, value)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.bits)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    /// `2^(-k)` at this precision.
    pub fn pow2_neg(&self, k: u32) -> Float {
        Float::with_val(self.bits, 1) >> k as i32
    }

    /// Relative threshold `2^(-bits/2)` used for zero tests on derived
    /// quantities.
    pub fn half_precision_eps(&self) -> Float {
        self.pow2_neg(self.bits / 2)
    }

    /// Number of decimal digits that are meaningful at this precision.
    pub fn decimal_digits(&self) -> usize {
        ((self.bits as f64) * std::f64::consts::LOG10_2).floor() as usize - 2
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::new(Self::DEFAULT_BITS).expect("default precision is valid")
    }
}

/// Binary bits lost to cancellation when a sum dominated by
/// `exp(alpha * z)` is evaluated near one of its zeros.
pub fn cancellation_budget(alpha: f64, z: f64) -> u32 {
    (alpha * z / std::f64::consts::LN_2).ceil().max(0.0) as u32
}

/// `(sin, cos)` of `x` at the precision of `x`.
pub fn sin_cos(x: &Float) -> (Float, Float) {
    let prec = x.prec();
    x.clone().sin_cos(Float::new(prec))
}

/// Decimal rendering with `digits` significant digits.
///
/// Values of moderate magnitude are written in positional notation, others
/// in scientific notation; both forms reparse with [`parse_decimal`].
pub fn to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (negative, mantissa, exp) = x.to_sign_string_exp(10, Some(digits.max(1)));
    let exp = exp.unwrap_or(0);
    let sign = if negative { "-" } else { "" };
    let mantissa = mantissa.trim_end_matches('0');
    let mantissa = if mantissa.is_empty() { "0" } else { mantissa };
    if (-8..=40).contains(&exp) {
        if exp <= 0 {
            format!("{sign}0.{}{}", "0".repeat((-exp) as usize), mantissa)
        } else {
            let e = exp as usize;
            if mantissa.len() <= e {
                format!("{sign}{}{}", mantissa, "0".repeat(e - mantissa.len()))
            } else {
                format!("{sign}{}.{}", &mantissa[..e], &mantissa[e..])
            }
        }
    } else {
        let (head, tail) = mantissa.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{}", exp - 1)
        } else {
            format!("{sign}{head}.{tail}e{}", exp - 1)
        }
    }
}

/// Parses a decimal string at `bits` of precision.
pub fn parse_decimal(s: &str, bits: u32) -> Result<Float> {
    Float::parse(s.trim())
        .map(|p| Float::with_val(bits, p))
        .map_err(|e| Error::InvalidData(format!("cannot parse `{s}` as a real: {e}")))
}

/// `10^(-k)` at the given precision.
pub fn pow10_neg(k: i32, bits: u32) -> Float {
    Float::with_val(bits, 10).pow(-k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_rejects_low_precision() {
        assert!(PrecisionContext::new(32).is_err());
        assert!(PrecisionContext::new(64).is_ok());
    }

    #[test]
    fn tolerance_must_carry_guard_bits() {
        assert!(PrecisionContext::with_tolerance(64, 1e-20).is_err());
        assert!(PrecisionContext::with_tolerance(64, 1e-12).is_ok());
        let ctx = PrecisionContext::new(128).unwrap();
        assert_eq!(ctx.tol_f64(), 2f64.powi(-96));
    }

    #[test]
    fn decimal_round_trip() {
        let ctx = PrecisionContext::new(256).unwrap();
        let samples = [
            ctx.pi(),
            ctx.float(-0.000123456789),
            ctx.float(1e-30) * ctx.pi(),
            ctx.float(12345678.5),
            ctx.float(7) << 200,
        ];
        for x in samples {
            let s = to_decimal(&x, 70);
            let back = parse_decimal(&s, 256).unwrap();
            let rel = Float::with_val(256, &back - &x).abs() / x.clone().abs();
            assert!(rel < 1e-68, "{s}");
        }
        assert_eq!(to_decimal(&ctx.float(2.5), 10), "2.5");
        assert_eq!(to_decimal(&ctx.float(-0.0625), 10), "-0.0625");
        assert_eq!(to_decimal(&ctx.float(100), 10), "100");
    }
}
