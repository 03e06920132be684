//! Expansion of the offsets `eps_i = z_i - (i - 1/2) pi` of the `n = 2`
//! zeros as a power series in `x_i = (-1)^i exp(-(i - 1/2) pi)`.
//!
//! Writing `w = exp(-(i - 1/2) pi - eps)`, the equation `cos z cosh z + 1 = 0`
//! becomes `G(eps, x) = sin eps + 2 x E / (1 + x^2 E^2) = 0` with
//! `E = exp(-eps)`. The coefficients `a_k` of `eps = sum a_k x^k` are exact
//! rationals.

pub mod power_series;

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::Serialize;

use crate::eigen_solver::SingularRecord;
use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;
use power_series::PowerSeries;

/// Largest supported order.
pub const MAX_ORDER: usize = 100;

/// Description of the expansion variable.
pub const EXPANSION_VARIABLE: &str = "x_i = (-1)^i exp(-(i - 1/2) pi)";

/// `a_1 .. a_K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSeries {
    pub coefficients: Vec<Rational>,
    pub variable: &'static str,
}

impl RationalSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `a_k`, 1-based.
    pub fn a(&self, k: usize) -> &Rational {
        &self.coefficients[k - 1]
    }

    /// Coefficients as exact `p/q` strings (integers without denominator).
    pub fn to_strings(&self) -> Vec<String> {
        self.coefficients.iter().map(|a| a.to_string()).collect()
    }
}

/// How the coefficients are extracted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesStrategy {
    /// Newton iteration on series, doubling the number of correct terms.
    Newton,
    /// One coefficient at a time from the residual of the truncated series.
    OrderByOrder,
}

/// `G(eps(x), x)` truncated to the length of `eps`.
pub fn residual(eps: &PowerSeries) -> PowerSeries {
    let len = eps.len();
    let (sin, _) = eps.sin_cos();
    let x_e = (-eps).exp().shift(1);
    let q = &x_e * &x_e;
    let denom = &PowerSeries::constant(1, len) + &q;
    let frac = &x_e * &denom.recip();
    &sin + &frac.scale(&Rational::from(2))
}

/// `dG/deps` along `eps(x)`.
fn residual_derivative(eps: &PowerSeries) -> PowerSeries {
    let len = eps.len();
    let (_, cos) = eps.sin_cos();
    let x_e = (-eps).exp().shift(1);
    let q = &x_e * &x_e;
    let one = PowerSeries::constant(1, len);
    let inv = (&one + &q).recip();
    let num = &x_e * &(&one - &q);
    let frac = &num * &(&inv * &inv);
    &cos - &frac.scale(&Rational::from(2))
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("series order must be at least 1".into()));
    }
    if k > MAX_ORDER {
        return Err(Error::OrderCap { got: k, cap: MAX_ORDER });
    }
    Ok(())
}

/// `a_1 .. a_K` by series Newton iteration.
pub fn compute_a_coefficients(k: usize) -> Result<RationalSeries> {
    compute_a_coefficients_with(k, SeriesStrategy::Newton)
}

pub fn compute_a_coefficients_with(k: usize, strategy: SeriesStrategy) -> Result<RationalSeries> {
    check_order(k)?;
    let len = k + 1;
    let eps = match strategy {
        SeriesStrategy::Newton => {
            let mut eps = PowerSeries::zero(1);
            let mut correct = 1;
            while correct < len {
                correct = (2 * correct).min(len);
                let e = eps.truncated(correct);
                let g = residual(&e);
                let dg = residual_derivative(&e);
                eps = &e - &(&g * &dg.recip());
            }
            eps
        }
        SeriesStrategy::OrderByOrder => {
            let mut eps = PowerSeries::zero(len);
            for j in 1..len {
                let r = residual(&eps.truncated(j + 1));
                eps.set(j, -r.coeff(j).clone());
            }
            eps
        }
    };
    Ok(RationalSeries {
        coefficients: eps.coeffs()[1..].to_vec(),
        variable: EXPANSION_VARIABLE,
    })
}

/// `x_i = (-1)^i exp(-(i - 1/2) pi)`.
pub fn expansion_variable(i: usize, ctx: &PrecisionContext) -> Float {
    let zeta: Float = (ctx.pi() * (2 * i as u32 - 1)) >> 1;
    let x = (-zeta).exp();
    if i % 2 == 1 {
        -x
    } else {
        x
    }
}

/// `sum_{m <= K} a_m x_i^m`.
pub fn epsilon_from_series(series: &RationalSeries, i: usize, k: usize, ctx: &PrecisionContext) -> Result<Float> {
    if i == 0 {
        return Err(Error::InvalidArgument("index i must be at least 1".into()));
    }
    if k == 0 || k > series.order() {
        return Err(Error::InvalidArgument(format!(
            "order {k} is outside 1..={}",
            series.order()
        )));
    }
    let bits = ctx.bits();
    let x = expansion_variable(i, ctx);
    let mut acc = Float::new(bits);
    for a in series.coefficients[..k].iter().rev() {
        acc += Float::with_val(bits, a);
        acc *= &x;
    }
    Ok(acc)
}

/// One index of [`check_epsilon_bounds`].
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonBound {
    pub i: usize,
    pub epsilon: f64,
    /// `2 exp(-zeta_i)` for odd i, `4 exp(-zeta_i)` for even i.
    pub bound: f64,
    pub passed: bool,
    /// `|eps_i| exp(zeta_i)`, tending to 2.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonBoundsReport {
    pub entries: Vec<EpsilonBound>,
}

impl EpsilonBoundsReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

/// Sign and size bounds: `0 < eps_i < 2 exp(-zeta_i)` for odd i and
/// `0 < -eps_i < 4 exp(-zeta_i)` for even i.
pub fn check_epsilon_bounds(records: &[SingularRecord]) -> Result<EpsilonBoundsReport> {
    if records.iter().any(|r| r.n != 2) {
        return Err(Error::InvalidArgument("epsilon bounds apply to n = 2 only".into()));
    }
    let entries = records
        .par_iter()
        .map(|r| {
            let bits = r.z.prec();
            let decay = Float::with_val(bits, -&r.zeta).exp();
            let odd = r.i % 2 == 1;
            let bound = decay.clone() * if odd { 2u32 } else { 4u32 };
            let signed = if odd { r.epsilon.clone() } else { Float::with_val(bits, -&r.epsilon) };
            let passed = signed > 0 && signed < bound;
            let ratio = Float::with_val(bits, r.epsilon.abs_ref()) / &decay;
            EpsilonBound {
                i: r.i,
                epsilon: r.epsilon.to_f64(),
                bound: bound.to_f64(),
                passed,
                ratio: ratio.to_f64(),
            }
        })
        .collect();
    Ok(EpsilonBoundsReport { entries })
}
