//! Ordered zeros `z_i` of `F_n` and the singular values they determine.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use crate::char_equation::{build_char_equation, CharEquation};
use crate::error::{Error, Result};
use crate::numerics::{find_root_fdf, to_decimal, Bracket, PrecisionContext};

/// Left end of the sign-change scan.
pub const SCAN_START: f64 = 0.1;
/// Scan grid points per unit of `pi`.
pub const SCAN_POINTS_PER_PI: u32 = 64;

/// One singular value of `J^n` with the root it comes from.
#[derive(Clone, Debug)]
pub struct SingularRecord {
    pub n: usize,
    pub i: usize,
    /// `lambda^(-1/(2n))`
    pub z: Float,
    /// `z^(-2n)`
    pub lambda: Float,
    /// `z^(-n)`
    pub sigma: Float,
    /// `(i - 1/2) pi`
    pub zeta: Float,
    /// `z - zeta`
    pub epsilon: Float,
}

impl SingularRecord {
    pub fn new(n: usize, i: usize, z: Float, ctx: &PrecisionContext) -> Self {
        let bits = ctx.bits();
        let sigma = Float::with_val(bits, (&z).pow(-(n as i32)));
        let lambda = Float::with_val(bits, sigma.square_ref());
        let zeta = predict_seed_ctx(i, ctx);
        let epsilon = Float::with_val(bits, &z - &zeta);
        SingularRecord {
            n,
            i,
            z,
            lambda,
            sigma,
            zeta,
            epsilon,
        }
    }

    /// Decimal-string view for serialization.
    pub fn to_view(&self, digits: usize) -> SingularRecordView {
        SingularRecordView {
            n: self.n,
            i: self.i,
            z: to_decimal(&self.z, digits),
            lambda: to_decimal(&self.lambda, digits),
            sigma: to_decimal(&self.sigma, digits),
            zeta: to_decimal(&self.zeta, digits),
            epsilon: to_decimal(&self.epsilon, digits),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularRecordView {
    pub n: usize,
    pub i: usize,
    pub z: String,
    pub lambda: String,
    pub sigma: String,
    pub zeta: String,
    pub epsilon: String,
}

/// `zeta_i = (i - 1/2) pi`, the limit the zeros approach.
pub fn predict_seed(_n: usize, i: usize) -> f64 {
    (i as f64 - 0.5) * std::f64::consts::PI
}

fn predict_seed_ctx(i: usize, ctx: &PrecisionContext) -> Float {
    let twice = 2 * i as u32 - 1;
    (ctx.pi() * twice) >> 1
}

/// Brackets of the first `count` sign changes of the scaled `F_n` on
/// `[SCAN_START, zeta_count + pi/2]`.
fn scan_brackets(f: &CharEquation, count: usize, ctx: &PrecisionContext) -> Result<Vec<Bracket>> {
    if count == 0 {
        return Err(Error::InvalidArgument("root index must be at least 1".into()));
    }
    let limit = predict_seed(f.n, count) + std::f64::consts::FRAC_PI_2;
    let step = std::f64::consts::PI / SCAN_POINTS_PER_PI as f64;
    let points = ((limit - SCAN_START) / step).ceil() as usize + 1;
    let grid: Vec<Float> = (0..points)
        .map(|k| ctx.float(SCAN_START) + ctx.pi() * k as u32 / SCAN_POINTS_PER_PI)
        .collect();
    let signs: Vec<bool> = grid
        .par_iter()
        .map(|z| f.scaled_with_derivative(z, ctx).0.is_sign_negative())
        .collect();
    let mut brackets = Vec::with_capacity(count);
    for k in 1..points {
        if signs[k] != signs[k - 1] {
            brackets.push(Bracket::new(grid[k - 1].clone(), grid[k].clone())?);
            if brackets.len() == count {
                return Ok(brackets);
            }
        }
    }
    Err(Error::MissedRoot {
        found: brackets.len(),
        expected: count,
        limit,
    })
}

fn polish(f: &CharEquation, bracket: Bracket, ctx: &PrecisionContext) -> Result<Float> {
    find_root_fdf(|z| f.scaled_with_derivative(z, ctx), bracket, ctx)
}

/// The i-th positive zero of `F_n`, counting every sign change from
/// `z = 0.1` upward.
pub fn locate_zero(f: &CharEquation, i: usize, ctx: &PrecisionContext) -> Result<Float> {
    let bracket = scan_brackets(f, i, ctx)?.pop().expect("i brackets found");
    polish(f, bracket, ctx)
}

/// The first `count` zeros of an already built `F_n`, ascending.
pub fn zeros(f: &CharEquation, count: usize, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    scan_brackets(f, count, ctx)?
        .into_par_iter()
        .map(|b| polish(f, b, ctx))
        .collect()
}

/// Records for the `count` largest singular values of `J^n`.
pub fn singular_values(n: usize, count: usize, ctx: &PrecisionContext) -> Result<Vec<SingularRecord>> {
    let f = build_char_equation(n, ctx)?;
    singular_values_from(&f, count, ctx)
}

/// As [`singular_values`], reusing a built characteristic function.
pub fn singular_values_from(f: &CharEquation, count: usize, ctx: &PrecisionContext) -> Result<Vec<SingularRecord>> {
    let roots = zeros(f, count, ctx)?;
    let records: Vec<SingularRecord> = roots
        .into_iter()
        .enumerate()
        .map(|(k, z)| SingularRecord::new(f.n, k + 1, z, ctx))
        .collect();
    for pair in records.windows(2) {
        if !(pair[0].z < pair[1].z && pair[0].lambda > pair[1].lambda) {
            return Err(Error::NonConvergence(format!(
                "roots {} and {} are not strictly ordered",
                pair[0].i, pair[1].i
            )));
        }
    }
    Ok(records)
}

/// Result of one asymptotic check.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    pub n: usize,
    pub checks: Vec<AsymptoticCheck>,
}

impl AsymptoticsReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Band ratio allowed for `sigma_i i^n` over the computed records.
pub const BAND_RATIO: f64 = 4.0;

/// Decay checks: strict decrease of `sigma`, a bounded band for
/// `sigma_i i^n`, and for `n = 1` the explicit bounds
/// `1/(pi i) <= sigma_i <= 2/(pi i)`.
pub fn check_asymptotics(records: &[SingularRecord]) -> Result<AsymptoticsReport> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("no records to check".into()))?;
    let n = first.n;
    if records.iter().any(|r| r.n != n) {
        return Err(Error::InvalidArgument("records mix different orders".into()));
    }
    let mut checks = Vec::new();
    let decreasing = records.windows(2).all(|w| w[0].sigma > w[1].sigma);
    checks.push(AsymptoticCheck {
        name: "sigma strictly decreasing".into(),
        passed: decreasing,
        detail: format!("{} records", records.len()),
    });
    let scaled: Vec<f64> = records
        .iter()
        .map(|r| r.sigma.to_f64() * (r.i as f64).powi(n as i32))
        .collect();
    let max = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let min = scaled.iter().cloned().fold(f64::MAX, f64::min);
    checks.push(AsymptoticCheck {
        name: "sigma_i * i^n band".into(),
        passed: min > 0.0 && max / min <= BAND_RATIO,
        detail: format!("min {min:.6e}, max {max:.6e}, ratio {:.4}", max / min),
    });
    if n == 1 {
        let pi = std::f64::consts::PI;
        for r in records {
            let s = r.sigma.to_f64();
            let i = r.i as f64;
            let (lo, hi) = (1.0 / (pi * i), 2.0 / (pi * i));
            checks.push(AsymptoticCheck {
                name: format!("n=1 bounds at i={}", r.i),
                passed: lo <= s && s <= hi,
                detail: format!("{lo:.6e} <= {s:.6e} <= {hi:.6e}"),
            });
        }
    }
    Ok(AsymptoticsReport { n, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::parse_decimal;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256).unwrap()
    }

    fn assert_digits(z: &Float, digits: &str, tol: f64) {
        let expect = parse_decimal(digits, 256).unwrap();
        let d = Float::with_val(256, z - &expect).abs();
        assert!(d < tol, "{} vs {digits}", z.to_f64());
    }

    #[test]
    fn n1_zeros_are_half_odd_multiples_of_pi() {
        let c = ctx();
        let recs = singular_values(1, 12, &c).unwrap();
        for r in &recs {
            assert!(r.epsilon.clone().abs() <= *c.tol());
        }
    }

    #[test]
    fn n2_first_five_zeros() {
        let c = ctx();
        let recs = singular_values(2, 5, &c).unwrap();
        let digits = [
            "1.875104068711961166445308241078214",
            "4.694091132974174576436391778019812",
            "7.854757438237612564861008582764570",
            "10.99554073487546699066734910785470",
            "14.13716839104647058091704681255177",
        ];
        for (r, d) in recs.iter().zip(digits) {
            assert_digits(&r.z, d, 1e-32);
        }
        assert!((recs[0].lambda.to_f64() - 0.0808907).abs() < 5e-8);
        assert!((recs[2].lambda.to_f64() - 0.0002627).abs() < 5e-8);
        assert!(Float::with_val(256, recs[4].epsilon.clone().abs()) < 1e-5);
    }

    #[test]
    fn locate_zero_counts_from_the_left() {
        let c = ctx();
        let f = build_char_equation(4, &c).unwrap();
        let z1 = locate_zero(&f, 1, &c).unwrap();
        assert_digits(&z1, "2.5902718684989891", 1e-16);
        assert!(matches!(locate_zero(&f, 0, &c), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn seeds() {
        assert_eq!(predict_seed(2, 1), std::f64::consts::FRAC_PI_2);
        assert!((predict_seed(3, 3) - 2.5 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn record_consistency() {
        let c = ctx();
        for r in singular_values(3, 6, &c).unwrap() {
            let l = Float::with_val(256, (&r.z).pow(-6));
            assert!(Float::with_val(256, &l - &r.lambda).abs() < Float::with_val(256, &l * 1e-70));
            assert_eq!(Float::with_val(256, r.sigma.square_ref()), r.lambda);
        }
    }

    #[test]
    fn asymptotic_checks() {
        let c = ctx();
        let one = singular_values(1, 20, &c).unwrap();
        assert!(check_asymptotics(&one).unwrap().passed());
        let two = singular_values(2, 10, &c).unwrap();
        let report = check_asymptotics(&two).unwrap();
        assert!(report.passed());
        let scaled: Vec<f64> = two.iter().map(|r| r.sigma.to_f64() * (r.i * r.i) as f64).collect();
        let ratio = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::MAX, f64::min);
        assert!(ratio < BAND_RATIO, "{ratio}");
        let s10 = two[9].sigma.to_f64();
        let approx = (9.5 * std::f64::consts::PI).powi(-2);
        assert!((s10 / approx - 1.0).abs() < 0.01);
        assert!(check_asymptotics(&[]).is_err());
    }

    #[test]
    fn epsilon_sign_alternates_for_n2() {
        let c = ctx();
        for r in singular_values(2, 12, &c).unwrap() {
            if r.i % 2 == 1 {
                assert!(r.epsilon.is_sign_positive() && !r.epsilon.is_zero());
            } else {
                assert!(r.epsilon.is_sign_negative());
            }
        }
    }
}
