//! Self-check suite: published values, oracle equivalences, SVD relations,
//! bounds and regularization behavior, each timed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::Serialize;

use crate::char_equation::{build_char_equation, det_direct};
use crate::eigen_solver::singular_values;
use crate::eigenfunctions::{
    apply_jn_closed, eigenfunctions, gram_matrix, gram_matrix_v, identity_deviation, take_v, Normalization,
};
use crate::epsilon_series::{check_epsilon_bounds, compute_a_coefficients, epsilon_from_series};
use crate::error::Result;
use crate::numerics::{integrate_from, parse_decimal, PrecisionContext};
use crate::spectral_cutoff::{
    add_noise, choose_n_discrepancy, reconstruction_errors, semi_convergence_index, synthetic_case, SingularSystem,
    DEFAULT_TAU, SYNTHETIC_TERMS,
};
use crate::unity_spectrum::{dominant_alpha, enumerate_orbits};

/// Zeros of `cos z cosh z + 1`.
pub const N2_ZEROS: [&str; 5] = [
    "1.875104068711961166445308241078214",
    "4.694091132974174576436391778019812",
    "7.854757438237612564861008582764570",
    "10.99554073487546699066734910785470",
    "14.13716839104647058091704681255177",
];

/// `lambda_i` and `gamma_1 .. gamma_4` (last one fixed to 1) for n = 2.
pub const N2_TABLE: [(f64, [f64; 4]); 5] = [
    (0.0808907, [0.1329522, 0.8670478, -0.7340955, 1.0]),
    (0.0020597, [-0.0092337, 1.0092340, -1.0184670, 1.0]),
    (0.0002627, [0.0003878, 0.9996122, -0.9992245, 1.0]),
    (0.0000684, [-0.0000168, 1.0000170, -1.0000340, 1.0]),
    (0.0000250, [0.0000007, 0.9999993, -0.9999986, 1.0]),
];

pub const N3_ZEROS: [&str; 5] = [
    "2.2247729764011889",
    "4.8026572459190195",
    "7.8476475910871745",
    "10.9951601546635699",
    "14.1371941952108977",
];

pub const N4_ZEROS: [&str; 5] = [
    "2.5902718684989891",
    "5.0106222998859963",
    "7.8970686069935174",
    "10.9949247590502524",
    "14.1366518856561214",
];

/// Noise seeds of the synthetic regularization suite, one per noise level.
pub const SUITE_DELTAS: [(f64, u64); 3] = [(1e-1, 100), (1e-2, 101), (1e-3, 102)];

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub bits: u32,
    /// Appends a check that is wrong by construction.
    pub force_failure: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            bits: 256,
            force_failure: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub bits: u32,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Fixed-width table of check, status, seconds and detail.
    pub fn timing_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:<6}  {:>9}  detail\n", "check", "status", "seconds");
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{:<width$}  {:<6}  {:>9.3}  {}\n",
                c.name, status, c.seconds, c.detail
            ));
        }
        out
    }
}

type Check = fn(&PrecisionContext) -> Result<(bool, String)>;

/// Names of the checks in the order they run.
pub fn check_names() -> Vec<&'static str> {
    checks().iter().map(|(n, _)| *n).collect()
}

fn checks() -> Vec<(&'static str, Check)> {
    vec![
        ("n1-closed-form", n1_closed_form),
        ("n2-zeros", n2_zeros),
        ("n2-table", n2_table),
        ("n3-n4-zeros", n3_n4_zeros),
        ("determinant-oracle", determinant_oracle),
        ("svd-relations", svd_relations),
        ("dominant-growth", dominant_growth),
        ("epsilon-series", epsilon_series),
        ("epsilon-bounds", epsilon_bounds),
        ("plot-data", plot_data),
        ("regularization", regularization),
    ]
}

pub fn run_suite(options: &VerifyOptions) -> Result<VerifyReport> {
    let ctx = PrecisionContext::new(options.bits)?;
    let mut list = checks();
    if options.force_failure {
        list.push(("forced-failure", forced_failure));
    }
    let outcomes = list
        .into_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check(&ctx) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome {
                name: name.to_string(),
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    Ok(VerifyReport {
        bits: options.bits,
        checks: outcomes,
    })
}

fn abs_diff(a: &Float, b: &Float) -> f64 {
    Float::with_val(a.prec().max(b.prec()), a - b).abs().to_f64()
}

/// Error below one unit of the last printed digit, or below the working
/// precision when that is coarser.
fn printed_tolerance(printed: &str, ctx: &PrecisionContext) -> f64 {
    let frac = printed.split('.').nth(1).map_or(0, str::len) as i32;
    10f64.powi(-frac).max(ctx.half_precision_eps().to_f64())
}

fn n1_closed_form(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let us = eigenfunctions(1, 20, Normalization::UnitL2, ctx)?;
    let bits = ctx.bits();
    let root2 = Float::with_val(bits, 2).sqrt();
    let mut worst_sigma = 0f64;
    let mut worst_fn = 0f64;
    for u in &us {
        let w: Float = ctx.pi() * (2 * u.record.i as u32 - 1) >> 1;
        let sigma = Float::with_val(bits, w.recip_ref());
        worst_sigma = worst_sigma.max(abs_diff(&sigma, &u.record.sigma) / sigma.to_f64());
        let v = take_v(u);
        for k in 0..32u32 {
            let t = Float::with_val(bits, k) / 31u32;
            let (s, c) = Float::with_val(bits, &w * &t).sin_cos(Float::new(bits));
            worst_fn = worst_fn
                .max(abs_diff(&u.evaluate(&t, ctx), &(c * &root2)))
                .max(abs_diff(&v.evaluate(&t, ctx), &(s * &root2)));
        }
    }
    let tol = ctx.half_precision_eps().to_f64();
    Ok((
        worst_sigma < tol && worst_fn < tol,
        format!("i <= 20: sigma rel {worst_sigma:.1e}, u/v pointwise {worst_fn:.1e}"),
    ))
}

fn n2_zeros(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let recs = singular_values(2, 5, ctx)?;
    let mut ok = true;
    let mut worst = 0f64;
    for (r, printed) in recs.iter().zip(N2_ZEROS) {
        let d = abs_diff(&r.z, &parse_decimal(printed, ctx.bits())?);
        ok &= d < printed_tolerance(printed, ctx);
        worst = worst.max(d);
    }
    Ok((ok, format!("z_1..z_5 max deviation {worst:.1e}")))
}

fn n2_table(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let us = eigenfunctions(2, 5, Normalization::LastCoefficientOne, ctx)?;
    let mut worst_lambda = 0f64;
    let mut worst_gamma = 0f64;
    for (u, (lambda, gammas)) in us.iter().zip(N2_TABLE) {
        worst_lambda = worst_lambda.max((u.record.lambda.to_f64() - lambda).abs());
        for (g, expect) in u.gamma.iter().zip(gammas) {
            worst_gamma = worst_gamma.max((g.to_f64() - expect).abs());
        }
    }
    Ok((
        worst_lambda < 5e-8 && worst_gamma < 1e-6,
        format!("lambda {worst_lambda:.1e}, gamma ratios {worst_gamma:.1e}"),
    ))
}

fn n3_n4_zeros(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst = 0f64;
    for (n, table) in [(3, N3_ZEROS), (4, N4_ZEROS)] {
        let recs = singular_values(n, 5, ctx)?;
        for (r, printed) in recs.iter().zip(table) {
            let t = parse_decimal(printed, ctx.bits())?;
            let unit = 10f64.powi(t.to_f64().log10().floor() as i32 - 15);
            let d = abs_diff(&r.z, &t);
            ok &= d < unit;
            worst = worst.max(d / unit);
        }
    }
    Ok((ok, format!("worst deviation {worst:.2} units of the 16th digit")))
}

fn determinant_oracle(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = ctx.half_precision_eps().to_f64();
    let mut worst = 0f64;
    for n in 1..=6 {
        let f = build_char_equation(n, ctx)?;
        let ratios: Vec<Float> = (0..25)
            .map(|_| {
                let z = ctx.float(rng.random_range(0.5..12.0));
                det_direct(n, &z, ctx) / f.evaluate(&z, ctx)
            })
            .collect();
        for r in &ratios[1..] {
            worst = worst.max(abs_diff(r, &ratios[0]) / ratios[0].to_f64().abs());
        }
    }
    Ok((worst < tol, format!("n <= 6, 25 points: ratio spread {worst:.1e}")))
}

fn svd_relations(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut gram = 0f64;
    let mut jn = 0f64;
    for n in 1..=4 {
        let us = eigenfunctions(n, 10, Normalization::UnitL2, ctx)?;
        let vs: Vec<_> = us.iter().map(take_v).collect();
        gram = gram
            .max(identity_deviation(&gram_matrix(&us, ctx)?))
            .max(identity_deviation(&gram_matrix_v(&vs, ctx)?));
        for (u, v) in us.iter().zip(&vs) {
            let image = apply_jn_closed(u, ctx);
            let sq = integrate_from(
                |t| (image.evaluate(t, ctx) - v.evaluate(t, ctx) * &u.record.sigma).square(),
                4 * (u.record.i + n),
                ctx,
            )?;
            jn = jn.max(sq.sqrt().to_f64());
        }
    }
    Ok((
        gram < 1e-15 && jn < 1e-15,
        format!("n <= 4, i <= 10: gram {gram:.1e}, J^n u - sigma v {jn:.1e}"),
    ))
}

fn dominant_growth(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut ok = true;
    for n in 2..=8 {
        let brute = enumerate_orbits(n, ctx)?
            .into_iter()
            .map(|o| o.alpha)
            .fold(Float::new(ctx.bits()), |m, a| m.max(&a));
        ok &= abs_diff(&brute, &dominant_alpha(n, ctx)) < ctx.half_precision_eps().to_f64();
    }
    let mut worst = 0f64;
    for n in 1..=4 {
        for r in singular_values(n, 10, ctx)?.iter().skip(4) {
            worst = worst.max(r.epsilon.to_f64().abs());
        }
    }
    Ok((
        ok && worst < 1e-3,
        format!("alpha_max n = 2..8 {}, max |z_i - zeta_i| for i >= 5: {worst:.1e}", if ok { "ok" } else { "mismatch" }),
    ))
}

fn epsilon_series(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let s = compute_a_coefficients(10)?;
    let published = ["-2", "-4", "-34/3", "-112/3", "-2006/15", "-1516/3"];
    let exact = s.to_strings()[..6] == published;
    let mut worst = 0f64;
    for r in singular_values(2, 10, ctx)?.iter().skip(3) {
        let est = epsilon_from_series(&s, r.i, 10, ctx)?;
        worst = worst.max(abs_diff(&est, &r.epsilon) / r.epsilon.to_f64().abs());
    }
    Ok((
        exact && worst < 1e-10,
        format!("a_1..a_6 {}, K = 10 vs roots (i >= 4) rel {worst:.1e}", if exact { "exact" } else { "mismatch" }),
    ))
}

/// Precision at which roots up to index `count` resolve the gap
/// `~4 exp(-2 zeta_i)` between `|eps_i|` and its bound.
fn bound_bits(count: usize, ctx: &PrecisionContext) -> u32 {
    let zeta = (count as f64 - 0.5) * std::f64::consts::PI;
    ctx.bits().max(48 + (2.0 * zeta / std::f64::consts::LN_2).ceil() as u32)
}

fn epsilon_bounds(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let hi = PrecisionContext::new(bound_bits(20, ctx))?;
    let report = check_epsilon_bounds(&singular_values(2, 20, &hi)?)?;
    let ratios_ok = report.entries.iter().filter(|e| e.i >= 8).all(|e| e.ratio > 1.9 && e.ratio < 2.1);
    let failing: Vec<usize> = report.entries.iter().filter(|e| !e.passed).map(|e| e.i).collect();
    Ok((
        report.passed() && ratios_ok,
        format!(
            "i <= 20 at {} bits: bounds violated at {failing:?}, ratio band (i >= 8) {}",
            hi.bits(),
            if ratios_ok { "ok" } else { "violated" }
        ),
    ))
}

fn plot_data(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut boundary = 0f64;
    let mut norm = 0f64;
    let one = ctx.float(1);
    for n in 2..=4 {
        for u in eigenfunctions(n, 5, Normalization::UnitL2, ctx)? {
            boundary = boundary.max(u.evaluate(&one, ctx).to_f64().abs());
            let sq = integrate_from(|t| u.evaluate(t, ctx).square(), 4 * (u.record.i + n), ctx)?;
            norm = norm.max((sq.to_f64() - 1.0).abs());
        }
    }
    Ok((
        boundary < 1e-15 && norm < 1e-12,
        format!("n = 2..4, i <= 5: |u(1)| {boundary:.1e}, | ||u|| - 1 | {norm:.1e}"),
    ))
}

/// Semi-convergence, noiseless monotonicity and discrepancy ordering on the
/// synthetic suite for n = 1, 2.
fn regularization(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 1..=2 {
        let system = SingularSystem::compute(n, SYNTHETIC_TERMS, ctx)?;
        let case = synthetic_case(&system)?;
        let clean: Vec<f64> = reconstruction_errors(&case.data, &case.truth, 15, &system, ctx)?
            .iter()
            .map(Float::to_f64)
            .collect();
        let monotone = clean.windows(2).all(|w| w[1] < w[0]);
        let mut cutoffs = Vec::new();
        let mut minima = Vec::new();
        for (delta, seed) in SUITE_DELTAS {
            let noisy = add_noise(&case.data, delta, seed, ctx)?;
            let errors: Vec<f64> = reconstruction_errors(&noisy, &case.truth, 15, &system, ctx)?
                .iter()
                .map(Float::to_f64)
                .collect();
            let argmin = semi_convergence_index(&errors);
            ok &= argmin.is_some();
            minima.push(argmin.map(|k| k + 1));
            cutoffs.push(choose_n_discrepancy(&noisy, delta, DEFAULT_TAU, n, &system, ctx)?.cutoff);
        }
        let ordered = cutoffs.windows(2).all(|w| w[0] <= w[1]);
        ok &= monotone && ordered;
        notes.push(format!("n={n}: best N {minima:?}, discrepancy N {cutoffs:?}"));
    }
    Ok((ok, notes.join("; ")))
}

fn forced_failure(ctx: &PrecisionContext) -> Result<(bool, String)> {
    let sigma = &singular_values(1, 1, ctx)?[0].sigma;
    let wrong = Float::with_val(ctx.bits(), ctx.pi().recip_ref());
    let d = abs_diff(sigma, &wrong);
    Ok((d < ctx.half_precision_eps().to_f64(), format!("sigma_1 vs 1/pi deviates by {d:.3e}")))
}
