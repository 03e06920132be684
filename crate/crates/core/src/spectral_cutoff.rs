//! Spectral cut-off regularization of `J^n x = y`:
//! `x_N = sum_{i <= N} <y, v_i> / sigma_i u_i`.

use std::fmt;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rug::Float;
use serde::Serialize;

use crate::eigen_solver::{singular_values, SingularRecord};
use crate::eigenfunctions::{eigenfunctions_for, take_v, EigenFunction, Normalization, VFunction};
use crate::error::{Error, Result};
use crate::numerics::{integrate_vec_on, PrecisionContext};

/// Default safety factor of the discrepancy principle.
pub const DEFAULT_TAU: f64 = 1.5;
/// Number of sine modes in the noise model.
pub const NOISE_MODES: usize = 64;

type Eval = dyn Fn(&Float, &PrecisionContext) -> Result<Float> + Send + Sync;

/// Sampled values with piecewise cubic Hermite interpolation.
#[derive(Clone, Debug)]
pub struct SampleTable {
    t: Vec<Float>,
    y: Vec<Float>,
    slopes: Vec<Float>,
}

impl SampleTable {
    /// Grid must be strictly increasing inside [0, 1] with at least two
    /// points.
    pub fn new(t: Vec<Float>, y: Vec<Float>) -> Result<Self> {
        if t.len() != y.len() {
            return Err(Error::InvalidData(format!(
                "{} grid points but {} values",
                t.len(),
                y.len()
            )));
        }
        if t.len() < 2 {
            return Err(Error::InvalidData("a sample table needs at least two points".into()));
        }
        if t[0] < 0 || t[t.len() - 1] > 1 {
            return Err(Error::InvalidData("sample grid must lie in [0, 1]".into()));
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidData("sample grid must be strictly increasing".into()));
        }
        let slopes = hermite_slopes(&t, &y);
        Ok(SampleTable { t, y, slopes })
    }

    pub fn grid(&self) -> &[Float] {
        &self.t
    }

    pub fn values(&self) -> &[Float] {
        &self.y
    }

    pub fn evaluate(&self, x: &Float, bits: u32) -> Float {
        let last = self.t.len() - 2;
        let j = match self.t.binary_search_by(|p| p.partial_cmp(x).unwrap()) {
            Ok(k) => k.min(last),
            Err(0) => 0,
            Err(k) => (k - 1).min(last),
        };
        let h = Float::with_val(bits, &self.t[j + 1] - &self.t[j]);
        let s = Float::with_val(bits, x - &self.t[j]) / &h;
        let s2 = Float::with_val(bits, s.square_ref());
        let s3 = Float::with_val(bits, &s2 * &s);
        // Hermite basis
        let h00 = Float::with_val(bits, &s3 * 2u32) - Float::with_val(bits, &s2 * 3u32) + 1u32;
        let h10 = Float::with_val(bits, &s3 - Float::with_val(bits, &s2 * 2u32)) + &s;
        let h01 = Float::with_val(bits, &s2 * 3u32) - Float::with_val(bits, &s3 * 2u32);
        let h11 = Float::with_val(bits, &s3 - &s2);
        h00 * &self.y[j]
            + h10 * &h * &self.slopes[j]
            + h01 * &self.y[j + 1]
            + h11 * &h * &self.slopes[j + 1]
    }
}

/// Three-point derivative estimates, exact for quadratics.
fn hermite_slopes(t: &[Float], y: &[Float]) -> Vec<Float> {
    let bits = y[0].prec();
    let m = t.len();
    let h: Vec<Float> = t.windows(2).map(|w| Float::with_val(bits, &w[1] - &w[0])).collect();
    let d: Vec<Float> = (0..m - 1)
        .map(|j| Float::with_val(bits, &y[j + 1] - &y[j]) / &h[j])
        .collect();
    if m == 2 {
        return vec![d[0].clone(), d[0].clone()];
    }
    let mut out = Vec::with_capacity(m);
    let end = |d_near: &Float, d_far: &Float, h_near: &Float, h_far: &Float| {
        let w = Float::with_val(bits, h_near / Float::with_val(bits, h_near + h_far));
        Float::with_val(bits, d_near - d_far) * w + d_near
    };
    out.push(end(&d[0], &d[1], &h[0], &h[1]));
    for j in 1..m - 1 {
        let num = Float::with_val(bits, &d[j] * &h[j - 1]) + Float::with_val(bits, &d[j - 1] * &h[j]);
        out.push(num / Float::with_val(bits, &h[j - 1] + &h[j]));
    }
    out.push(end(&d[m - 2], &d[m - 3], &h[m - 2], &h[m - 3]));
    out
}

/// `sum_k c_k sqrt(2) sin(k pi t)`, `k = 1..`.
#[derive(Clone, Debug)]
pub struct TrigPerturbation {
    pub coeffs: Vec<Float>,
}

impl TrigPerturbation {
    /// L2 norm, exact because the modes are orthonormal.
    pub fn norm(&self) -> Float {
        let bits = self.coeffs.first().map_or(64, |c| c.prec());
        self.coeffs
            .iter()
            .fold(Float::new(bits), |s, c| s + Float::with_val(bits, c.square_ref()))
            .sqrt()
    }

    pub fn evaluate(&self, t: &Float, ctx: &PrecisionContext) -> Float {
        let bits = ctx.bits();
        let theta = ctx.pi() * t;
        let (s1, c1) = theta.sin_cos(Float::new(bits));
        let two_cos = c1 * 2u32;
        // sin(k theta) = 2 cos(theta) sin((k-1) theta) - sin((k-2) theta)
        let mut prev = Float::new(bits);
        let mut cur = s1;
        let mut acc = Float::new(bits);
        for c in &self.coeffs {
            acc += Float::with_val(bits, c * &cur);
            let next = Float::with_val(bits, &two_cos * &cur) - &prev;
            prev = cur;
            cur = next;
        }
        acc * Float::with_val(bits, 2).sqrt()
    }
}

#[derive(Clone)]
pub enum Representation {
    Function(Arc<Eval>),
    Samples(Arc<SampleTable>),
}

/// Data on [0, 1]: a callable or an interpolated sample table, optionally
/// perturbed by trigonometric noise of L2 norm `noise_level`.
#[derive(Clone)]
pub struct DataFunction {
    repr: Representation,
    perturbation: Option<Arc<TrigPerturbation>>,
    noise_level: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for DataFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Representation::Function(_) => "function".to_string(),
            Representation::Samples(s) => format!("{} samples", s.t.len()),
        };
        f.debug_struct("DataFunction")
            .field("representation", &kind)
            .field("noise_level", &self.noise_level)
            .field("perturbed", &self.perturbation.is_some())
            .finish()
    }
}

impl DataFunction {
    /// Wraps an infallible function of `t`.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&Float, &PrecisionContext) -> Float + Send + Sync + 'static,
    {
        Self::from_fallible(move |t, ctx| Ok(f(t, ctx)), vec![0.0, 1.0])
    }

    /// Wraps a fallible function; `breakpoints` mark points where it is not
    /// smooth, and always include 0 and 1.
    pub fn from_fallible<F>(f: F, breakpoints: Vec<f64>) -> Self
    where
        F: Fn(&Float, &PrecisionContext) -> Result<Float> + Send + Sync + 'static,
    {
        DataFunction {
            repr: Representation::Function(Arc::new(f)),
            perturbation: None,
            noise_level: 0.0,
            breakpoints: normalize_breaks(breakpoints),
        }
    }

    pub fn from_samples(table: SampleTable) -> Self {
        let breaks = table.t.iter().map(|t| t.to_f64()).collect();
        DataFunction {
            repr: Representation::Samples(Arc::new(table)),
            perturbation: None,
            noise_level: 0.0,
            breakpoints: normalize_breaks(breaks),
        }
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn perturbation(&self) -> Option<&TrigPerturbation> {
        self.perturbation.as_deref()
    }

    /// Points in [0, 1] where the function may lose smoothness, sorted,
    /// starting at 0 and ending at 1.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn evaluate(&self, t: &Float, ctx: &PrecisionContext) -> Result<Float> {
        let base = match &self.repr {
            Representation::Function(f) => f(t, ctx)?,
            Representation::Samples(s) => s.evaluate(t, ctx.bits()),
        };
        Ok(match &self.perturbation {
            Some(p) => base + p.evaluate(t, ctx),
            None => base,
        })
    }

    /// `||self||_2`.
    pub fn l2_norm(&self, ctx: &PrecisionContext) -> Result<Float> {
        let v = integrate_pieces(|t| Ok(vec![self.evaluate(t, ctx)?.square()]), 1, self.breakpoints(), 8, ctx)?;
        Ok(v[0].clone().sqrt())
    }
}

fn normalize_breaks(mut b: Vec<f64>) -> Vec<f64> {
    b.push(0.0);
    b.push(1.0);
    b.retain(|x| (0.0..=1.0).contains(x));
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup();
    b
}

fn merge_breaks(a: &[f64], b: &[f64]) -> Vec<f64> {
    normalize_breaks(a.iter().chain(b).cloned().collect())
}

/// Vector integral over `[lo, hi]`, split at the given breakpoints, of an
/// integrand that may fail.
pub fn integrate_pieces_on<F>(
    f: F,
    dim: usize,
    lo: &Float,
    hi: &Float,
    breakpoints: &[f64],
    start: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<Float>>
where
    F: Fn(&Float) -> Result<Vec<Float>> + Sync,
{
    let bits = ctx.bits();
    let mut cuts = vec![Float::with_val(bits, lo)];
    for b in breakpoints {
        if *b > *lo && *b < *hi {
            cuts.push(Float::with_val(bits, *b));
        }
    }
    cuts.push(Float::with_val(bits, hi));
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let mut total = vec![Float::new(bits); dim];
    for w in cuts.windows(2) {
        if w[0] >= w[1] {
            continue;
        }
        let part = integrate_vec_on(
            |t| match f(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.lock().expect("poisoned").get_or_insert(e);
                    vec![Float::new(bits); dim]
                }
            },
            dim,
            &w[0],
            &w[1],
            start,
            ctx,
        );
        if let Some(e) = failure.lock().expect("poisoned").take() {
            return Err(e);
        }
        for (acc, v) in total.iter_mut().zip(part?) {
            *acc += v;
        }
    }
    Ok(total)
}

/// As [`integrate_pieces_on`] over [0, 1].
pub fn integrate_pieces<F>(f: F, dim: usize, breakpoints: &[f64], start: usize, ctx: &PrecisionContext) -> Result<Vec<Float>>
where
    F: Fn(&Float) -> Result<Vec<Float>> + Sync,
{
    let bits = ctx.bits();
    integrate_pieces_on(f, dim, &Float::new(bits), &Float::with_val(bits, 1), breakpoints, start, ctx)
}

fn factorial(k: usize, bits: u32) -> Float {
    (1..=k as u32).fold(Float::with_val(bits, 1), |f, j| f * j)
}

/// Context for integrals nested inside another quadrature: 32 more bits and
/// a tolerance `2^32` times tighter.
fn inner_context(ctx: &PrecisionContext) -> PrecisionContext {
    PrecisionContext::new(ctx.bits() + 32).expect("raised precision is valid")
}

/// `(J^n x)(s) = int_0^s (s - t)^(n-1) / (n-1)! x(t) dt`, by quadrature.
pub fn forward_jn(x: &DataFunction, n: usize) -> DataFunction {
    let x = x.clone();
    let breaks = x.breakpoints.clone();
    DataFunction::from_fallible(
        move |s, ctx| {
            let bits = ctx.bits();
            if s.is_zero() {
                return Ok(Float::new(bits));
            }
            let inner = inner_context(ctx);
            let v = integrate_pieces_on(
                |t| {
                    let w = Float::with_val(inner.bits(), s - t).pow_ref_u(n - 1);
                    Ok(vec![x.evaluate(t, &inner)? * w])
                },
                1,
                &Float::new(inner.bits()),
                &Float::with_val(inner.bits(), s),
                x.breakpoints(),
                8,
                &inner,
            )?;
            Ok(Float::with_val(bits, &v[0] / factorial(n - 1, inner.bits())))
        },
        breaks,
    )
}

/// `((J^n)* z)(t) = int_t^1 (s - t)^(n-1) / (n-1)! z(s) ds`, by quadrature.
pub fn adjoint_jn(z: &DataFunction, n: usize) -> DataFunction {
    let z = z.clone();
    let breaks = z.breakpoints.clone();
    DataFunction::from_fallible(
        move |t, ctx| {
            let bits = ctx.bits();
            if *t >= 1 {
                return Ok(Float::new(bits));
            }
            let inner = inner_context(ctx);
            let v = integrate_pieces_on(
                |s| {
                    let w = Float::with_val(inner.bits(), s - t).pow_ref_u(n - 1);
                    Ok(vec![z.evaluate(s, &inner)? * w])
                },
                1,
                &Float::with_val(inner.bits(), t),
                &Float::with_val(inner.bits(), 1),
                z.breakpoints(),
                8,
                &inner,
            )?;
            Ok(Float::with_val(bits, &v[0] / factorial(n - 1, inner.bits())))
        },
        breaks,
    )
}

trait PowU {
    fn pow_ref_u(self, k: usize) -> Float;
}

impl PowU for Float {
    fn pow_ref_u(self, k: usize) -> Float {
        let mut out = Float::with_val(self.prec(), 1);
        for _ in 0..k {
            out *= &self;
        }
        out
    }
}

/// `y + eta` with `eta = sum_{k <= 64} c_k sqrt(2) sin(k pi t)`, the `c_k`
/// standard normal from a seeded ChaCha8 stream and rescaled so that
/// `||eta||_2 = delta` exactly.
pub fn add_noise(y: &DataFunction, delta: f64, seed: u64, ctx: &PrecisionContext) -> Result<DataFunction> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level {delta} must be finite and >= 0")));
    }
    let mut out = y.clone();
    if delta == 0.0 {
        return Ok(out);
    }
    let bits = ctx.bits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..NOISE_MODES).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut p = TrigPerturbation {
        coeffs: raw.into_iter().map(|c| Float::with_val(bits, c)).collect(),
    };
    let scale = Float::with_val(bits, delta) / p.norm();
    for c in &mut p.coeffs {
        *c *= &scale;
    }
    if let Some(existing) = &y.perturbation {
        for (c, e) in p.coeffs.iter_mut().zip(&existing.coeffs) {
            *c += e;
        }
    }
    out.perturbation = Some(Arc::new(p));
    out.noise_level = delta;
    Ok(out)
}

/// Singular triples `(sigma_i, u_i, v_i)`, `i = 1..len`.
#[derive(Clone, Debug)]
pub struct SingularSystem {
    pub n: usize,
    pub records: Vec<SingularRecord>,
    pub us: Vec<EigenFunction>,
    pub vs: Vec<VFunction>,
}

impl SingularSystem {
    pub fn compute(n: usize, count: usize, ctx: &PrecisionContext) -> Result<Self> {
        let records = singular_values(n, count, ctx)?;
        let us = eigenfunctions_for(&records, Normalization::UnitL2, ctx)?;
        let vs = us.iter().map(take_v).collect();
        Ok(SingularSystem { n, records, us, vs })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn check(&self, n: usize, count: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::InvalidArgument(format!(
                "system has order {}, problem has order {n}",
                self.n
            )));
        }
        if count > self.len() {
            return Err(Error::InsufficientSystem {
                requested: count,
                available: self.len(),
            });
        }
        Ok(())
    }

    fn start(&self, count: usize) -> usize {
        4 * (count + self.n)
    }

    /// `<y, v_i>` for `i = 1..=count`.
    pub fn data_coefficients(&self, y: &DataFunction, count: usize, ctx: &PrecisionContext) -> Result<Vec<Float>> {
        self.check(self.n, count)?;
        if count == 0 {
            return Ok(Vec::new());
        }
        integrate_pieces(
            |t| {
                let yt = y.evaluate(t, ctx)?;
                Ok(self.vs[..count]
                    .iter()
                    .map(|v| v.evaluate(t, ctx) * &yt)
                    .collect())
            },
            count,
            y.breakpoints(),
            self.start(count),
            ctx,
        )
    }
}

/// Truncated expansion `x_N`.
#[derive(Clone, Debug)]
pub struct CutoffSolution {
    pub n: usize,
    pub cutoff: usize,
    /// `<y, v_i> / sigma_i`, `i = 1..=cutoff`.
    pub coefficients: Vec<Float>,
    us: Vec<EigenFunction>,
}

impl CutoffSolution {
    pub fn evaluate(&self, t: &Float, ctx: &PrecisionContext) -> Float {
        self.coefficients
            .iter()
            .zip(&self.us)
            .fold(Float::new(ctx.bits()), |acc, (c, u)| acc + u.evaluate(t, ctx) * c)
    }

    /// The reconstruction as data.
    pub fn to_data(&self) -> DataFunction {
        let s = self.clone();
        DataFunction::from_fn(move |t, ctx| s.evaluate(t, ctx))
    }
}

/// `x_N^delta = sum_{i <= N} <y, v_i> / sigma_i u_i`.
pub fn cutoff_solve(
    y: &DataFunction,
    n: usize,
    cutoff: usize,
    system: &SingularSystem,
    ctx: &PrecisionContext,
) -> Result<CutoffSolution> {
    system.check(n, cutoff)?;
    let b = system.data_coefficients(y, cutoff, ctx)?;
    Ok(solution_from(system, &b, cutoff))
}

fn solution_from(system: &SingularSystem, b: &[Float], cutoff: usize) -> CutoffSolution {
    CutoffSolution {
        n: system.n,
        cutoff,
        coefficients: b[..cutoff]
            .iter()
            .zip(&system.records)
            .map(|(b, r)| Float::with_val(b.prec(), b / &r.sigma))
            .collect(),
        us: system.us[..cutoff].to_vec(),
    }
}

/// Outcome of the discrepancy principle.
#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyChoice {
    pub cutoff: usize,
    /// `||J^n x_N - y||_2` at the chosen N.
    pub discrepancy: f64,
    /// True when no N up to the system size met the bound.
    pub cap_reached: bool,
    /// Residual norms for `N = 0..=len`.
    pub residuals: Vec<f64>,
}

/// Smallest N with `||J^n x_N - y||_2 <= tau delta`.
pub fn choose_n_discrepancy(
    y_delta: &DataFunction,
    delta: f64,
    tau: f64,
    n: usize,
    system: &SingularSystem,
    ctx: &PrecisionContext,
) -> Result<DiscrepancyChoice> {
    if !(tau > 1.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must exceed 1")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    system.check(n, system.len())?;
    let residuals = residual_norms(y_delta, system, ctx)?;
    let bound = tau * delta;
    let (cutoff, cap_reached) = match residuals.iter().position(|r| *r <= bound) {
        Some(k) => (k, false),
        None => (system.len(), true),
    };
    Ok(DiscrepancyChoice {
        cutoff,
        discrepancy: residuals[cutoff],
        cap_reached,
        residuals,
    })
}

/// `||J^n x_N - y||_2` for `N = 0..=len`, using
/// `J^n x_N = sum_{i <= N} <y, v_i> v_i`.
pub fn residual_norms(y: &DataFunction, system: &SingularSystem, ctx: &PrecisionContext) -> Result<Vec<f64>> {
    let m = system.len();
    let b = system.data_coefficients(y, m, ctx)?;
    let bits = ctx.bits();
    let squares = integrate_pieces(
        |t| {
            let mut r = y.evaluate(t, ctx)?;
            let mut out = Vec::with_capacity(m + 1);
            out.push(Float::with_val(bits, r.square_ref()));
            for (bi, v) in b.iter().zip(&system.vs) {
                r -= v.evaluate(t, ctx) * bi;
                out.push(Float::with_val(bits, r.square_ref()));
            }
            Ok(out)
        },
        m + 1,
        y.breakpoints(),
        system.start(m),
        ctx,
    )?;
    Ok(squares.into_iter().map(|s| s.sqrt().to_f64()).collect())
}

/// `||x_N - x||_2` for `N = 1..=max_cutoff`.
pub fn reconstruction_errors(
    y: &DataFunction,
    truth: &DataFunction,
    max_cutoff: usize,
    system: &SingularSystem,
    ctx: &PrecisionContext,
) -> Result<Vec<Float>> {
    system.check(system.n, max_cutoff)?;
    let b = system.data_coefficients(y, max_cutoff, ctx)?;
    let sol = solution_from(system, &b, max_cutoff);
    let bits = ctx.bits();
    let squares = integrate_pieces(
        |t| {
            let mut e = -truth.evaluate(t, ctx)?;
            let mut out = Vec::with_capacity(max_cutoff);
            for (c, u) in sol.coefficients.iter().zip(&sol.us) {
                e += u.evaluate(t, ctx) * c;
                out.push(Float::with_val(bits, e.square_ref()));
            }
            Ok(out)
        },
        max_cutoff,
        &merge_breaks(y.breakpoints(), truth.breakpoints()),
        system.start(max_cutoff),
        ctx,
    )?;
    Ok(squares.into_iter().map(|s| s.sqrt()).collect())
}

/// `||a - b||_2`.
pub fn l2_distance(a: &DataFunction, b: &DataFunction, start: usize, ctx: &PrecisionContext) -> Result<Float> {
    let v = integrate_pieces(
        |t| Ok(vec![(a.evaluate(t, ctx)? - b.evaluate(t, ctx)?).square()]),
        1,
        &merge_breaks(a.breakpoints(), b.breakpoints()),
        start,
        ctx,
    )?;
    Ok(v[0].clone().sqrt())
}

/// `<a, b>`.
pub fn inner_product(a: &DataFunction, b: &DataFunction, start: usize, ctx: &PrecisionContext) -> Result<Float> {
    let v = integrate_pieces(
        |t| Ok(vec![a.evaluate(t, ctx)? * b.evaluate(t, ctx)?]),
        1,
        &merge_breaks(a.breakpoints(), b.breakpoints()),
        start,
        ctx,
    )?;
    Ok(v[0].clone())
}

/// Number of modes in the synthetic test problem.
pub const SYNTHETIC_TERMS: usize = 20;

/// Test problem with known solution `x = A sum_{i <= 20} 2^-i u_i` and data
/// `y = J^n x = A sum_{i <= 20} 2^-i sigma_i v_i`, where `A` makes `||y||_2 = 1`.
#[derive(Clone, Debug)]
pub struct SyntheticCase {
    pub n: usize,
    pub amplitude: Float,
    pub truth: DataFunction,
    pub data: DataFunction,
}

pub fn synthetic_case(system: &SingularSystem) -> Result<SyntheticCase> {
    if system.len() < SYNTHETIC_TERMS {
        return Err(Error::InsufficientSystem {
            requested: SYNTHETIC_TERMS,
            available: system.len(),
        });
    }
    let records = &system.records[..SYNTHETIC_TERMS];
    let bits = records[0].sigma.prec();
    let norm_sq = records.iter().enumerate().fold(Float::new(bits), |acc, (k, r)| {
        acc + (Float::with_val(bits, r.sigma.square_ref()) >> (2 * (k as u32 + 1)))
    });
    let amplitude = norm_sq.sqrt().recip();
    let weights: Vec<Float> = (0..SYNTHETIC_TERMS)
        .map(|k| Float::with_val(bits, &amplitude >> (k as u32 + 1)))
        .collect();
    let us: Vec<(Float, EigenFunction)> = weights.iter().cloned().zip(system.us.iter().cloned()).collect();
    let vs: Vec<(Float, VFunction)> = weights
        .iter()
        .zip(records)
        .zip(&system.vs)
        .map(|((w, r), v)| (Float::with_val(bits, w * &r.sigma), v.clone()))
        .collect();
    let truth = DataFunction::from_fn(move |t, ctx| {
        us.iter().fold(Float::new(ctx.bits()), |acc, (w, u)| acc + u.evaluate(t, ctx) * w)
    });
    let data = DataFunction::from_fn(move |t, ctx| {
        vs.iter().fold(Float::new(ctx.bits()), |acc, (w, v)| acc + v.evaluate(t, ctx) * w)
    });
    Ok(SyntheticCase {
        n: system.n,
        amplitude,
        truth,
        data,
    })
}

/// Index of the minimum when `errors` strictly decreases up to an interior
/// minimum and ends above it.
pub fn semi_convergence_index(errors: &[f64]) -> Option<usize> {
    let (argmin, min) = errors
        .iter()
        .cloned()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let interior = argmin > 0 && argmin + 1 < errors.len();
    let descending = errors[..=argmin].windows(2).all(|w| w[1] < w[0]);
    let rebound = errors.last().is_some_and(|e| *e > min);
    (interior && descending && rebound).then_some(argmin)
}
