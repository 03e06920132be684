//! Gauss–Legendre rules on [0, 1] at arbitrary precision, with adaptive
//! node doubling.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rug::Float;

use super::PrecisionContext;
use crate::error::{Error, Result};

/// Maximum number of node-count doublings before [`integrate`] gives up.
pub const MAX_DOUBLINGS: u32 = 20;

const DEFAULT_START: usize = 8;
const NEWTON_CAP: usize = 100;

/// Nodes (strictly increasing in (0, 1)) and positive weights summing to 1.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

impl GaussLegendre {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to values already evaluated at the nodes.
    pub fn sum(&self, values: &[Float], bits: u32) -> Float {
        let mut acc = Float::new(bits);
        for (w, v) in self.weights.iter().zip(values) {
            acc += Float::with_val(bits, w * v);
        }
        acc
    }
}

type RuleCache = Mutex<HashMap<(usize, u32), Arc<GaussLegendre>>>;

fn cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The m-point Gauss–Legendre rule mapped to [0, 1].
///
/// Rules are cached per `(m, bits)`.
pub fn gauss_legendre_rule(m: usize, ctx: &PrecisionContext) -> Result<Arc<GaussLegendre>> {
    if m == 0 {
        return Err(Error::InvalidArgument("quadrature needs m >= 1 nodes".into()));
    }
    let key = (m, ctx.bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(compute_rule(m, ctx)?);
    cache().lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Legendre P_m(x) and P_{m-1}(x) by the three-term recurrence.
fn legendre_pair(m: usize, x: &Float, bits: u32) -> (Float, Float) {
    let mut prev = Float::with_val(bits, 1);
    let mut cur = Float::with_val(bits, x);
    for k in 1..m {
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let mut next = Float::with_val(bits, x * &cur);
        next *= (2 * k + 1) as u32;
        next -= Float::with_val(bits, &prev * k as u32);
        next /= (k + 1) as u32;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn legendre_pair_f64(m: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..m {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn compute_rule(m: usize, ctx: &PrecisionContext) -> Result<GaussLegendre> {
    let bits = ctx.bits();
    let work = bits + 32;
    let half = m.div_ceil(2);
    // Roots of P_m in (0, 1) of the symmetric interval [-1, 1], descending.
    let positive: Vec<Result<(Float, Float)>> = (0..half)
        .into_par_iter()
        .map(|i| {
            let mut x0 = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            if m % 2 == 1 && i == half - 1 {
                x0 = 0.0;
            }
            for _ in 0..8 {
                let (p, q) = legendre_pair_f64(m, x0);
                let dp = m as f64 * (x0 * p - q) / (x0 * x0 - 1.0);
                if dp == 0.0 || !dp.is_finite() {
                    break;
                }
                x0 -= p / dp;
            }
            let mut x = Float::with_val(work, x0);
            let stop = Float::with_val(work, 1) >> (bits as i32 + 8);
            let mut converged = m % 2 == 1 && i == half - 1;
            if converged {
                x = Float::new(work);
            }
            for _ in 0..NEWTON_CAP {
                if converged {
                    break;
                }
                let (p, q) = legendre_pair(m, &x, work);
                let x2m1 = Float::with_val(work, x.clone().square() - 1u32);
                let dp = Float::with_val(work, &x * &p - &q) * m as u32 / x2m1;
                let step = Float::with_val(work, &p / &dp);
                x -= &step;
                if step.abs() < stop {
                    converged = true;
                }
            }
            if !converged {
                return Err(Error::PrecisionExhausted(format!(
                    "Legendre node {i} of {m} did not converge at {bits} bits"
                )));
            }
            let (p, q) = legendre_pair(m, &x, work);
            let x2 = x.clone().square();
            let one_minus = Float::with_val(work, 1u32 - &x2);
            let dp = Float::with_val(work, &x * &p - &q) * m as u32 / (-one_minus.clone());
            // weight on [-1,1] is 2/((1-x^2) P'^2); halved for [0,1]
            let w = Float::with_val(work, 1u32 / (one_minus * dp.square()));
            Ok((x, w))
        })
        .collect();

    let mut nodes = vec![Float::new(bits); m];
    let mut weights = vec![Float::new(bits); m];
    for (i, pair) in positive.into_iter().enumerate() {
        let (x, w) = pair?;
        // t = (1 + x)/2 on the right, (1 - x)/2 on the left
        let right = Float::with_val(bits, Float::with_val(work, 1u32 + &x) >> 1);
        let left = Float::with_val(bits, Float::with_val(work, 1u32 - &x) >> 1);
        nodes[m - 1 - i] = right;
        weights[m - 1 - i] = Float::with_val(bits, &w);
        nodes[i] = left;
        weights[i] = Float::with_val(bits, &w);
    }
    Ok(GaussLegendre { nodes, weights })
}

/// Adaptive Gauss–Legendre integral over [0, 1] starting from 8 nodes.
pub fn integrate<F>(f: F, ctx: &PrecisionContext) -> Result<Float>
where
    F: Fn(&Float) -> Float + Sync,
{
    integrate_from(f, DEFAULT_START, ctx)
}

/// Adaptive integral over [0, 1] starting from `start` nodes.
///
/// Doubles the node count until two successive rules agree to
/// `target_tol * max(1, |I|)` and returns the finer value.
pub fn integrate_from<F>(f: F, start: usize, ctx: &PrecisionContext) -> Result<Float>
where
    F: Fn(&Float) -> Float + Sync,
{
    let mut out = integrate_vec(|t| vec![f(t)], 1, start, ctx)?;
    Ok(out.pop().expect("one component"))
}

/// Adaptive integral over [a, b].
pub fn integrate_on<F>(f: F, a: &Float, b: &Float, ctx: &PrecisionContext) -> Result<Float>
where
    F: Fn(&Float) -> Float + Sync,
{
    let bits = ctx.bits();
    let width = Float::with_val(bits, b - a);
    let mapped = integrate_from(
        |t| {
            let x = Float::with_val(bits, &width * t) + a;
            f(&x)
        },
        DEFAULT_START,
        ctx,
    )?;
    Ok(mapped * width)
}

/// Adaptive integral of a vector-valued function over [0, 1].
///
/// Every component must converge; all components share the same nodes,
/// which makes Gram matrices and modal coefficients cheap.
pub fn integrate_vec<F>(f: F, dim: usize, start: usize, ctx: &PrecisionContext) -> Result<Vec<Float>>
where
    F: Fn(&Float) -> Vec<Float> + Sync,
{
    integrate_vec_capped(f, dim, start, MAX_DOUBLINGS, ctx)
}

/// Adaptive integral of a vector-valued function over [a, b].
pub fn integrate_vec_on<F>(
    f: F,
    dim: usize,
    a: &Float,
    b: &Float,
    start: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<Float>>
where
    F: Fn(&Float) -> Vec<Float> + Sync,
{
    let bits = ctx.bits();
    let width = Float::with_val(bits, b - a);
    let mapped = integrate_vec(
        |t| {
            let x = Float::with_val(bits, &width * t) + a;
            f(&x)
        },
        dim,
        start,
        ctx,
    )?;
    Ok(mapped.into_iter().map(|v| v * &width).collect())
}

pub(crate) fn integrate_vec_capped<F>(
    f: F,
    dim: usize,
    start: usize,
    max_doublings: u32,
    ctx: &PrecisionContext,
) -> Result<Vec<Float>>
where
    F: Fn(&Float) -> Vec<Float> + Sync,
{
    let bits = ctx.bits();
    let mut m = start.max(1);
    let mut previous = apply_rule(&f, dim, m, ctx)?;
    for _ in 0..max_doublings {
        m *= 2;
        let current = apply_rule(&f, dim, m, ctx)?;
        let converged = previous.iter().zip(&current).all(|(p, c)| {
            let diff = Float::with_val(bits, p - c).abs();
            let scale = Float::with_val(bits, c.abs_ref()).max(&Float::with_val(bits, 1));
            diff <= Float::with_val(bits, ctx.tol() * &scale)
        });
        if converged {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NonConvergence(format!(
        "quadrature did not converge after {max_doublings} doublings ({m} nodes)"
    )))
}

fn apply_rule<F>(f: &F, dim: usize, m: usize, ctx: &PrecisionContext) -> Result<Vec<Float>>
where
    F: Fn(&Float) -> Vec<Float> + Sync,
{
    let bits = ctx.bits();
    let rule = gauss_legendre_rule(m, ctx)?;
    let partial: Vec<Vec<Float>> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(t, w)| {
            let values = f(t);
            debug_assert_eq!(values.len(), dim);
            values
                .into_iter()
                .map(|v| Float::with_val(bits, &v * w))
                .collect()
        })
        .collect();
    let mut acc = vec![Float::new(bits); dim];
    for row in partial {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256).unwrap()
    }

    #[test]
    fn one_point_rule_is_midpoint() {
        let rule = gauss_legendre_rule(1, &ctx()).unwrap();
        assert_eq!(rule.nodes[0], 0.5);
        assert_eq!(rule.weights[0], 1);
    }

    #[test]
    fn two_point_rule_matches_closed_form() {
        let c = ctx();
        let rule = gauss_legendre_rule(2, &c).unwrap();
        let offset = c.float(12).sqrt().recip();
        let lo = Float::with_val(256, 0.5 - &offset);
        let hi = Float::with_val(256, 0.5 + &offset);
        assert!(Float::with_val(256, &rule.nodes[0] - &lo).abs() < 1e-70);
        assert!(Float::with_val(256, &rule.nodes[1] - &hi).abs() < 1e-70);
        for w in &rule.weights {
            assert!(Float::with_val(256, w - 0.5).abs() < 1e-70);
        }
    }

    #[test]
    fn sixteen_points_integrate_t15_exactly() {
        let c = ctx();
        let rule = gauss_legendre_rule(16, &c).unwrap();
        let values: Vec<Float> = rule.nodes.iter().map(|t| t.clone().pow(15u32)).collect();
        let got = rule.sum(&values, 256);
        let err = Float::with_val(256, got - Float::with_val(256, 1) / 16u32).abs();
        assert!(&err <= c.tol(), "{err}");
    }

    #[test]
    fn rule_invariants() {
        let c = ctx();
        for m in [3usize, 7, 20, 33] {
            let rule = gauss_legendre_rule(m, &c).unwrap();
            let total = rule.weights.iter().fold(c.zero(), |acc, w| acc + w);
            assert!(Float::with_val(256, total - 1u32).abs() <= *c.tol());
            assert!(rule.weights.iter().all(|w| *w > 0));
            assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
            assert!(rule.nodes[0] > 0 && rule.nodes[m - 1] < 1);
        }
    }

    #[test]
    fn integrates_elementary_functions() {
        let c = ctx();
        let half = integrate(|t| t.clone(), &c).unwrap();
        assert!(Float::with_val(256, half - 0.5).abs() <= *c.tol());

        let e = integrate(|t| t.clone().exp(), &c).unwrap();
        let exact = c.float(1).exp() - 1u32;
        assert!(Float::with_val(256, e - exact).abs() <= *c.tol());

        // 2 cos^2(pi t / 2) integrates to 1
        let pi = c.pi();
        let one = integrate(
            |t| {
                let cos = (Float::with_val(256, &pi * t) / 2u32).cos();
                cos.square() * 2u32
            },
            &c,
        )
        .unwrap();
        assert!(Float::with_val(256, one - 1u32).abs() <= *c.tol());
    }

    #[test]
    fn integrate_on_subinterval() {
        let c = ctx();
        let a = c.float(0.25);
        let b = c.float(2);
        let got = integrate_on(|t| t.clone().square(), &a, &b, &c).unwrap();
        let exact = (c.float(8) - c.float(1) / 64u32) / 3u32;
        assert!(Float::with_val(256, got - exact).abs() < 1e-60);
    }

    #[test]
    fn non_convergence_is_an_error() {
        let c = PrecisionContext::new(64).unwrap();
        // a jump defeats Gauss-Legendre doubling
        let res = integrate_vec_capped(
            |t| vec![if *t < 0.3 { c.float(1) } else { c.zero() }],
            1,
            2,
            4,
            &c,
        );
        assert!(matches!(res, Err(Error::NonConvergence(_))));
    }
}
