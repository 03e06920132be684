//! Safeguarded Newton iteration on a sign-change bracket.

use rug::Float;

use super::PrecisionContext;
use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Debug)]
pub struct Bracket {
    lo: Float,
    hi: Float,
}

impl Bracket {
    pub fn new(lo: Float, hi: Float) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidBracket(format!("lo = {lo} is not below hi = {hi}")));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn from_f64(lo: f64, hi: f64, ctx: &PrecisionContext) -> Result<Self> {
        Self::new(ctx.float(lo), ctx.float(hi))
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn width(&self) -> Float {
        Float::with_val(self.lo.prec().max(self.hi.prec()), &self.hi - &self.lo)
    }
}

/// Root of `f` inside `bracket`, using `df` for Newton steps.
pub fn find_root<F, D>(f: F, df: D, bracket: Bracket, ctx: &PrecisionContext) -> Result<Float>
where
    F: Fn(&Float) -> Float,
    D: Fn(&Float) -> Float,
{
    find_root_fdf(|x| (f(x), df(x)), bracket, ctx)
}

/// Hybrid Newton–bisection on a function returning `(f(x), f'(x))`.
///
/// Newton steps that leave the current bracket, or that meet a vanishing
/// derivative, are replaced by bisection. On return the bracket has been
/// shrunk below `target_tol` and `|f(z)| <= 8 |f'(z)| target_tol`.
pub fn find_root_fdf<G>(fdf: G, bracket: Bracket, ctx: &PrecisionContext) -> Result<Float>
where
    G: Fn(&Float) -> (Float, Float),
{
    let bits = ctx.bits();
    let tol = ctx.tol().clone();
    let quarter = Float::with_val(bits, &tol >> 2);
    let mut lo = Float::with_val(bits, bracket.lo());
    let mut hi = Float::with_val(bits, bracket.hi());
    let (f_lo, _) = fdf(&lo);
    let (f_hi, _) = fdf(&hi);
    if f_lo.is_zero() {
        return Ok(lo);
    }
    if f_hi.is_zero() {
        return Ok(hi);
    }
    if f_lo.is_sign_negative() == f_hi.is_sign_negative() {
        return Err(Error::InvalidBracket(format!(
            "no sign change on [{}, {}]",
            lo.to_f64(),
            hi.to_f64()
        )));
    }
    let lo_negative = f_lo.is_sign_negative();

    let cap = 10 * bits as usize;
    let mut x = Float::with_val(bits, &lo + &hi) >> 1;
    for _ in 0..cap {
        let (fx, dfx) = fdf(&x);
        if fx.is_zero() {
            return Ok(x);
        }
        if fx.is_sign_negative() == lo_negative {
            lo.clone_from(&x);
        } else {
            hi.clone_from(&x);
        }
        let width = Float::with_val(bits, &hi - &lo);
        if width < tol {
            return accept(&fdf, x, &tol);
        }

        let newton = if dfx.is_zero() {
            None
        } else {
            let cand = Float::with_val(bits, &x - Float::with_val(bits, &fx / &dfx));
            (cand > lo && cand < hi).then_some(cand)
        };
        let next = match newton {
            Some(c) => c,
            None => Float::with_val(bits, &lo + &hi) >> 1,
        };
        let step = Float::with_val(bits, &next - &x).abs();
        x = next;
        if step < quarter {
            // Newton has settled; confirm with a tight sign-change bracket.
            let a = Float::with_val(bits, &x - &quarter).max(&lo);
            let b = Float::with_val(bits, &x + &quarter).min(&hi);
            let (fa, _) = fdf(&a);
            let (fb, _) = fdf(&b);
            if fa.is_zero() {
                return Ok(a);
            }
            if fb.is_zero() {
                return Ok(b);
            }
            if fa.is_sign_negative() != fb.is_sign_negative() {
                return accept(&fdf, x, &tol);
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "root finder exceeded {cap} iterations on [{}, {}]",
        lo.to_f64(),
        hi.to_f64()
    )))
}

fn accept<G>(fdf: &G, x: Float, tol: &Float) -> Result<Float>
where
    G: Fn(&Float) -> (Float, Float),
{
    let (fx, dfx) = fdf(&x);
    let bits = x.prec();
    let limit = Float::with_val(bits, dfx.abs() * tol) * 8u32;
    if Float::with_val(bits, fx.abs_ref()) <= limit {
        Ok(x)
    } else {
        Err(Error::NonConvergence(format!(
            "bracket closed at {} but residual {:e} exceeds the derivative-scaled threshold",
            x.to_f64(),
            fx.to_f64()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam(x: &Float) -> (Float, Float) {
        let (s, c) = super::super::sin_cos(x);
        let (sh, ch) = x.clone().sinh_cosh(Float::new(x.prec()));
        let f = Float::with_val(x.prec(), &c * &ch) + 1u32;
        let df = Float::with_val(x.prec(), &c * &sh) - Float::with_val(x.prec(), &s * &ch);
        (f, df)
    }

    #[test]
    fn cos_root_is_half_pi() {
        let ctx = PrecisionContext::new(256).unwrap();
        let z = find_root(
            |x| x.clone().cos(),
            |x| -x.clone().sin(),
            Bracket::from_f64(1.0, 2.0, &ctx).unwrap(),
            &ctx,
        )
        .unwrap();
        let half_pi = ctx.pi() >> 1;
        assert!(Float::with_val(256, z - half_pi).abs() <= *ctx.tol());
    }

    #[test]
    fn beam_roots() {
        let ctx = PrecisionContext::new(256).unwrap();
        let expected = [
            (1.5, 2.2, "1.875104068711961166445308241078214"),
            (4.5, 4.8, "4.694091132974174576436391778019812"),
        ];
        for (lo, hi, digits) in expected {
            let z = find_root_fdf(beam, Bracket::from_f64(lo, hi, &ctx).unwrap(), &ctx).unwrap();
            let printed = super::super::parse_decimal(digits, 256).unwrap();
            let diff = Float::with_val(256, &z - &printed).abs();
            assert!(diff < 1e-33, "{digits}: {diff}");
        }
    }

    #[test]
    fn rejects_bracket_without_sign_change() {
        let ctx = PrecisionContext::new(128).unwrap();
        let res = find_root(
            |x| x.clone().cos(),
            |x| -x.clone().sin(),
            Bracket::from_f64(2.0, 3.0, &ctx).unwrap(),
            &ctx,
        );
        assert!(matches!(res, Err(Error::InvalidBracket(_))));
        assert!(Bracket::from_f64(3.0, 2.0, &ctx).is_err());
    }

    #[test]
    fn divergent_newton_falls_back_to_bisection() {
        let ctx = PrecisionContext::new(128).unwrap();
        // Newton on atan diverges from |x| > 1.39; the safeguard must hold
        let z = find_root(
            |x| x.clone().atan(),
            |x| (Float::with_val(128, x * x) + 1u32).recip(),
            Bracket::from_f64(-10.0, 30.0, &ctx).unwrap(),
            &ctx,
        )
        .unwrap();
        assert!(z.abs() <= *ctx.tol());
    }
}
