//! The characteristic function `F_n(z) = sum coeff cosh(alpha z) cos(beta z)`
//! whose positive zeros are `z_i = lambda_i^(-1/(2n))`, and a direct
//! boundary-determinant oracle for it.

use std::fmt::Write as _;
use std::str::FromStr;

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::eigenfunctions::basis::boundary_matrix;
use crate::error::{Error, Result};
use crate::numerics::{cancellation_budget, determinant, parse_decimal, to_decimal, PrecisionContext};
use crate::unity_spectrum::{dominant_alpha, enumerate_orbits};

/// `coeff * cosh(alpha z) * cos(beta z)`.
#[derive(Clone, Debug)]
pub struct CoshCosTerm {
    pub coeff: Float,
    pub alpha: Float,
    pub beta: Float,
}

/// How the global constant of `F_n` is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleConvention {
    /// The term with the largest `alpha` has coefficient 1.
    UnitDominant,
}

#[derive(Clone, Debug)]
pub struct CharEquation {
    pub n: usize,
    /// Sorted by decreasing `alpha`, then decreasing `beta`.
    pub terms: Vec<CoshCosTerm>,
    pub scale_convention: ScaleConvention,
    alpha_max: Float,
}

impl CharEquation {
    /// `cot(pi / (2n))`, the exponential growth rate of `F_n`.
    pub fn alpha_max(&self) -> &Float {
        &self.alpha_max
    }

    fn from_terms(n: usize, mut terms: Vec<CoshCosTerm>, ctx: &PrecisionContext) -> Result<Self> {
        let bits = ctx.bits();
        let eps = ctx.half_precision_eps();
        // snap alpha, then beta, to cluster representatives so that rounding
        // noise cannot separate equal rates
        let close = |a: &Float, b: &Float| Float::with_val(bits, a - b).abs() < eps;
        terms.sort_by(|x, y| y.alpha.partial_cmp(&x.alpha).unwrap());
        for k in 1..terms.len() {
            if close(&terms[k - 1].alpha, &terms[k].alpha) {
                terms[k].alpha = terms[k - 1].alpha.clone();
            }
        }
        terms.sort_by(|x, y| {
            y.alpha
                .partial_cmp(&x.alpha)
                .unwrap()
                .then_with(|| y.beta.partial_cmp(&x.beta).unwrap())
        });
        for k in 1..terms.len() {
            if terms[k - 1].alpha == terms[k].alpha && close(&terms[k - 1].beta, &terms[k].beta) {
                terms[k].beta = terms[k - 1].beta.clone();
            }
        }
        let mut merged: Vec<CoshCosTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.alpha == t.alpha && last.beta == t.beta => {
                    last.coeff += &t.coeff;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| Float::with_val(bits, t.coeff.abs_ref()) >= eps);
        let lead = merged
            .first()
            .ok_or_else(|| Error::InvalidData("characteristic function has no terms".into()))?
            .coeff
            .clone();
        for t in &mut merged {
            t.coeff /= &lead;
        }
        let first_alpha = merged[0].alpha.clone();
        merged[0].coeff = Float::with_val(bits, 1);
        if merged
            .iter()
            .skip(1)
            .any(|t| Float::with_val(bits, &first_alpha - &t.alpha).abs() < eps)
        {
            return Err(Error::InvalidData("dominant growth term is not unique".into()));
        }
        Ok(CharEquation {
            n,
            terms: merged,
            scale_convention: ScaleConvention::UnitDominant,
            alpha_max: dominant_alpha(n, ctx),
        })
    }

    /// `F_n(z)` without rescaling.
    pub fn evaluate(&self, z: &Float, ctx: &PrecisionContext) -> Float {
        let bits = ctx.bits();
        let mut acc = Float::new(bits);
        for t in &self.terms {
            let ch = Float::with_val(bits, &t.alpha * z).cosh();
            let c = Float::with_val(bits, &t.beta * z).cos();
            acc += Float::with_val(bits, &t.coeff * &ch) * c;
        }
        acc
    }

    /// `F_n(z) exp(-alpha_max z)` and its derivative.
    ///
    /// Each `cosh(alpha z) exp(-alpha_max z)` is expanded into two decaying
    /// exponentials, so no large intermediate values appear.
    pub fn scaled_with_derivative(&self, z: &Float, ctx: &PrecisionContext) -> (Float, Float) {
        let bits = ctx.bits();
        let mut f = Float::new(bits);
        let mut df = Float::new(bits);
        for t in &self.terms {
            let up_rate = Float::with_val(bits, &t.alpha - &self.alpha_max);
            let dn_rate = Float::with_val(bits, -Float::with_val(bits, &t.alpha + &self.alpha_max));
            let up = Float::with_val(bits, &up_rate * z).exp();
            let dn = Float::with_val(bits, &dn_rate * z).exp();
            let h = Float::with_val(bits, &up + &dn) >> 1;
            let dh = (Float::with_val(bits, &up_rate * &up) + Float::with_val(bits, &dn_rate * &dn)) >> 1;
            let (s, c) = Float::with_val(bits, &t.beta * z).sin_cos(Float::new(bits));
            f += Float::with_val(bits, &t.coeff * &h) * &c;
            let dc = Float::with_val(bits, -&t.beta) * &s;
            df += Float::with_val(bits, &t.coeff * (dh * &c + h * dc));
        }
        (f, df)
    }

    pub fn to_json(&self, ctx: &PrecisionContext) -> String {
        serde_json::to_string_pretty(&self.to_document(ctx.decimal_digits())).expect("serializable")
    }

    fn to_document(&self, digits: usize) -> EquationDocument {
        EquationDocument {
            n: self.n,
            variable: format!("z = lambda^(-1/({}))", 2 * self.n),
            terms: self
                .terms
                .iter()
                .map(|t| TermDocument {
                    coeff: to_decimal(&t.coeff, digits),
                    alpha: to_decimal(&t.alpha, digits),
                    beta: to_decimal(&t.beta, digits),
                })
                .collect(),
        }
    }

    /// Reads the JSON form written by [`CharEquation::to_json`].
    pub fn from_json(s: &str, ctx: &PrecisionContext) -> Result<Self> {
        let doc: EquationDocument = serde_json::from_str(s)?;
        if doc.n == 0 {
            return Err(Error::InvalidData("order n must be at least 1".into()));
        }
        let bits = ctx.bits();
        let terms = doc
            .terms
            .iter()
            .map(|t| {
                Ok(CoshCosTerm {
                    coeff: parse_decimal(&t.coeff, bits)?,
                    alpha: parse_decimal(&t.alpha, bits)?,
                    beta: parse_decimal(&t.beta, bits)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if terms.iter().any(|t| t.alpha < 0 || t.beta < 0) {
            return Err(Error::InvalidData("alpha and beta must be nonnegative".into()));
        }
        Self::from_terms(doc.n, terms, ctx)
    }
}

#[derive(Serialize, Deserialize)]
struct EquationDocument {
    n: usize,
    variable: String,
    terms: Vec<TermDocument>,
}

#[derive(Serialize, Deserialize)]
struct TermDocument {
    coeff: String,
    alpha: String,
    beta: String,
}

/// Output format of [`emit_equation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquationFormat {
    Text,
    Json,
}

impl FromStr for EquationFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(EquationFormat::Text),
            "json" => Ok(EquationFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Builds `F_n` from the orbit decomposition of the size-n subsets.
pub fn build_char_equation(n: usize, ctx: &PrecisionContext) -> Result<CharEquation> {
    let bits = ctx.bits();
    let orbits = enumerate_orbits(n, ctx)?;
    let eps = ctx.half_precision_eps();
    let lead = orbits
        .iter()
        .max_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap())
        .expect("at least one orbit");
    let phase = Complex::with_val(bits, &lead.c * lead.orbit_size as u32);
    let terms = orbits
        .iter()
        .map(|o| {
            let w = Complex::with_val(bits, &o.c * o.orbit_size as u32) / &phase;
            let (re, im) = w.into_real_imag();
            let scale = Float::with_val(bits, re.abs_ref()).max(&Float::with_val(bits, 1));
            if Float::with_val(bits, im.abs_ref()) > Float::with_val(bits, &eps * &scale) {
                return Err(Error::PrecisionExhausted(format!(
                    "coefficient of subset {:?} is not real after phase removal",
                    o.subset
                )));
            }
            Ok(CoshCosTerm {
                coeff: re,
                alpha: o.alpha.clone(),
                beta: o.beta.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CharEquation::from_terms(n, terms, ctx)
}

/// `F_n(z) exp(-alpha_max z)`: same zeros and sign as `F_n`, bounded for
/// all `z >= 0`.
pub fn evaluate_scaled(f: &CharEquation, z: &Float, ctx: &PrecisionContext) -> Float {
    f.scaled_with_derivative(z, ctx).0
}

/// Derivative of [`evaluate_scaled`] with respect to `z`.
pub fn evaluate_derivative_scaled(f: &CharEquation, z: &Float, ctx: &PrecisionContext) -> Float {
    f.scaled_with_derivative(z, ctx).1
}

/// Determinant of the real boundary matrix at `z`, computed with enough
/// extra precision to absorb the cancellation near zeros. Proportional to
/// `F_n(z)` with a constant that does not depend on `z`.
pub fn det_direct(n: usize, z: &Float, ctx: &PrecisionContext) -> Float {
    let alpha = dominant_alpha(n, ctx).to_f64();
    let extra = cancellation_budget(alpha, z.to_f64()) + 32;
    let hi = ctx.raised(extra);
    let m = boundary_matrix(n, z, &hi);
    Float::with_val(ctx.bits(), determinant(&m))
}

/// Renders `F_n` as a text equation or as JSON.
pub fn emit_equation(f: &CharEquation, format: EquationFormat, ctx: &PrecisionContext) -> String {
    match format {
        EquationFormat::Json => f.to_json(ctx),
        EquationFormat::Text => equation_text(f, 20),
    }
}

fn factor(name: &str, rate: &Float, digits: usize) -> Option<String> {
    if rate.is_zero() {
        return None;
    }
    let text = to_decimal(rate, digits);
    if text == "1" {
        return Some(format!("{name}(z)"));
    }
    Some(format!("{name}({text}*z)"))
}

fn equation_text(f: &CharEquation, digits: usize) -> String {
    let mut out = String::new();
    for (idx, t) in f.terms.iter().enumerate() {
        let negative = t.coeff.is_sign_negative();
        let magnitude = Float::with_val(t.coeff.prec(), t.coeff.abs_ref());
        let factors: Vec<String> = [factor("cosh", &t.alpha, digits), factor("cos", &t.beta, digits)]
            .into_iter()
            .flatten()
            .collect();
        let mut body = String::new();
        if factors.is_empty() || magnitude != 1 {
            body.push_str(&to_decimal(&magnitude, digits));
        }
        for fac in factors {
            if !body.is_empty() {
                body.push('*');
            }
            body.push_str(&fac);
        }
        let sign = match (idx, negative) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        };
        let _ = write!(out, "{sign}{body}");
    }
    out.push_str(" = 0");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256).unwrap()
    }

    fn f64s(f: &CharEquation) -> Vec<(f64, f64, f64)> {
        f.terms
            .iter()
            .map(|t| (t.coeff.to_f64(), t.alpha.to_f64(), t.beta.to_f64()))
            .collect()
    }

    #[test]
    fn n2_is_beam_equation() {
        let f = build_char_equation(2, &ctx()).unwrap();
        assert_eq!(f64s(&f), vec![(1.0, 1.0, 1.0), (1.0, 0.0, 0.0)]);
        assert_eq!(emit_equation(&f, EquationFormat::Text, &ctx()), "cosh(z)*cos(z) + 1 = 0");
    }

    #[test]
    fn n1_is_cos() {
        let f = build_char_equation(1, &ctx()).unwrap();
        assert_eq!(f64s(&f), vec![(1.0, 0.0, 1.0)]);
        assert_eq!(emit_equation(&f, EquationFormat::Text, &ctx()), "cos(z) = 0");
    }

    #[test]
    fn n3_terms() {
        let f = build_char_equation(3, &ctx()).unwrap();
        let s3 = 3f64.sqrt();
        let expect = [
            (1.0, s3, 1.0),
            (8.0, s3 / 2.0, 0.5),
            (0.5, 0.0, 2.0),
            (4.0, 0.0, 1.0),
            (4.5, 0.0, 0.0),
        ];
        let got = f64s(&f);
        assert_eq!(got.len(), expect.len());
        for (g, e) in got.iter().zip(expect) {
            assert!((g.0 - e.0).abs() < 1e-14 && (g.1 - e.1).abs() < 1e-14 && (g.2 - e.2).abs() < 1e-14);
        }
    }

    #[test]
    fn scaled_values() {
        let c = ctx();
        let f = build_char_equation(2, &c).unwrap();
        assert_eq!(evaluate_scaled(&f, &c.float(0), &c), 2);
        let half_pi = c.pi() >> 1;
        let v = evaluate_scaled(&f, &half_pi, &c);
        let expect = (-half_pi.clone()).exp();
        assert!(Float::with_val(256, v - expect).abs() < 1e-70);
        assert_eq!(evaluate_derivative_scaled(&f, &c.float(0), &c), -2);
        let z1 = parse_decimal("1.875104068711961166445308241078214", 256).unwrap();
        assert!(evaluate_scaled(&f, &z1, &c).abs() < 1e-33);
        assert!(evaluate_derivative_scaled(&f, &z1, &c).abs() > 0.1);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let c = ctx();
        let h = c.pow2_neg(256 / 3);
        let rel = c.pow2_neg(256 / 3);
        for n in 1..=5 {
            let f = build_char_equation(n, &c).unwrap();
            for z in [0.3, 2.0, 7.7, 15.0] {
                let z = c.float(z);
                let up = evaluate_scaled(&f, &Float::with_val(256, &z + &h), &c);
                let dn = evaluate_scaled(&f, &Float::with_val(256, &z - &h), &c);
                let fd = (up - dn) / Float::with_val(256, &h * 2u32);
                let d = evaluate_derivative_scaled(&f, &z, &c);
                let scale = Float::with_val(256, d.abs_ref()).max(&c.float(1));
                assert!(Float::with_val(256, fd - &d).abs() < rel.clone() * scale, "n={n}");
            }
        }
    }

    #[test]
    fn det_direct_matches_beam_closed_form() {
        let c = ctx();
        for mu in [0.7, 1.9, 3.3, 8.0] {
            let z = c.float(mu);
            let d = det_direct(2, &z, &c);
            let f = build_char_equation(2, &c).unwrap().evaluate(&z, &c) * 4u32;
            assert!(Float::with_val(256, d.clone().abs() - f.abs()).abs() < 1e-60 * d.abs().to_f64().max(1.0));
        }
    }

    #[test]
    fn det_direct_vanishes_at_n3_root() {
        let c = ctx();
        let z = parse_decimal("2.2247729764011889", 256).unwrap();
        let f = build_char_equation(3, &c).unwrap();
        let scale = (-Float::with_val(256, f.alpha_max() * &z)).exp();
        let d = det_direct(3, &z, &c) * &scale;
        let off = det_direct(3, &c.float(2.0), &c) * (-Float::with_val(256, f.alpha_max() * 2u32)).exp();
        assert!(d.abs() < 1e-14 * off.abs().to_f64());
    }

    #[test]
    fn json_round_trip() {
        let c = ctx();
        for n in 1..=5 {
            let f = build_char_equation(n, &c).unwrap();
            let json = emit_equation(&f, EquationFormat::Json, &c);
            let back = CharEquation::from_json(&json, &c).unwrap();
            assert_eq!(back.terms.len(), f.terms.len());
            for (a, b) in back.terms.iter().zip(&f.terms) {
                assert!(Float::with_val(256, &a.coeff - &b.coeff).abs() < 1e-70);
                assert!(Float::with_val(256, &a.alpha - &b.alpha).abs() < 1e-70);
                assert!(Float::with_val(256, &a.beta - &b.beta).abs() < 1e-70);
            }
            assert_eq!(emit_equation(&back, EquationFormat::Json, &c), json);
        }
        assert!(matches!("xml".parse::<EquationFormat>(), Err(Error::UnknownFormat(_))));
    }
}
