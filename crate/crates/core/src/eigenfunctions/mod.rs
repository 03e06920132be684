//! Singular functions `u_i`, `v_i` of `J^n` from the nullspace of the
//! boundary matrix.

pub mod basis;

use std::str::FromStr;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float};

pub use basis::{boundary_matrix, boundary_matrix_of, BasisEntry, EntryKind, FundamentalBasis, Part};

use crate::eigen_solver::{singular_values, SingularRecord};
use crate::error::{Error, Result};
use crate::numerics::{full_pivot_eliminate, integrate_from, integrate_vec, to_decimal, Matrix, PrecisionContext};

/// Scaling applied to the coefficient vector `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `||u||_2 = 1`, last coefficient positive.
    UnitL2,
    /// Last coefficient equal to 1.
    LastCoefficientOne,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-l2" | "unit-l2-norm" | "l2" => Ok(Normalization::UnitL2),
            "last-one" | "last-coefficient-one" => Ok(Normalization::LastCoefficientOne),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// `u(t) = sum_k gamma_k phi_k(t)` at one accepted root.
#[derive(Clone, Debug)]
pub struct EigenFunction {
    pub record: SingularRecord,
    pub basis: FundamentalBasis,
    pub gamma: Vec<Float>,
    pub convention: Normalization,
}

/// Nullspace vector of a boundary matrix evaluated at a root.
///
/// Pivots below `max|A| 2^(-bits/2)` count as zero; the free variable is set
/// to 1 and the rest follows by back substitution.
pub fn nullspace_gamma(a: &Matrix, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let bits = ctx.bits();
    let dim = a.dim();
    let threshold = a.max_abs() * ctx.half_precision_eps();
    let e = full_pivot_eliminate(a);
    let last = Float::with_val(bits, e.pivot(dim - 1).abs_ref());
    if last >= threshold {
        return Err(Error::NotSingular {
            pivot: last.to_f64(),
            threshold: threshold.to_f64(),
        });
    }
    if dim >= 2 && Float::with_val(bits, e.pivot(dim - 2).abs_ref()) < threshold {
        return Err(Error::NullityTwo);
    }
    let mut y = vec![Float::new(bits); dim];
    y[dim - 1] = Float::with_val(bits, 1);
    for k in (0..dim - 1).rev() {
        let mut acc = Float::new(bits);
        for c in k + 1..dim {
            acc += Float::with_val(bits, e.upper.get(k, c) * &y[c]);
        }
        y[k] = -acc / e.pivot(k);
    }
    let mut gamma = vec![Float::new(bits); dim];
    for (k, v) in y.into_iter().enumerate() {
        gamma[e.col_perm[k]] = v;
    }
    Ok(gamma)
}

/// Raw nullspace coefficients for `record`, computed on the column-scaled
/// boundary matrix and mapped back to the unscaled basis.
pub fn raw_gamma(basis: &FundamentalBasis, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let scaled = boundary_matrix_of(basis, true, ctx);
    let mut gamma = nullspace_gamma(&scaled, ctx)?;
    for (g, s) in gamma.iter_mut().zip(basis.column_scales()) {
        *g *= s;
    }
    Ok(gamma)
}

/// Quadrature starting size for functions with `i` oscillations.
pub fn start_nodes(n: usize, i: usize) -> usize {
    4 * (i + n)
}

/// Normalized eigenfunction from raw coefficients.
pub fn take_u(
    record: &SingularRecord,
    gamma: &[Float],
    convention: Normalization,
    ctx: &PrecisionContext,
) -> Result<EigenFunction> {
    let bits = ctx.bits();
    let basis = FundamentalBasis::new(record.n, &record.z, ctx);
    if gamma.len() != basis.len() {
        return Err(Error::InvalidArgument(format!(
            "gamma has {} entries, basis has {}",
            gamma.len(),
            basis.len()
        )));
    }
    let mut gamma: Vec<Float> = gamma.iter().map(|g| Float::with_val(bits, g)).collect();
    let anchor = anchor_index(&gamma, ctx);
    let divisor = match convention {
        Normalization::LastCoefficientOne => gamma[anchor].clone(),
        Normalization::UnitL2 => {
            let norm2 = integrate_from(
                |t| basis.combination(&gamma, 0, t, ctx).square(),
                start_nodes(record.n, record.i),
                ctx,
            )?;
            let norm = norm2.sqrt();
            if gamma[anchor].is_sign_negative() {
                -norm
            } else {
                norm
            }
        }
    };
    for g in &mut gamma {
        *g /= &divisor;
    }
    Ok(EigenFunction {
        record: record.clone(),
        basis,
        gamma,
        convention,
    })
}

/// The last coefficient, unless it is negligible against the largest one.
fn anchor_index(gamma: &[Float], ctx: &PrecisionContext) -> usize {
    let bits = ctx.bits();
    let max = gamma
        .iter()
        .fold(Float::new(bits), |m, g| m.max(&Float::with_val(bits, g.abs_ref())));
    let floor = max * ctx.half_precision_eps();
    (0..gamma.len())
        .rev()
        .find(|&k| Float::with_val(bits, gamma[k].abs_ref()) > floor)
        .unwrap_or(gamma.len() - 1)
}

/// Eigenfunction for one record: boundary nullspace plus normalization.
pub fn eigenfunction(record: &SingularRecord, convention: Normalization, ctx: &PrecisionContext) -> Result<EigenFunction> {
    let basis = FundamentalBasis::new(record.n, &record.z, ctx);
    let gamma = raw_gamma(&basis, ctx)?;
    take_u(record, &gamma, convention, ctx)
}

/// Eigenfunctions `u_1 .. u_count` of order `n`.
pub fn eigenfunctions(n: usize, count: usize, convention: Normalization, ctx: &PrecisionContext) -> Result<Vec<EigenFunction>> {
    let records = singular_values(n, count, ctx)?;
    eigenfunctions_for(&records, convention, ctx)
}

/// Eigenfunctions for already located records, built in parallel.
pub fn eigenfunctions_for(
    records: &[SingularRecord],
    convention: Normalization,
    ctx: &PrecisionContext,
) -> Result<Vec<EigenFunction>> {
    records.par_iter().map(|r| eigenfunction(r, convention, ctx)).collect()
}

/// `u(t)`.
pub fn evaluate_u(u: &EigenFunction, t: &Float, ctx: &PrecisionContext) -> Float {
    u.evaluate(t, ctx)
}

impl EigenFunction {
    pub fn n(&self) -> usize {
        self.record.n
    }

    pub fn evaluate(&self, t: &Float, ctx: &PrecisionContext) -> Float {
        self.basis.combination(&self.gamma, 0, t, ctx)
    }

    /// `u^(j)(t)`.
    pub fn derivative(&self, j: usize, t: &Float, ctx: &PrecisionContext) -> Float {
        let zj = Float::with_val(ctx.bits(), (&self.basis.z).pow(j as u32));
        self.basis.combination(&self.gamma, j, t, ctx) * zj
    }

    /// Boundary rows applied to `gamma`, relative to `||gamma||_2`.
    pub fn boundary_residual(&self, ctx: &PrecisionContext) -> Float {
        let bits = ctx.bits();
        let m = boundary_matrix_of(&self.basis, false, ctx);
        let r = m.mul_vec(&self.gamma);
        let worst = r
            .iter()
            .fold(Float::new(bits), |w, x| w.max(&Float::with_val(bits, x.abs_ref())));
        let norm = self
            .gamma
            .iter()
            .fold(Float::new(bits), |s, g| s + Float::with_val(bits, g.square_ref()))
            .sqrt();
        worst / norm
    }
}

/// `v = (-1)^n sigma u^(n)`, held on the same basis.
#[derive(Clone, Debug)]
pub struct VFunction {
    pub record: SingularRecord,
    pub basis: FundamentalBasis,
    pub gamma: Vec<Float>,
}

impl VFunction {
    pub fn evaluate(&self, t: &Float, ctx: &PrecisionContext) -> Float {
        let v = self.basis.combination(&self.gamma, self.record.n, t, ctx);
        if self.record.n % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// Partner function `v` of `u`. Since `sigma z^n = 1`, `v` is the n-th
/// basis derivative with the `z^n` factor left out.
pub fn take_v(u: &EigenFunction) -> VFunction {
    VFunction {
        record: u.record.clone(),
        basis: u.basis.clone(),
        gamma: u.gamma.clone(),
    }
}

pub fn evaluate_v(v: &VFunction, t: &Float, ctx: &PrecisionContext) -> Float {
    v.evaluate(t, ctx)
}

/// Basis combination plus a polynomial of degree below n.
#[derive(Clone, Debug)]
pub struct ExtendedFunction {
    pub basis: FundamentalBasis,
    pub gamma: Vec<Float>,
    /// Coefficients of `t^0 .. t^(n-1)`.
    pub poly: Vec<Float>,
}

impl ExtendedFunction {
    pub fn evaluate(&self, t: &Float, ctx: &PrecisionContext) -> Float {
        let bits = ctx.bits();
        let mut p = Float::new(bits);
        for c in self.poly.iter().rev() {
            p = p * t + c;
        }
        self.basis.combination(&self.gamma, 0, t, ctx) + p
    }
}

/// `J^n u` in closed form:
/// `J^n exp(nu t) = nu^(-n) (exp(nu t) - sum_{j<n} (nu t)^j / j!)`.
pub fn apply_jn_closed(u: &EigenFunction, ctx: &PrecisionContext) -> ExtendedFunction {
    apply_jn_to(&u.basis, &u.gamma, ctx)
}

/// Closed-form `J^n` of any basis combination.
pub fn apply_jn_to(basis: &FundamentalBasis, gamma: &[Float], ctx: &PrecisionContext) -> ExtendedFunction {
    let bits = ctx.bits();
    let n = basis.n;
    let mut out = vec![Float::new(bits); basis.len()];
    let mut poly = vec![Float::new(bits); n];
    let g = basis.slot_coefficients(gamma);
    for (s, g) in basis.slots.iter().zip(g) {
        let nu = Complex::with_val(bits, (&s.rate, &s.freq));
        let h = g * Complex::with_val(bits, (&nu).pow(-(n as i32)));
        out[s.re_index] = h.real().clone();
        if let Some(im) = s.im_index {
            out[im] = Float::with_val(bits, -h.imag());
        }
        let mut term = h;
        let mut factorial = Float::with_val(bits, 1);
        for (j, p) in poly.iter_mut().enumerate() {
            if j > 0 {
                term *= &nu;
                factorial *= j as u32;
            }
            *p -= Float::with_val(bits, term.real() / &factorial);
        }
    }
    ExtendedFunction {
        basis: basis.clone(),
        gamma: out,
        poly,
    }
}

/// Inner products `<u_i, u_j>` by shared-node quadrature.
pub fn gram_matrix(us: &[EigenFunction], ctx: &PrecisionContext) -> Result<Vec<Vec<Float>>> {
    let Some(first) = us.first() else {
        return Ok(Vec::new());
    };
    if us.iter().any(|u| u.convention != first.convention) {
        return Err(Error::MixedConvention);
    }
    let values = |t: &Float| us.iter().map(|u| u.evaluate(t, ctx)).collect::<Vec<_>>();
    gram_of(values, us.len(), us.iter().map(|u| u.record.i + u.n()).max().unwrap_or(1), ctx)
}

/// Inner products `<v_i, v_j>`.
pub fn gram_matrix_v(vs: &[VFunction], ctx: &PrecisionContext) -> Result<Vec<Vec<Float>>> {
    let values = |t: &Float| vs.iter().map(|v| v.evaluate(t, ctx)).collect::<Vec<_>>();
    let width = vs.iter().map(|v| v.record.i + v.record.n).max().unwrap_or(1);
    gram_of(values, vs.len(), width, ctx)
}

fn gram_of<F>(values: F, k: usize, width: usize, ctx: &PrecisionContext) -> Result<Vec<Vec<Float>>>
where
    F: Fn(&Float) -> Vec<Float> + Sync,
{
    let bits = ctx.bits();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let integrals = integrate_vec(
        |t| {
            let v = values(t);
            pairs
                .iter()
                .map(|&(i, j)| Float::with_val(bits, &v[i] * &v[j]))
                .collect()
        },
        pairs.len(),
        4 * width,
        ctx,
    )?;
    let mut g = vec![vec![Float::new(bits); k]; k];
    for (&(i, j), v) in pairs.iter().zip(integrals) {
        g[j][i] = v.clone();
        g[i][j] = v;
    }
    Ok(g)
}

/// `max |G - I|`.
pub fn identity_deviation(g: &[Vec<Float>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = Float::with_val(x.prec(), x - target).abs().to_f64();
            worst = worst.max(d);
        }
    }
    worst
}

/// CSV with header `t,u_1,...,u_N` on `points` uniform nodes of [0, 1],
/// both endpoints included, values with `digits` significant digits.
pub fn plot_data_csv(us: &[EigenFunction], points: usize, digits: usize, ctx: &PrecisionContext) -> String {
    let mut out = String::from("t");
    for u in us {
        out.push_str(&format!(",u_{}", u.record.i));
    }
    out.push('\n');
    let last = points.max(2) as u32 - 1;
    for j in 0..=last {
        let t = Float::with_val(ctx.bits(), j) / last;
        out.push_str(&to_decimal(&t, digits));
        for u in us {
            out.push(',');
            out.push_str(&to_decimal(&u.evaluate(&t, ctx), digits));
        }
        out.push('\n');
    }
    out
}
