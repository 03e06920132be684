//! Real fundamental system of `lambda u^(2n) + (-1)^(n+1) u = 0`.
//!
//! Every entry is the real or imaginary part of `exp(omega_k z t)` for a root
//! `omega_k` in the closed upper half-plane. For even n the two real roots
//! give `exp(zt)` and `exp(-zt)`; every non-real conjugate pair gives
//! `exp(azt) sin(bzt)` followed by `exp(azt) cos(bzt)`.

use rug::{Complex, Float};

use crate::numerics::{Matrix, PrecisionContext};
use crate::unity_spectrum::{angle_cos_sin, UnityRoot};

/// Which part of `exp(omega z t)` an entry takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Descriptor of one basis function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    /// `exp(sign * z t)`
    Exp { sign: i8 },
    /// `exp(a z t) cos(b z t)`
    ExpCos,
    /// `exp(a z t) sin(b z t)`
    ExpSin,
}

#[derive(Clone, Debug)]
pub struct BasisEntry {
    pub root: UnityRoot,
    pub part: Part,
    pub kind: EntryKind,
    /// `Re omega`, `Im omega`.
    pub a: Float,
    pub b: Float,
}

/// One root of the basis with the positions of its real and imaginary part.
#[derive(Clone, Debug)]
pub struct RootSlot {
    pub root: UnityRoot,
    pub re_index: usize,
    pub im_index: Option<usize>,
    /// `Re omega z`, `Im omega z`.
    pub rate: Float,
    pub freq: Float,
}

#[derive(Clone, Debug)]
pub struct FundamentalBasis {
    pub n: usize,
    pub z: Float,
    pub entries: Vec<BasisEntry>,
    pub slots: Vec<RootSlot>,
}

impl FundamentalBasis {
    pub fn new(n: usize, z: &Float, ctx: &PrecisionContext) -> Self {
        assert!(n >= 1, "order n must be at least 1");
        let bits = ctx.bits();
        let z = Float::with_val(bits, z);
        let mut entries = Vec::with_capacity(2 * n);
        let mut slots = Vec::with_capacity(n + 1);
        let root = |k: usize| crate::unity_spectrum::omega(n, k).expect("index in range");
        let push_real = |k: usize, sign: i8, entries: &mut Vec<BasisEntry>, slots: &mut Vec<RootSlot>| {
            let r = root(k);
            let (a, b) = r.cos_sin(ctx);
            slots.push(RootSlot {
                root: r,
                re_index: entries.len(),
                im_index: None,
                rate: Float::with_val(bits, &a * &z),
                freq: Float::new(bits),
            });
            entries.push(BasisEntry { root: r, part: Part::Re, kind: EntryKind::Exp { sign }, a, b });
        };
        let push_pair = |k: usize, entries: &mut Vec<BasisEntry>, slots: &mut Vec<RootSlot>| {
            let r = root(k);
            let (a, b) = r.cos_sin(ctx);
            slots.push(RootSlot {
                root: r,
                re_index: entries.len() + 1,
                im_index: Some(entries.len()),
                rate: Float::with_val(bits, &a * &z),
                freq: Float::with_val(bits, &b * &z),
            });
            entries.push(BasisEntry {
                root: r,
                part: Part::Im,
                kind: EntryKind::ExpSin,
                a: a.clone(),
                b: b.clone(),
            });
            entries.push(BasisEntry { root: r, part: Part::Re, kind: EntryKind::ExpCos, a, b });
        };
        if n % 2 == 0 {
            push_real(0, 1, &mut entries, &mut slots);
            push_real(n, -1, &mut entries, &mut slots);
            for k in 1..n {
                push_pair(k, &mut entries, &mut slots);
            }
        } else {
            for k in 0..n {
                push_pair(k, &mut entries, &mut slots);
            }
        }
        FundamentalBasis { n, z, entries, slots }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Column scale `exp(-max(Re omega, 0) z)` that keeps every entry of the
    /// boundary matrix of order one.
    pub fn column_scales(&self) -> Vec<Float> {
        let bits = self.z.prec();
        self.entries
            .iter()
            .map(|e| {
                let a = if e.a.is_sign_positive() { e.a.clone() } else { Float::new(bits) };
                (-(a * &self.z)).exp()
            })
            .collect()
    }

    /// Complex coefficient `g = gamma_re - i gamma_im` per slot, so that the
    /// combination equals `sum_slots Re(g exp(omega z t))`.
    pub fn slot_coefficients(&self, gamma: &[Float]) -> Vec<Complex> {
        let bits = self.z.prec();
        self.slots
            .iter()
            .map(|s| {
                let re = Float::with_val(bits, &gamma[s.re_index]);
                let im = match s.im_index {
                    Some(i) => Float::with_val(bits, -&gamma[i]),
                    None => Float::new(bits),
                };
                Complex::with_val(bits, (re, im))
            })
            .collect()
    }

    /// `sum_k gamma_k Re/Im(omega_k^j exp(omega_k z t))`, i.e. the j-th
    /// derivative of the combination divided by `z^j`.
    pub fn combination(&self, gamma: &[Float], j: usize, t: &Float, ctx: &PrecisionContext) -> Float {
        let bits = ctx.bits();
        let g = self.slot_coefficients(gamma);
        let mut acc = Float::new(bits);
        for (s, g) in self.slots.iter().zip(&g) {
            let (wc, ws) = s.root.power_cos_sin(j as i64, ctx);
            let p = Complex::with_val(bits, g * Complex::with_val(bits, (wc, ws)));
            let e = Float::with_val(bits, &s.rate * t).exp();
            let theta = Float::with_val(bits, &s.freq * t);
            let (sin, cos) = theta.sin_cos(Float::new(bits));
            let re = Float::with_val(bits, p.real() * &cos) - Float::with_val(bits, p.imag() * &sin);
            acc += re * e;
        }
        acc
    }

    /// Value of entry `k` differentiated `j` times, divided by `z^j`.
    pub fn entry_derivative(&self, k: usize, j: usize, t: &Float, ctx: &PrecisionContext) -> Float {
        let mut unit = vec![Float::new(ctx.bits()); self.len()];
        unit[k] = Float::with_val(ctx.bits(), 1);
        self.combination(&unit, j, t, ctx)
    }
}

/// Boundary matrix with row factors `z^j` removed: row `j < n` holds
/// `phi_k^(j)(1)`, row `j >= n` holds `phi_k^(j)(0)`.
pub fn boundary_matrix(n: usize, z: &Float, ctx: &PrecisionContext) -> Matrix {
    boundary_matrix_of(&FundamentalBasis::new(n, z, ctx), false, ctx)
}

/// Boundary matrix of a basis, optionally with columns multiplied by
/// [`FundamentalBasis::column_scales`].
pub fn boundary_matrix_of(basis: &FundamentalBasis, scaled: bool, ctx: &PrecisionContext) -> Matrix {
    let bits = ctx.bits();
    let n = basis.n;
    let dim = 2 * n;
    let mut m = Matrix::zeros(dim, bits);
    let scales = scaled.then(|| basis.column_scales());
    for s in &basis.slots {
        // exp(omega z t) at t = 1 and t = 0, optionally scaled
        let mut at_one = Complex::with_val(bits, (Float::with_val(bits, s.rate.exp_ref()), 0));
        let mut at_zero = Complex::with_val(bits, (1, 0));
        let (sin, cos) = Float::with_val(bits, &s.freq).sin_cos(Float::new(bits));
        at_one *= Complex::with_val(bits, (cos, sin));
        if let Some(sc) = &scales {
            at_one *= &sc[s.re_index];
            at_zero *= &sc[s.re_index];
        }
        for j in 0..dim {
            let (wc, ws) = angle_cos_sin(s.root.angle_numerator * j as i64, n, ctx);
            let w = Complex::with_val(bits, (wc, ws));
            let base = if j < n { &at_one } else { &at_zero };
            let v = Complex::with_val(bits, &w * base);
            m.set(j, s.re_index, v.real().clone());
            if let Some(im) = s.im_index {
                m.set(j, im, v.imag().clone());
            }
        }
    }
    m
}
