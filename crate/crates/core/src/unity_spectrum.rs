//! Roots of the characteristic polynomial `lambda nu^(2n) + (-1)^(n+1)` and
//! the subset combinatorics behind the closed form of the boundary
//! determinant.
//!
//! With `z = lambda^(-1/(2n))` the roots are `nu_k = z omega_k`, where
//! `omega_k = exp(i pi (2k + [n]_2) / (2n))` and `[n]_2 = n mod 2`. Angles are
//! kept as integer numerators over `2n`, so all sign and symmetry decisions
//! are exact; trigonometric values are produced at the requested precision
//! only when needed.
//!
//! Every size-n subset `I` of `{0, .., 2n-1}` contributes
//! `c_I exp(z sum_{k in I} omega_k)` to the determinant. The sets `I`, its
//! reflection across the real axis `Ī`, its complement `C` and `C̄` share the
//! same coefficient, and together give one `cosh(alpha z) cos(beta z)` term.

use rayon::prelude::*;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;

/// Largest order for which subsets are enumerated (C(24, 12) ~ 2.7M).
pub const ENUMERATION_CAP: usize = 12;

/// `omega_k` for a given order `n`, stored by its exact angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnityRoot {
    pub n: usize,
    pub k: usize,
    /// `2k + [n]_2`; the angle is `pi * angle_numerator / (2n)`.
    pub angle_numerator: i64,
}

impl UnityRoot {
    /// `(cos, sin)` of the angle.
    pub fn cos_sin(&self, ctx: &PrecisionContext) -> (Float, Float) {
        angle_cos_sin(self.angle_numerator, self.n, ctx)
    }

    /// `(cos, sin)` of `j` times the angle, i.e. `omega_k^j`.
    pub fn power_cos_sin(&self, j: i64, ctx: &PrecisionContext) -> (Float, Float) {
        angle_cos_sin(self.angle_numerator * j, self.n, ctx)
    }

    pub fn value(&self, ctx: &PrecisionContext) -> Complex {
        let (c, s) = self.cos_sin(ctx);
        Complex::with_val(ctx.bits(), (c, s))
    }

    /// Index of the complex conjugate root.
    pub fn conjugate_index(&self) -> usize {
        reflect_index(self.n, self.k)
    }
}

/// `cos` and `sin` of `pi * numerator / (2n)`, exact on the axes.
pub fn angle_cos_sin(numerator: i64, n: usize, ctx: &PrecisionContext) -> (Float, Float) {
    let full = 4 * n as i64;
    let num = numerator.rem_euclid(full);
    let quarter = n as i64;
    let bits = ctx.bits();
    let exact = |c: i32, s: i32| (Float::with_val(bits, c), Float::with_val(bits, s));
    match num {
        0 => exact(1, 0),
        x if x == quarter => exact(0, 1),
        x if x == 2 * quarter => exact(-1, 0),
        x if x == 3 * quarter => exact(0, -1),
        _ => {
            let angle = ctx.pi() * num / (2 * n as u32);
            let (s, c) = angle.sin_cos(Float::new(bits));
            (c, s)
        }
    }
}

/// `omega_k` for order `n`.
pub fn omega(n: usize, k: usize) -> Result<UnityRoot> {
    if n == 0 || k >= 2 * n {
        return Err(Error::IndexOutOfRange {
            index: k,
            bound: 2 * n,
        });
    }
    Ok(UnityRoot {
        n,
        k,
        angle_numerator: (2 * k + n % 2) as i64,
    })
}

/// All `omega_k`, `k = 0..2n`.
pub fn omegas(n: usize) -> Vec<UnityRoot> {
    (0..2 * n).map(|k| omega(n, k).expect("k in range")).collect()
}

/// The 2n zeros `nu_k = lambda^(-1/(2n)) omega_k` of the characteristic
/// polynomial.
pub fn nu_roots(n: usize, lambda: &Float, ctx: &PrecisionContext) -> Result<Vec<Complex>> {
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be at least 1".into()));
    }
    if *lambda <= 0 || !lambda.is_finite() {
        return Err(Error::NonPositiveLambda);
    }
    let bits = ctx.bits();
    let modulus = Float::with_val(bits, lambda.ln_ref()) / (2 * n as u32);
    let modulus = (-modulus).exp();
    Ok(omegas(n)
        .iter()
        .map(|w| {
            let (c, s) = w.cos_sin(ctx);
            Complex::with_val(bits, (c * &modulus, s * &modulus))
        })
        .collect())
}

/// Index of the conjugate root: `(2n - [n]_2 - k) mod 2n`.
pub fn reflect_index(n: usize, k: usize) -> usize {
    (4 * n - n % 2 - k) % (2 * n)
}

/// The reflected set `Ī`, sorted.
pub fn reflect(n: usize, subset: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = subset.iter().map(|&k| reflect_index(n, k)).collect();
    out.sort_unstable();
    out
}

/// The complement in `{0, .., 2n-1}`, sorted.
pub fn complement(n: usize, subset: &[usize]) -> Vec<usize> {
    (0..2 * n).filter(|k| !subset.contains(k)).collect()
}

fn mask_of(subset: &[usize]) -> u32 {
    subset.iter().fold(0, |m, &k| m | (1 << k))
}

fn indices_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|k| mask & (1 << k) != 0).collect()
}

fn reflect_mask(n: usize, mask: u32) -> u32 {
    (0..2 * n)
        .filter(|k| mask & (1 << k) != 0)
        .fold(0, |m, k| m | (1 << reflect_index(n, k)))
}

/// `(alpha_I, beta_I) = (Re, Im) sum_{k in I} omega_k`.
pub fn subset_sum(n: usize, subset: &[usize], ctx: &PrecisionContext) -> (Float, Float) {
    let table: Vec<(Float, Float)> = omegas(n).iter().map(|w| w.cos_sin(ctx)).collect();
    sum_from_table(&table, subset, ctx.bits())
}

fn sum_from_table(table: &[(Float, Float)], subset: &[usize], bits: u32) -> (Float, Float) {
    let mut re = Float::new(bits);
    let mut im = Float::new(bits);
    for &k in subset {
        re += &table[k].0;
        im += &table[k].1;
    }
    (re, im)
}

/// Pairwise differences `omega_l - omega_k`, indexed `[k][l]`.
struct DifferenceTable {
    diff: Vec<Vec<Complex>>,
    prefactor: Complex,
}

impl DifferenceTable {
    fn new(n: usize, ctx: &PrecisionContext) -> Self {
        let bits = ctx.bits();
        let values: Vec<Complex> = omegas(n).iter().map(|w| w.value(ctx)).collect();
        let diff = values
            .iter()
            .map(|wk| {
                values
                    .iter()
                    .map(|wl| Complex::with_val(bits, wl - wk))
                    .collect()
            })
            .collect();
        // (-1)^(n(n+1)/2) * i^([n]_2 * n)
        let sign = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
        let i_power = if n % 2 == 1 { n % 4 } else { 0 };
        let unit = match i_power {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        let prefactor = Complex::with_val(bits, (sign * unit.0, sign * unit.1));
        DifferenceTable { diff, prefactor }
    }

    fn vandermonde(&self, set: &[usize], acc: &mut Complex) {
        for (a, &k) in set.iter().enumerate() {
            for &l in &set[a + 1..] {
                *acc *= &self.diff[k][l];
            }
        }
    }

    fn coefficient(&self, n: usize, subset: &[usize]) -> Complex {
        let mut c = self.prefactor.clone();
        self.vandermonde(subset, &mut c);
        self.vandermonde(&complement(n, subset), &mut c);
        c
    }
}

/// `c_I = (-1)^(n(n+1)/2) i^([n]_2 n) V(I) V(C)`, where `V` is the product of
/// `omega_l - omega_k` over ordered pairs `k < l` of the set.
pub fn subset_coefficient(n: usize, subset: &[usize], ctx: &PrecisionContext) -> Result<Complex> {
    validate_subset(n, subset)?;
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    Ok(DifferenceTable::new(n, ctx).coefficient(n, &sorted))
}

fn validate_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.len() != n {
        return Err(Error::WrongSubsetSize {
            got: subset.len(),
            expected: n,
        });
    }
    if let Some(&k) = subset.iter().find(|&&k| k >= 2 * n) {
        return Err(Error::IndexOutOfRange {
            index: k,
            bound: 2 * n,
        });
    }
    if mask_of(subset).count_ones() as usize != n {
        return Err(Error::InvalidArgument("subset has repeated indices".into()));
    }
    Ok(())
}

/// One class `{I, Ī, C, C̄}` of size-n subsets.
#[derive(Clone, Debug)]
pub struct SubsetOrbit {
    /// Representative: `beta >= 0`, then `alpha >= 0`, then lexicographically
    /// smallest.
    pub subset: Vec<usize>,
    pub alpha: Float,
    pub beta: Float,
    pub c: Complex,
    /// Number of distinct sets in the class: 2 or 4.
    pub orbit_size: usize,
}

impl SubsetOrbit {
    /// All distinct members of the class, sorted.
    pub fn members(&self, n: usize) -> Vec<Vec<usize>> {
        let i = self.subset.clone();
        let ir = reflect(n, &i);
        let c = complement(n, &i);
        let cr = reflect(n, &c);
        let mut all = vec![i, ir, c, cr];
        all.sort();
        all.dedup();
        all
    }
}

/// Size-n subsets of `{0, .., 2n-1}` in increasing mask order.
fn combinations(n: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let limit: u32 = 1 << (2 * n);
    let mut v: u32 = (1 << n) - 1;
    while v < limit {
        out.push(v);
        // Gosper's hack
        let t = v | (v - 1);
        let next = (t + 1) | (((!t & (!t).wrapping_neg()) - 1) >> (v.trailing_zeros() + 1));
        v = next;
    }
    out
}

/// Partition of all size-n subsets into orbits `{I, Ī, C, C̄}`.
///
/// Orbits are returned in increasing order of their smallest member mask.
pub fn enumerate_orbits(n: usize, ctx: &PrecisionContext) -> Result<Vec<SubsetOrbit>> {
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be at least 1".into()));
    }
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let bits = ctx.bits();
    let full: u32 = (1 << (2 * n)) - 1;
    let table: Vec<(Float, Float)> = omegas(n).iter().map(|w| w.cos_sin(ctx)).collect();
    let diffs = DifferenceTable::new(n, ctx);
    let eps = Float::with_val(bits, 2 * n as u32) * ctx.half_precision_eps();
    let snap = |x: Float| if Float::with_val(bits, x.abs_ref()) < eps { Float::new(bits) } else { x };

    let orbits = combinations(n)
        .into_par_iter()
        .filter_map(|mask| {
            let mut members = vec![
                mask,
                reflect_mask(n, mask),
                full ^ mask,
                reflect_mask(n, full ^ mask),
            ];
            members.sort_unstable();
            members.dedup();
            if members[0] != mask {
                return None;
            }
            let mut candidates: Vec<(Vec<usize>, Float, Float)> = members
                .iter()
                .map(|&m| {
                    let set = indices_of(m);
                    let (a, b) = sum_from_table(&table, &set, bits);
                    (set, snap(a), snap(b))
                })
                .collect();
            candidates.sort_by(|x, y| {
                let key = |c: &(Vec<usize>, Float, Float)| (c.2.is_sign_negative() && !c.2.is_zero(), c.1.is_sign_negative() && !c.1.is_zero());
                key(x).cmp(&key(y)).then_with(|| x.0.cmp(&y.0))
            });
            let (subset, alpha, beta) = candidates.swap_remove(0);
            let c = diffs.coefficient(n, &subset);
            Some(SubsetOrbit {
                subset,
                alpha,
                beta,
                c,
                orbit_size: members.len(),
            })
        })
        .collect();
    Ok(orbits)
}

/// `cot(pi / (2n))`: the largest real part of any n-term sum of the
/// `omega_k`, reached by the n-1 roots in the right half-plane plus `i`.
pub fn dominant_alpha(n: usize, ctx: &PrecisionContext) -> Float {
    if n <= 1 {
        return ctx.zero();
    }
    (ctx.pi() / (2 * n as u32)).cot()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256).unwrap()
    }

    fn close(a: &Complex, re: f64, im: f64, tol: f64) -> bool {
        let d = Complex::with_val(256, a - Complex::with_val(256, (re, im)));
        d.abs().real().to_f64() <= tol
    }

    #[test]
    fn omega_examples() {
        let c = ctx();
        assert!(close(&omega(2, 0).unwrap().value(&c), 1.0, 0.0, 0.0));
        assert!(close(&omega(2, 1).unwrap().value(&c), 0.0, 1.0, 0.0));
        assert!(close(&omega(1, 0).unwrap().value(&c), 0.0, 1.0, 0.0));
        let w = omega(3, 0).unwrap().value(&c);
        assert!(close(&w, 3f64.sqrt() / 2.0, 0.5, 1e-15));
        assert!(omega(2, 4).is_err());
    }

    #[test]
    fn omegas_sum_to_zero_and_have_unit_modulus() {
        let c = ctx();
        for n in 1..=9 {
            let mut sum = Complex::new(256);
            for w in omegas(n) {
                let v = w.value(&c);
                let m = Float::with_val(256, v.abs_ref());
                assert!(Float::with_val(256, m - 1u32).abs() < 1e-70);
                sum += v;
            }
            assert!(Float::with_val(256, sum.abs_ref()) < 1e-70, "n={n}");
        }
    }

    #[test]
    fn omega_power_n() {
        let c = ctx();
        for n in 1..=8usize {
            for w in omegas(n) {
                let (re, im) = w.power_cos_sin(n as i64, &c);
                let s = if w.k % 2 == 0 { 1.0 } else { -1.0 };
                if n % 2 == 0 {
                    assert_eq!((re.to_f64(), im.to_f64()), (s, 0.0));
                } else {
                    assert_eq!((re.to_f64(), im.to_f64()), (0.0, s));
                }
            }
        }
    }

    #[test]
    fn conjugation_law() {
        let c = ctx();
        for n in 1..=8usize {
            for w in omegas(n) {
                let expect = if n % 2 == 0 { (2 * n - w.k) % (2 * n) } else { 2 * n - w.k - 1 };
                assert_eq!(w.conjugate_index(), expect);
                let conj = omega(n, expect).unwrap().value(&c);
                let v = w.value(&c);
                assert!(close(&conj, v.real().to_f64(), -v.imag().to_f64(), 1e-15));
            }
        }
    }

    #[test]
    fn nu_roots_satisfy_characteristic_equation() {
        let c = ctx();
        for n in 1..=5usize {
            let lambda = c.float(0.037);
            let roots = nu_roots(n, &lambda, &c).unwrap();
            assert_eq!(roots.len(), 2 * n);
            let target = if n % 2 == 0 { 1.0 } else { -1.0 };
            for nu in &roots {
                let p = Complex::with_val(256, nu.clone().pow(2 * n as u32)) * &lambda;
                assert!(close(&p, target, 0.0, 1e-60));
            }
            let real = roots.iter().filter(|r| r.imag().is_zero()).count();
            assert_eq!(real, if n % 2 == 0 { 2 } else { 0 });
        }
        assert!(matches!(nu_roots(2, &c.float(0), &c), Err(Error::NonPositiveLambda)));
    }

    #[test]
    fn n1_roots_are_imaginary() {
        let c = ctx();
        let lambda = c.float(4) / c.pi().square();
        let roots = nu_roots(1, &lambda, &c).unwrap();
        let modulus = lambda.clone().sqrt().recip();
        for nu in roots {
            assert!(nu.real().is_zero());
            assert!(Float::with_val(256, nu.imag().clone().abs() - &modulus).abs() < 1e-70);
        }
    }

    #[test]
    fn n2_coefficients() {
        let c = ctx();
        assert!(close(&subset_coefficient(2, &[0, 2], &c).unwrap(), 0.0, -4.0, 1e-70));
        assert!(close(&subset_coefficient(2, &[0, 1], &c).unwrap(), 0.0, -2.0, 1e-70));
        assert!(close(&subset_coefficient(2, &[1, 3], &c).unwrap(), 0.0, -4.0, 1e-70));
        assert!(matches!(
            subset_coefficient(2, &[0], &c),
            Err(Error::WrongSubsetSize { got: 1, expected: 2 })
        ));
    }

    #[test]
    fn n2_and_n1_orbits() {
        let c = ctx();
        let orbits = enumerate_orbits(2, &c).unwrap();
        assert_eq!(orbits.len(), 2);
        let small = orbits.iter().find(|o| o.orbit_size == 2).unwrap();
        assert!(small.alpha.is_zero() && small.beta.is_zero());
        assert_eq!(small.subset, vec![0, 2]);
        let big = orbits.iter().find(|o| o.orbit_size == 4).unwrap();
        assert_eq!((big.alpha.to_f64(), big.beta.to_f64()), (1.0, 1.0));
        assert_eq!(big.subset, vec![0, 1]);

        let one = enumerate_orbits(1, &c).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].subset, vec![0]);
        assert_eq!(one[0].orbit_size, 2);
        assert_eq!((one[0].alpha.to_f64(), one[0].beta.to_f64()), (0.0, 1.0));
    }

    #[test]
    fn orbits_partition_all_subsets() {
        let c = ctx();
        for n in 1..=7usize {
            let orbits = enumerate_orbits(n, &c).unwrap();
            let total: usize = orbits.iter().map(|o| o.orbit_size).sum();
            let binom = combinations(n).len();
            assert_eq!(total, binom);
            assert!(orbits.len() * 4 >= binom);
            let mut seen = std::collections::HashSet::new();
            for o in &orbits {
                assert!(!o.beta.is_sign_negative() || o.beta.is_zero());
                assert!(!o.alpha.is_sign_negative() || o.alpha.is_zero());
                for m in o.members(n) {
                    assert!(seen.insert(m));
                }
            }
        }
    }

    #[test]
    fn coefficients_agree_across_orbit_members() {
        let c = ctx();
        for n in 1..=6usize {
            for o in enumerate_orbits(n, &c).unwrap() {
                for m in o.members(n) {
                    let cm = subset_coefficient(n, &m, &c).unwrap();
                    let d = Complex::with_val(256, &cm - &o.c);
                    let scale = Float::with_val(256, o.c.abs_ref());
                    assert!(Float::with_val(256, d.abs_ref()) < scale * 1e-60, "n={n} {m:?}");
                }
                let (a, b) = subset_sum(n, &o.subset, &c);
                assert!(Float::with_val(256, a - &o.alpha).abs() < 1e-60);
                assert!(Float::with_val(256, b - &o.beta).abs() < 1e-60);
            }
        }
    }

    #[test]
    fn dominant_alpha_values() {
        let c = ctx();
        assert!(dominant_alpha(1, &c).is_zero());
        assert!(Float::with_val(256, dominant_alpha(2, &c) - 1u32).abs() < 1e-70);
        let expect = c.float(2).sqrt() + 1u32;
        assert!(Float::with_val(256, dominant_alpha(4, &c) - expect).abs() < 1e-70);
    }

    #[test]
    fn dominant_alpha_is_brute_force_maximum() {
        let c = ctx();
        for n in 1..=8usize {
            let mut best = f64::MIN;
            for mask in 0u32..(1 << (2 * n)) {
                if mask.count_ones() as usize != n {
                    continue;
                }
                let re: f64 = (0..2 * n)
                    .filter(|k| mask & (1 << k) != 0)
                    .map(|k| (std::f64::consts::PI * (2 * k + n % 2) as f64 / (2 * n) as f64).cos())
                    .sum();
                best = best.max(re);
            }
            assert!((dominant_alpha(n, &c).to_f64() - best).abs() < 1e-12, "n={n}");
            let from_orbits = enumerate_orbits(n, &c)
                .unwrap()
                .into_iter()
                .map(|o| o.alpha.to_f64())
                .fold(f64::MIN, f64::max);
            assert!((from_orbits - best).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_orbits(13, &ctx()),
            Err(Error::EnumerationCap { n: 13, .. })
        ));
    }
}
