//! Truncated formal power series with exact rational coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use rug::Rational;

/// `c_0 + c_1 x + ... + c_(len-1) x^(len-1)`, everything beyond dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<Rational>,
}

impl PowerSeries {
    pub fn zero(len: usize) -> Self {
        PowerSeries {
            coeffs: vec![Rational::new(); len],
        }
    }

    pub fn constant(c: impl Into<Rational>, len: usize) -> Self {
        let mut s = Self::zero(len);
        if len > 0 {
            s.coeffs[0] = c.into();
        }
        s
    }

    /// `c x^k`
    pub fn monomial(c: impl Into<Rational>, k: usize, len: usize) -> Self {
        let mut s = Self::zero(len);
        if k < len {
            s.coeffs[k] = c.into();
        }
        s
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>, len: usize) -> Self {
        coeffs.resize(len, Rational::new());
        PowerSeries { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> &Rational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn set(&mut self, k: usize, c: Rational) {
        self.coeffs[k] = c;
    }

    /// Same series kept to `len` terms.
    pub fn truncated(&self, len: usize) -> Self {
        Self::from_coeffs(self.coeffs.iter().take(len).cloned().collect(), len)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| Rational::from(a * c)).collect(),
        }
    }

    /// `x^k f`
    pub fn shift(&self, k: usize) -> Self {
        let len = self.len();
        let mut out = Self::zero(len);
        for j in 0..len.saturating_sub(k) {
            out.coeffs[j + k] = self.coeffs[j].clone();
        }
        out
    }

    fn assert_no_constant(&self) {
        assert!(
            self.coeffs.first().is_none_or(|c| *c == 0),
            "series must have zero constant term"
        );
    }

    /// `exp(f)` for `f(0) = 0`, from `E' = f' E`.
    pub fn exp(&self) -> Self {
        self.assert_no_constant();
        let len = self.len();
        let mut e = Self::zero(len);
        if len == 0 {
            return e;
        }
        e.coeffs[0] = Rational::from(1);
        for k in 1..len {
            let mut acc = Rational::new();
            for j in 1..=k {
                if self.coeffs[j] != 0 {
                    acc += Rational::from(&self.coeffs[j] * &e.coeffs[k - j]) * j as u32;
                }
            }
            e.coeffs[k] = acc / k as u32;
        }
        e
    }

    /// `(sin f, cos f)` for `f(0) = 0`, from `S' = f' C`, `C' = -f' S`.
    pub fn sin_cos(&self) -> (Self, Self) {
        self.assert_no_constant();
        let len = self.len();
        let mut s = Self::zero(len);
        let mut c = Self::zero(len);
        if len == 0 {
            return (s, c);
        }
        c.coeffs[0] = Rational::from(1);
        for k in 1..len {
            let mut acc_s = Rational::new();
            let mut acc_c = Rational::new();
            for j in 1..=k {
                if self.coeffs[j] != 0 {
                    let w = Rational::from(&self.coeffs[j] * j as u32);
                    acc_s += Rational::from(&w * &c.coeffs[k - j]);
                    acc_c -= Rational::from(&w * &s.coeffs[k - j]);
                }
            }
            s.coeffs[k] = acc_s / k as u32;
            c.coeffs[k] = acc_c / k as u32;
        }
        (s, c)
    }

    /// `1 / f` for `f(0) != 0`.
    pub fn recip(&self) -> Self {
        let len = self.len();
        let mut r = Self::zero(len);
        if len == 0 {
            return r;
        }
        assert!(self.coeffs[0] != 0, "reciprocal needs a nonzero constant term");
        let inv0 = Rational::from(self.coeffs[0].recip_ref());
        r.coeffs[0] = inv0.clone();
        for k in 1..len {
            let mut acc = Rational::new();
            for j in 1..=k {
                if self.coeffs[j] != 0 {
                    acc += Rational::from(&self.coeffs[j] * &r.coeffs[k - j]);
                }
            }
            r.coeffs[k] = -acc * &inv0;
        }
        r
    }
}

impl Add for &PowerSeries {
    type Output = PowerSeries;

    fn add(self, rhs: &PowerSeries) -> PowerSeries {
        let len = self.len().min(rhs.len());
        PowerSeries {
            coeffs: (0..len).map(|k| Rational::from(&self.coeffs[k] + &rhs.coeffs[k])).collect(),
        }
    }
}

impl Sub for &PowerSeries {
    type Output = PowerSeries;

    fn sub(self, rhs: &PowerSeries) -> PowerSeries {
        let len = self.len().min(rhs.len());
        PowerSeries {
            coeffs: (0..len).map(|k| Rational::from(&self.coeffs[k] - &rhs.coeffs[k])).collect(),
        }
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;

    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        let len = self.len().min(rhs.len());
        let mut out = PowerSeries::zero(len);
        for (i, a) in self.coeffs.iter().take(len).enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(len - i).enumerate() {
                if *b != 0 {
                    out.coeffs[i + j] += Rational::from(a * b);
                }
            }
        }
        out
    }
}

impl Neg for &PowerSeries {
    type Output = PowerSeries;

    fn neg(self) -> PowerSeries {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(len: usize) -> PowerSeries {
        PowerSeries::monomial(1, 1, len)
    }

    fn factorial(k: u32) -> Rational {
        (1..=k).fold(Rational::from(1), |f, j| f * j)
    }

    #[test]
    fn exp_of_x() {
        let e = x(8).exp();
        for k in 0..8 {
            assert_eq!(*e.coeff(k), factorial(k as u32).recip());
        }
    }

    #[test]
    fn sin_cos_of_x() {
        let (s, c) = x(9).sin_cos();
        assert_eq!(*s.coeff(1), 1);
        assert_eq!(*s.coeff(3), Rational::from((-1, 6)));
        assert_eq!(*s.coeff(5), Rational::from((1, 120)));
        assert_eq!(*c.coeff(2), Rational::from((-1, 2)));
        assert_eq!(*c.coeff(8), factorial(8).recip());
        let one = &(&s * &s) + &(&c * &c);
        assert_eq!(one, PowerSeries::constant(1, 9));
    }

    #[test]
    fn reciprocal_of_geometric() {
        let one_minus_x = &PowerSeries::constant(1, 6) - &x(6);
        let r = one_minus_x.recip();
        assert!(r.coeffs().iter().all(|c| *c == 1));
        assert_eq!(&r * &one_minus_x, PowerSeries::constant(1, 6));
    }

    #[test]
    fn exp_is_a_homomorphism() {
        let f = PowerSeries::from_coeffs(vec![Rational::new(), Rational::from((2, 3)), Rational::from(-5)], 7);
        let g = PowerSeries::from_coeffs(vec![Rational::new(), Rational::from(1), Rational::new(), Rational::from((1, 7))], 7);
        assert_eq!((&f + &g).exp(), &f.exp() * &g.exp());
    }

    #[test]
    fn shift_truncates() {
        let s = x(4).shift(2);
        assert_eq!(*s.coeff(3), 1);
        assert_eq!(x(4).shift(5), PowerSeries::zero(4));
    }
}
