//! Dense square matrices of MPFR floats and full-pivot Gaussian elimination.

use rug::Float;

/// Row-major square matrix.
#[derive(Clone, Debug)]
pub struct Matrix {
    dim: usize,
    data: Vec<Float>,
}

impl Matrix {
    pub fn zeros(dim: usize, bits: u32) -> Self {
        Matrix {
            dim,
            data: vec![Float::new(bits); dim * dim],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Float>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Matrix {
            dim,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &Float {
        &self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Float) {
        self.data[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Float] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Float {
        let bits = self.data.first().map_or(64, |x| x.prec());
        self.data
            .iter()
            .fold(Float::new(bits), |acc, x| acc.max(&Float::with_val(bits, x.abs_ref())))
    }

    /// `A v`
    pub fn mul_vec(&self, v: &[Float]) -> Vec<Float> {
        (0..self.dim)
            .map(|r| {
                let bits = self.get(r, 0).prec();
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Float::new(bits), |acc, (a, x)| acc + Float::with_val(bits, a * x))
            })
            .collect()
    }
}

/// Result of full-pivot elimination `P A Q = L U`.
///
/// `upper` holds U in the permuted frame; `row_perm[k]`, `col_perm[k]` name
/// the original row and column pivoted at step k.
#[derive(Clone, Debug)]
pub struct Elimination {
    pub upper: Matrix,
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    /// +1 or -1: parity of the two permutations combined.
    pub sign: i32,
}

impl Elimination {
    pub fn pivot(&self, k: usize) -> &Float {
        self.upper.get(k, k)
    }
}

/// Gaussian elimination with complete pivoting.
pub fn full_pivot_eliminate(a: &Matrix) -> Elimination {
    let n = a.dim();
    let mut u = a.clone();
    let mut rows: Vec<usize> = (0..n).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut sign = 1;
    for k in 0..n {
        let (mut pr, mut pc) = (k, k);
        let mut best = Float::new(u.get(k, k).prec());
        for r in k..n {
            for c in k..n {
                let v = u.get(r, c).clone().abs();
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if pr != k {
            for c in 0..n {
                u.data.swap(k * n + c, pr * n + c);
            }
            rows.swap(k, pr);
            sign = -sign;
        }
        if pc != k {
            for r in 0..n {
                u.data.swap(r * n + k, r * n + pc);
            }
            cols.swap(k, pc);
            sign = -sign;
        }
        let pivot = u.get(k, k).clone();
        if pivot.is_zero() {
            continue;
        }
        for r in k + 1..n {
            let factor = Float::with_val(pivot.prec(), u.get(r, k) / &pivot);
            if factor.is_zero() {
                continue;
            }
            for c in k..n {
                let delta = Float::with_val(pivot.prec(), &factor * u.get(k, c));
                let idx = r * n + c;
                u.data[idx] -= delta;
            }
        }
    }
    Elimination {
        upper: u,
        row_perm: rows,
        col_perm: cols,
        sign,
    }
}

/// Determinant via full-pivot elimination.
pub fn determinant(a: &Matrix) -> Float {
    let e = full_pivot_eliminate(a);
    let bits = a.get(0, 0).prec();
    let mut det = Float::with_val(bits, e.sign);
    for k in 0..a.dim() {
        det *= e.pivot(k);
    }
    det
}
