//! Smith normal form over Z with arbitrary-precision entries.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix with arbitrary-precision entries, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        Self { rows, cols, data }
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        Self::new(rows, cols, entries.iter().map(|&e| BigInt::from(e)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a * &other[(k, j)];
                    out[(i, j)] += t;
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += c * row[src]
    fn add_row(&mut self, dst: usize, src: usize, c: &BigInt) {
        for j in 0..self.cols {
            let t = c * &self[(src, j)];
            self[(dst, j)] += t;
        }
    }

    /// col[dst] += c * col[src]
    fn add_col(&mut self, dst: usize, src: usize, c: &BigInt) {
        for i in 0..self.rows {
            let t = c * &self[(i, src)];
            self[(i, dst)] += t;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let t = -self[(r, j)].clone();
            self[(r, j)] = t;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// U * M * V = D with U, V unimodular and D diagonal, d1 | d2 | ..., di >= 0.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    /// Diagonal entries of D, length min(rows, cols).
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }
}

/// Smith normal form of an integer matrix. Arbitrary precision throughout,
/// so intermediate coefficient growth cannot overflow.
pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut v = IntMatrix::identity(m.cols);
    let n = m.rows.min(m.cols);

    for k in 0..n {
        loop {
            // Locate a pivot: nonzero entry of minimal absolute value in the
            // trailing submatrix.
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..d.rows {
                for j in k..d.cols {
                    if !d[(i, j)].is_zero()
                        && pivot.is_none_or(|(pi, pj)| d[(i, j)].abs() < d[(pi, pj)].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                // Trailing submatrix is zero; done.
                return finish(u, d, v, k);
            };
            d.swap_rows(k, pi);
            u.swap_rows(k, pi);
            d.swap_cols(k, pj);
            v.swap_cols(k, pj);

            // Clear column k below the pivot and row k to its right.
            let mut dirty = false;
            for i in k + 1..d.rows {
                if !d[(i, k)].is_zero() {
                    let q = -(&d[(i, k)] / &d[(k, k)]);
                    d.add_row(i, k, &q);
                    u.add_row(i, k, &q);
                    if !d[(i, k)].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in k + 1..d.cols {
                if !d[(k, j)].is_zero() {
                    let q = -(&d[(k, j)] / &d[(k, k)]);
                    d.add_col(j, k, &q);
                    v.add_col(j, k, &q);
                    if !d[(k, j)].is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }

            // Divisibility: the pivot must divide every remaining entry.
            let mut fixed = true;
            'scan: for i in k + 1..d.rows {
                for j in k + 1..d.cols {
                    if !(&d[(i, j)] % &d[(k, k)]).is_zero() {
                        d.add_row(k, i, &BigInt::one());
                        u.add_row(k, i, &BigInt::one());
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        if d[(k, k)].is_negative() {
            d.negate_row(k);
            u.negate_row(k);
        }
    }
    finish(u, d, v, n)
}

fn finish(mut u: IntMatrix, mut d: IntMatrix, v: IntMatrix, upto: usize) -> SmithDecomposition {
    for k in 0..upto {
        if d[(k, k)].is_negative() {
            d.negate_row(k);
            u.negate_row(k);
        }
    }
    SmithDecomposition { u, d, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn diag_i64(s: &SmithDecomposition) -> Vec<i64> {
        s.diagonal().iter().map(|d| d.to_i64().unwrap()).collect()
    }

    #[test]
    fn identity_3x3() {
        let m = IntMatrix::identity(3);
        let s = smith_normal_form(&m);
        assert_eq!(diag_i64(&s), vec![1, 1, 1]);
    }

    #[test]
    fn two_by_two() {
        // d1 = gcd of entries = 2, d1*d2 = |det| = |2*8 - 4*6| = 8.
        let m = IntMatrix::from_i64(2, 2, &[2, 4, 6, 8]);
        let s = smith_normal_form(&m);
        assert_eq!(diag_i64(&s), vec![2, 4]);
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
    }

    #[test]
    fn zero_2x2() {
        let m = IntMatrix::zeros(2, 2);
        let s = smith_normal_form(&m);
        assert_eq!(diag_i64(&s), vec![0, 0]);
    }

    #[test]
    fn umv_equals_d_rectangular() {
        let m = IntMatrix::from_i64(3, 2, &[4, 2, 0, 6, 9, 3]);
        let s = smith_normal_form(&m);
        assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
        let diag = diag_i64(&s);
        for w in diag.windows(2) {
            if w[1] != 0 {
                assert_eq!(w[1] % w[0].max(1), 0);
            }
        }
    }
}
