//! Dense linear algebra mod m.
//!
//! All module-level computations happen in lattices containing m*Z^n, so
//! elimination may reduce entries mod m at every step: coefficients stay
//! below m and i128 intermediates cannot overflow for any modulus this
//! crate accepts.

/// Matrix over Z/m, entries stored in [0, m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatZm {
    pub rows: usize,
    pub cols: usize,
    pub m: u64,
    data: Vec<u64>,
}

impl MatZm {
    pub fn new(rows: usize, cols: usize, m: u64, data: Vec<u64>) -> Self {
        assert!(m >= 2);
        assert_eq!(data.len(), rows * cols);
        let data = data.iter().map(|&e| e % m).collect();
        Self { rows, cols, m, data }
    }

    pub fn zeros(rows: usize, cols: usize, m: u64) -> Self {
        Self {
            rows,
            cols,
            m,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, m: u64) -> Self {
        let mut out = Self::zeros(n, n, m);
        for i in 0..n {
            out[(i, i)] = 1 % m;
        }
        out
    }

    pub fn from_cols(rows: usize, m: u64, cols: &[Vec<u64>]) -> Self {
        let mut out = Self::zeros(rows, cols.len(), m);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for i in 0..rows {
                out[(i, j)] = col[i] % m;
            }
        }
        out
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &MatZm) -> MatZm {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.m, other.m);
        let m = self.m as u128;
        let mut out = MatZm::zeros(self.rows, other.cols, self.m);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)] as u128;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let t = (out[(i, j)] as u128 + a * other[(k, j)] as u128) % m;
                    out[(i, j)] = t as u64;
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.cols);
        let m = self.m as u128;
        (0..self.rows)
            .map(|i| {
                let mut acc: u128 = 0;
                for j in 0..self.cols {
                    acc = (acc + self[(i, j)] as u128 * x[j] as u128) % m;
                }
                acc as u64
            })
            .collect()
    }

    pub fn add(&self, other: &MatZm) -> MatZm {
        assert_eq!((self.rows, self.cols, self.m), (other.rows, other.cols, other.m));
        let mut out = self.clone();
        for (a, &b) in out.data.iter_mut().zip(&other.data) {
            *a = (*a + b) % self.m;
        }
        out
    }

    pub fn neg(&self) -> MatZm {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = (self.m - *a) % self.m;
        }
        out
    }

    pub fn scale(&self, c: u64) -> MatZm {
        let c = c % self.m;
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = ((*a as u128 * c as u128) % self.m as u128) as u64;
        }
        out
    }

    pub fn transpose(&self) -> MatZm {
        let mut out = MatZm::zeros(self.cols, self.rows, self.m);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Horizontal concatenation [self | other].
    pub fn hcat(&self, other: &MatZm) -> MatZm {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.m, other.m);
        let mut out = MatZm::zeros(self.rows, self.cols + other.cols, self.m);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)];
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

    /// row[dst] += c * row[src] mod m
    fn add_row(&mut self, dst: usize, src: usize, c: u64) {
        let m = self.m as u128;
        let c = c as u128;
        for j in 0..self.cols {
            let t = (self[(dst, j)] as u128 + c * self[(src, j)] as u128) % m;
            self[(dst, j)] = t as u64;
        }
    }

    fn add_col(&mut self, dst: usize, src: usize, c: u64) {
        let m = self.m as u128;
        let c = c as u128;
        for i in 0..self.rows {
            let t = (self[(i, dst)] as u128 + c * self[(i, src)] as u128) % m;
            self[(i, dst)] = t as u64;
        }
    }
}

impl std::ops::Index<(usize, usize)> for MatZm {
    type Output = u64;
    fn index(&self, (i, j): (usize, usize)) -> &u64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for MatZm {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut u64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Outcome of diagonalizing A mod m: u * A * v = d as maps of Z/m-lattices,
/// where the lattice generated by the columns of A is always understood to
/// contain m*Z^rows. u and v are invertible mod m and u_inv * u = 1 mod m.
#[derive(Clone, Debug)]
pub struct SnfZm {
    pub u: MatZm,
    pub u_inv: MatZm,
    pub v: MatZm,
    /// Diagonal of the reduced matrix, length min(rows, cols), entries in [0, m).
    pub diag: Vec<u64>,
    pub rows: usize,
    pub cols: usize,
    pub m: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Diagonalize A by integer row/column operations, reducing mod m freely.
/// Valid because every lattice we present contains m*Z^rows.
pub fn snf_mod(a: &MatZm) -> SnfZm {
    let m = a.m;
    let mut d = a.clone();
    let mut u = MatZm::identity(a.rows, m);
    let mut u_inv = MatZm::identity(a.rows, m);
    let mut v = MatZm::identity(a.cols, m);
    let n = a.rows.min(a.cols);

    // Integer value of an entry for pivot comparisons: representatives in
    // [0, m) behave like integers since we reduce mod m throughout.
    for k in 0..n {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..d.rows {
                for j in k..d.cols {
                    if d[(i, j)] != 0 && pivot.is_none_or(|(pi, pj)| d[(i, j)] < d[(pi, pj)]) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return SnfZm {
                    diag: (0..n).map(|i| d[(i, i)]).collect(),
                    u,
                    u_inv,
                    v,
                    rows: a.rows,
                    cols: a.cols,
                    m,
                };
            };
            d.swap_rows(k, pi);
            u.swap_rows(k, pi);
            u_inv.swap_cols(k, pi);
            d.swap_cols(k, pj);
            v.swap_cols(k, pj);

            let mut dirty = false;
            let p = d[(k, k)];
            for i in k + 1..d.rows {
                if d[(i, k)] != 0 {
                    let q = d[(i, k)] / p;
                    let c = (m - q % m) % m;
                    d.add_row(i, k, c);
                    u.add_row(i, k, c);
                    // inverse transform: col[k] += q * col[i]
                    u_inv.add_col(k, i, q % m);
                    if d[(i, k)] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in k + 1..d.cols {
                if d[(k, j)] != 0 {
                    let q = d[(k, j)] / p;
                    let c = (m - q % m) % m;
                    d.add_col(j, k, c);
                    v.add_col(j, k, c);
                    if d[(k, j)] != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }

            let mut fixed = true;
            'scan: for i in k + 1..d.rows {
                for j in k + 1..d.cols {
                    if d[(i, j)] % p != 0 {
                        d.add_row(k, i, 1);
                        u.add_row(k, i, 1);
                        u_inv.add_col(i, k, m - 1);
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
    }
    SnfZm {
        diag: (0..n).map(|i| d[(i, i)]).collect(),
        u,
        u_inv,
        v,
        rows: a.rows,
        cols: a.cols,
        m,
    }
}

impl SnfZm {
    /// Invariant factor of coordinate i of the cokernel Z^rows / (im A + m Z^rows).
    pub fn cokernel_factor(&self, i: usize) -> u64 {
        if i < self.diag.len() && self.diag[i] != 0 {
            gcd(self.diag[i], self.m)
        } else {
            self.m
        }
    }

    /// Generators of { x in (Z/m)^cols : A x = 0 in (Z/m)^rows }, as columns.
    pub fn kernel_gens(&self) -> MatZm {
        let mut cols: Vec<Vec<u64>> = Vec::new();
        for i in 0..self.cols {
            let c = if i < self.diag.len() { self.diag[i] } else { 0 };
            let scale = if c == 0 { 1 } else { self.m / gcd(c, self.m) };
            let col = self.v.col(i);
            let scaled: Vec<u64> = col
                .iter()
                .map(|&e| ((e as u128 * scale as u128) % self.m as u128) as u64)
                .collect();
            if scaled.iter().any(|&e| e != 0) {
                cols.push(scaled);
            }
        }
        MatZm::from_cols(self.cols, self.m, &cols)
    }

    /// Solve A x = b mod m; None when no solution exists.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.rows);
        let c = self.u.apply(b);
        let mut y = vec![0u64; self.cols];
        for i in 0..self.rows {
            let di = if i < self.diag.len() { self.diag[i] } else { 0 };
            if di == 0 {
                if c[i] != 0 {
                    return None;
                }
                continue;
            }
            let g = gcd(di, self.m);
            if c[i] % g != 0 {
                return None;
            }
            if i < self.cols {
                // solve di * y = c[i] mod m
                let md = self.m / g;
                let dd = (di / g) % md;
                let cc = (c[i] / g) % md.max(1);
                let yi = if md <= 1 { 0 } else { (cc as u128 * mod_inverse(dd, md)? as u128 % md as u128) as u64 };
                y[i] = yi;
            }
        }
        Some(self.v.apply(&y))
    }
}

/// Inverse of a mod n for gcd(a, n) = 1.
pub fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (n as i128, (a % n) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(((t % n as i128 + n as i128) % n as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_mod_reduces() {
        let a = MatZm::new(2, 2, 12, vec![2, 4, 6, 8]);
        let s = snf_mod(&a);
        // u * a * v should be diagonal with the recorded diagonal
        let prod = s.u.mul(&a).mul(&s.v);
        for i in 0..2 {
            for j in 0..2 {
                if i == j {
                    assert_eq!(prod[(i, j)], s.diag[i]);
                } else {
                    assert_eq!(prod[(i, j)], 0);
                }
            }
        }
        assert_eq!(s.u.mul(&s.u_inv), MatZm::identity(2, 12));
        assert_eq!(s.u_inv.mul(&s.u), MatZm::identity(2, 12));
    }

    #[test]
    fn kernel_and_solve() {
        // multiplication by 2 on Z/4
        let a = MatZm::new(1, 1, 4, vec![2]);
        let s = snf_mod(&a);
        assert!(s.solve(&[2]).is_some());
        assert!(s.solve(&[1]).is_none());
        let x = s.solve(&[2]).unwrap();
        assert_eq!(a.apply(&x), vec![2]);
        let k = s.kernel_gens();
        // kernel of *2 on Z/4 is {0, 2}
        assert_eq!(k.cols, 1);
        assert_eq!(k.col(0), vec![2]);
    }

    #[test]
    fn mod_inverse_works() {
        assert_eq!(mod_inverse(3, 7), Some(5));
        assert_eq!(mod_inverse(2, 4), None);
    }
}
