//! Exact integer and rational matrix algebra.
//!
//! Everything here works over arbitrary-precision integers ([`BigInt`]) or
//! reduced rationals ([`BigRational`]). Matrices are small (rank at most 22
//! in practice), so the algorithms favour clarity over asymptotics.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend(row.iter().cloned().map(Into::into));
        }
        IntMatrix { rows: r, cols: c, data }
    }

    /// Like [`IntMatrix::from_rows`] but reports ragged input as an error.
    pub fn try_from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(IntMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn diagonal<T: Into<BigInt> + Clone>(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = x.clone().into();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `vᵀ·self·w` for a square matrix.
    pub fn bilinear(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        let mw = self.mul_vec(w);
        v.iter().zip(&mw).map(|(a, b)| a * b).sum()
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &IntMatrix) -> IntMatrix {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> IntMatrix {
        let columns: Vec<Vec<BigInt>> = cols.iter().map(|&j| self.col(j)).collect();
        Self::from_columns(self.rows, &columns)
    }

    pub fn det(&self) -> BigInt {
        det_exact(self)
    }

    /// Inverse of a unimodular matrix; `None` if `m` is not invertible over Z.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        if !self.is_square() || !self.det().abs().is_one() {
            return None;
        }
        let inv = self.to_rational().inverse()?;
        let data = inv.data.iter().map(|x| x.to_integer()).collect();
        Some(IntMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn to_rational(&self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        }
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

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let x = std::mem::take(&mut self.data[r * self.cols + j]);
            self.data[r * self.cols + j] = -x;
        }
    }

    /// Replaces rows (a, b) by (s·a + t·b, u·a + v·b).
    fn combine_rows(&mut self, a: usize, b: usize, s: &BigInt, t: &BigInt, u: &BigInt, v: &BigInt) {
        for j in 0..self.cols {
            let x = self.data[a * self.cols + j].clone();
            let y = self.data[b * self.cols + j].clone();
            self.data[a * self.cols + j] = s * &x + t * &y;
            self.data[b * self.cols + j] = u * &x + v * &y;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = a * &rhs.data[k * rhs.cols + j];
                    out.data[i * rhs.cols + j] += v;
                }
            }
        }
        out
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Dense rational matrix. Entries are always reduced with positive denominators
/// (guaranteed by [`BigRational`]).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| (0..self.cols).map(|j| &self[(i, j)] * &v[j]).sum()).collect()
    }

    /// Inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        assert!(self.rows == self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::zeros(n, n);
        for i in 0..n {
            inv[(i, i)] = BigRational::one();
        }
        for c in 0..n {
            let p = (c..n).find(|&r| !a[(r, c)].is_zero())?;
            for j in 0..n {
                a.data.swap(c * n + j, p * n + j);
                inv.data.swap(c * n + j, p * n + j);
            }
            let piv = a[(c, c)].clone();
            for j in 0..n {
                a[(c, j)] = &a[(c, j)] / &piv;
                inv[(c, j)] = &inv[(c, j)] / &piv;
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone();
                for j in 0..n {
                    let x = &f * &a[(c, j)];
                    a[(r, j)] -= x;
                    let y = &f * &inv[(c, j)];
                    inv[(r, j)] -= y;
                }
            }
        }
        Some(inv)
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of [`smith_normal_form`]: `u · m · v = d`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl Smith {
    /// Diagonal entries `d_1 | d_2 | ...` (length `min(rows, cols)`).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d[(i, i)].clone()).collect()
    }
}

/// Smith normal form with transformation matrices. The diagonal is
/// nonnegative and satisfies the divisibility chain.
pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let n = rows.min(cols);

    for t in 0..n {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = &d[(i, j)];
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < d[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                // Trailing block is zero: done.
                normalise_signs(&mut d, &mut u, n);
                return Smith { u, d, v };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = d[(i, t)].div_floor(&d[(t, t)]);
                let nq = -q;
                d.add_row_multiple(i, t, &nq);
                u.add_row_multiple(i, t, &nq);
                if !d[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = d[(t, j)].div_floor(&d[(t, t)]);
                let nq = -q;
                d.add_col_multiple(j, t, &nq);
                v.add_col_multiple(j, t, &nq);
                if !d[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Pivot must divide the whole trailing block.
            let mut offender = None;
            'search: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !d[(i, j)].is_multiple_of(&d[(t, t)]) {
                        offender = Some(i);
                        break 'search;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
    }
    normalise_signs(&mut d, &mut u, n);
    Smith { u, d, v }
}

fn normalise_signs(d: &mut IntMatrix, u: &mut IntMatrix, n: usize) {
    for t in 0..n {
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
}

/// Exact determinant by Bareiss fraction-free elimination.
pub fn det_exact(m: &IntMatrix) -> BigInt {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            match (k + 1..n).find(|&r| !a[(r, k)].is_zero()) {
                Some(r) => {
                    a.swap_rows(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)];
                a[(i, j)] = num / &prev;
            }
            a[(i, k)] = BigInt::zero();
        }
        prev = a[(k, k)].clone();
    }
    sign * &a[(n - 1, n - 1)]
}

/// Result of [`hermite_normal_form`]: `u · m = h`.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Number of nonzero rows of `h` (the rank of `m`).
    pub rank: usize,
}

/// Row-style Hermite normal form: `h` is in echelon form with positive pivots,
/// entries above each pivot reduced into `[0, pivot)`, zero rows at the bottom.
pub fn hermite_normal_form(m: &IntMatrix) -> Hermite {
    let (rows, cols) = (m.rows, m.cols);
    let mut h = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Fold every row below into the pivot row with extended gcd steps.
        for i in r + 1..rows {
            if h[(i, c)].is_zero() {
                continue;
            }
            let a = h[(r, c)].clone();
            let b = h[(i, c)].clone();
            let eg = a.extended_gcd(&b);
            let g = eg.gcd;
            let (s, t) = (eg.x, eg.y);
            let ua = -(&b / &g);
            let va = &a / &g;
            h.combine_rows(r, i, &s, &t, &ua, &va);
            u.combine_rows(r, i, &s, &t, &ua, &va);
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let piv = h[(r, c)].clone();
        for i in 0..r {
            let q = h[(i, c)].div_floor(&piv);
            if !q.is_zero() {
                let nq = -q;
                h.add_row_multiple(i, r, &nq);
                u.add_row_multiple(i, r, &nq);
            }
        }
        r += 1;
    }
    Hermite { h, u, rank: r }
}

/// Solves `a · x = b` exactly for square nonsingular `a`.
pub fn solve_rational(a: &IntMatrix, b: &[BigRational]) -> Result<Vec<BigRational>> {
    if !a.is_square() || a.rows != b.len() {
        return Err(Error::DimensionMismatch("solve_rational needs a square system".into()));
    }
    let n = a.rows;
    let mut m = a.to_rational();
    let mut rhs = b.to_vec();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[(r, c)].is_zero()) else {
            return Err(Error::NoSolution);
        };
        for j in 0..n {
            m.data.swap(c * n + j, p * n + j);
        }
        rhs.swap(c, p);
        let piv = m[(c, c)].clone();
        for r in c + 1..n {
            if m[(r, c)].is_zero() {
                continue;
            }
            let f = &m[(r, c)] / &piv;
            for j in c..n {
                let x = &f * &m[(c, j)];
                m[(r, j)] -= x;
            }
            let y = &f * &rhs[c];
            rhs[r] -= y;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for c in (0..n).rev() {
        let mut acc = rhs[c].clone();
        for j in c + 1..n {
            acc -= &m[(c, j)] * &x[j];
        }
        x[c] = acc / &m[(c, c)];
    }
    Ok(x)
}

/// Z-basis (as columns) of `ker(m) ∩ Zⁿ`. The basis is saturated: the
/// columns extend to a basis of `Zⁿ`.
pub fn integer_kernel_saturated(m: &IntMatrix) -> IntMatrix {
    let n = m.cols;
    let hnf = hermite_normal_form(&m.transpose());
    // u · mᵀ = h, so rows of u past the rank are kernel vectors of m; u is
    // unimodular so they span a saturated sublattice.
    let columns: Vec<Vec<BigInt>> = (hnf.rank..n).map(|i| hnf.u.row(i)).collect();
    IntMatrix::from_columns(n, &columns)
}

/// Saturation of the column span of `m` inside `Zⁿ` (columns = basis).
pub fn saturate_columns(m: &IntMatrix) -> IntMatrix {
    let n = m.rows;
    let left_kernel = integer_kernel_saturated(&m.transpose());
    if left_kernel.cols() == 0 {
        return IntMatrix::identity(n);
    }
    integer_kernel_saturated(&left_kernel.transpose())
}

/// Row-style HNF basis of the Z-span of the given integer vectors; returns
/// only the nonzero rows.
pub fn lattice_basis_rows(vectors: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = IntMatrix::from_columns(dim, vectors).transpose();
    let hnf = hermite_normal_form(&m);
    (0..hnf.rank).map(|i| hnf.h.row(i)).collect()
}

pub fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Least common multiple of the denominators of a rational vector.
pub fn common_denominator(xs: &[BigRational]) -> BigInt {
    xs.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn check_smith(a: &IntMatrix) -> Smith {
        let s = smith_normal_form(a);
        assert_eq!(&(&s.u * a) * &s.v, s.d);
        assert!(s.u.det().abs().is_one());
        assert!(s.v.det().abs().is_one());
        let f = s.invariant_factors();
        for w in f.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        s
    }

    #[test]
    fn smith_examples() {
        let s = check_smith(&IntMatrix::identity(2));
        assert_eq!(s.d, IntMatrix::identity(2));
        let s = check_smith(&m(&[vec![2, 4], vec![4, 0]]));
        assert_eq!(s.d, IntMatrix::diagonal(&[2, 8]));
        let s = check_smith(&m(&[vec![0, 4], vec![4, 0]]));
        assert_eq!(s.d, IntMatrix::diagonal(&[4, 4]));
    }

    #[test]
    fn smith_rectangular_and_zero() {
        check_smith(&m(&[vec![2, 4, 6], vec![3, 6, 9]]));
        check_smith(&m(&[vec![0, 0], vec![0, 0], vec![0, 0]]));
        let s = check_smith(&m(&[vec![6], vec![4]]));
        assert_eq!(s.invariant_factors(), vec![BigInt::from(2)]);
    }

    #[test]
    fn determinants() {
        assert_eq!(m(&[vec![0, 1], vec![1, 0]]).det(), BigInt::from(-1));
        assert_eq!(m(&[vec![2, 4], vec![4, 0]]).det(), BigInt::from(-16));
        assert_eq!(m(&[vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]).det(), BigInt::from(-1));
        assert_eq!(m(&[vec![1, 2], vec![2, 4]]).det(), BigInt::zero());
        assert_eq!(IntMatrix::zeros(0, 0).det(), BigInt::one());
    }

    #[test]
    fn hermite_examples() {
        let h = hermite_normal_form(&IntMatrix::identity(3));
        assert_eq!(h.h, IntMatrix::identity(3));

        let a = m(&[vec![2, 0], vec![1, 1]]);
        let h = hermite_normal_form(&a);
        assert_eq!(h.h, m(&[vec![1, 1], vec![0, 2]]));
        assert_eq!(&h.u * &a, h.h);
        assert!(h.u.det().abs().is_one());

        let a = m(&[vec![4], vec![6]]);
        let h = hermite_normal_form(&a);
        assert_eq!(h.h, m(&[vec![2], vec![0]]));
        assert_eq!(h.rank, 1);
        assert_eq!(&h.u * &a, h.h);
    }

    #[test]
    fn solve_examples() {
        let x = solve_rational(&IntMatrix::identity(2), &[q(1, 2), q(3, 1)]).unwrap();
        assert_eq!(x, vec![q(1, 2), q(3, 1)]);
        let x = solve_rational(&m(&[vec![2, 4], vec![4, 0]]), &[q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(x, vec![q(0, 1), q(1, 4)]);
        let e = solve_rational(&m(&[vec![0, 0], vec![0, 0]]), &[q(1, 1), q(0, 1)]);
        assert!(matches!(e, Err(Error::NoSolution)));
    }

    #[test]
    fn kernel_examples() {
        let k = integer_kernel_saturated(&m(&[vec![1, 1]]));
        assert_eq!(k.cols(), 1);
        let v = k.col(0);
        assert!(v == vec![BigInt::from(1), BigInt::from(-1)] || v == vec![BigInt::from(-1), BigInt::from(1)]);

        // Saturation forced: (1,-1), never (2,-2).
        let k = integer_kernel_saturated(&m(&[vec![2, 2]]));
        let v = k.col(0);
        assert_eq!(gcd_all(&v), BigInt::one());
        assert_eq!(&v[0] + &v[1], BigInt::zero());
    }

    #[test]
    fn saturation_divides_out_content() {
        let sat = saturate_columns(&m(&[vec![3], vec![3]]));
        let v = sat.col(0);
        assert_eq!(gcd_all(&v), BigInt::one());
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn rational_inverse() {
        let a = m(&[vec![2, 1], vec![1, 2]]).to_rational();
        let inv = a.inverse().unwrap();
        assert_eq!(inv[(0, 0)], q(2, 3));
        assert_eq!(inv[(0, 1)], q(-1, 3));
        assert!(m(&[vec![1, 2], vec![2, 4]]).to_rational().inverse().is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix() -> impl Strategy<Value = IntMatrix> {
            (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-9i64..10, r * c).prop_map(move |v| {
                    let rows: Vec<Vec<i64>> = v.chunks(c).map(|ch| ch.to_vec()).collect();
                    IntMatrix::from_rows(&rows)
                })
            })
        }

        proptest! {
            #[test]
            fn smith_is_a_valid_decomposition(a in small_matrix()) {
                let s = check_smith(&a);
                if a.is_square() {
                    let prod: BigInt = s.invariant_factors().iter().product();
                    prop_assert_eq!(prod, a.det().abs());
                }
            }

            #[test]
            fn hermite_is_unimodular_row_reduction(a in small_matrix()) {
                let h = hermite_normal_form(&a);
                prop_assert_eq!(&h.u * &a, h.h.clone());
                prop_assert!(h.u.det().abs().is_one());
            }

            #[test]
            fn kernel_is_saturated(a in small_matrix()) {
                let k = integer_kernel_saturated(&a);
                let prod = &a * &k;
                prop_assert!(prod.to_rows().iter().flatten().all(|x| x.is_zero()));
                if k.cols() > 0 {
                    let s = smith_normal_form(&k);
                    prop_assert!(s.invariant_factors().iter().all(|d| d.is_one()));
                }
            }
        }
    }
}
