//! Small dense matrices and index arrays with [`Expr`] entries.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::symexpr::{Expr, ZeroCheck};

#[derive(Clone, PartialEq, Eq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<Expr>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![Expr::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, Expr::one());
        }
        m
    }

    pub fn diagonal(entries: Vec<Expr>) -> Self {
        let mut m = SquareMatrix::zeros(entries.len());
        for (i, e) in entries.into_iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Expr) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!("matrix is not square ({n} rows)")));
        }
        Ok(SquareMatrix { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.data[i * self.n + j] = e;
    }

    pub fn transpose(&self) -> Self {
        SquareMatrix::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn rows(&self) -> Vec<Vec<Expr>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_canonical_zero()))
    }

    /// Entrywise zero test of `self + selfᵀ`.
    pub fn antisymmetry_check(&self) -> ZeroCheck {
        let mut acc = ZeroCheck::EXACT_ZERO;
        for i in 0..self.n {
            for j in i..self.n {
                let z = (self.get(i, j) + self.get(j, i)).zero_check().unwrap_or_default();
                acc = acc.and(z);
            }
        }
        acc
    }

    /// Entrywise zero test of `self - other`.
    pub fn equality_check(&self, other: &SquareMatrix) -> ZeroCheck {
        if self.n != other.n {
            return ZeroCheck::default();
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(ZeroCheck::EXACT_ZERO, |acc, (a, b)| acc.and((a - b).zero_check().unwrap_or_default()))
    }

    pub fn zero_check(&self) -> ZeroCheck {
        self.data.iter().fold(ZeroCheck::EXACT_ZERO, |acc, e| acc.and(e.zero_check().unwrap_or_default()))
    }

    /// Determinant of the submatrix on the given rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Expr {
        debug_assert_eq!(rows.len(), cols.len());
        let mut memo = HashMap::new();
        let mask = cols.iter().fold(0u64, |m, c| m | (1 << c));
        self.det_rec(rows, 0, mask, &mut memo)
    }

    /// Laplace expansion along rows, memoized on the set of free columns.
    fn det_rec(&self, rows: &[usize], depth: usize, cols: u64, memo: &mut HashMap<u64, Expr>) -> Expr {
        if depth == rows.len() {
            return Expr::one();
        }
        if let Some(e) = memo.get(&cols) {
            return e.clone();
        }
        let r = rows[depth];
        let mut acc = Expr::zero();
        let mut sign_pos = 0;
        for c in 0..self.n {
            if cols & (1 << c) == 0 {
                continue;
            }
            let a = self.get(r, c);
            if !a.is_canonical_zero() {
                let sub = self.det_rec(rows, depth + 1, cols & !(1 << c), memo);
                let t = a * &sub;
                acc = if sign_pos % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            sign_pos += 1;
        }
        memo.insert(cols, acc.clone());
        acc
    }

    pub fn det(&self) -> Expr {
        let idx: Vec<usize> = (0..self.n).collect();
        self.minor(&idx, &idx)
    }

    /// Inverse via the adjugate; fails when the determinant is zero.
    pub fn inverse(&self) -> Result<(SquareMatrix, Expr)> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::Invalid("matrix is singular".into()));
        }
        if self.is_diagonal() {
            let inv = SquareMatrix::diagonal(
                (0..self.n).map(|i| self.get(i, i).recip()).collect::<std::result::Result<_, _>>()?,
            );
            return Ok((inv, det));
        }
        let mut inv = SquareMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let rows: Vec<usize> = (0..self.n).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..self.n).filter(|&c| c != i).collect();
                let cof = self.minor(&rows, &cols);
                let cof = if (i + j) % 2 == 0 { cof } else { -cof };
                inv.set(i, j, cof.checked_div(&det)?);
            }
        }
        Ok((inv, det))
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        SquareMatrix::from_fn(self.n, |i, j| (0..self.n).map(|k| self.get(i, k) * other.get(k, j)).sum())
    }
}

impl fmt::Display for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SquareMatrix{self}")
    }
}

/// Dense array of rank `rank` over a chart of dimension `n`, row-major in
/// the index order given to [`IndexArray::get`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexArray {
    n: usize,
    rank: usize,
    data: Vec<Expr>,
}

impl IndexArray {
    pub fn zeros(n: usize, rank: usize) -> Self {
        IndexArray { n, rank, data: vec![Expr::zero(); n.pow(rank as u32)] }
    }

    pub fn from_fn(n: usize, rank: usize, f: impl Fn(&[usize]) -> Expr) -> Self {
        let mut a = IndexArray::zeros(n, rank);
        for (flat, idx) in multi_indices(n, rank).enumerate() {
            a.data[flat] = f(&idx);
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.data[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        let k = self.flat(idx);
        self.data[k] = e;
    }

    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, &Expr)> {
        multi_indices(self.n, self.rank).zip(self.data.iter())
    }

    pub fn zero_check(&self) -> ZeroCheck {
        self.data.iter().fold(ZeroCheck::EXACT_ZERO, |acc, e| acc.and(e.zero_check().unwrap_or_default()))
    }
}

/// All index tuples of the given rank in row-major order.
pub fn multi_indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total).map(move |mut k| {
        let mut idx = vec![0; rank];
        for slot in idx.iter_mut().rev() {
            *slot = k % n;
            k /= n;
        }
        idx
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn determinant_and_inverse() {
        let m = SquareMatrix::from_rows(vec![vec![e("a"), e("b")], vec![e("c"), e("d")]]).unwrap();
        assert_eq!(m.det(), e("a*d - b*c"));
        let (inv, _) = m.inverse().unwrap();
        assert!(m.mul(&inv).equality_check(&SquareMatrix::identity(2)).zero);
    }

    #[test]
    fn three_by_three_det() {
        let m = SquareMatrix::from_rows(vec![
            vec![e("2"), e("0"), e("1")],
            vec![e("1"), e("3"), e("2")],
            vec![e("1"), e("1"), e("2")],
        ])
        .unwrap();
        assert_eq!(m.det(), e("6"));
        assert!(SquareMatrix::zeros(2).inverse().is_err());
    }

    #[test]
    fn multi_index_order() {
        let v: Vec<_> = multi_indices(2, 2).collect();
        assert_eq!(v, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
