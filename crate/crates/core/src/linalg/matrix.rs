use std::fmt;

use serde::{Deserialize, Serialize};

use super::RingModulus;
use crate::error::{invalid, Result};

/// Dense row-major matrix of residues. The modulus is supplied to each
/// operation; entries are always kept in `[0, p^s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<u64>, m: &RingModulus) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("expected {} entries, got {}", rows * cols, data.len()));
        }
        Ok(Matrix { rows, cols, data: data.into_iter().map(|x| m.reduce(x)).collect() })
    }

    /// Builds a matrix from signed integer rows, reducing every entry.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R], m: &RingModulus) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return invalid(format!("row {i} has length {}, expected {cols}", r.len()));
            }
            data.extend(r.iter().map(|&x| m.reduce_i64(x)));
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn from_row_vectors(rows: &[Vec<u64>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row length mismatch");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn column_vector(v: &[u64]) -> Self {
        Matrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn scalar(n: usize, c: u64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn row_vectors(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix, m: &RingModulus) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        let modulus = m.order() as u128;
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: u128 = 0;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u128 * other.get(k, j) as u128;
                    if acc >= 1u128 << 126 {
                        acc %= modulus;
                    }
                }
                out.set(i, j, (acc % modulus) as u64);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64], m: &RingModulus) -> Vec<u64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows).map(|i| dot(self.row(i), v, m)).collect()
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[u64], m: &RingModulus) -> Vec<u64> {
        assert_eq!(self.rows, v.len(), "dimension mismatch in vector-matrix product");
        let mut out = vec![0u64; self.cols];
        for (i, &c) in v.iter().enumerate() {
            if c != 0 {
                for (o, &x) in out.iter_mut().zip(self.row(i)) {
                    *o = m.add(*o, m.mul(c, x));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix, m: &RingModulus) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| m.add(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix, m: &RingModulus) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| m.sub(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u64, m: &RingModulus) -> Matrix {
        let data = self.data.iter().map(|&a| m.mul(a, c)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn pow(&self, mut e: u64, m: &RingModulus) -> Matrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, m);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, m);
            }
        }
        acc
    }

    /// Reduces every entry to a coarser modulus with the same prime.
    pub fn reduce(&self, m: &RingModulus) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| m.reduce(x)).collect() }
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Matrix { rows: self.rows, cols, data }
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j));
            }
        }
        out
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (oi, i) in rows.clone().enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out.set(oi, oj, self.get(i, j));
            }
        }
        out
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row[dst] += c * row[src]`
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, c: u64, m: &RingModulus) {
        if c == 0 {
            return;
        }
        for j in 0..self.cols {
            let v = m.add(self.get(dst, j), m.mul(c, self.get(src, j)));
            self.set(dst, j, v);
        }
    }

    /// `col[dst] += c * col[src]`
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, c: u64, m: &RingModulus) {
        if c == 0 {
            return;
        }
        for i in 0..self.rows {
            let v = m.add(self.get(i, dst), m.mul(c, self.get(i, src)));
            self.set(i, dst, v);
        }
    }

    pub fn scale_row(&mut self, i: usize, c: u64, m: &RingModulus) {
        for x in self.row_mut(i) {
            *x = m.mul(*x, c);
        }
    }

    pub fn scale_col(&mut self, j: usize, c: u64, m: &RingModulus) {
        for i in 0..self.rows {
            let v = m.mul(self.get(i, j), c);
            self.set(i, j, v);
        }
    }

    /// Inverse over `Z/p^s`, or `None` when the determinant is not a unit.
    pub fn inverse(&self, m: &RingModulus) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| m.is_unit(a.get(r, col)))?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let u = m.inv(a.get(col, col)).expect("unit pivot");
            a.scale_row(col, u, m);
            inv.scale_row(col, u, m);
            for r in 0..n {
                if r != col {
                    let f = m.neg(a.get(r, col));
                    a.add_row_multiple(r, col, f, m);
                    inv.add_row_multiple(r, col, f, m);
                }
            }
        }
        Some(inv)
    }

    /// Determinant over `Z/p^s` by elimination with minimal-valuation pivots.
    pub fn determinant(&self, m: &RingModulus) -> u64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1 % m.order();
        for col in 0..n {
            let pivot = (col..n).filter(|&r| a.get(r, col) != 0).min_by_key(|&r| m.valuation(a.get(r, col)));
            let Some(pivot) = pivot else { return 0 };
            if pivot != col {
                a.swap_rows(col, pivot);
                det = m.neg(det);
            }
            let (v, u) = m.split(a.get(col, col));
            let u_inv = m.inv(u).expect("unit part");
            det = m.mul(det, a.get(col, col));
            for r in col + 1..n {
                let x = a.get(r, col);
                if x != 0 {
                    let f = m.mul(x / m.p().pow(v), u_inv);
                    a.add_row_multiple(r, col, m.neg(f), m);
                }
            }
        }
        det
    }

    /// Rank over the residue field of the reduction mod p.
    pub fn rank_mod_p(&self, m: &RingModulus) -> usize {
        let f = m.residue_field();
        row_echelon_mod_p(&self.reduce(&f), &f).len()
    }
}

/// Row-reduced basis (as rows) of the row space over `F_p`.
pub fn row_echelon_mod_p(a: &Matrix, f: &RingModulus) -> Vec<Vec<u64>> {
    debug_assert_eq!(f.s(), 1);
    let mut a = a.reduce(f);
    let mut rank = 0;
    for col in 0..a.cols() {
        let Some(pivot) = (rank..a.rows()).find(|&r| a.get(r, col) != 0) else { continue };
        a.swap_rows(rank, pivot);
        let u = f.inv(a.get(rank, col)).expect("nonzero in a field");
        a.scale_row(rank, u, f);
        for r in 0..a.rows() {
            if r != rank {
                let c = f.neg(a.get(r, col));
                a.add_row_multiple(r, rank, c, f);
            }
        }
        rank += 1;
    }
    (0..rank).map(|i| a.row(i).to_vec()).collect()
}

pub fn dot(a: &[u64], b: &[u64], m: &RingModulus) -> u64 {
    let modulus = m.order() as u128;
    let mut acc: u128 = 0;
    for (&x, &y) in a.iter().zip(b) {
        acc += x as u128 * y as u128;
        if acc >= 1u128 << 126 {
            acc %= modulus;
        }
    }
    (acc % modulus) as u64
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}
