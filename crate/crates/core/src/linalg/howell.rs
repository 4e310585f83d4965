use super::{Matrix, ModuleProfile, RingModulus};

/// Howell canonical form of a row module over `Z/p^s`.
///
/// The input is padded with `cols` zero rows so that every annihilator row
/// produced during elimination has a free slot. `padded` equals
/// `transform * [M; 0]` and `transform` is invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HowellForm {
    padded: Matrix,
    transform: Matrix,
    pivots: Vec<(usize, u32)>,
    source_rows: usize,
}

impl HowellForm {
    /// Nonzero rows of the canonical form.
    pub fn basis(&self) -> Matrix {
        self.padded.submatrix(0..self.pivots.len(), 0..self.padded.cols())
    }

    /// Canonical form with at least `min_rows` rows, zero rows last.
    pub fn echelon(&self, min_rows: usize) -> Matrix {
        let rows = self.pivots.len().max(min_rows).min(self.padded.rows());
        let mut h = self.padded.submatrix(0..rows, 0..self.padded.cols());
        for _ in self.padded.rows()..min_rows {
            h = h.vstack(&Matrix::zeros(1, self.padded.cols()));
        }
        h
    }

    /// The canonical form as it sits in the padded frame.
    pub fn padded(&self) -> &Matrix {
        &self.padded
    }

    /// Square invertible transform acting on the zero-padded input.
    pub fn transform(&self) -> &Matrix {
        &self.transform
    }

    /// Coefficients expressing each basis row in terms of the input rows.
    pub fn basis_coefficients(&self) -> Matrix {
        self.transform.submatrix(0..self.pivots.len(), 0..self.source_rows)
    }

    /// `(column, valuation)` of each pivot; pivots are normalised to `p^v`.
    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    pub fn num_rows(&self) -> usize {
        self.pivots.len()
    }

    /// Log-p of the size of the row module.
    pub fn length(&self, m: &RingModulus) -> u32 {
        self.pivots.iter().map(|&(_, v)| m.s() - v).sum()
    }

    /// Reduces `v` against the form; the remainder is zero iff `v` is in the module.
    pub fn reduce(&self, v: &[u64], m: &RingModulus) -> Vec<u64> {
        let mut b = v.iter().map(|&x| m.reduce(x)).collect::<Vec<_>>();
        for (i, &(col, val)) in self.pivots.iter().enumerate() {
            let pv = m.p().pow(val);
            let x = b[col];
            if x == 0 {
                continue;
            }
            let f = x / pv;
            if f == 0 {
                continue;
            }
            let row = self.padded.row(i);
            for (bj, &rj) in b.iter_mut().zip(row) {
                *bj = m.sub(*bj, m.mul(f, rj));
            }
        }
        b
    }

    /// Membership test by back-substitution.
    pub fn contains(&self, v: &[u64], m: &RingModulus) -> bool {
        self.reduce(v, m).iter().all(|&x| x == 0)
    }

    /// Coefficients `c` with `c * basis = v`, when `v` is in the module.
    pub fn express(&self, v: &[u64], m: &RingModulus) -> Option<Vec<u64>> {
        let mut b = v.iter().map(|&x| m.reduce(x)).collect::<Vec<_>>();
        let mut coeffs = vec![0u64; self.pivots.len()];
        for (i, &(col, val)) in self.pivots.iter().enumerate() {
            let pv = m.p().pow(val);
            let x = b[col];
            if x % pv != 0 {
                return None;
            }
            let f = x / pv;
            coeffs[i] = f;
            if f != 0 {
                let row = self.padded.row(i);
                for (bj, &rj) in b.iter_mut().zip(row) {
                    *bj = m.sub(*bj, m.mul(f, rj));
                }
            }
        }
        b.iter().all(|&x| x == 0).then_some(coeffs)
    }
}

/// Computes the Howell form of the row module of `a`.
pub fn canonical_form(a: &Matrix, m: &RingModulus) -> HowellForm {
    let r = a.rows();
    let c = a.cols();
    let n = r + c;
    let mut h = a.reduce(m).vstack(&Matrix::zeros(c, c));
    let mut u = Matrix::identity(n);
    let p = m.p();
    let mut pivots: Vec<(usize, u32)> = Vec::new();
    let mut row = 0usize;

    for col in 0..c {
        if row >= n {
            break;
        }
        let best = (row..n).filter(|&i| h.get(i, col) != 0).min_by_key(|&i| m.valuation(h.get(i, col)));
        let Some(best) = best else { continue };
        h.swap_rows(row, best);
        u.swap_rows(row, best);
        let (v, unit) = m.split(h.get(row, col));
        let unit_inv = m.inv(unit).expect("unit part is invertible");
        h.scale_row(row, unit_inv, m);
        u.scale_row(row, unit_inv, m);
        let pv = p.pow(v);
        for i in row + 1..n {
            let x = h.get(i, col);
            if x != 0 {
                let f = m.neg(x / pv);
                h.add_row_multiple(i, row, f, m);
                u.add_row_multiple(i, row, f, m);
            }
        }
        if v > 0 {
            // p^(s-v) times the pivot row vanishes in this column; it must
            // stay in the module for later columns.
            let ann = p.pow(m.s() - v);
            let slot = (row + 1..n).find(|&i| h.row(i).iter().all(|&x| x == 0)).expect("padding guarantees a free row");
            h.add_row_multiple(slot, row, ann, m);
            u.add_row_multiple(slot, row, ann, m);
        }
        pivots.push((col, v));
        row += 1;
    }

    // Reduce entries above each pivot into [0, p^v).
    for (i, &(col, v)) in pivots.iter().enumerate() {
        let pv = p.pow(v);
        for k in 0..i {
            let x = h.get(k, col);
            let f = x / pv;
            if f != 0 {
                h.add_row_multiple(k, i, m.neg(f), m);
                u.add_row_multiple(k, i, m.neg(f), m);
            }
        }
    }

    HowellForm { padded: h, transform: u, pivots, source_rows: r }
}

/// Generators of the kernel module, returned as the rows of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub generators: Matrix,
    pub profile: ModuleProfile,
}

/// `{ v : a * v = 0 }` for `a` acting on column vectors.
pub fn kernel(a: &Matrix, m: &RingModulus) -> Kernel {
    let generators = left_kernel(&a.transpose(), m);
    let profile = ModuleProfile::of_row_span(&generators, m);
    Kernel { generators, profile }
}

/// Rows generating `{ w : w * a = 0 }`.
pub fn left_kernel(a: &Matrix, m: &RingModulus) -> Matrix {
    let r = a.rows();
    let c = a.cols();
    let aug = a.reduce(m).hstack(&Matrix::identity(r));
    let form = canonical_form(&aug, m);
    let rows: Vec<Vec<u64>> = (0..form.num_rows())
        .map(|i| form.padded().row(i))
        .filter(|row| row[..c].iter().all(|&x| x == 0))
        .map(|row| row[c..].to_vec())
        .collect();
    Matrix::from_row_vectors(&rows, r)
}

/// Canonical basis of the column span of `a`, as rows.
pub fn image_basis(a: &Matrix, m: &RingModulus) -> Matrix {
    canonical_form(&a.transpose(), m).basis()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span_members(rows: &Matrix, m: &RingModulus) -> Vec<Vec<u64>> {
        let order = m.order();
        let k = rows.rows();
        let mut out = Vec::new();
        let mut coeffs = vec![0u64; k];
        loop {
            out.push(rows.left_mul_vec(&coeffs, m));
            let mut i = 0;
            while i < k {
                coeffs[i] += 1;
                if coeffs[i] < order {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn identity_is_canonical() {
        let m = RingModulus::new(7, 2).unwrap();
        let f = canonical_form(&Matrix::identity(3), &m);
        assert_eq!(f.echelon(3), Matrix::identity(3));
    }

    #[test]
    fn diagonal_with_torsion() {
        let m = RingModulus::new(5, 2).unwrap();
        let a = Matrix::from_rows(&[[5, 0], [0, 1]], &m).unwrap();
        let f = canonical_form(&a, &m);
        assert_eq!(f.basis(), a);
        assert_eq!(f.length(&m), 3);
    }

    #[test]
    fn repeated_rows_collapse() {
        let m = RingModulus::new(5, 2).unwrap();
        let a = Matrix::from_rows(&[[1, 1], [1, 1]], &m).unwrap();
        let f = canonical_form(&a, &m);
        assert_eq!(f.echelon(2), Matrix::from_rows(&[[1, 1], [0, 0]], &m).unwrap());
        let field = RingModulus::new(5, 1).unwrap();
        let members = span_members(&a.reduce(&field), &field);
        assert_eq!(members.len(), 5);
    }

    #[test]
    fn annihilator_rows_are_added() {
        let m = RingModulus::new(5, 2).unwrap();
        let a = Matrix::from_rows(&[[5, 1]], &m).unwrap();
        let f = canonical_form(&a, &m);
        assert_eq!(f.basis(), Matrix::from_rows(&[[5, 1], [0, 5]], &m).unwrap());
        assert!(f.contains(&[0, 5], &m));
        assert!(!f.contains(&[0, 1], &m));
    }

    #[test]
    fn transform_reproduces_form() {
        let m = RingModulus::new(3, 3).unwrap();
        let a = Matrix::from_rows(&[[3, 6, 9, 1], [9, 0, 3, 3], [0, 0, 0, 9]], &m).unwrap();
        let f = canonical_form(&a, &m);
        let padded = a.vstack(&Matrix::zeros(4, 4));
        assert_eq!(f.transform().mul(&padded, &m), *f.padded());
        assert!(f.transform().inverse(&m).is_some());
        assert_eq!(f.basis_coefficients().mul(&a, &m), f.basis());
    }

    #[test]
    fn kernel_of_torsion_diagonal() {
        let m = RingModulus::new(5, 2).unwrap();
        let a = Matrix::from_rows(&[[5, 0], [0, 1]], &m).unwrap();
        let k = kernel(&a, &m);
        let members = span_members(&k.generators, &m);
        let mut expected = Vec::new();
        for x in 0..25u64 {
            for y in 0..25u64 {
                if a.mul_vec(&[x, y], &m).iter().all(|&z| z == 0) {
                    expected.push(vec![x, y]);
                }
            }
        }
        expected.sort();
        assert_eq!(members, expected);
        assert_eq!(k.profile.exponents(), &[1]);
    }

    #[test]
    fn kernel_extremes() {
        let m = RingModulus::new(7, 1).unwrap();
        let k = kernel(&Matrix::zeros(2, 2), &m);
        assert_eq!(k.profile.free_rank(), 2);
        let k = kernel(&Matrix::identity(3), &m);
        assert_eq!(k.profile.dim_mod_p(), 0);
    }
}
