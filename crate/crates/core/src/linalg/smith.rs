use super::{Matrix, RingModulus};
use crate::error::{invalid, Result};

/// `left * a * right = diag(p^e_0, p^e_1, ...)` with `left`, `right` invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub left: Matrix,
    pub right: Matrix,
    /// Exponents of the nonzero diagonal entries, nondecreasing.
    pub exponents: Vec<u32>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.exponents.len()
    }
}

pub fn smith_form(a: &Matrix, m: &RingModulus) -> SmithForm {
    let r = a.rows();
    let c = a.cols();
    let mut d = a.reduce(m);
    let mut left = Matrix::identity(r);
    let mut right = Matrix::identity(c);
    let mut exponents = Vec::new();
    let p = m.p();

    for k in 0..r.min(c) {
        let mut best: Option<(usize, usize, u32)> = None;
        for i in k..r {
            for j in k..c {
                let x = d.get(i, j);
                if x != 0 {
                    let v = m.valuation(x);
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
            if matches!(best, Some((_, _, 0))) {
                break;
            }
        }
        let Some((bi, bj, v)) = best else { break };
        d.swap_rows(k, bi);
        left.swap_rows(k, bi);
        d.swap_cols(k, bj);
        right.swap_cols(k, bj);
        let (_, unit) = m.split(d.get(k, k));
        let unit_inv = m.inv(unit).expect("unit part is invertible");
        d.scale_row(k, unit_inv, m);
        left.scale_row(k, unit_inv, m);
        let pv = p.pow(v);
        for i in k + 1..r {
            let x = d.get(i, k);
            if x != 0 {
                let f = m.neg(x / pv);
                d.add_row_multiple(i, k, f, m);
                left.add_row_multiple(i, k, f, m);
            }
        }
        for j in k + 1..c {
            let x = d.get(k, j);
            if x != 0 {
                let f = m.neg(x / pv);
                d.add_col_multiple(j, k, f, m);
                right.add_col_multiple(j, k, f, m);
            }
        }
        exponents.push(v);
    }
    SmithForm { left, right, exponents }
}

/// Result of solving `a * v = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(Vec<u64>),
    /// A functional `phi` with `phi * a = 0` and `phi * b = value != 0`.
    Unsolvable {
        functional: Vec<u64>,
        value: u64,
    },
}

impl SolveOutcome {
    pub fn solution(self) -> Option<Vec<u64>> {
        match self {
            SolveOutcome::Solved(v) => Some(v),
            SolveOutcome::Unsolvable { .. } => None,
        }
    }
}

/// Solves `a * v = b` over `Z/p^s`.
pub fn solve(a: &Matrix, b: &[u64], m: &RingModulus) -> Result<SolveOutcome> {
    if b.len() != a.rows() {
        return invalid(format!("right-hand side has length {}, expected {}", b.len(), a.rows()));
    }
    let sf = smith_form(a, m);
    Ok(solve_with(&sf, a.cols(), b, m))
}

/// Solves against a precomputed Smith form of a matrix with `cols` columns.
pub fn solve_with(sf: &SmithForm, cols: usize, b: &[u64], m: &RingModulus) -> SolveOutcome {
    let b = b.iter().map(|&x| m.reduce(x)).collect::<Vec<_>>();
    let c = sf.left.mul_vec(&b, m);
    let p = m.p();
    let mut w = vec![0u64; cols];
    for (i, &ci) in c.iter().enumerate() {
        let e = sf.exponents.get(i).copied().unwrap_or(m.s());
        let pe = if e >= m.s() { 0 } else { p.pow(e) };
        let ok = if pe == 0 { ci == 0 } else { ci % pe == 0 };
        if !ok {
            let scale = p.pow(m.s() - e);
            let functional = sf.left.row(i).iter().map(|&x| m.mul(x, scale)).collect::<Vec<_>>();
            let value = super::matrix::dot(&functional, &b, m);
            return SolveOutcome::Unsolvable { functional, value };
        }
        if i < sf.exponents.len() {
            w[i] = ci / pe;
        }
    }
    SolveOutcome::Solved(sf.right.mul_vec(&w, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_identity() {
        let m = RingModulus::new(5, 2).unwrap();
        let a = Matrix::from_rows(&[[5, 10, 1], [0, 5, 0]], &m).unwrap();
        let sf = smith_form(&a, &m);
        let d = sf.left.mul(&a, &m).mul(&sf.right, &m);
        for i in 0..2 {
            for j in 0..3 {
                let expected = if i == j && i < sf.rank() { 5u64.pow(sf.exponents[i]) } else { 0 };
                assert_eq!(d.get(i, j), expected);
            }
        }
        assert_eq!(sf.exponents, vec![0, 1]);
    }

    #[test]
    fn identity_solves_to_rhs() {
        let m = RingModulus::new(11, 1).unwrap();
        let v = solve(&Matrix::identity(3), &[4, 0, 9], &m).unwrap();
        assert_eq!(v, SolveOutcome::Solved(vec![4, 0, 9]));
    }

    #[test]
    fn valuation_obstruction() {
        let m = RingModulus::new(5, 2).unwrap();
        let a = Matrix::from_rows(&[[5]], &m).unwrap();
        match solve(&a, &[1], &m).unwrap() {
            SolveOutcome::Unsolvable { functional, value } => {
                assert_eq!(functional, vec![5]);
                assert_eq!(value, 5);
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn small_field_system() {
        let m = RingModulus::new(5, 1).unwrap();
        let a = Matrix::from_rows(&[[2, 1], [0, 1]], &m).unwrap();
        let v = solve(&a, &[3, 1], &m).unwrap().solution().unwrap();
        assert_eq!(v, vec![1, 1]);
    }

    #[test]
    fn dimension_mismatch() {
        let m = RingModulus::new(5, 1).unwrap();
        assert!(solve(&Matrix::identity(2), &[1], &m).is_err());
    }
}
