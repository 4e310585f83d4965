use serde::{Deserialize, Serialize};

use super::{smith_form, Matrix, RingModulus};

/// Structure of a finite `Z/p^s`-module as a sum of cyclic factors `Z/p^e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModuleProfile {
    precision: u32,
    /// Exponents `e` of the cyclic factors, nondecreasing, each in `1..=s`.
    exponents: Vec<u32>,
}

impl ModuleProfile {
    pub fn new(precision: u32, mut exponents: Vec<u32>) -> Self {
        exponents.retain(|&e| e > 0);
        assert!(exponents.iter().all(|&e| e <= precision), "factor exceeds the precision");
        exponents.sort_unstable();
        ModuleProfile { precision, exponents }
    }

    pub fn zero(precision: u32) -> Self {
        ModuleProfile { precision, exponents: Vec::new() }
    }

    pub fn free(precision: u32, rank: usize) -> Self {
        ModuleProfile { precision, exponents: vec![precision; rank] }
    }

    /// Profile of the submodule spanned by the rows of `a`.
    pub fn of_row_span(a: &Matrix, m: &RingModulus) -> Self {
        let sf = smith_form(a, m);
        ModuleProfile::new(m.s(), sf.exponents.iter().map(|&e| m.s() - e).collect())
    }

    /// Profile of `(Z/p^s)^ambient` modulo the span of the rows of `relations`.
    pub fn of_cokernel(relations: &Matrix, ambient: usize, m: &RingModulus) -> Self {
        assert_eq!(relations.cols(), ambient);
        let sf = smith_form(relations, m);
        let mut exps: Vec<u32> = sf.exponents.clone();
        exps.resize(ambient, m.s());
        ModuleProfile::new(m.s(), exps)
    }

    /// Profile of `span(sub_rows) / span(rel_rows)`, assuming the second is contained in the first.
    pub fn of_quotient(sub_rows: &Matrix, rel_rows: &Matrix, m: &RingModulus) -> Self {
        let k = sub_rows.rows();
        if k == 0 {
            return ModuleProfile::zero(m.s());
        }
        let stacked = sub_rows.vstack(rel_rows);
        let lk = super::left_kernel(&stacked, m);
        let relations = lk.submatrix(0..lk.rows(), 0..k);
        ModuleProfile::of_cokernel(&relations, k, m)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Number of factors isomorphic to `Z/p^s`.
    pub fn free_rank(&self) -> usize {
        self.exponents.iter().filter(|&&e| e == self.precision).count()
    }

    /// Dimension of `M / pM` over `F_p`.
    pub fn dim_mod_p(&self) -> usize {
        self.exponents.len()
    }

    /// `log_p |M|`.
    pub fn length(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn direct_sum(&self, other: &ModuleProfile) -> ModuleProfile {
        assert_eq!(self.precision, other.precision);
        let mut e = self.exponents.clone();
        e.extend_from_slice(&other.exponents);
        ModuleProfile::new(self.precision, e)
    }
}

impl std::fmt::Display for ModuleProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.exponents.iter().map(|e| format!("Z/p^{e}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cokernel_of_scalar() {
        let m = RingModulus::new(5, 3).unwrap();
        let rel = Matrix::from_rows(&[[25, 0]], &m).unwrap();
        let prof = ModuleProfile::of_cokernel(&rel, 2, &m);
        assert_eq!(prof.exponents(), &[2, 3]);
        assert_eq!(prof.free_rank(), 1);
        assert_eq!(prof.dim_mod_p(), 2);
        assert_eq!(prof.length(), 5);
    }

    #[test]
    fn quotient_profile() {
        let m = RingModulus::new(7, 2).unwrap();
        let sub = Matrix::identity(2);
        let rel = Matrix::from_rows(&[[7, 0], [0, 1]], &m).unwrap();
        let prof = ModuleProfile::of_quotient(&sub, &rel, &m);
        assert_eq!(prof.exponents(), &[1]);
    }

    #[test]
    fn cyclic_span_is_detected() {
        let m = RingModulus::new(5, 2).unwrap();
        let a = Matrix::from_rows(&[[5, 1], [0, 5]], &m).unwrap();
        assert_eq!(ModuleProfile::of_row_span(&a, &m).exponents(), &[2]);
    }
}
