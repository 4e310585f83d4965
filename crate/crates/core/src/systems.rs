//! Coefficient systems: abelian actions and class-2 nilpotent data.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{kernel, row_echelon_mod_p, Matrix, RingModulus};

/// Unipotent Levi images `[[1, l_i], [0, 1]]`, one per generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeviData {
    modulus: RingModulus,
    l: Vec<u64>,
}

impl LeviData {
    pub fn new(modulus: RingModulus, l: &[i64]) -> Self {
        LeviData { modulus, l: l.iter().map(|&x| modulus.reduce_i64(x)).collect() }
    }

    pub fn trivial(modulus: RingModulus, generators: usize) -> Self {
        LeviData { modulus, l: vec![0; generators] }
    }

    pub fn modulus(&self) -> &RingModulus {
        &self.modulus
    }

    pub fn values(&self) -> &[u64] {
        &self.l
    }

    pub fn len(&self) -> usize {
        self.l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    pub fn matrices(&self) -> Vec<Matrix> {
        self.l.iter().map(|&l| sym_power_matrix(1, l, &self.modulus)).collect()
    }
}

fn binomial(n: u64, k: u64, m: &RingModulus) -> u64 {
    // Pascal's rule keeps everything in the ring without division.
    let mut row = vec![1 % m.order()];
    for i in 1..=n as usize {
        let mut next = vec![1 % m.order(); i + 1];
        for j in 1..i {
            next[j] = m.add(row[j - 1], row[j]);
        }
        row = next;
    }
    row[k as usize]
}

/// Action of `[[1, l], [0, 1]]` on `sym^k` in the basis `E_j = e1^(k-j) e2^j`,
/// where `e2 -> l e1 + e2`. Column `j` holds `C(j, i) l^(j-i)` in row `i <= j`.
pub fn sym_power_matrix(k: usize, l: u64, m: &RingModulus) -> Matrix {
    let mut a = Matrix::zeros(k + 1, k + 1);
    for j in 0..=k {
        for i in 0..=j {
            let c = m.mul(binomial(j as u64, i as u64, m), m.pow(l, (j - i) as u64));
            a.set(i, j, c);
        }
    }
    a
}

/// A finite free module with one invertible action matrix per generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianSystem {
    modulus: RingModulus,
    rank: usize,
    actions: Vec<Matrix>,
}

impl AbelianSystem {
    pub fn new(modulus: RingModulus, actions: Vec<Matrix>) -> Result<Self> {
        let Some(first) = actions.first() else {
            return invalid("a system needs at least one generator");
        };
        let rank = first.rows();
        if rank == 0 {
            return invalid("rank must be positive");
        }
        for (i, a) in actions.iter().enumerate() {
            if a.rows() != rank || a.cols() != rank {
                return invalid(format!("action of x{i} is not {rank}x{rank}"));
            }
            if a.inverse(&modulus).is_none() {
                return invalid(format!("action of x{i} is not invertible"));
            }
        }
        let actions = actions.into_iter().map(|a| a.reduce(&modulus)).collect();
        Ok(AbelianSystem { modulus, rank, actions })
    }

    pub fn trivial(modulus: RingModulus, rank: usize, generators: usize) -> Self {
        AbelianSystem { modulus, rank, actions: vec![Matrix::identity(rank); generators] }
    }

    pub fn modulus(&self) -> &RingModulus {
        &self.modulus
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_generators(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[Matrix] {
        &self.actions
    }

    pub fn action(&self, i: usize) -> &Matrix {
        &self.actions[i]
    }

    /// Reduction to a lower precision `s`.
    pub fn reduce_to(&self, s: u32) -> Result<AbelianSystem> {
        if s > self.modulus.s() {
            return invalid(format!("cannot raise precision from {} to {s}", self.modulus.s()));
        }
        let m = self.modulus.with_precision(s)?;
        Ok(AbelianSystem { modulus: m, rank: self.rank, actions: self.actions.iter().map(|a| a.reduce(&m)).collect() })
    }

    pub fn direct_sum(&self, other: &AbelianSystem) -> Result<AbelianSystem> {
        if self.modulus != other.modulus || self.num_generators() != other.num_generators() {
            return invalid("direct sum needs matching modulus and generator count");
        }
        let actions = self.actions.iter().zip(&other.actions).map(|(a, b)| a.direct_sum(b)).collect();
        Ok(AbelianSystem { modulus: self.modulus, rank: self.rank + other.rank, actions })
    }
}

/// Family used to build the graded action of a unipotent Levi element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeviFamily {
    /// `U^ad = sym^k(std)` and the centre is acted on by the determinant.
    SymPower { k: usize },
}

/// Class-2 nilpotent coefficients: `Lie U = U^ad + Z` with a rank-one centre.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NilpotentSystem {
    ad: AbelianSystem,
    z_actions: Vec<u64>,
    bracket: Matrix,
    levi_family: Option<LeviFamily>,
}

impl NilpotentSystem {
    pub fn modulus(&self) -> &RingModulus {
        self.ad.modulus()
    }

    pub fn m_a(&self) -> usize {
        self.ad.rank()
    }

    pub fn num_generators(&self) -> usize {
        self.ad.num_generators()
    }

    pub fn ad(&self) -> &AbelianSystem {
        &self.ad
    }

    pub fn z_actions(&self) -> &[u64] {
        &self.z_actions
    }

    pub fn bracket(&self) -> &Matrix {
        &self.bracket
    }

    pub fn levi_family(&self) -> Option<LeviFamily> {
        self.levi_family
    }

    /// The centre as a rank-one abelian system.
    pub fn center(&self) -> AbelianSystem {
        let m = *self.modulus();
        let actions = self.z_actions.iter().map(|&z| Matrix::scalar(1, z)).collect();
        AbelianSystem { modulus: m, rank: 1, actions }
    }

    /// `B(x, y) = x^T B y`.
    pub fn bracket_value(&self, x: &[u64], y: &[u64]) -> u64 {
        let m = self.modulus();
        let by = self.bracket.mul_vec(y, m);
        crate::linalg::dot(x, &by, m)
    }

    pub fn with_bracket(&self, bracket: Matrix) -> Result<NilpotentSystem> {
        generic_heisenberg_inner(self.ad.clone(), bracket, self.z_actions.clone(), self.levi_family)
    }

    pub fn reduce_to(&self, s: u32) -> Result<NilpotentSystem> {
        let ad = self.ad.reduce_to(s)?;
        let m = *ad.modulus();
        Ok(NilpotentSystem {
            z_actions: self.z_actions.iter().map(|&z| m.reduce(z)).collect(),
            bracket: self.bracket.reduce(&m),
            levi_family: self.levi_family,
            ad,
        })
    }

    /// Action of a Levi element `[[1, l], [0, 1]]` on `(U^ad, Z)`.
    pub fn levi_action(&self, l: u64) -> Result<(Matrix, u64)> {
        match self.levi_family {
            Some(LeviFamily::SymPower { k }) => Ok((sym_power_matrix(k, l, self.modulus()), 1)),
            None => invalid("system carries no Levi family"),
        }
    }
}

/// `sym^k` of the Levi data, twisted by `det^d`. Unipotent input has
/// determinant one, so the twist does not change the matrices.
pub fn sym_power_twist(levi: &LeviData, k: usize, _d: i64) -> AbelianSystem {
    let m = *levi.modulus();
    let actions = levi.values().iter().map(|&l| sym_power_matrix(k, l, &m)).collect();
    AbelianSystem { modulus: m, rank: k + 1, actions }
}

/// Default bracket constants for the short-root system in the monomial basis.
pub const G2_DEFAULT_B03: i64 = 3;
pub const G2_DEFAULT_B12: i64 = -1;

/// Short-root parabolic of G2: `U^ad = sym^3 (x) det^-2`, centre `det^-1`.
pub fn g2_short_root(levi: &LeviData, b03: i64, b12: i64) -> Result<NilpotentSystem> {
    let m = *levi.modulus();
    let (c03, c12) = (m.reduce_i64(b03), m.reduce_i64(b12));
    if !m.is_unit(c03) {
        return invalid(format!("b03 = {b03} is not a unit mod {}", m.p()));
    }
    if !m.is_unit(c12) {
        return invalid(format!("b12 = {b12} is not a unit mod {}", m.p()));
    }
    let mut bracket = Matrix::zeros(4, 4);
    bracket.set(0, 3, c03);
    bracket.set(3, 0, m.neg(c03));
    bracket.set(1, 2, c12);
    bracket.set(2, 1, m.neg(c12));
    let ad = sym_power_twist(levi, 3, -2);
    let z = vec![1 % m.order(); levi.len()];
    generic_heisenberg_inner(ad, bracket, z, Some(LeviFamily::SymPower { k: 3 }))
}

pub fn g2_short_root_default(levi: &LeviData) -> Result<NilpotentSystem> {
    g2_short_root(levi, G2_DEFAULT_B03, G2_DEFAULT_B12)
}

/// Long-root Heisenberg quotient: `U'/Z = std`, `Z = det`.
pub fn g2_long_heisenberg(levi: &LeviData) -> Result<NilpotentSystem> {
    let m = *levi.modulus();
    let mut bracket = Matrix::zeros(2, 2);
    bracket.set(0, 1, 1);
    bracket.set(1, 0, m.neg(1));
    let ad = sym_power_twist(levi, 1, 0);
    let z = vec![1 % m.order(); levi.len()];
    generic_heisenberg_inner(ad, bracket, z, Some(LeviFamily::SymPower { k: 1 }))
}

/// Validated class-2 system from raw data.
pub fn generic_heisenberg(
    modulus: RingModulus,
    bracket: Matrix,
    ad_actions: Vec<Matrix>,
    z_actions: Vec<i64>,
) -> Result<NilpotentSystem> {
    let ad = AbelianSystem::new(modulus, ad_actions)?;
    if z_actions.len() != ad.num_generators() {
        return invalid(format!("{} centre actions given for {} generators", z_actions.len(), ad.num_generators()));
    }
    let z = z_actions.iter().map(|&z| modulus.reduce_i64(z)).collect();
    generic_heisenberg_inner(ad, bracket.reduce(&modulus), z, None)
}

fn generic_heisenberg_inner(
    ad: AbelianSystem,
    bracket: Matrix,
    z_actions: Vec<u64>,
    levi_family: Option<LeviFamily>,
) -> Result<NilpotentSystem> {
    let m = *ad.modulus();
    let r = ad.rank();
    if bracket.rows() != r || bracket.cols() != r {
        return invalid(format!("bracket must be {r}x{r}"));
    }
    if let Some((i, j)) = antisymmetry_violation(&bracket, &m) {
        return invalid(format!("bracket is not antisymmetric at ({i}, {j})"));
    }
    for (g, &z) in z_actions.iter().enumerate() {
        if !m.is_unit(z) {
            return invalid(format!("centre action of x{g} is not a unit"));
        }
    }
    let sys = NilpotentSystem { ad, z_actions, bracket, levi_family };
    if let Some((g, i, j)) = equivariance_violation(&sys) {
        return invalid(format!("bracket is not equivariant for x{g} on the pair ({i}, {j})"));
    }
    Ok(sys)
}

fn antisymmetry_violation(b: &Matrix, m: &RingModulus) -> Option<(usize, usize)> {
    for i in 0..b.rows() {
        for j in i..b.cols() {
            if b.get(i, j) != m.neg(b.get(j, i)) {
                return Some((i, j));
            }
        }
    }
    None
}

fn equivariance_violation(sys: &NilpotentSystem) -> Option<(usize, usize, usize)> {
    let m = sys.modulus();
    for (g, a) in sys.ad.actions().iter().enumerate() {
        let lhs = a.transpose().mul(&sys.bracket, m).mul(a, m);
        let rhs = sys.bracket.scale(sys.z_actions[g], m);
        for i in 0..sys.m_a() {
            for j in i + 1..sys.m_a() {
                if lhs.get(i, j) != rhs.get(i, j) {
                    return Some((g, i, j));
                }
            }
        }
    }
    None
}

/// Verdicts of [`validate_system`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// All actions are simultaneously unitriangularizable mod p.
    pub unitriangularizable: bool,
    /// `rho(x_i)^p = I mod p` for each generator.
    pub order_p: Vec<bool>,
    pub bracket_antisymmetric: Option<bool>,
    pub equivariant: Option<bool>,
    /// Exact check that the generated group is a p-group, when small enough.
    pub exhaustive_p_group: Option<bool>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.unitriangularizable
            && self.order_p.iter().all(|&b| b)
            && self.bracket_antisymmetric != Some(false)
            && self.equivariant != Some(false)
            && self.exhaustive_p_group != Some(false)
    }
}

/// Graded action matrices on `U^ad + Z`.
pub fn graded_actions(sys: &NilpotentSystem) -> Vec<Matrix> {
    sys.ad.actions().iter().zip(sys.z_actions()).map(|(a, &z)| a.direct_sum(&Matrix::scalar(1, z))).collect()
}

pub fn validate_abelian(sys: &AbelianSystem) -> ValidationReport {
    validate_actions(sys.actions(), sys.modulus(), None, None)
}

pub fn validate_nilpotent(sys: &NilpotentSystem) -> ValidationReport {
    let m = sys.modulus();
    validate_actions(
        &graded_actions(sys),
        m,
        Some(antisymmetry_violation(sys.bracket(), m).is_none()),
        Some(equivariance_violation(sys).is_none()),
    )
}

/// Either kind of coefficient system.
#[derive(Clone, Copy, Debug)]
pub enum SystemRef<'a> {
    Abelian(&'a AbelianSystem),
    Nilpotent(&'a NilpotentSystem),
}

pub fn validate_system(sys: SystemRef<'_>) -> ValidationReport {
    match sys {
        SystemRef::Abelian(a) => validate_abelian(a),
        SystemRef::Nilpotent(n) => validate_nilpotent(n),
    }
}

fn validate_actions(
    actions: &[Matrix],
    m: &RingModulus,
    bracket_antisymmetric: Option<bool>,
    equivariant: Option<bool>,
) -> ValidationReport {
    let f = m.residue_field();
    let reduced: Vec<Matrix> = actions.iter().map(|a| a.reduce(&f)).collect();
    let order_p = reduced.iter().map(|a| a.pow(f.p(), &f) == Matrix::identity(a.rows())).collect();
    ValidationReport {
        unitriangularizable: unitriangularizable_mod_p(&reduced, &f),
        order_p,
        bracket_antisymmetric,
        equivariant,
        exhaustive_p_group: exhaustive_p_group(actions, m),
    }
}

/// Builds the flag of iterated common fixed spaces over `F_p` and reports
/// whether it reaches the whole space.
pub fn unitriangularizable_mod_p(actions: &[Matrix], f: &RingModulus) -> bool {
    let Some(first) = actions.first() else { return true };
    let dim = first.rows();
    let nilps: Vec<Matrix> = actions.iter().map(|a| a.sub(&Matrix::identity(dim), f)).collect();
    let mut w_dim = 0;
    // Rows of `proj` are functionals whose common kernel is the current W.
    let mut proj = Matrix::identity(dim);
    loop {
        if w_dim == dim {
            return true;
        }
        let mut stacked = Matrix::zeros(0, dim);
        for nm in &nilps {
            stacked = stacked.vstack(&proj.mul(nm, f));
        }
        let next = kernel(&stacked, f).generators;
        let next_basis = row_echelon_mod_p(&next, f);
        if next_basis.len() == w_dim {
            return false;
        }
        w_dim = next_basis.len();
        let wb = Matrix::from_row_vectors(&next_basis, dim);
        proj = kernel(&wb, f).generators;
    }
}

const EXHAUSTIVE_LIMIT: usize = 200_000;

/// Enumerates the generated subgroup of `GL_m(Z/p^s)` for rank at most 2 and
/// `p <= 7`, and checks its order is a power of `p`.
fn exhaustive_p_group(actions: &[Matrix], m: &RingModulus) -> Option<bool> {
    let dim = actions.first()?.rows();
    if dim > 2 || m.p() > 7 {
        return None;
    }
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let id = Matrix::identity(dim);
    seen.insert(id.data().to_vec());
    let mut frontier = vec![id];
    while let Some(g) = frontier.pop() {
        for a in actions {
            let h = g.mul(a, m);
            if seen.insert(h.data().to_vec()) {
                if seen.len() > EXHAUSTIVE_LIMIT {
                    return None;
                }
                frontier.push(h);
            }
        }
    }
    let mut order = seen.len();
    while order.is_multiple_of(m.p() as usize) {
        order /= m.p() as usize;
    }
    Some(order == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u64, s: u32) -> RingModulus {
        RingModulus::new(p, s).unwrap()
    }

    #[test]
    fn sym3_binomial_action() {
        let md = m(7, 1);
        let levi = LeviData::new(md, &[1]);
        let sys = sym_power_twist(&levi, 3, -2);
        let a = sys.action(0);
        assert_eq!(a.column(1), vec![1, 1, 0, 0]);
        assert_eq!(a.column(3), vec![1, 3, 3, 1]);
        let trivial = sym_power_twist(&LeviData::trivial(md, 4), 3, -2);
        assert!(trivial.actions().iter().all(|a| *a == Matrix::identity(4)));
        let k1 = sym_power_twist(&LeviData::new(md, &[2, 5]), 1, 0);
        assert_eq!(k1.actions(), LeviData::new(md, &[2, 5]).matrices().as_slice());
    }

    #[test]
    fn short_root_defaults() {
        let md = m(5, 1);
        let sys = g2_short_root_default(&LeviData::trivial(md, 4)).unwrap();
        assert_eq!(sys.bracket().get(0, 3), 3);
        assert_eq!(sys.bracket().get(1, 2), md.reduce_i64(-1));
        assert!(g2_short_root_default(&LeviData::new(md, &[1, 0, 0, 0])).is_ok());
        assert!(g2_short_root(&LeviData::new(md, &[1, 0, 0, 0]), 1, 1).is_err());
        assert!(g2_short_root(&LeviData::trivial(md, 4), 3, 0).is_err());
    }

    #[test]
    fn heisenberg_builders() {
        let md = m(5, 2);
        let levi = LeviData::new(md, &[1, 1, 0, 0]);
        let sys = g2_long_heisenberg(&levi).unwrap();
        assert_eq!(sys.ad().actions(), levi.matrices().as_slice());
        let mut b = Matrix::zeros(2, 2);
        b.set(0, 1, 1);
        b.set(1, 0, md.neg(1));
        assert!(generic_heisenberg(md, b.clone(), vec![Matrix::identity(2); 4], vec![1; 4]).is_ok());
        let mut bad = b.clone();
        bad.set(0, 0, 1);
        assert!(generic_heisenberg(md, bad, vec![Matrix::identity(2); 4], vec![1; 4]).is_err());
        let short = g2_short_root_default(&levi_for(md)).unwrap();
        let rebuilt =
            generic_heisenberg(md, short.bracket().clone(), short.ad().actions().to_vec(), vec![1; 4]).unwrap();
        assert_eq!(rebuilt.bracket(), short.bracket());
        assert_eq!(rebuilt.ad(), short.ad());
    }

    fn levi_for(md: RingModulus) -> LeviData {
        LeviData::new(md, &[3, 1, 4, 1])
    }

    #[test]
    fn validation_verdicts() {
        let md = m(5, 1);
        let trivial = AbelianSystem::trivial(md, 3, 4);
        assert!(validate_abelian(&trivial).passed());
        let sys = g2_short_root_default(&levi_for(md)).unwrap();
        let rep = validate_nilpotent(&sys);
        assert!(rep.passed(), "{rep:?}");
        let diag = Matrix::from_rows(&[[2, 0], [0, 1]], &md).unwrap();
        let bad = AbelianSystem::new(md, vec![diag, Matrix::identity(2)]).unwrap();
        let rep = validate_abelian(&bad);
        assert!(!rep.unitriangularizable);
        assert_eq!(rep.exhaustive_p_group, Some(false));
    }

    #[test]
    fn conjugated_unipotent_is_detected() {
        let md = m(7, 1);
        let u = Matrix::from_rows(&[[1, 1, 0], [0, 1, 1], [0, 0, 1]], &md).unwrap();
        let p = Matrix::from_rows(&[[2, 1, 0], [0, 1, 3], [1, 0, 1]], &md).unwrap();
        let pinv = p.inverse(&md).unwrap();
        let conj = pinv.mul(&u, &md).mul(&p, &md);
        assert!(unitriangularizable_mod_p(&[conj.clone(), conj.pow(2, &md)], &md));
        let lower = u.transpose();
        assert!(!unitriangularizable_mod_p(&[u, lower], &md));
    }
}
