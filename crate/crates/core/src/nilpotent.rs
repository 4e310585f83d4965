//! Class-2 nilpotent coefficients: BCH extension of cochains, the nonlinear
//! `d2`, the quadratic form `Q`, cup products and Gram matrices.

use serde::{Deserialize, Serialize};

use crate::abelian::{build_complex_unchecked, AbelianComplex};
use crate::error::{invalid, Error, Result};
use crate::free_group::{DemuskinPresentation, Word};
use crate::linalg::{kernel, left_kernel, row_echelon_mod_p, solve, Matrix, RingModulus, SolveOutcome};
use crate::systems::NilpotentSystem;

/// An element of `Lie U = U^ad + Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LieValue {
    pub ad: Vec<u64>,
    pub z: u64,
}

impl LieValue {
    pub fn zero(m_a: usize) -> Self {
        LieValue { ad: vec![0; m_a], z: 0 }
    }

    pub fn new(ad: Vec<u64>, z: u64) -> Self {
        LieValue { ad, z }
    }

    pub fn is_zero(&self) -> bool {
        self.z == 0 && self.ad.iter().all(|&x| x == 0)
    }

    pub fn add(&self, other: &LieValue, m: &RingModulus) -> LieValue {
        LieValue { ad: self.ad.iter().zip(&other.ad).map(|(&a, &b)| m.add(a, b)).collect(), z: m.add(self.z, other.z) }
    }

    pub fn neg(&self, m: &RingModulus) -> LieValue {
        LieValue { ad: self.ad.iter().map(|&a| m.neg(a)).collect(), z: m.neg(self.z) }
    }

    pub fn scale(&self, c: u64, m: &RingModulus) -> LieValue {
        LieValue { ad: self.ad.iter().map(|&a| m.mul(a, c)).collect(), z: m.mul(self.z, c) }
    }
}

/// One value of `Lie U` per generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cochain1 {
    pub values: Vec<LieValue>,
}

impl Cochain1 {
    pub fn zero(m_a: usize, generators: usize) -> Self {
        Cochain1 { values: vec![LieValue::zero(m_a); generators] }
    }

    /// Builds a cochain from a flat ad vector (generator-major) and z values.
    pub fn from_parts(m_a: usize, ad: &[u64], z: &[u64]) -> Self {
        let values =
            z.iter().enumerate().map(|(i, &zi)| LieValue { ad: ad[i * m_a..(i + 1) * m_a].to_vec(), z: zi }).collect();
        Cochain1 { values }
    }

    pub fn ad_only(m_a: usize, ad: &[u64]) -> Self {
        let g = ad.len() / m_a.max(1);
        Cochain1::from_parts(m_a, ad, &vec![0; g])
    }

    pub fn ad_flat(&self) -> Vec<u64> {
        self.values.iter().flat_map(|v| v.ad.iter().copied()).collect()
    }

    pub fn z_flat(&self) -> Vec<u64> {
        self.values.iter().map(|v| v.z).collect()
    }
}

/// An element of `U ⋊ <generators>` recorded as (cochain value, graded action).
#[derive(Clone, Debug)]
struct Extended {
    value: LieValue,
    ad_action: Matrix,
    z_action: u64,
}

struct Extender<'a> {
    sys: &'a NilpotentSystem,
    half: u64,
}

impl<'a> Extender<'a> {
    fn new(sys: &'a NilpotentSystem) -> Self {
        Extender { sys, half: sys.modulus().half() }
    }

    fn m(&self) -> &RingModulus {
        self.sys.modulus()
    }

    fn identity(&self) -> Extended {
        let r = self.sys.m_a();
        Extended { value: LieValue::zero(r), ad_action: Matrix::identity(r), z_action: 1 % self.m().order() }
    }

    fn act(&self, e: &Extended, v: &LieValue) -> LieValue {
        let m = self.m();
        LieValue { ad: e.ad_action.mul_vec(&v.ad, m), z: m.mul(e.z_action, v.z) }
    }

    /// `c(gh) = c(g) + g c(h) + 1/2 [c(g), g c(h)]`.
    fn compose(&self, a: &Extended, b: &Extended) -> Extended {
        let m = self.m();
        let moved = self.act(a, &b.value);
        let br = self.sys.bracket_value(&a.value.ad, &moved.ad);
        let mut value = a.value.add(&moved, m);
        value.z = m.add(value.z, m.mul(self.half, br));
        Extended { value, ad_action: a.ad_action.mul(&b.ad_action, m), z_action: m.mul(a.z_action, b.z_action) }
    }

    fn inverse(&self, a: &Extended) -> Result<Extended> {
        let m = self.m();
        let ad_inv = a.ad_action.inverse(m).ok_or_else(|| Error::InvalidInput("non-invertible action".into()))?;
        let z_inv = m.inv(a.z_action).ok_or_else(|| Error::InvalidInput("non-unit centre action".into()))?;
        let inv = Extended { value: LieValue::zero(self.sys.m_a()), ad_action: ad_inv, z_action: z_inv };
        let value = self.act(&inv, &a.value).neg(m);
        Ok(Extended { value, ..inv })
    }

    fn power(&self, a: &Extended, mut e: u64) -> Extended {
        let mut acc = self.identity();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.compose(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.compose(&base, &base);
            }
        }
        acc
    }

    fn extend(&self, c: &Cochain1, w: &Word) -> Result<LieValue> {
        let g = self.sys.num_generators();
        if c.values.len() != g {
            return invalid(format!("cochain has {} values, system has {g} generators", c.values.len()));
        }
        if c.values.iter().any(|v| v.ad.len() != self.sys.m_a()) {
            return invalid("cochain values have the wrong ad rank");
        }
        let mut acc = self.identity();
        for &(i, e) in w.syllables() {
            if i >= g {
                return invalid(format!("word uses x{i} outside the system"));
            }
            let m = self.m();
            let gen = Extended {
                value: LieValue {
                    ad: c.values[i].ad.iter().map(|&x| m.reduce(x)).collect(),
                    z: m.reduce(c.values[i].z),
                },
                ad_action: self.sys.ad().action(i).clone(),
                z_action: self.sys.z_actions()[i],
            };
            let base = if e > 0 { gen } else { self.inverse(&gen)? };
            acc = self.compose(&acc, &self.power(&base, e.unsigned_abs()));
        }
        Ok(acc.value)
    }
}

/// Extends `c` from the generators to the word `w`.
pub fn extend_cochain(sys: &NilpotentSystem, c: &Cochain1, w: &Word) -> Result<LieValue> {
    Extender::new(sys).extend(c, w)
}

/// `c(R)`; `c` is a nonabelian cocycle iff this vanishes.
pub fn d2_nilpotent(sys: &NilpotentSystem, pres: &DemuskinPresentation, c: &Cochain1) -> Result<LieValue> {
    extend_cochain(sys, c, pres.relator())
}

/// `Q(x)`: the centre part of `d2` on the lift of `x` with zero centre part.
pub fn q_form(sys: &NilpotentSystem, pres: &DemuskinPresentation, x: &[u64]) -> Result<u64> {
    let c = Cochain1::ad_only(sys.m_a(), x);
    Ok(d2_nilpotent(sys, pres, &c)?.z)
}

/// `x ∪ y = (Q(x+y) - Q(x) - Q(y)) / 2`.
pub fn cup(sys: &NilpotentSystem, pres: &DemuskinPresentation, x: &[u64], y: &[u64]) -> Result<u64> {
    let m = sys.modulus();
    let sum: Vec<u64> = x.iter().zip(y).map(|(&a, &b)| m.add(a, b)).collect();
    let v = m.sub(m.sub(q_form(sys, pres, &sum)?, q_form(sys, pres, x)?), q_form(sys, pres, y)?);
    Ok(m.mul(v, m.half()))
}

/// The complex for class-2 coefficients together with its ad and centre
/// abelian pieces and the cup product matrix on flat ad cochains.
#[derive(Clone, Debug)]
pub struct NilpotentComplex {
    sys: NilpotentSystem,
    pres: DemuskinPresentation,
    ad: AbelianComplex,
    center: AbelianComplex,
    gram: Matrix,
}

impl NilpotentComplex {
    pub fn new(sys: &NilpotentSystem, pres: &DemuskinPresentation) -> Result<Self> {
        let ad = build_complex_unchecked(pres, sys.ad())?;
        let center = build_complex_unchecked(pres, &sys.center())?;
        let gram = gram_flat(sys, pres)?;
        Ok(NilpotentComplex { sys: sys.clone(), pres: pres.clone(), ad, center, gram })
    }

    /// The same complex over a lower precision; all data reduce entrywise.
    pub fn reduce_to(&self, s: u32) -> Result<NilpotentComplex> {
        let sys = self.sys.reduce_to(s)?;
        let m = *sys.modulus();
        Ok(NilpotentComplex {
            pres: self.pres.clone(),
            ad: self.ad.reduce_to(s)?,
            center: self.center.reduce_to(s)?,
            gram: self.gram.reduce(&m),
            sys,
        })
    }

    pub fn system(&self) -> &NilpotentSystem {
        &self.sys
    }

    pub fn presentation(&self) -> &DemuskinPresentation {
        &self.pres
    }

    pub fn modulus(&self) -> &RingModulus {
        self.sys.modulus()
    }

    pub fn ad(&self) -> &AbelianComplex {
        &self.ad
    }

    pub fn center(&self) -> &AbelianComplex {
        &self.center
    }

    /// Cup product matrix in generator-major order: `x ∪ y = x^T G y`.
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn c1_dim(&self) -> usize {
        self.sys.m_a() * self.pres.num_generators()
    }

    pub fn q(&self, x: &[u64]) -> u64 {
        self.cup(x, x)
    }

    pub fn cup(&self, x: &[u64], y: &[u64]) -> u64 {
        let m = self.modulus();
        crate::linalg::dot(x, &self.gram.mul_vec(y, m), m)
    }

    pub fn d2_ad(&self, x: &[u64]) -> Vec<u64> {
        self.ad.d2().mul_vec(x, self.modulus())
    }

    pub fn d2_z(&self, y: &[u64]) -> u64 {
        self.center.d2().mul_vec(y, self.modulus())[0]
    }

    /// `d2` of `(x, y)` through the Gram shortcut: `(d2_ad x, Q(x) + d2_z y)`.
    pub fn d2_fast(&self, x: &[u64], y: &[u64]) -> LieValue {
        let m = self.modulus();
        LieValue { ad: self.d2_ad(x), z: m.add(self.q(x), self.d2_z(y)) }
    }

    /// `d2` of `(x, y)` by evaluating the extended cochain at the relator.
    pub fn d2_exact(&self, x: &[u64], y: &[u64]) -> Result<LieValue> {
        d2_nilpotent(&self.sys, &self.pres, &Cochain1::from_parts(self.sys.m_a(), x, y))
    }
}

/// Cup product matrix in generator-major order, entries `cup(e_i, e_j)`.
pub fn gram_flat(sys: &NilpotentSystem, pres: &DemuskinPresentation) -> Result<Matrix> {
    let m = sys.modulus();
    let n = sys.m_a() * pres.num_generators();
    if sys.num_generators() != pres.num_generators() {
        return invalid("generator count mismatch");
    }
    let unit = |i: usize| {
        let mut v = vec![0u64; n];
        v[i] = 1;
        v
    };
    let diag = (0..n).map(|i| q_form(sys, pres, &unit(i))).collect::<Result<Vec<_>>>()?;
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        g.set(i, i, diag[i]);
        for j in i + 1..n {
            let mut v = unit(i);
            v[j] = 1;
            let both = q_form(sys, pres, &v)?;
            let c = m.mul(m.sub(m.sub(both, diag[i]), diag[j]), m.half());
            g.set(i, j, c);
            g.set(j, i, c);
        }
    }
    Ok(g)
}

/// Gram matrix on the basis ordered by ad coordinate, then by generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramReport {
    pub matrix: Matrix,
    pub block_count: usize,
    pub block_size: usize,
    /// `block_structure[a][b]` is true when block `(a, b)` has a nonzero entry.
    pub block_structure: Vec<Vec<bool>>,
    /// All blocks strictly above the anti-diagonal vanish.
    pub anti_triangular: bool,
    pub determinant: u64,
    pub mr2_verdict: bool,
}

impl GramReport {
    pub fn block_map(&self) -> Vec<String> {
        self.block_structure.iter().map(|row| row.iter().map(|&b| if b { '#' } else { '.' }).collect()).collect()
    }
}

/// Gram matrix of the cup pairing mod p with its block pattern and verdict.
pub fn gram_matrix(sys: &NilpotentSystem, pres: &DemuskinPresentation) -> Result<GramReport> {
    let sys1 = if sys.modulus().s() == 1 { sys.clone() } else { sys.reduce_to(1)? };
    let m = *sys1.modulus();
    let flat = gram_flat(&sys1, pres)?;
    let ma = sys1.m_a();
    let g = pres.num_generators();
    // basis index j*g + i  <->  flat index i*ma + j
    let perm = |k: usize| (k % g) * ma + k / g;
    let size = ma * g;
    let mut matrix = Matrix::zeros(size, size);
    for a in 0..size {
        for b in 0..size {
            matrix.set(a, b, flat.get(perm(a), perm(b)));
        }
    }
    let mut block_structure = vec![vec![false; ma]; ma];
    for (a, row) in block_structure.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = (0..g).any(|i| (0..g).any(|j| matrix.get(a * g + i, b * g + j) != 0));
        }
    }
    let anti_triangular = (0..ma).all(|a| (0..ma).all(|b| a + b + 1 >= ma || !block_structure[a][b]));
    let determinant = matrix.determinant(&m);
    Ok(GramReport {
        matrix,
        block_count: ma,
        block_size: g,
        block_structure,
        anti_triangular,
        determinant,
        mr2_verdict: determinant != 0,
    })
}

/// Non-degeneracy of the mod-p cup pairing on cochains.
pub fn mr2_check(sys: &NilpotentSystem, pres: &DemuskinPresentation) -> Result<bool> {
    Ok(gram_matrix(sys, pres)?.mr2_verdict)
}

/// Outcome of [`cocycle_fiber_solve`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberOutcome {
    /// `(x, y)` is a nonabelian cocycle.
    Solved { y: Vec<u64> },
    /// `Q(x)` is not in the image of `d2_z`; `functional` kills the image.
    Obstructed { residue: u64, functional: Vec<u64>, value: u64 },
}

/// Finds `y` with `Q(x) + d2_z(y) = 0` for an ad cocycle `x`.
pub fn cocycle_fiber_solve(cx: &NilpotentComplex, x: &[u64]) -> Result<FiberOutcome> {
    let m = *cx.modulus();
    if x.len() != cx.c1_dim() {
        return invalid(format!("expected {} ad coordinates, got {}", cx.c1_dim(), x.len()));
    }
    if cx.d2_ad(x).iter().any(|&v| v != 0) {
        return invalid("x is not an ad cocycle");
    }
    let qx = cx.q(x);
    match solve(cx.center().d2(), &[m.neg(qx)], &m)? {
        SolveOutcome::Solved(y) => {
            let check = cx.d2_exact(x, &y)?;
            if !check.is_zero() {
                return Err(Error::Internal("fiber solution failed the d2 certificate".into()));
            }
            Ok(FiberOutcome::Solved { y })
        }
        SolveOutcome::Unsolvable { functional, value } => {
            Ok(FiberOutcome::Obstructed { residue: qx, functional, value })
        }
    }
}

/// Dimensions around `K = B^1 + rad(∪|Z)` at one precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KldReport {
    pub precision: u32,
    pub c1_dim: usize,
    /// `dim` of the mod-p image of `Z^1(U^ad)` at this precision.
    pub z_dim: usize,
    /// `dim` of the radical of the cup pairing restricted to that image.
    pub radical_dim: usize,
    pub b1_dim: usize,
    pub kld_dim: usize,
}

/// Mod-p image of `Z^1(U^ad)` computed at the precision of `cx`, as an echelon basis.
pub fn z1_mod_p(ad: &AbelianComplex) -> Vec<Vec<u64>> {
    let m = ad.modulus();
    let f = m.residue_field();
    let gens = kernel(ad.d2(), m).generators;
    row_echelon_mod_p(&gens.reduce(&f), &f)
}

/// Radical of the pairing `gram` (mod p) restricted to the span of `basis`.
pub fn radical_in(basis: &[Vec<u64>], gram: &Matrix, f: &RingModulus) -> Vec<Vec<u64>> {
    if basis.is_empty() {
        return Vec::new();
    }
    let n = gram.rows();
    let zb = Matrix::from_row_vectors(basis, n);
    let restricted = zb.mul(&gram.reduce(f), f).mul(&zb.transpose(), f);
    let coeffs = left_kernel(&restricted, f);
    row_echelon_mod_p(&coeffs.mul(&zb, f), f)
}

pub fn kernel_and_kld(sys: &NilpotentSystem, pres: &DemuskinPresentation, s: u32) -> Result<KldReport> {
    if s == 0 || s > sys.modulus().s() {
        return invalid(format!("precision {s} is outside 1..={}", sys.modulus().s()));
    }
    let sys_s = sys.reduce_to(s)?;
    let ad = build_complex_unchecked(pres, sys_s.ad())?;
    let f = sys.modulus().residue_field();
    let gram = gram_flat(&sys.reduce_to(1)?, pres)?;
    let z = z1_mod_p(&ad);
    let radical = radical_in(&z, &gram, &f);
    let b1 = row_echelon_mod_p(&ad.d1().transpose().reduce(&f), &f);
    let mut k_rows = b1.clone();
    k_rows.extend(radical.iter().cloned());
    let n = gram.rows();
    let kld = row_echelon_mod_p(&Matrix::from_row_vectors(&k_rows, n), &f);
    Ok(KldReport {
        precision: s,
        c1_dim: n,
        z_dim: z.len(),
        radical_dim: radical.len(),
        b1_dim: b1.len(),
        kld_dim: kld.len(),
    })
}
