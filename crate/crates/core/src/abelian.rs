//! The three-term complex `C^0 -> C^1 -> C^2` for abelian coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::free_group::{DemuskinPresentation, Representation, Word};
use crate::linalg::{image_basis, kernel, Matrix, ModuleProfile, RingModulus};
use crate::systems::{validate_abelian, AbelianSystem};

/// `d1` is `(rank * (n+2)) x rank` with block `i` equal to `rho(x_i) - I`;
/// `d2` is `rank x (rank * (n+2))` with block `i` equal to `rho(dR/dx_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianComplex {
    pres: DemuskinPresentation,
    sys: AbelianSystem,
    d1: Matrix,
    d2: Matrix,
}

impl AbelianComplex {
    pub fn presentation(&self) -> &DemuskinPresentation {
        &self.pres
    }

    pub fn system(&self) -> &AbelianSystem {
        &self.sys
    }

    pub fn d1(&self) -> &Matrix {
        &self.d1
    }

    pub fn d2(&self) -> &Matrix {
        &self.d2
    }

    pub fn modulus(&self) -> &RingModulus {
        self.sys.modulus()
    }

    /// The same complex over a lower precision.
    pub fn reduce_to(&self, s: u32) -> Result<AbelianComplex> {
        let sys = self.sys.reduce_to(s)?;
        let m = *sys.modulus();
        Ok(AbelianComplex { pres: self.pres.clone(), d1: self.d1.reduce(&m), d2: self.d2.reduce(&m), sys })
    }
}

/// Builds the complex after checking the Lyndon-Demuškin proxy.
pub fn build_complex(pres: &DemuskinPresentation, sys: &AbelianSystem) -> Result<AbelianComplex> {
    let report = validate_abelian(sys);
    if !report.unitriangularizable {
        return invalid("actions are not simultaneously unitriangularizable mod p");
    }
    build_complex_unchecked(pres, sys)
}

/// Builds the complex without the unitriangularizability check. The relator
/// must still act trivially, otherwise `d2 d1 = rho(R) - I` is nonzero.
pub fn build_complex_unchecked(pres: &DemuskinPresentation, sys: &AbelianSystem) -> Result<AbelianComplex> {
    let m = *sys.modulus();
    let g = pres.num_generators();
    if sys.num_generators() != g {
        return invalid(format!("system has {} generators, presentation has {g}", sys.num_generators()));
    }
    if m.p() != pres.p() {
        return invalid(format!("modulus prime {} differs from relator prime {}", m.p(), pres.p()));
    }
    let rep = Representation::new(sys.actions(), &m)?;
    let r = sys.rank();
    let id = Matrix::identity(r);
    if rep.word(pres.relator(), &m)? != id {
        return invalid(format!("the relator does not act trivially mod {}", m.order()));
    }
    let mut d1 = Matrix::zeros(r * g, r);
    let mut d2 = Matrix::zeros(r, r * g);
    for i in 0..g {
        let block = sys.action(i).sub(&id, &m);
        let di = rep.element(pres.derivative(i), &m)?;
        for a in 0..r {
            for b in 0..r {
                d1.set(i * r + a, b, block.get(a, b));
                d2.set(a, i * r + b, di.get(a, b));
            }
        }
    }
    if !d2.mul(&d1, &m).is_zero() {
        return Err(Error::Internal("d2 * d1 is nonzero although the relator acts trivially".into()));
    }
    Ok(AbelianComplex { pres: pres.clone(), sys: sys.clone(), d1, d2 })
}

/// Module structure of `H^0`, `H^1`, `H^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cohomology {
    pub h0: ModuleProfile,
    pub h1: ModuleProfile,
    pub h2: ModuleProfile,
}

impl Cohomology {
    /// `dim H^0 - dim H^1 + dim H^2` using `F_p`-dimensions of the profiles.
    pub fn euler_characteristic(&self) -> i64 {
        self.h0.dim_mod_p() as i64 - self.h1.dim_mod_p() as i64 + self.h2.dim_mod_p() as i64
    }

    /// The same alternating sum with lengths; equals `-n * rank * s` at any precision.
    pub fn euler_length(&self) -> i64 {
        self.h0.length() as i64 - self.h1.length() as i64 + self.h2.length() as i64
    }
}

pub fn cohomology(cx: &AbelianComplex) -> Cohomology {
    let m = cx.modulus();
    let z1 = kernel(&cx.d2, m).generators;
    let b1 = image_basis(&cx.d1, m);
    Cohomology {
        h0: kernel(&cx.d1, m).profile,
        h1: ModuleProfile::of_quotient(&z1, &b1, m),
        h2: ModuleProfile::of_cokernel(&cx.d2.transpose(), cx.sys.rank(), m),
    }
}

/// Outcome of [`h0_torsion_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum H0Verdict {
    NoFreeFixedVectors,
    FreeFixedVectorsPresent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H0Probe {
    /// Profile of `ker d1` at precision `s = 1..=S`.
    pub levels: Vec<ModuleProfile>,
    pub verdict: H0Verdict,
}

/// Checks whether `ker d1` at precision `S` has an element of order `p^S`.
/// `sys` holds integer lifts at precision at least `S`.
pub fn h0_torsion_probe(pres: &DemuskinPresentation, sys: &AbelianSystem, max_s: u32) -> Result<H0Probe> {
    if max_s < 2 {
        return invalid("the probe needs a maximal precision of at least 2");
    }
    if sys.num_generators() != pres.num_generators() {
        return invalid("generator count mismatch");
    }
    let mut levels = Vec::new();
    for s in 1..=max_s {
        let sys_s = sys.reduce_to(s)?;
        levels.push(kernel(&d1_matrix(&sys_s), sys_s.modulus()).profile);
    }
    let top = levels.last().expect("at least two levels");
    let verdict = if top.free_rank() == 0 { H0Verdict::NoFreeFixedVectors } else { H0Verdict::FreeFixedVectorsPresent };
    Ok(H0Probe { levels, verdict })
}

/// Stacked `rho(x_i) - I`.
pub fn d1_matrix(sys: &AbelianSystem) -> Matrix {
    let m = sys.modulus();
    let id = Matrix::identity(sys.rank());
    let mut d1 = Matrix::zeros(0, sys.rank());
    for a in sys.actions() {
        d1 = d1.vstack(&a.sub(&id, m));
    }
    d1
}

/// Value and action of a word under the crossed-homomorphism extension
/// `c(gh) = c(g) + g c(h)`.
fn extend_pair(sys: &AbelianSystem, c: &[Vec<u64>], w: &Word) -> Result<(Vec<u64>, Matrix)> {
    let m = sys.modulus();
    let r = sys.rank();
    let mut val = vec![0u64; r];
    let mut act = Matrix::identity(r);
    for &(g, e) in w.syllables() {
        if g >= sys.num_generators() {
            return invalid(format!("word uses x{g} outside the system"));
        }
        let a = sys.action(g);
        let (base_val, base_act) = if e > 0 {
            (c[g].clone(), a.clone())
        } else {
            let inv = a.inverse(m).ok_or_else(|| Error::InvalidInput("non-invertible action".into()))?;
            let v = inv.mul_vec(&c[g], m).into_iter().map(|x| m.neg(x)).collect();
            (v, inv)
        };
        let (pv, pa) = power_pair(&base_val, &base_act, e.unsigned_abs(), m);
        let moved = act.mul_vec(&pv, m);
        for (v, x) in val.iter_mut().zip(moved) {
            *v = m.add(*v, x);
        }
        act = act.mul(&pa, m);
    }
    Ok((val, act))
}

fn power_pair(v: &[u64], a: &Matrix, mut e: u64, m: &RingModulus) -> (Vec<u64>, Matrix) {
    let mut acc_v = vec![0u64; v.len()];
    let mut acc_a = Matrix::identity(a.rows());
    let mut base_v = v.to_vec();
    let mut base_a = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            let moved = acc_a.mul_vec(&base_v, m);
            acc_v = acc_v.iter().zip(moved).map(|(&x, y)| m.add(x, y)).collect();
            acc_a = acc_a.mul(&base_a, m);
        }
        e >>= 1;
        if e > 0 {
            let moved = base_a.mul_vec(&base_v, m);
            base_v = base_v.iter().zip(moved).map(|(&x, y)| m.add(x, y)).collect();
            base_a = base_a.mul(&base_a, m);
        }
    }
    (acc_v, acc_a)
}

/// `c(w)` for a cochain given by its values on the generators.
pub fn extend_abelian_cochain(sys: &AbelianSystem, c: &[Vec<u64>], w: &Word) -> Result<Vec<u64>> {
    if c.len() != sys.num_generators() || c.iter().any(|v| v.len() != sys.rank()) {
        return invalid("cochain shape does not match the system");
    }
    Ok(extend_pair(sys, c, w)?.0)
}

/// Flattens per-generator values into a vector of `C^1`.
pub fn flatten(c: &[Vec<u64>]) -> Vec<u64> {
    c.iter().flatten().copied().collect()
}
