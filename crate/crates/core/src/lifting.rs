//! Raising the precision of nonabelian cocycles through `Q(x) + d2_z(y) = 0`,
//! and the obstruction-case classifier.

use serde::{Deserialize, Serialize};

use crate::abelian::{build_complex_unchecked, cohomology};
use crate::error::{invalid, Result};
use crate::free_group::DemuskinPresentation;
use crate::linalg::{kernel, solve, Matrix, RingModulus, SolveOutcome};
use crate::nilpotent::{gram_flat, z1_mod_p, LieValue, NilpotentComplex};
use crate::systems::NilpotentSystem;

/// Which hypothesis of the obstruction theory holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstructionTag {
    CupNontrivial,
    CenterH2Zero,
    AdH2Zero,
    OutsideTheoremHypotheses,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionEvidence {
    pub h2_center_dim: usize,
    pub h2_ad_dim: usize,
    pub z1_dim: usize,
    /// Rank of the cup pairing restricted to `Z^1(U^ad)` mod p.
    pub pairing_rank: usize,
    /// The pairing is nonzero as a map into `H^2` of the centre.
    pub pairing_nontrivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionCase {
    pub tag: ObstructionTag,
    pub evidence: ObstructionEvidence,
}

/// Reads the `H^2` dimensions and the cup pairing at `s = 1` and returns the
/// first applicable tag.
pub fn classify(sys: &NilpotentSystem, pres: &DemuskinPresentation) -> Result<ObstructionCase> {
    let sys1 = sys.reduce_to(1)?;
    let f = *sys1.modulus();
    let ad = build_complex_unchecked(pres, sys1.ad())?;
    let center = build_complex_unchecked(pres, &sys1.center())?;
    let h2_center_dim = cohomology(&center).h2.dim_mod_p();
    let h2_ad_dim = cohomology(&ad).h2.dim_mod_p();
    let gram = gram_flat(&sys1, pres)?;
    let z = z1_mod_p(&ad);
    let pairing_rank = if z.is_empty() {
        0
    } else {
        let zb = Matrix::from_row_vectors(&z, gram.rows());
        zb.mul(&gram, &f).mul(&zb.transpose(), &f).rank_mod_p(&f)
    };
    let pairing_nontrivial = h2_center_dim > 0 && pairing_rank > 0;
    let tag = if pairing_nontrivial {
        ObstructionTag::CupNontrivial
    } else if h2_center_dim == 0 {
        ObstructionTag::CenterH2Zero
    } else if h2_ad_dim == 0 {
        ObstructionTag::AdH2Zero
    } else {
        ObstructionTag::OutsideTheoremHypotheses
    };
    Ok(ObstructionCase {
        tag,
        evidence: ObstructionEvidence { h2_center_dim, h2_ad_dim, z1_dim: z.len(), pairing_rank, pairing_nontrivial },
    })
}

/// A nonabelian cocycle modulo `p^precision`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftState {
    pub precision: u32,
    /// Ad part, generator-major, reduced mod `p^precision`.
    pub x: Vec<u64>,
    /// Centre part, one value per generator.
    pub y: Vec<u64>,
    /// `d2(x, y)` at this precision; zero for a valid state.
    pub certificate: LieValue,
    /// Some step needed the quadratic adjustment.
    pub used_quadratic: bool,
}

/// Why a lift stopped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LiftFailure {
    /// The ad part is not in the mod-p image of `Z^1(U^ad)` at `level`;
    /// `functional` vanishes on that image and not on the ad part.
    Ad { level: u32, functional: Vec<u64>, value: u64 },
    /// `d2_z` and the cup pairing with the current ad part vanish mod p, and
    /// no quadratic adjustment clears the residue `residue` (mod p).
    Center { level: u32, residue: u64, quadratic_tried: bool },
    /// As `Center`, but no direction with a unit self-pairing exists.
    Degenerate { level: u32, residue: u64 },
}

impl LiftFailure {
    pub fn level(&self) -> u32 {
        match self {
            LiftFailure::Ad { level, .. }
            | LiftFailure::Center { level, .. }
            | LiftFailure::Degenerate { level, .. } => *level,
        }
    }

    /// The residue class carried by the obstruction.
    pub fn residue(&self) -> u64 {
        match self {
            LiftFailure::Ad { value, .. } => *value,
            LiftFailure::Center { residue, .. } | LiftFailure::Degenerate { residue, .. } => *residue,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepOutcome {
    Lifted(LiftState),
    Obstructed(LiftFailure),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftOutcome {
    pub target: u32,
    /// Highest precision reached.
    pub state: LiftState,
    pub failure: Option<LiftFailure>,
}

impl LiftOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Corrected `(x, y)` and whether the quadratic adjustment was used, or the
/// reason no correction exists.
pub type StepResult = std::result::Result<(Vec<u64>, Vec<u64>, bool), LiftFailure>;

/// Level reached by the ad part, and a separating functional with its value
/// at the next level when it stops short.
type AdLevel = (u32, Option<(Vec<u64>, u64)>);

/// Lifting machinery for one system at a working precision `T`.
/// States keep the ad part an exact cocycle mod `p^T`.
pub struct Lifter {
    cx: NilpotentComplex,
    /// `corrections[k]` generates `Z^1(U^ad)` mod `p^(T-k)`.
    corrections: Vec<Matrix>,
}

impl Lifter {
    pub fn new(sys: &NilpotentSystem, pres: &DemuskinPresentation) -> Result<Self> {
        Lifter::from_complex(NilpotentComplex::new(sys, pres)?)
    }

    pub fn from_complex(cx: NilpotentComplex) -> Result<Self> {
        let sys = cx.system();
        let t = sys.modulus().s();
        let mut corrections = vec![Matrix::zeros(0, 0)];
        for k in 1..t {
            let mk = sys.modulus().with_precision(t - k)?;
            let d2 = cx.ad().d2().reduce(&mk);
            corrections.push(kernel(&d2, &mk).generators);
        }
        Ok(Lifter { cx, corrections })
    }

    pub fn complex(&self) -> &NilpotentComplex {
        &self.cx
    }

    pub fn precision(&self) -> u32 {
        self.cx.modulus().s()
    }

    fn m(&self) -> &RingModulus {
        self.cx.modulus()
    }

    fn residual(&self, x: &[u64], y: &[u64]) -> u64 {
        self.m().add(self.cx.q(x), self.cx.d2_z(y))
    }

    /// Builds a valid state from its ad and centre parts.
    pub fn state(&self, precision: u32, x: Vec<u64>, y: Vec<u64>, used_quadratic: bool) -> Result<LiftState> {
        let m = self.m().with_precision(precision)?;
        let sys_k = self.cx.system().reduce_to(precision)?;
        let xr: Vec<u64> = x.iter().map(|&v| m.reduce(v)).collect();
        let yr: Vec<u64> = y.iter().map(|&v| m.reduce(v)).collect();
        let certificate = crate::nilpotent::d2_nilpotent(
            &sys_k,
            self.cx.presentation(),
            &crate::nilpotent::Cochain1::from_parts(sys_k.m_a(), &xr, &yr),
        )?;
        Ok(LiftState { precision, x: xr, y: yr, certificate, used_quadratic })
    }

    /// Raises a state from precision `k` to `k + 1`. `x` and `y` are full
    /// representatives mod `p^T`; `x` must be an ad cocycle mod `p^T`.
    pub fn step(&self, k: u32, x: &[u64], y: &[u64]) -> Result<StepResult> {
        let m = *self.m();
        let t = self.precision();
        if k == 0 || k >= t {
            return invalid(format!("step from precision {k} is outside 1..{t}"));
        }
        if self.cx.d2_ad(x).iter().any(|&v| v != 0) {
            return invalid("ad part is not a cocycle at the working precision");
        }
        let e = self.residual(x, y);
        let v = m.valuation(e);
        if v < k {
            return invalid(format!("state is not a cocycle mod p^{k}"));
        }
        if v > k {
            return Ok(Ok((x.to_vec(), y.to_vec(), false)));
        }
        let p = m.p();
        let pk = p.pow(k);
        let e_bar = (e / pk) % p;
        let f = m.residue_field();
        let x_bar: Vec<u64> = x.iter().map(|&v| v % p).collect();
        let gens = &self.corrections[k as usize];

        for gi in 0..gens.rows() {
            let g = gens.row(gi);
            let coeff = f.mul(2, self.cx.cup(&x_bar, g) % p);
            if coeff != 0 {
                let t_val = f.mul(f.neg(e_bar), f.inv(coeff).expect("nonzero in a field"));
                let shift = m.mul(pk, t_val);
                let nx: Vec<u64> = x.iter().zip(g).map(|(&a, &b)| m.add(a, m.mul(shift, b))).collect();
                return Ok(Ok((nx, y.to_vec(), false)));
            }
        }
        let d2z = self.cx.center().d2().row(0).to_vec();
        if let Some(j) = d2z.iter().position(|&c| c % p != 0) {
            let t_val = f.mul(f.neg(e_bar), f.inv(d2z[j] % p).expect("nonzero in a field"));
            let mut ny = y.to_vec();
            ny[j] = m.add(ny[j], m.mul(pk, t_val));
            return Ok(Ok((x.to_vec(), ny, false)));
        }

        // The linear system is identically zero: move along a direction
        // with unit self-pairing, x' = x + lambda w with p | lambda.
        let Some(w) = self.non_isotropic_direction() else {
            return Ok(Err(LiftFailure::Degenerate { level: k + 1, residue: e_bar }));
        };
        let target = p.pow(k + 1);
        for val in 1..=k {
            let pv = p.pow(val);
            let range = p.pow(k + 1 - val);
            for u in (1..range).filter(|u| u % p != 0) {
                let lambda = m.mul(pv, u);
                let nx: Vec<u64> = x.iter().zip(&w).map(|(&a, &b)| m.add(a, m.mul(lambda, b))).collect();
                if self.residual(&nx, y).is_multiple_of(target) {
                    return Ok(Ok((nx, y.to_vec(), true)));
                }
            }
        }
        Ok(Err(LiftFailure::Center { level: k + 1, residue: e_bar, quadratic_tried: true }))
    }

    /// First generator of `Z^1(U^ad)` mod `p^T` (then pairwise sums) whose
    /// self-pairing is a unit.
    pub fn non_isotropic_direction(&self) -> Option<Vec<u64>> {
        let m = self.m();
        let gens = kernel(self.cx.ad().d2(), m).generators;
        let unit = |v: &[u64]| m.is_unit(self.cx.q(v));
        for i in 0..gens.rows() {
            if unit(gens.row(i)) {
                return Some(gens.row(i).to_vec());
            }
        }
        for i in 0..gens.rows() {
            for j in i + 1..gens.rows() {
                let s: Vec<u64> = gens.row(i).iter().zip(gens.row(j)).map(|(&a, &b)| m.add(a, b)).collect();
                if unit(&s) {
                    return Some(s);
                }
            }
        }
        None
    }
}

/// Precomputed complexes at every precision up to a target, for lifting
/// many cocycles on one system.
pub struct LiftContext {
    target: u32,
    /// `lifters[k - 1]` works at precision `k`.
    lifters: Vec<Lifter>,
    /// Echelon basis of the mod-p image of `Z^1(U^ad)` at precision `k`.
    z_images: Vec<Vec<Vec<u64>>>,
}

impl LiftContext {
    /// `sys` must be given at precision at least `target`.
    pub fn new(sys: &NilpotentSystem, pres: &DemuskinPresentation, target: u32) -> Result<Self> {
        if target == 0 || target > sys.modulus().s() {
            return invalid(format!("target precision {target} is outside 1..={}", sys.modulus().s()));
        }
        let top = NilpotentComplex::new(&sys.reduce_to(target)?, pres)?;
        let mut lifters = Vec::new();
        let mut z_images = Vec::new();
        for k in 1..=target {
            let cx = if k == target { top.clone() } else { top.reduce_to(k)? };
            z_images.push(z1_mod_p(cx.ad()));
            lifters.push(Lifter::from_complex(cx)?);
        }
        Ok(LiftContext { target, lifters, z_images })
    }

    pub fn target(&self) -> u32 {
        self.target
    }

    /// The complex at the target precision.
    pub fn complex(&self) -> &NilpotentComplex {
        self.lifters.last().expect("target is positive").complex()
    }

    /// Mod-p image of `Z^1(U^ad)` at precision `k`.
    pub fn z_image(&self, k: u32) -> &[Vec<u64>] {
        &self.z_images[k as usize - 1]
    }

    /// Largest `k <= target` such that `x_bar` lies in the mod-p image of
    /// `Z^1(U^ad)` at precision `k`, with a separating functional at `k + 1`.
    fn ad_level(&self, x_bar: &[u64]) -> Result<AdLevel> {
        let f = self.complex().modulus().residue_field();
        let mut reached = 0;
        for k in 1..=self.target {
            let zt = Matrix::from_row_vectors(self.z_image(k), x_bar.len()).transpose();
            match solve(&zt, x_bar, &f)? {
                SolveOutcome::Solved(_) => reached = k,
                SolveOutcome::Unsolvable { functional, value } => return Ok((reached, Some((functional, value)))),
            }
        }
        Ok((reached, None))
    }

    /// Lifts a mod-p nonabelian cocycle `(x_bar, y_bar)` to the target precision.
    pub fn lift(&self, x_bar: &[u64], y_bar: &[u64]) -> Result<LiftOutcome> {
        let base = &self.lifters[0];
        let cx1 = base.complex();
        let p = cx1.modulus().p();
        let f = cx1.modulus().residue_field();
        let g = cx1.presentation().num_generators();
        if x_bar.len() != cx1.c1_dim() || y_bar.len() != g {
            return invalid("cochain shape does not match the system");
        }
        let x_bar: Vec<u64> = x_bar.iter().map(|&v| v % p).collect();
        let y_bar: Vec<u64> = y_bar.iter().map(|&v| v % p).collect();
        if !base.state(1, x_bar.clone(), y_bar.clone(), false)?.certificate.is_zero() {
            return invalid("input is not a nonabelian cocycle mod p");
        }

        let (reach, ad_obstruction) = self.ad_level(&x_bar)?;
        let work = reach.max(1);
        let lifter = &self.lifters[work as usize - 1];
        let mw = *lifter.m();

        // Lift the ad part to an exact cocycle mod p^work.
        let ad_basis_full = kernel(lifter.cx.ad().d2(), &mw).generators;
        let ad_basis_bar = ad_basis_full.reduce(&f);
        let coeffs = solve(&ad_basis_bar.transpose(), &x_bar, &f)?
            .solution()
            .expect("x_bar lies in the image at the working precision");
        let mut x = ad_basis_full.left_mul_vec(&coeffs, &mw);
        let mut y = y_bar.clone();
        let mut used_quadratic = false;
        let mut failure = None;
        let mut k = 1;
        while k < work {
            match lifter.step(k, &x, &y)? {
                Ok((nx, ny, quad)) => {
                    x = nx;
                    y = ny;
                    used_quadratic |= quad;
                    k += 1;
                }
                Err(fail) => {
                    failure = Some(fail);
                    break;
                }
            }
        }
        if failure.is_none() {
            if let Some((functional, value)) = ad_obstruction {
                failure = Some(LiftFailure::Ad { level: reach + 1, functional, value });
            }
        }
        let state = lifter.state(k, x, y, used_quadratic)?;
        if !state.certificate.is_zero() {
            return Err(crate::error::Error::Internal("lifted state failed its certificate".into()));
        }
        Ok(LiftOutcome { target: self.target, state, failure })
    }
}

/// Lifts a mod-p nonabelian cocycle `(x_bar, y_bar)` to precision `target`.
/// `sys` must be given at precision at least `target`.
pub fn lift_to_precision(
    sys: &NilpotentSystem,
    pres: &DemuskinPresentation,
    x_bar: &[u64],
    y_bar: &[u64],
    target: u32,
) -> Result<LiftOutcome> {
    LiftContext::new(sys, pres, target)?.lift(x_bar, y_bar)
}

/// Single step on an explicit state, using a system at precision at least `k+1`.
pub fn lift_step(sys: &NilpotentSystem, pres: &DemuskinPresentation, state: &LiftState) -> Result<StepOutcome> {
    let t = sys.modulus().s();
    let k = state.precision;
    if k >= t {
        return invalid(format!("state precision {k} leaves no room below {t}"));
    }
    let lifter = Lifter::new(sys, pres)?;
    let check = lifter.state(k, state.x.clone(), state.y.clone(), state.used_quadratic)?;
    if !check.certificate.is_zero() {
        return invalid("state is not a cocycle at its precision");
    }
    match lifter.step(k, &state.x, &state.y)? {
        Ok((x, y, quad)) => Ok(StepOutcome::Lifted(lifter.state(k + 1, x, y, state.used_quadratic || quad)?)),
        Err(fail) => Ok(StepOutcome::Obstructed(fail)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::build_relator;
    use crate::systems::{g2_short_root_default, generic_heisenberg, LeviData};

    #[test]
    fn zero_cocycle_lifts() {
        let m = RingModulus::new(5, 3).unwrap();
        let pres = build_relator(2, 125).unwrap();
        let sys = g2_short_root_default(&LeviData::new(m, &[1, 2, 3, 4])).unwrap();
        let out = lift_to_precision(&sys, &pres, &[0; 16], &[0; 4], 3).unwrap();
        assert!(out.succeeded());
        assert_eq!(out.state.precision, 3);
        assert!(out.state.certificate.is_zero());
    }

    #[test]
    fn classifier_tags() {
        let m = RingModulus::new(5, 1).unwrap();
        let pres = build_relator(2, 5).unwrap();
        let sys = g2_short_root_default(&LeviData::trivial(m, 4)).unwrap();
        assert_eq!(classify(&sys, &pres).unwrap().tag, ObstructionTag::CupNontrivial);
        let flat = sys.with_bracket(Matrix::zeros(4, 4)).unwrap();
        assert_eq!(classify(&flat, &pres).unwrap().tag, ObstructionTag::OutsideTheoremHypotheses);
        let mut b = Matrix::zeros(2, 2);
        b.set(0, 1, 1);
        b.set(1, 0, 4);
        let mut ad = vec![Matrix::identity(2); 4];
        ad[1] = Matrix::from_rows(&[[2, 0], [0, 1]], &m).unwrap();
        let rigged = generic_heisenberg(m, b, ad, vec![1, 2, 1, 1]).unwrap();
        assert_eq!(classify(&rigged, &pres).unwrap().tag, ObstructionTag::CenterH2Zero);
    }
}
