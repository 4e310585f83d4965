//! Seeded random instances: Levi data, Lyndon-Demuškin systems, words and
//! cocycles.

use rand::Rng;

use crate::free_group::Word;
use crate::linalg::{row_echelon_mod_p, Matrix, RingModulus};
use crate::nilpotent::{z1_mod_p, NilpotentComplex};
use crate::systems::{AbelianSystem, LeviData};

pub fn random_residue<R: Rng>(rng: &mut R, m: &RingModulus) -> u64 {
    rng.gen_range(0..m.order())
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize, m: &RingModulus) -> Vec<u64> {
    (0..len).map(|_| random_residue(rng, m)).collect()
}

pub fn random_levi<R: Rng>(rng: &mut R, m: &RingModulus, generators: usize) -> LeviData {
    let l: Vec<i64> = (0..generators).map(|_| random_residue(rng, m) as i64).collect();
    LeviData::new(*m, &l)
}

/// Upper unitriangular matrix with random entries above the diagonal.
pub fn random_unitriangular<R: Rng>(rng: &mut R, r: usize, m: &RingModulus) -> Matrix {
    let mut a = Matrix::identity(r);
    for i in 0..r {
        for j in i + 1..r {
            a.set(i, j, random_residue(rng, m));
        }
    }
    a
}

pub fn random_invertible<R: Rng>(rng: &mut R, r: usize, m: &RingModulus) -> Matrix {
    loop {
        let data = random_vector(rng, r * r, m);
        let a = Matrix::from_vec(r, r, data, m).expect("shape is consistent");
        if a.inverse(m).is_some() {
            return a;
        }
    }
}

/// `I + sum c_j N^j` with `N = a - I`; commutes with `a` and stays unitriangular.
fn random_polynomial_in<R: Rng>(rng: &mut R, a: &Matrix, m: &RingModulus) -> Matrix {
    let r = a.rows();
    let n = a.sub(&Matrix::identity(r), m);
    let mut out = Matrix::identity(r);
    let mut pow = Matrix::identity(r);
    for _ in 1..r.max(2) {
        pow = pow.mul(&n, m);
        out = out.add(&pow.scale(random_residue(rng, m), m), m);
    }
    out
}

/// A random system over `F_p` of rank at most `p` on which the relator with
/// `q = p` acts trivially: unitriangular actions whose commutator pairs
/// either commute or cancel in consecutive pairs, optionally conjugated.
pub fn random_ld_system<R: Rng>(rng: &mut R, rank: usize, n: usize, m: &RingModulus) -> AbelianSystem {
    assert!(rank as u64 <= m.p(), "unitriangular matrices of this size may not have exponent p");
    let pairs = n / 2 + 1;
    let mut actions: Vec<Matrix> = Vec::with_capacity(n + 2);
    let mut k = 0;
    while k < pairs {
        let a = random_unitriangular(rng, rank, m);
        if k + 1 < pairs && rng.gen_bool(0.5) {
            // (a, b)(b, a) = 1
            let b = random_unitriangular(rng, rank, m);
            actions.extend([a.clone(), b.clone(), b, a]);
            k += 2;
        } else {
            let b = random_polynomial_in(rng, &a, m);
            actions.extend([a, b]);
            k += 1;
        }
    }
    if rng.gen_bool(0.5) {
        let p = random_invertible(rng, rank, m);
        let pinv = p.inverse(m).expect("invertible by construction");
        actions = actions.iter().map(|a| pinv.mul(a, m).mul(&p, m)).collect();
    }
    AbelianSystem::new(*m, actions).expect("unitriangular actions are invertible")
}

pub fn random_word<R: Rng>(rng: &mut R, generators: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let letters: Vec<(usize, i64)> =
        (0..len).map(|_| (rng.gen_range(0..generators), if rng.gen_bool(0.5) { 1 } else { -1 })).collect();
    Word::from_letters(&letters)
}

/// Random element of the span of `basis` over `F_p`.
pub fn random_combination<R: Rng>(rng: &mut R, basis: &[Vec<u64>], len: usize, f: &RingModulus) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for b in basis {
        let c = random_residue(rng, f);
        for (o, &x) in out.iter_mut().zip(b) {
            *o = f.add(*o, f.mul(c, x));
        }
    }
    out
}

/// Draws a mod-p nonabelian cocycle `(x, y)` whose ad part lies in `basis`.
/// When `d2_z` vanishes mod p the quadratic condition `Q(x) = 0` is imposed by
/// moving along a random direction in the span.
pub fn random_cocycle_in<R: Rng>(
    rng: &mut R,
    cx: &NilpotentComplex,
    basis: &[Vec<u64>],
) -> Option<(Vec<u64>, Vec<u64>)> {
    let m = cx.modulus();
    let f = m.residue_field();
    let n = cx.c1_dim();
    let g = cx.presentation().num_generators();
    let d2z: Vec<u64> = cx.center().d2().row(0).iter().map(|&v| v % f.p()).collect();
    let q = |x: &[u64]| cx.q(x) % f.p();
    let cup = |x: &[u64], y: &[u64]| cx.cup(x, y) % f.p();

    let mut x = random_combination(rng, basis, n, &f);
    let mut y = random_vector(rng, g, &f);
    if let Some(j) = d2z.iter().position(|&v| v != 0) {
        // Solve for y_j.
        y[j] = 0;
        let rest = crate::linalg::dot(&d2z, &y, &f);
        let target = f.neg(f.add(q(&x), rest));
        y[j] = f.mul(target, f.inv(d2z[j]).expect("nonzero in a field"));
        return Some((x, y));
    }
    for _ in 0..64 {
        if q(&x) == 0 {
            return Some((x, y));
        }
        let r = random_combination(rng, basis, n, &f);
        let (a, b, c) = (q(&r), f.mul(2, cup(&x, &r)), q(&x));
        if let Some(t) = (0..f.p()).find(|&t| f.add(f.add(f.mul(a, f.mul(t, t)), f.mul(b, t)), c) == 0) {
            x = x.iter().zip(&r).map(|(&xi, &ri)| f.add(xi, f.mul(t, ri))).collect();
        }
    }
    None
}

/// Draws a mod-p cocycle whose ad part lies in the mod-p image of `Z^1` at
/// the precision of `cx`.
pub fn random_liftable_cocycle<R: Rng>(rng: &mut R, cx: &NilpotentComplex) -> Option<(Vec<u64>, Vec<u64>)> {
    let basis = z1_mod_p(cx.ad());
    random_cocycle_in(rng, cx, &basis)
}

/// Draws a mod-p cocycle with the ad part anywhere in `Z^1` over `F_p`.
pub fn random_mod_p_cocycle<R: Rng>(rng: &mut R, cx: &NilpotentComplex) -> Option<(Vec<u64>, Vec<u64>)> {
    let f = cx.modulus().residue_field();
    let d2 = cx.ad().d2().reduce(&f);
    let gens = crate::linalg::kernel(&d2, &f).generators;
    let basis = row_echelon_mod_p(&gens, &f);
    random_cocycle_in(rng, cx, &basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::build_complex;
    use crate::free_group::build_relator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_systems_satisfy_relator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [5u64, 7] {
            let m = RingModulus::new(p, 1).unwrap();
            for n in [2usize, 4] {
                let pres = build_relator(n, p).unwrap();
                for rank in 1..=4 {
                    let sys = random_ld_system(&mut rng, rank, n, &m);
                    assert!(build_complex(&pres, &sys).is_ok());
                }
            }
        }
    }
}
