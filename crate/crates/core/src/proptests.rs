//! Property tests against brute-force and algebraic oracles.

use crate::abelian::{build_complex, cohomology};
use crate::free_group::Representation;
use crate::lifting::{classify, LiftContext, ObstructionTag};
use crate::linalg::{canonical_form, kernel, smith_form, solve, SolveOutcome};
use crate::nilpotent::{Cochain1, LieValue, NilpotentComplex};
use crate::sampling::{random_ld_system, random_levi, random_mod_p_cocycle, random_vector, random_word};
use crate::systems::{g2_long_heisenberg, g2_short_root_default, generic_heisenberg, sym_power_matrix};
use crate::unipotent::{inverse, power_iterated, semidirect_multiply, GroupElement};
use crate::{build_relator, evaluate, fox_derivative, GroupRingElt, LeviData, Matrix, NilpotentSystem, RingModulus};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, m: &RingModulus) -> Matrix {
    Matrix::from_vec(rows, cols, random_vector(rng, rows * cols, m), m).unwrap()
}

/// Random matrix whose entries are biased towards multiples of `p`.
fn torsion_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, m: &RingModulus) -> Matrix {
    let mut a = random_matrix(rng, rows, cols, m);
    for i in 0..rows {
        for j in 0..cols {
            let v = rng.gen_range(0..m.s());
            a.set(i, j, m.mul(a.get(i, j), m.pow_p(v)));
        }
    }
    a
}

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![5u64, 7])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn howell_form_is_idempotent_and_keeps_rows(seed: u64, p in prime(), s in 1u32..=3, r in 1usize..5, c in 1usize..5) {
        let m = RingModulus::new(p, s).unwrap();
        let a = torsion_matrix(&mut rng(seed), r, c, &m);
        let h = canonical_form(&a, &m);
        let again = canonical_form(&h.basis(), &m);
        prop_assert_eq!(again.basis(), h.basis());
        for i in 0..r {
            prop_assert!(h.contains(a.row(i), &m));
        }
    }

    #[test]
    fn kernel_generators_are_annihilated(seed: u64, p in prime(), s in 1u32..=3, r in 1usize..5, c in 1usize..5) {
        let m = RingModulus::new(p, s).unwrap();
        let a = torsion_matrix(&mut rng(seed), r, c, &m);
        let k = kernel(&a, &m);
        prop_assert!(a.mul(&k.generators.transpose(), &m).is_zero());
    }

    #[test]
    fn kernel_size_matches_enumeration(seed: u64, r in 1usize..4) {
        let m = RingModulus::new(5, 2).unwrap();
        let a = torsion_matrix(&mut rng(seed), r, 2, &m);
        let k = kernel(&a, &m);
        let mut count = 0u32;
        for v0 in 0..25 {
            for v1 in 0..25 {
                count += u32::from(a.mul_vec(&[v0, v1], &m).iter().all(|&x| x == 0));
            }
        }
        prop_assert_eq!(count, 5u32.pow(k.profile.length()));
        // Every enumerated solution lies in the span of the generators.
        let span = canonical_form(&k.generators, &m);
        for v0 in 0..25 {
            for v1 in 0..25 {
                if a.mul_vec(&[v0, v1], &m).iter().all(|&x| x == 0) {
                    prop_assert!(span.contains(&[v0, v1], &m));
                }
            }
        }
    }

    #[test]
    fn solve_round_trip(seed: u64, p in prime(), s in 1u32..=3, r in 1usize..5, c in 1usize..5) {
        let m = RingModulus::new(p, s).unwrap();
        let mut g = rng(seed);
        let a = torsion_matrix(&mut g, r, c, &m);
        let v = random_vector(&mut g, c, &m);
        let b = a.mul_vec(&v, &m);
        let sol = solve(&a, &b, &m).unwrap().solution();
        prop_assert!(sol.is_some());
        prop_assert_eq!(a.mul_vec(&sol.unwrap(), &m), b);
    }

    #[test]
    fn unsolvable_systems_carry_a_separating_functional(seed: u64, r in 1usize..4, c in 1usize..4) {
        let m = RingModulus::new(5, 2).unwrap();
        let mut g = rng(seed);
        let a = torsion_matrix(&mut g, r, c, &m);
        let b = random_vector(&mut g, r, &m);
        if let SolveOutcome::Unsolvable { functional, value } = solve(&a, &b, &m).unwrap() {
            prop_assert_ne!(value, 0);
            prop_assert!(a.left_mul_vec(&functional, &m).iter().all(|&x| x == 0));
            prop_assert_eq!(crate::linalg::dot(&functional, &b, &m), value);
        }
    }

    #[test]
    fn smith_form_diagonalizes(seed: u64, p in prime(), s in 1u32..=3, r in 1usize..5, c in 1usize..5) {
        let m = RingModulus::new(p, s).unwrap();
        let a = torsion_matrix(&mut rng(seed), r, c, &m);
        let sf = smith_form(&a, &m);
        let d = sf.left.mul(&a, &m).mul(&sf.right, &m);
        for i in 0..r {
            for j in 0..c {
                let want = if i == j && i < sf.exponents.len() { m.pow_p(sf.exponents[i]) } else { 0 };
                prop_assert_eq!(d.get(i, j), want);
            }
        }
    }

    #[test]
    fn field_rank_nullity(seed: u64, p in prime(), r in 1usize..6, c in 1usize..6) {
        let f = RingModulus::new(p, 1).unwrap();
        let a = random_matrix(&mut rng(seed), r, c, &f);
        prop_assert_eq!(kernel(&a, &f).profile.dim_mod_p() + a.rank_mod_p(&f), c);
    }

    #[test]
    fn fundamental_fox_identity(seed: u64, p in prime(), s in 1u32..=2, rank in 1usize..4) {
        let m = RingModulus::new(p, s).unwrap();
        let mut g = rng(seed);
        let sys = random_ld_system(&mut g, rank, 2, &m);
        let w = random_word(&mut g, 4, 12);
        let rep = Representation::new(sys.actions(), &m).unwrap();
        let lhs = rep.word(&w, &m).unwrap().sub(&Matrix::identity(rank), &m);
        let mut rhs = Matrix::zeros(rank, rank);
        for i in 0..4 {
            let d = evaluate(&fox_derivative(&w, i, 4).unwrap(), sys.actions(), &m).unwrap();
            rhs = rhs.add(&d.mul(&sys.action(i).sub(&Matrix::identity(rank), &m), &m), &m);
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fox_product_rule(seed: u64) {
        let mut g = rng(seed);
        let u = random_word(&mut g, 4, 10);
        let v = random_word(&mut g, 4, 10);
        for i in 0..4 {
            let whole = fox_derivative(&u.mul(&v), i, 4).unwrap();
            let parts = fox_derivative(&u, i, 4).unwrap().add(&fox_derivative(&v, i, 4).unwrap().left_mul_word(&u));
            prop_assert_eq!(whole, parts);
        }
    }

    #[test]
    fn fox_derivative_of_inverse(seed: u64) {
        let mut g = rng(seed);
        let u = random_word(&mut g, 4, 10);
        for i in 0..4 {
            // d(u^-1) = -u^-1 du
            let lhs = fox_derivative(&u.inverse(), i, 4).unwrap();
            let rhs = GroupRingElt::zero().sub(&fox_derivative(&u, i, 4).unwrap().left_mul_word(&u.inverse()));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn sym3_is_multiplicative(a: u64, b: u64, p in prime(), s in 1u32..=3) {
        let m = RingModulus::new(p, s).unwrap();
        let (a, b) = (m.reduce(a), m.reduce(b));
        let prod = sym_power_matrix(3, a, &m).mul(&sym_power_matrix(3, b, &m), &m);
        prop_assert_eq!(prod, sym_power_matrix(3, m.add(a, b), &m));
    }

    #[test]
    fn brackets_are_equivariant(seed: u64, p in prime(), s in 1u32..=3, short: bool) {
        let m = RingModulus::new(p, s).unwrap();
        let mut g = rng(seed);
        let levi = random_levi(&mut g, &m, 4);
        let sys = if short { g2_short_root_default(&levi).unwrap() } else { g2_long_heisenberg(&levi).unwrap() };
        let x = random_vector(&mut g, sys.m_a(), &m);
        let y = random_vector(&mut g, sys.m_a(), &m);
        for i in 0..4 {
            let a = sys.ad().action(i);
            let lhs = sys.bracket_value(&a.mul_vec(&x, &m), &a.mul_vec(&y, &m));
            prop_assert_eq!(lhs, m.mul(sys.z_actions()[i], sys.bracket_value(&x, &y)));
        }
    }
}

fn short_root_complex(seed: u64, p: u64, s: u32) -> NilpotentComplex {
    let m = RingModulus::new(p, s).unwrap();
    let pres = build_relator(2, m.order()).unwrap();
    let sys = g2_short_root_default(&random_levi(&mut rng(seed), &m, 4)).unwrap();
    NilpotentComplex::new(&sys, &pres).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadratic_form_laws(seed: u64, p in prime(), s in 1u32..=2) {
        let cx = short_root_complex(seed, p, s);
        let m = *cx.modulus();
        let mut g = rng(seed ^ 1);
        let x = random_vector(&mut g, cx.c1_dim(), &m);
        let y = random_vector(&mut g, cx.c1_dim(), &m);
        let w = random_vector(&mut g, cx.c1_dim(), &m);
        let lambda = g.gen_range(0..m.order());
        let scaled: Vec<u64> = x.iter().map(|&v| m.mul(lambda, v)).collect();
        let sum: Vec<u64> = x.iter().zip(&w).map(|(&a, &b)| m.add(a, b)).collect();
        prop_assert_eq!(cx.q(&scaled), m.mul(m.mul(lambda, lambda), cx.q(&x)));
        prop_assert_eq!(cx.cup(&x, &x), cx.q(&x));
        prop_assert_eq!(cx.cup(&x, &y), cx.cup(&y, &x));
        prop_assert_eq!(cx.cup(&sum, &y), m.add(cx.cup(&x, &y), cx.cup(&w, &y)));
        // Polarization against the relator evaluation directly.
        let exact = |v: &[u64]| crate::nilpotent::q_form(cx.system(), cx.presentation(), v).unwrap();
        let xy: Vec<u64> = x.iter().zip(&y).map(|(&a, &b)| m.add(a, b)).collect();
        let polar = m.mul(m.half(), m.sub(m.sub(exact(&xy), exact(&x)), exact(&y)));
        prop_assert_eq!(cx.cup(&x, &y), polar);
    }

    #[test]
    fn grading_consistency(seed: u64, p in prime(), s in 1u32..=2) {
        let cx = short_root_complex(seed, p, s);
        let m = *cx.modulus();
        let mut g = rng(seed ^ 2);
        let x = random_vector(&mut g, cx.c1_dim(), &m);
        let y = random_vector(&mut g, 4, &m);
        let exact = cx.d2_exact(&x, &y).unwrap();
        prop_assert_eq!(&exact.ad, &cx.d2_ad(&x));
        prop_assert_eq!(exact, cx.d2_fast(&x, &y));
    }

    #[test]
    fn group_laws(seed: u64, p in prime(), s in 1u32..=3) {
        let m = RingModulus::new(p, s).unwrap();
        let sys = g2_short_root_default(&LeviData::trivial(m, 4)).unwrap();
        let mut g = rng(seed);
        let mut elt = || GroupElement {
            levi: g.gen_range(0..m.order()),
            u: LieValue::new(random_vector(&mut g, 4, &m), g.gen_range(0..m.order())),
        };
        let (a, b, c) = (elt(), elt(), elt());
        let ab_c = semidirect_multiply(&sys, &semidirect_multiply(&sys, &a, &b).unwrap(), &c).unwrap();
        let a_bc = semidirect_multiply(&sys, &a, &semidirect_multiply(&sys, &b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert!(semidirect_multiply(&sys, &a, &inverse(&sys, &a).unwrap()).unwrap().is_identity());
        prop_assert!(semidirect_multiply(&sys, &inverse(&sys, &a).unwrap(), &a).unwrap().is_identity());
    }

    #[test]
    fn cohomology_is_additive(seed: u64, p in prime(), r1 in 1usize..3, r2 in 1usize..3) {
        let m = RingModulus::new(p, 1).unwrap();
        let pres = build_relator(2, p).unwrap();
        let mut g = rng(seed);
        let a = random_ld_system(&mut g, r1, 2, &m);
        let b = random_ld_system(&mut g, r2, 2, &m);
        let ha = cohomology(&build_complex(&pres, &a).unwrap());
        let hb = cohomology(&build_complex(&pres, &b).unwrap());
        let hs = cohomology(&build_complex(&pres, &a.direct_sum(&b).unwrap()).unwrap());
        prop_assert_eq!(hs.h0, ha.h0.direct_sum(&hb.h0));
        prop_assert_eq!(hs.h1, ha.h1.direct_sum(&hb.h1));
        prop_assert_eq!(hs.h2, ha.h2.direct_sum(&hb.h2));
    }
}

/// Evaluates the relator in `U ⋊ L` with `x_i -> (c_i, l_i)`.
fn relator_image(sys: &NilpotentSystem, levi: &LeviData, c: &Cochain1, q: u64) -> GroupElement {
    let gen = |i: usize| GroupElement { levi: levi.values()[i], u: c.values[i].clone() };
    let mul = |a: &GroupElement, b: &GroupElement| semidirect_multiply(sys, a, b).unwrap();
    let inv = |a: &GroupElement| inverse(sys, a).unwrap();
    let mut acc = power_iterated(sys, &gen(0), q).unwrap();
    for k in 0..2 {
        let (x, y) = (gen(2 * k), gen(2 * k + 1));
        acc = mul(&acc, &mul(&mul(&inv(&x), &inv(&y)), &mul(&x, &y)));
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// A certified cocycle gives a homomorphism from the presentation to `U ⋊ L`.
    #[test]
    fn cocycles_are_crossed_homomorphisms(seed: u64, p in prime()) {
        let m = RingModulus::new(p, 2).unwrap();
        let pres = build_relator(2, m.order()).unwrap();
        let levi = random_levi(&mut rng(seed), &m, 4);
        let sys = g2_short_root_default(&levi).unwrap();
        let ctx = LiftContext::new(&sys, &pres, 2).unwrap();
        let mut g = rng(seed ^ 3);
        let Some((x, y)) = random_mod_p_cocycle(&mut g, ctx.complex()) else { return Ok(()) };
        let out = ctx.lift(&x, &y).unwrap();
        prop_assume!(out.succeeded());
        let c = Cochain1::from_parts(4, &out.state.x, &out.state.y);
        prop_assert!(relator_image(&sys, &levi, &c, m.order()).is_identity());
        // A generic cochain is not a homomorphism.
        let junk = Cochain1::from_parts(4, &random_vector(&mut g, 16, &m), &random_vector(&mut g, 4, &m));
        let is_cocycle = cx_certificate(&sys, &pres, &junk);
        prop_assert_eq!(relator_image(&sys, &levi, &junk, m.order()).is_identity(), is_cocycle);
    }

    /// Lifts are certified and reduce to the input.
    #[test]
    fn lifts_are_sound(seed: u64) {
        let m = RingModulus::new(5, 3).unwrap();
        let pres = build_relator(2, 125).unwrap();
        let sys = g2_short_root_default(&random_levi(&mut rng(seed), &m, 4)).unwrap();
        let ctx = LiftContext::new(&sys, &pres, 3).unwrap();
        let mut g = rng(seed ^ 4);
        let Some((x, y)) = random_mod_p_cocycle(&mut g, ctx.complex()) else { return Ok(()) };
        let out = ctx.lift(&x, &y).unwrap();
        let st = &out.state;
        prop_assert!(st.precision >= 1 && st.precision <= 3);
        let sys_k = sys.reduce_to(st.precision).unwrap();
        prop_assert!(cx_certificate(&sys_k, &pres, &Cochain1::from_parts(4, &st.x, &st.y)));
        prop_assert!(st.x.iter().zip(&x).all(|(&a, &b)| a % 5 == b));
        prop_assert!(st.y.iter().zip(&y).all(|(&a, &b)| a % 5 == b));
        prop_assert_eq!(out.succeeded(), st.precision == 3);
    }

    /// With `H^2` of the centre zero the linear path always suffices.
    #[test]
    fn centre_h2_zero_never_needs_the_quadratic_step(seed: u64) {
        let m = RingModulus::new(5, 3).unwrap();
        let pres = build_relator(2, 125).unwrap();
        let mut b = Matrix::zeros(2, 2);
        b.set(0, 1, 1);
        b.set(1, 0, m.neg(1));
        let mut ad = vec![Matrix::identity(2); 4];
        ad[1] = Matrix::from_rows(&[[2, 0], [0, 1]], &m).unwrap();
        let sys = generic_heisenberg(m, b, ad, vec![1, 2, 1, 1]).unwrap();
        prop_assert_eq!(classify(&sys, &pres).unwrap().tag, ObstructionTag::CenterH2Zero);
        let ctx = LiftContext::new(&sys, &pres, 3).unwrap();
        let mut g = rng(seed);
        let Some((x, y)) = random_mod_p_cocycle(&mut g, ctx.complex()) else { return Ok(()) };
        let out = ctx.lift(&x, &y).unwrap();
        prop_assert!(!out.state.used_quadratic);
    }
}

fn cx_certificate(sys: &NilpotentSystem, pres: &crate::DemuskinPresentation, c: &Cochain1) -> bool {
    crate::nilpotent::d2_nilpotent(sys, pres, c).unwrap().is_zero()
}
