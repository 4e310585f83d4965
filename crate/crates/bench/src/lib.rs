//! Fixtures shared by the benchmarks.

use demuskin::linalg::RingModulus;
use demuskin::sampling::{random_levi, random_vector};
use demuskin::systems::g2_short_root_default;
use demuskin::{build_relator, DemuskinPresentation, Matrix, NilpotentSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded square matrix over `Z/p^s` with entries scaled by random powers of `p`.
pub fn torsion_matrix(size: usize, p: u64, s: u32, seed: u64) -> (Matrix, RingModulus) {
    let m = RingModulus::new(p, s).expect("valid modulus");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = random_vector(&mut rng, size * size, &m);
    let mut a = Matrix::from_vec(size, size, data, &m).expect("shape");
    for i in 0..size {
        for j in 0..size {
            let v = ((i + 2 * j) % s as usize) as u32;
            a.set(i, j, m.mul(a.get(i, j), m.pow_p(v)));
        }
    }
    (a, m)
}

/// Short-root system at precision `s` with `q = p^s` and a seeded Levi.
pub fn short_root_instance(p: u64, n: usize, s: u32, seed: u64) -> (NilpotentSystem, DemuskinPresentation) {
    let m = RingModulus::new(p, s).expect("valid modulus");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = g2_short_root_default(&random_levi(&mut rng, &m, n + 2)).expect("builder");
    (sys, build_relator(n, m.order()).expect("relator"))
}
