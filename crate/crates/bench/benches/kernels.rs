use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use demuskin::lifting::LiftContext;
use demuskin::linalg::{canonical_form, kernel};
use demuskin::nilpotent::gram_matrix;
use demuskin::nilpotent::LieValue;
use demuskin::sampling::random_mod_p_cocycle;
use demuskin::unipotent::{power_closed_form, power_iterated, GroupElement, ShortRootCoords};
use demuskin_bench::{short_root_instance, torsion_matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn howell(c: &mut Criterion) {
    let mut group = c.benchmark_group("howell");
    for size in [8, 16, 32] {
        let (a, m) = torsion_matrix(size, 5, 3, 1);
        group.bench_with_input(BenchmarkId::new("canonical_form", size), &a, |b, a| {
            b.iter(|| canonical_form(black_box(a), &m))
        });
        group.bench_with_input(BenchmarkId::new("kernel", size), &a, |b, a| b.iter(|| kernel(black_box(a), &m)));
    }
    group.finish();
}

fn gram(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram");
    for (p, n) in [(5, 2), (13, 4)] {
        let (sys, pres) = short_root_instance(p, n, 1, 2);
        group.bench_function(BenchmarkId::new("short_root", format!("p{p}_n{n}")), |b| {
            b.iter(|| gram_matrix(black_box(&sys), &pres).unwrap())
        });
    }
    group.finish();
}

fn power(c: &mut Criterion) {
    let (sys, _) = short_root_instance(7, 2, 3, 3);
    let g = GroupElement { levi: 5, u: LieValue::new(vec![1, 2, 3, 4], 6) };
    let coords = ShortRootCoords::from_element(&sys, &g).unwrap();
    c.bench_function("power/iterated_q97", |b| b.iter(|| power_iterated(&sys, black_box(&g), 97).unwrap()));
    c.bench_function("power/closed_form_q97", |b| {
        b.iter(|| power_closed_form(sys.modulus(), black_box(&coords), 97).unwrap())
    });
}

fn lift(c: &mut Criterion) {
    let (sys, pres) = short_root_instance(5, 2, 4, 4);
    let ctx = LiftContext::new(&sys, &pres, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (x, y) = loop {
        if let Some(c) = random_mod_p_cocycle(&mut rng, ctx.complex()) {
            break c;
        }
    };
    c.bench_function("lift/context_p5_s4", |b| b.iter(|| LiftContext::new(black_box(&sys), &pres, 4).unwrap()));
    c.bench_function("lift/one_cocycle_p5_s4", |b| b.iter(|| ctx.lift(black_box(&x), &y).unwrap()));
}

criterion_group!(benches, howell, gram, power, lift);
criterion_main!(benches);
