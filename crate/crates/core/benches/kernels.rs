use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pigeom::grading::build_named;
use pigeom::identities::{KernelConfig, MultilinearPattern, PreparedAlgebra};
use pigeom::sheaves::{check_sheaf_with, homeomorphism_classes, random_presheaf, RandomPresheafConfig};
use pigeom::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn identity_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("identity_kernel");
    group.sample_size(10);
    for name in ["M:2", "UT:3", "E:6"] {
        let a = build_named(name).unwrap().trivialize();
        let prepared = PreparedAlgebra::new(&a);
        let pattern = MultilinearPattern::ungraded(4);
        for (label, exec) in MODES {
            let cfg = KernelConfig::default().with_exec(exec);
            group.bench_with_input(BenchmarkId::new(label, name), &pattern, |b, p| {
                b.iter(|| black_box(prepared.identity_kernel(p, &cfg).unwrap()))
            });
        }
    }
    group.finish();
}

fn sheaf_checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("check_sheaf");
    group.sample_size(10);
    let a = build_named("Poly:2").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let presheaves: Vec<_> =
        homeomorphism_classes(4).iter().map(|t| random_presheaf(t, &a, &RandomPresheafConfig::default(), &mut rng)).collect();
    for (label, exec) in MODES {
        group.bench_function(label, |b| {
            b.iter(|| {
                for f in &presheaves {
                    black_box(check_sheaf_with(f, exec).unwrap());
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, identity_kernels, sheaf_checks);
criterion_main!(benches);
