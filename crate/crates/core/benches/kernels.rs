use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gva_core::affine::verma::Verma;
use gva_core::affine::zops::ZOps;
use gva_core::affine::{AffineData, E, F};
use gva_core::exec::Exec;
use gva_core::scalars::qi;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn affine_relations(c: &mut Criterion) {
    let v = Verma::build(AffineData::sl2(qi(3)).unwrap(), 4).unwrap();
    let mut g = c.benchmark_group("affine_relations");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| assert!(v.check_affine_relations(&v.data, 2, exec).passed))
        });
    }
    g.finish();
}

fn z_relations(c: &mut Criterion) {
    let v = Arc::new(Verma::build(AffineData::sl2(qi(3)).unwrap(), 4).unwrap());
    let z = ZOps::new(v.clone());
    let sources: Vec<_> = v.basis().iter().take(4).cloned().collect();
    let mut g = c.benchmark_group("z_relations");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| assert!(z.check_z_relations(&v.data, E, F, 4, &sources, exec).passed))
        });
    }
    g.finish();
}

criterion_group!(kernels, affine_relations, z_relations);
criterion_main!(kernels);
