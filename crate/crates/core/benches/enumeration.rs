use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lattice_fm::discform::discriminant_form;
use lattice_fm::k3::count_vc_orbits_with;
use lattice_fm::lattice::standard_lattice;
use lattice_fm::overlattice::enumerate_gluings_of_forms;
use lattice_fm::par::Execution;
use num_bigint::BigInt;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn orthogonal_group(c: &mut Criterion) {
    let form = discriminant_form(&standard_lattice("A2+A2+A2+A2").unwrap()).unwrap().form().clone();
    let mut g = c.benchmark_group("orthogonal_group");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "4A2"), |b| b.iter(|| form.orthogonal_group_with(exec).unwrap()));
    }
    g.finish();
}

fn short_vectors(c: &mut Criterion) {
    let e8 = standard_lattice("E8").unwrap();
    let n = BigInt::from(4);
    let mut g = c.benchmark_group("short_vectors");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "E8 norm 4"), |b| b.iter(|| e8.short_vectors_with(&n, exec).unwrap()));
    }
    g.finish();
}

fn isometry_group(c: &mut Criterion) {
    let l = standard_lattice("A2+A2+A2").unwrap();
    let mut g = c.benchmark_group("isometry_group");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "3A2"), |b| b.iter(|| l.isometry_group_definite_with(exec).unwrap()));
    }
    g.finish();
}

fn gluings(c: &mut Criterion) {
    let t = discriminant_form(&standard_lattice("A2+A2").unwrap()).unwrap().form().clone();
    let k = discriminant_form(&standard_lattice("A2(-1)+A2(-1)").unwrap()).unwrap().form().clone();
    let target = lattice_fm::discform::FiniteQuadraticForm::trivial();
    let mut g = c.benchmark_group("gluings");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "2A2 with 2A2(-1)"), |b| {
            b.iter(|| enumerate_gluings_of_forms(&t, &k, &target, exec).unwrap())
        });
    }
    g.finish();
}

fn vc_orbits(c: &mut Criterion) {
    let mut g = c.benchmark_group("vc_orbits");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "p=13"), |b| b.iter(|| count_vc_orbits_with(13, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, orthogonal_group, short_vectors, isometry_group, gluings, vc_orbits);
criterion_main!(benches);
