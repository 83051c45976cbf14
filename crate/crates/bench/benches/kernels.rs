use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use maxcop::estimation::{pml_loglik, PseudoObservations};
use maxcop::{sample_mixture, CopulaFamily, CopulaModel, MixingLaw, MixtureCopula, SeededStream};

fn joe_b() -> MixtureCopula {
    MixtureCopula::new(CopulaFamily::Joe { alpha: 2.6634 }, MixingLaw::ShiftedPoisson { theta: 0.9537 }).unwrap()
}

fn densities(c: &mut Criterion) {
    let bases = [
        CopulaFamily::Gumbel { alpha: 2.3 },
        CopulaFamily::Joe { alpha: 2.3 },
        CopulaFamily::Student { rho: 0.5, dof: 4.0 },
    ];
    for base in bases {
        c.bench_function(&format!("pdf/{}", base.kind()), |b| {
            b.iter(|| base.pdf(black_box(0.3), black_box(0.7)).unwrap())
        });
    }
    let mc = joe_b();
    c.bench_function("pdf/joe-shifted-poisson", |b| {
        b.iter(|| mc.pdf(black_box(0.3), black_box(0.7)).unwrap())
    });
}

fn likelihood(c: &mut Criterion) {
    let mc = joe_b();
    let pairs = sample_mixture(&mc, 10_000, SeededStream::new(1, 0)).unwrap();
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let obs = maxcop::estimation::pseudo_observations(&x, &y).unwrap();
    let model: CopulaModel = mc.into();
    c.bench_function("loglik/joe-shifted-poisson/n=1e4", |b| {
        b.iter(|| pml_loglik(black_box::<&PseudoObservations>(&obs), &model).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_mixture");
    group.sample_size(10);
    let gumbel = MixtureCopula::new(CopulaFamily::Gumbel { alpha: 10.0 }, MixingLaw::ShiftedPoisson { theta: 99.0 })
        .unwrap();
    group.bench_function("gumbel-shifted-poisson/E=100/n=1e4", |b| {
        b.iter(|| sample_mixture(&gumbel, 10_000, SeededStream::new(2, 0)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, densities, likelihood, sampling);
criterion_main!(benches);
