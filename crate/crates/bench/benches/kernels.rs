use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use heralded_core::calibrate::equalize_rates;
use heralded_core::dynamics::liouvillian::sector_decay_rate_n;
use heralded_core::dynamics::PulseSimulation;
use heralded_core::effective::{effective_closed_form, effective_generic};
use heralded_core::gates::{
    cz_effective, toffoli_protocol, with_cz_detunings, with_toffoli_detunings,
};
use heralded_core::repeater::rate_exact_recursive;
use heralded_core::{RateSource, RepeaterConfig, Scheme, SystemParams, ToffoliInput};

fn cz_params(c: f64) -> SystemParams {
    with_cz_detunings(
        &SystemParams::new(Scheme::DirectDrive, 2, c, 100.0).with_drive_strength(0.25),
    )
    .unwrap()
}

fn effective(c: &mut Criterion) {
    let p = cz_params(100.0);
    c.bench_function("effective_closed_form", |b| {
        b.iter(|| effective_closed_form(black_box(&p)).unwrap())
    });
    c.bench_function("effective_generic", |b| {
        b.iter(|| effective_generic(black_box(&p)).unwrap())
    });
    c.bench_function("cz_effective", |b| {
        b.iter(|| cz_effective(black_box(&p)).unwrap())
    });
    let t = with_toffoli_detunings(&p).unwrap();
    c.bench_function("toffoli_generic_n15", |b| {
        b.iter(|| toffoli_protocol(black_box(&t), 15, ToffoliInput::Generic).unwrap())
    });
}

fn rates(c: &mut Criterion) {
    let p = cz_params(100.0);
    c.bench_function("liouvillian_sector_rate_n1", |b| {
        b.iter(|| sector_decay_rate_n(black_box(&p), 1).unwrap())
    });
    let base = SystemParams::new(Scheme::DirectDrive, 2, 100.0, 100.0).with_drive_strength(0.25);
    c.bench_function("calibrate_closed_form", |b| {
        b.iter(|| equalize_rates(black_box(&base), RateSource::EffectiveClosedForm).unwrap())
    });
}

fn integration(c: &mut Criterion) {
    let p = cz_params(100.0);
    let sim = PulseSimulation::new(&p, 40.0).unwrap();
    let rho0 = sim.initial_plus_state().unwrap();
    let mut g = c.benchmark_group("full");
    g.sample_size(10);
    g.bench_function("integrate_cz_c100_t10", |b| {
        b.iter(|| sim.state_at(0.0, black_box(&rho0), 10.0).unwrap())
    });
    g.finish();
}

fn repeater(c: &mut Criterion) {
    let exact = RepeaterConfig::new(128.0, 1.0, 1.0);
    let lossy = RepeaterConfig::new(128.0, 1.0, 0.5);
    c.bench_function("repeater_p1_128", |b| {
        b.iter(|| rate_exact_recursive(black_box(&exact)).unwrap())
    });
    let mut g = c.benchmark_group("repeater_fft");
    g.sample_size(10);
    g.bench_function("p0.5_128", |b| {
        b.iter(|| rate_exact_recursive(black_box(&lossy)).unwrap())
    });
    g.finish();
}

criterion_group!(kernels, effective, rates, integration, repeater);
criterion_main!(kernels);
