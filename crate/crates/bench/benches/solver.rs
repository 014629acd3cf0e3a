use criterion::{black_box, criterion_group, criterion_main, Criterion};
use phcavity::analysis::extract_resonances;
use phcavity::fdtd::{Simulation, DEFAULT_COURANT};
use phcavity::geometry::rasterize;
use phcavity_bench::{cavity_config, cavity_grid, cavity_holes, two_mode_signal};

fn rasterization(c: &mut Criterion) {
    let cfg = cavity_config(12);
    let holes = cavity_holes(&cfg);
    let (layout, _, _) = cavity_grid(&cfg);
    let spec = cfg.structure.crystal;
    c.bench_function("rasterize cavity a=12", |b| {
        b.iter(|| rasterize(black_box(&holes), &spec, &layout, cfg.solver.subsamples))
    });
}

fn yee_step(c: &mut Criterion) {
    let cfg = cavity_config(12);
    let (layout, grid, bounds) = cavity_grid(&cfg);
    let mut sim = Simulation::<f64>::new(&grid, bounds, DEFAULT_COURANT).unwrap();
    sim.inject_current(phcavity::fdtd::Component::Ex, layout.origin[0], layout.origin[1], layout.origin[2], 1.0);
    let mut g = c.benchmark_group("yee step");
    g.throughput(criterion::Throughput::Elements(layout.len() as u64));
    g.bench_function("cavity a=12", |b| b.iter(|| sim.step()));
    g.finish();
}

fn resonance_fit(c: &mut Criterion) {
    let signal = two_mode_signal(20_000, 0.5);
    c.bench_function("extract resonances 20k samples", |b| {
        b.iter(|| extract_resonances(black_box(&signal), 0.5, 0.015, 0.027).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = rasterization, yee_step, resonance_fit
}
criterion_main!(benches);
