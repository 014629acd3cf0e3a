//! Fixtures shared by the benchmarks in `benches/`.

use phcavity::config::{preset, RunConfig};
use phcavity::fdtd::{BoundarySpec, Parity};
use phcavity::geometry::{apply_defects, build_lattice, rasterize, GridLayout, HoleSet, LayoutOptions, PermittivityGrid};

/// The reduced-hole cavity at `a` cells per lattice constant.
pub fn cavity_config(a: usize) -> RunConfig {
    preset("table1-row2").expect("preset exists").at_resolution(a)
}

pub fn cavity_holes(cfg: &RunConfig) -> HoleSet {
    let spec = &cfg.structure.crystal;
    apply_defects(&build_lattice(spec).unwrap(), &cfg.structure.defects, spec).unwrap()
}

/// Mirrored layout, permittivity grid and x-dipole boundaries as used by the
/// cavity pipeline.
pub fn cavity_grid(cfg: &RunConfig) -> (GridLayout, PermittivityGrid, BoundarySpec) {
    let spec = &cfg.structure.crystal;
    let holes = cavity_holes(cfg);
    let a = spec.lattice_constant();
    let opts = LayoutOptions {
        padding: cfg.solver.padding_over_a * a,
        air_above: 0.5 * a / cfg.analysis.window_a_over_lambda[0] + cfg.solver.air_margin_cells,
        absorber: cfg.solver.absorber_cells,
        mirror: [true; 3],
    };
    let layout = GridLayout::for_structure(&holes, spec, &opts).unwrap();
    let grid = rasterize(&holes, spec, &layout, cfg.solver.subsamples);
    let bounds = BoundarySpec::for_layout(&layout, [Parity::Odd, Parity::Even, Parity::Even]);
    (layout, grid, bounds)
}

/// Two decaying sinusoids sampled every `dt`.
pub fn two_mode_signal(len: usize, dt: f64) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..len)
        .map(|n| {
            let t = n as f64 * dt;
            (2.0 * PI * 0.020 * t).cos() * (-2e-5 * t).exp() + 0.3 * (2.0 * PI * 0.023 * t + 0.4).cos() * (-1e-4 * t).exp()
        })
        .collect()
}
