//! One cavity run from configuration to mode report: geometry, a broadband
//! discovery pass, a narrowband re-excitation of the chosen mode, loss split,
//! mode volume, coupling figures and far-field Q.
//!
//! All three symmetry planes are used, so the grid holds one octant. Energies
//! and fluxes are octant values; ratios of them are unaffected.

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    cqed_figures, dominant_resonance, extract_resonances, field_ratio, in_half_wavelength_cubes,
    mode_volume, q_from_energy_decay, split_q, AnalysisError, CouplingWeight, CqedFigures,
    CqedInput, ModeProfile, Resonance,
};
use crate::config::{AtomSite, ConfigError, QChoice, RunConfig};
use crate::farfield::{
    check_single_mode, light_cone_fraction, q_from_radiated_power, radiated_power, AngularGrid,
    FarFieldError, PlaneRecorder, RadiationPattern,
};
use crate::fdtd::{
    excite_dipole_mode, read_checkpoint, run, run_with, write_checkpoint, BoundarySpec, Component,
    GaussianPulse, Parity, PointProbe, Region, Simulation, SolverError, SourceSpec,
};
use crate::geometry::{
    apply_defects, build_lattice, rasterize, GeometryError, GridLayout, HoleRole, HoleSet,
    LayoutOptions, PermittivityGrid,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("far field: {0}")]
    FarField(#[from] FarFieldError),
    #[error("io: {0}")]
    Io(String),
}

impl From<io::Error> for PipelineError {
    fn from(e: io::Error) -> Self {
        PipelineError::Io(e.to_string())
    }
}

/// Far-field estimate of the vertical loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldSummary {
    /// Angular frequency in radians per unit time.
    pub omega: f64,
    /// Stored energy in the half-space z ≥ 0.
    pub energy: f64,
    /// Power radiated into the upper half-space.
    pub power: f64,
    pub q: f64,
    /// Share of the `E_x` spatial spectrum inside the light cone.
    pub light_cone_fraction: f64,
    /// Relative change of the power at the last angular refinement.
    pub converged_to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub structure_id: String,
    /// Elongation in cells.
    pub p: f64,
    pub a_over_lambda: f64,
    pub q_perp: f64,
    pub q_par: f64,
    pub q_total: f64,
    /// Q from the slope of the log stored energy.
    pub q_decay: f64,
    /// Q from the complex-frequency fit of the probe signal.
    pub q_fit: f64,
    pub negative_flux: bool,
    /// No second resonance of comparable strength near the mode.
    pub single_mode: bool,
    /// Mode volume in `(λ/2)³`.
    pub v_mode: f64,
    pub field_ratio: f64,
    pub cqed: CqedFigures,
    pub farfield: Option<FarFieldSummary>,
}

pub const REPORT_HEADER: &str = "structure_id,p,a_over_lambda,q_perp,q_par,q_total,v_mode,g0,n0,m0,\
q_decay,q_fit,q_farfield,omega,energy_half_space,power_farfield,light_cone_fraction,\
g_atom,kappa,field_ratio,negative_flux,single_mode,strong_coupling";

/// Number of columns in [`REPORT_HEADER`].
pub fn report_columns() -> usize {
    REPORT_HEADER.split(',').count()
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else if v.is_nan() {
        "nan".into()
    } else {
        "inf".into()
    }
}

impl ModeReport {
    pub fn csv_row(&self) -> String {
        let c = &self.cqed;
        let ff = self.farfield;
        let opt = |f: fn(&FarFieldSummary) -> f64| ff.as_ref().map_or(String::new(), |s| num(f(s)));
        [
            self.structure_id.replace(',', ";"),
            format!("{:.4}", self.p),
            format!("{:.6}", self.a_over_lambda),
            num(self.q_perp),
            num(self.q_par),
            num(self.q_total),
            num(self.v_mode),
            num(c.g0),
            num(c.n0),
            num(c.m0),
            num(self.q_decay),
            num(self.q_fit),
            opt(|s| s.q),
            opt(|s| s.omega),
            opt(|s| s.energy),
            opt(|s| s.power),
            opt(|s| s.light_cone_fraction),
            num(c.g_atom),
            num(c.kappa),
            num(self.field_ratio),
            self.negative_flux.to_string(),
            self.single_mode.to_string(),
            c.strong_coupling().to_string(),
        ]
        .join(",")
    }

    /// Human-readable summary, one quantity per line.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "structure {}\np {:.4}\na/lambda {:.6}\nQ_perp {:.1}\nQ_par {:.1}\nQ_total {:.1}\n\
             Q_decay {:.1}\nQ_fit {:.1}\nV_mode {:.4} (lambda/2)^3\ng0 {:.4e} rad/s\ng_atom {:.4e} rad/s\n\
             kappa {:.4e} rad/s\nN0 {:.4e}\nm0 {:.4e}\nstrong coupling {}\n",
            self.structure_id,
            self.p,
            self.a_over_lambda,
            self.q_perp,
            self.q_par,
            self.q_total,
            self.q_decay,
            self.q_fit,
            self.v_mode,
            self.cqed.g0,
            self.cqed.g_atom,
            self.cqed.kappa,
            self.cqed.n0,
            self.cqed.m0,
            self.cqed.strong_coupling(),
        );
        if let Some(f) = &self.farfield {
            s += &format!(
                "farfield omega {:.6e} W {:.6e} P {:.6e} Q_farfield {:.1}\n",
                f.omega, f.energy, f.power, f.q
            );
        }
        s
    }
}

/// Everything a run produces besides the report.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ModeReport,
    pub profile: ModeProfile,
    pub pattern: Option<RadiationPattern>,
    /// Resonances found by the discovery pass, strongest first.
    pub discovered: Vec<Resonance>,
}

/// Grid, permittivity and monitor placement shared by both passes.
struct Setup {
    holes: HoleSet,
    grid: PermittivityGrid,
    bounds: BoundarySpec,
    parity: [Parity; 2],
    dt: f64,
}

fn setup(cfg: &RunConfig) -> Result<Setup, PipelineError> {
    cfg.validate()?;
    let spec = cfg.structure.crystal;
    let a = spec.lattice_constant();
    let holes = apply_defects(&build_lattice(&spec)?, &cfg.structure.defects, &spec)?;
    let s = &cfg.solver;
    // room for the top monitor half a wavelength above the surface at the
    // longest wavelength in the window
    let lambda_max = a / cfg.analysis.window_a_over_lambda[0];
    let opts = LayoutOptions {
        padding: s.padding_over_a * a,
        air_above: 0.5 * lambda_max + s.air_margin_cells,
        absorber: s.absorber_cells,
        mirror: [true; 3],
    };
    let layout = GridLayout::for_structure(&holes, &spec, &opts)?;
    let grid = rasterize(&holes, &spec, &layout, s.subsamples);
    let parity = cfg.analysis.mode.parities();
    let bounds = BoundarySpec::for_layout(&layout, [parity[0], parity[1], Parity::Even]);
    Ok(Setup {
        holes,
        grid,
        bounds,
        parity,
        dt: s.courant,
    })
}

/// The flux box: side walls on the last non-absorbing nodes, top plane half a
/// wavelength above the slab surface.
#[derive(Debug, Clone, Copy)]
struct Monitors {
    wall: [usize; 2],
    top: usize,
}

impl Monitors {
    fn new(layout: &GridLayout, half_thickness: f64, wavelength: f64) -> Result<Self, PipelineError> {
        let wall = [layout.interior(0).1 - 1, layout.interior(1).1 - 1];
        let top = (half_thickness + 0.5 * wavelength).ceil() as usize + layout.origin[2];
        if top + 1 >= layout.interior(2).1 {
            return Err(PipelineError::Analysis(AnalysisError::InvalidInput(format!(
                "top monitor at node {top} does not fit below the absorber"
            ))));
        }
        Ok(Monitors { wall, top })
    }

    fn energy_region(&self) -> Region {
        Region {
            lo: [0; 3],
            hi: [self.wall[0], self.wall[1], self.top],
        }
    }

    /// Outward power through the top face and the two side walls.
    fn powers(&self, sim: &Simulation<f64>) -> [f64; 3] {
        let [wx, wy] = self.wall;
        let top = sim.flux(
            2,
            self.top,
            &Region {
                lo: [0, 0, 0],
                hi: [wx, wy, 1],
            },
        );
        let side_x = sim.flux(
            0,
            wx,
            &Region {
                lo: [0, 0, 0],
                hi: [1, wy, self.top],
            },
        );
        let side_y = sim.flux(
            1,
            wy,
            &Region {
                lo: [0, 0, 0],
                hi: [wx, 1, self.top],
            },
        );
        [top, side_x, side_y]
    }
}

/// Steps without sources, checking for divergence as [`run_with`] does.
fn advance(sim: &mut Simulation<f64>, steps: usize, mut observe: impl FnMut(&Simulation<f64>)) -> Result<(), SolverError> {
    for n in 0..steps {
        sim.step();
        if n % 64 == 63 || n + 1 == steps {
            sim.check_stability()?;
        }
        observe(sim);
    }
    Ok(())
}

/// Probe points near the cavity centre, in units of a.
const PROBE_SITES: [(f64, f64); 6] = [(0.1, 0.1), (0.3, 0.2), (0.6, 0.1), (0.2, 0.5), (0.9, 0.4), (1.1, 0.15)];

fn discovery_probes(layout: &GridLayout, a: f64, seed: u64) -> (Vec<PointProbe>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::new();
    let mut weights = Vec::new();
    for (x, y) in PROBE_SITES {
        let i = ((x * a).round() as usize + layout.origin[0]).min(layout.interior(0).1 - 1);
        let j = ((y * a).round() as usize + layout.origin[1]).min(layout.interior(1).1 - 1);
        for c in [Component::Ex, Component::Ey] {
            probes.push(PointProbe {
                component: c,
                node: [i, j, layout.origin[2]],
            });
            weights.push(rng.gen_range(0.5..1.5));
        }
    }
    (probes, weights)
}

fn combine(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = points.first().map_or(0, Vec::len);
    (0..n)
        .map(|t| points.iter().zip(weights).map(|(p, w)| w * p[t]).sum())
        .collect()
}

/// Picks the mode: nearest the target if one is set, otherwise the one with
/// the most amplitude left at time `t_end`.
fn select_mode(found: &[Resonance], target: Option<f64>, t_end: f64) -> Option<Resonance> {
    let usable = found.iter().filter(|r| !r.near_edge && r.decay > 0.0);
    match target {
        Some(f) => usable.min_by(|a, b| (a.frequency - f).abs().total_cmp(&(b.frequency - f).abs())),
        None => usable.max_by(|a, b| {
            let s = |r: &Resonance| r.amplitude.ln() - r.decay * t_end;
            s(a).total_cmp(&s(b))
        }),
    }
    .copied()
}

/// Largest in-plane node of `c` on the mid-plane within `radius` of the centre.
fn strongest_node(sim: &Simulation<f64>, c: Component, radius: f64) -> [usize; 3] {
    let l = *sim.layout();
    let mut best = (0.0, [l.origin[0], l.origin[1], l.origin[2]]);
    let k = l.origin[2];
    for i in 0..l.interior(0).1 {
        let x = l.coord(0, i as f64 + c.offset(0));
        for j in 0..l.interior(1).1 {
            let y = l.coord(1, j as f64 + c.offset(1));
            if x.hypot(y) > radius {
                continue;
            }
            let v = sim.state.get(c, i, j, k).abs();
            if v > best.0 {
                best = (v, [i, j, k]);
            }
        }
    }
    best.1
}

fn atom_position(cfg: &RunConfig, holes: &HoleSet) -> (f64, f64, f64) {
    let a = cfg.structure.crystal.lattice_constant();
    match cfg.analysis.atom {
        AtomSite::Point {
            x_over_a,
            y_over_a,
            z_over_a,
        } => (x_over_a.abs() * a, y_over_a.abs() * a, z_over_a.abs() * a),
        AtomSite::CentralHole => holes
            .holes
            .iter()
            .filter(|h| h.role == HoleRole::Central && h.center.0 >= -1e-9 && h.center.1 >= -1e-9)
            .min_by(|p, q| p.center.0.hypot(p.center.1).total_cmp(&q.center.0.hypot(q.center.1)))
            .map_or((0.0, 0.0, 0.0), |h| (h.center.0, h.center.1, 0.0)),
    }
}

/// Runs the full pipeline. With `checkpoint`, the fields at the start of the
/// measurement window are dumped there together with the mode frequency.
pub fn simulate(cfg: &RunConfig, checkpoint: Option<&Path>) -> Result<RunOutcome, PipelineError> {
    let st = setup(cfg)?;
    let spec = cfg.structure.crystal;
    let a = spec.lattice_constant();
    let layout = st.grid.layout;
    let dt = st.dt;
    let s = &cfg.solver;
    let an = &cfg.analysis;
    let [wlo, whi] = an.window_a_over_lambda;
    let (f_lo, f_hi) = (wlo / a, whi / a);
    let f_mid = 0.5 * (f_lo + f_hi);

    // broadband discovery of the resonances with the requested symmetry
    let mut sim = Simulation::<f64>::new(&st.grid, st.bounds, dt)?;
    let seed = excite_dipole_mode(st.parity[0], st.parity[1], 0.6 * a);
    let (probes, weights) = discovery_probes(&layout, a, cfg.seed);
    let steps = (s.discovery_periods / (f_mid * dt)).ceil() as usize;
    let rec = run(&mut sim, &seed, &probes, &[], steps)?;
    let signal = combine(&rec.points, &weights);
    let discovered = extract_resonances(&signal, dt, f_lo, f_hi)?;
    let t_end = steps as f64 * dt;
    let mode = select_mode(&discovered, an.target_a_over_lambda.map(|t| t / a), t_end)
        .ok_or(AnalysisError::NoPeakFound)?;
    let f0 = mode.frequency;

    // narrowband re-excitation where the mode is strongest
    let main = match an.mode {
        crate::config::ModeSymmetry::XDipole => Component::Ex,
        crate::config::ModeSymmetry::YDipole => Component::Ey,
    };
    let node = strongest_node(&sim, main, 1.5 * a);
    drop(sim);
    let location = [0, 1, 2].map(|ax| layout.coord(ax, node[ax] as f64 + main.offset(ax)));
    let pulse = GaussianPulse::with_bandwidth(f0, s.source_bandwidth * f0, 1.0);
    let source = SourceSpec::PointDipole {
        location,
        polarization: main,
        pulse,
    };
    let period = 1.0 / (f0 * dt);
    let drive = (pulse.end_time() / dt).ceil() as usize;
    let settle = (s.settle_periods * period).ceil() as usize;
    let measure = (s.measure_periods * period).round() as usize;

    let mut sim = Simulation::<f64>::new(&st.grid, st.bounds, dt)?;
    let combined = |sim: &Simulation<f64>| -> f64 {
        probes
            .iter()
            .zip(&weights)
            .map(|(p, w)| w * sim.state.get(p.component, p.node[0], p.node[1], p.node[2]))
            .sum()
    };
    run_with(&mut sim, &source, drive, |_| {})?;
    let mut ringdown = Vec::with_capacity(settle + measure);
    advance(&mut sim, settle, |sim| ringdown.push(combined(sim)))?;
    if let Some(dir) = checkpoint {
        write_checkpoint(dir, &sim.state)?;
        write_mode_file(dir, f0)?;
    }

    // measurement window
    let monitors = Monitors::new(&layout, 0.5 * spec.thickness(), 1.0 / (f0))?;
    let region = monitors.energy_region();
    let stride = ((period / 16.0).floor() as usize).max(1);
    let vstride = ((period / 8.0).floor() as usize).max(1);
    let omega = 2.0 * PI * f0;
    let mut energies = Vec::new();
    let mut powers = Vec::new();
    let mut recorder = if an.farfield {
        let kz = (0.5 * spec.thickness() + an.farfield_gap_cells).ceil() as usize + layout.origin[2];
        Some(PlaneRecorder::new(&layout, kz, f0, st.parity)?)
    } else {
        None
    };
    let mut phasors = [(); 3].map(|_| vec![Complex64::new(0.0, 0.0); layout.len()]);
    let mut n = 0usize;
    advance(&mut sim, measure, |sim| {
        ringdown.push(combined(sim));
        if n % stride == 0 {
            energies.push(sim.energy(&region));
            powers.push(monitors.powers(sim));
        }
        if n % vstride == 0 {
            let ph = Complex64::from_polar(1.0, -omega * sim.state.time_e());
            for (ax, acc) in phasors.iter_mut().enumerate() {
                for (z, v) in acc.iter_mut().zip(sim.state.component_values(Component::e(ax))) {
                    *z += ph * v;
                }
            }
        }
        if let Some(r) = recorder.as_mut() {
            r.record(&sim.state);
        }
        n += 1;
    })?;

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let energy = mean(&energies);
    let p: Vec<f64> = (0..3).map(|c| mean(&powers.iter().map(|x| x[c]).collect::<Vec<_>>())).collect();
    let split = split_q(omega, energy, &p[..1], &p[1..]);
    let q_decay = q_from_energy_decay(&energies, stride as f64 * dt, f0)?;
    let q_fit = dominant_resonance(&ringdown, dt, 0.7 * f0, 1.3 * f0).map_or(mode.q, |r| r.q);
    let single_mode = check_single_mode(&ringdown, dt, f0, 0.3 * f0, 0.05).is_ok();

    let profile = ModeProfile::from_phasors(&st.grid, [&phasors[0], &phasors[1], &phasors[2]]);
    let a_over_lambda = f0 * a;
    let v_mode = in_half_wavelength_cubes(mode_volume(&profile), a, a_over_lambda);
    let ratio = atom_field_ratio(&profile, atom_position(cfg, &st.holes), an.coupling_weight);
    let cqed = cqed_figures(&CqedInput {
        q: match an.q_for_coupling {
            QChoice::Perp => split.q_perp,
            QChoice::Total => split.q_total,
        },
        v_mode,
        field_ratio: ratio,
        gamma_perp: an.gamma_perp_rad_per_s,
        wavelength: an.lambda_design_m,
    });

    let (farfield, pattern) = match recorder {
        Some(r) => {
            let (summary, pattern) = farfield_q(&r, energy, omega, cfg.outputs.pattern)?;
            (Some(summary), pattern)
        }
        None => (None, None),
    };

    Ok(RunOutcome {
        report: ModeReport {
            structure_id: cfg.name.clone(),
            p: cfg.elongation(),
            a_over_lambda,
            q_perp: split.q_perp,
            q_par: split.q_par,
            q_total: split.q_total,
            q_decay,
            q_fit,
            negative_flux: split.negative_flux,
            single_mode,
            v_mode,
            field_ratio: ratio,
            cqed,
            farfield,
        },
        profile,
        pattern,
        discovered,
    })
}

/// `Q = ωW/P` with `W` the energy in z ≥ 0 (four octants) and `P` the power
/// radiated into the upper half-space.
fn farfield_q(
    rec: &PlaneRecorder,
    octant_energy: f64,
    omega: f64,
    keep_pattern: bool,
) -> Result<(FarFieldSummary, Option<RadiationPattern>), PipelineError> {
    let plane = rec.finish()?;
    let pattern = radiated_power(&plane, AngularGrid::default(), 0.01, 2);
    let energy = 4.0 * octant_energy;
    let summary = FarFieldSummary {
        omega,
        energy,
        power: pattern.power,
        q: q_from_radiated_power(energy, pattern.power, omega),
        light_cone_fraction: light_cone_fraction(&plane.ex, plane.wavelength),
        converged_to: pattern.converged_to,
    };
    Ok((summary, keep_pattern.then_some(pattern)))
}

/// `w(r)|E(r)| / max(w|E|)` at the node nearest `pos`, with `w` = ε or √ε.
fn atom_field_ratio(profile: &ModeProfile, pos: (f64, f64, f64), weight: CouplingWeight) -> f64 {
    let Some(node) = profile.nearest_node(pos.0, pos.1, pos.2) else {
        return 0.0;
    };
    let (eps, e) = profile.at(node);
    let max = profile
        .eps
        .iter()
        .zip(&profile.intensity)
        .map(|(ep, i)| match weight {
            CouplingWeight::Epsilon => ep * i.sqrt(),
            CouplingWeight::SqrtEpsilon => ep.sqrt() * i.sqrt(),
        })
        .fold(0.0, f64::max);
    field_ratio(eps, e, max, weight)
}

const MODE_FILE: &str = "mode.txt";

fn write_mode_file(dir: &Path, frequency: f64) -> Result<(), PipelineError> {
    fs::write(dir.join(MODE_FILE), format!("frequency {frequency:?}\n"))?;
    Ok(())
}

fn read_mode_file(dir: &Path) -> Result<f64, PipelineError> {
    let text = fs::read_to_string(dir.join(MODE_FILE))?;
    text.lines()
        .find_map(|l| l.strip_prefix("frequency ").and_then(|v| v.trim().parse().ok()))
        .ok_or_else(|| PipelineError::Io(format!("{MODE_FILE} has no frequency line")))
}

/// Recomputes the far-field Q from a checkpoint written by [`simulate`]: the
/// dumped fields are stepped for the configured measurement window while the
/// near-field plane and stored energy are recorded.
pub fn reanalyze_farfield(
    cfg: &RunConfig,
    dir: &Path,
    keep_pattern: bool,
) -> Result<(FarFieldSummary, Option<RadiationPattern>), PipelineError> {
    let st = setup(cfg)?;
    let spec = cfg.structure.crystal;
    let layout = st.grid.layout;
    let f0 = read_mode_file(dir)?;
    let mut sim = Simulation::<f64>::new(&st.grid, st.bounds, st.dt)?;
    read_checkpoint(dir, &mut sim.state)?;
    sim.set_reference_amplitude(sim.state.max_abs());
    let monitors = Monitors::new(&layout, 0.5 * spec.thickness(), 1.0 / f0)?;
    let region = monitors.energy_region();
    let kz = (0.5 * spec.thickness() + cfg.analysis.farfield_gap_cells).ceil() as usize + layout.origin[2];
    let mut rec = PlaneRecorder::new(&layout, kz, f0, st.parity)?;
    let period = 1.0 / (f0 * st.dt);
    let stride = ((period / 16.0).floor() as usize).max(1);
    let measure = (cfg.solver.measure_periods * period).round() as usize;
    let mut energies = Vec::new();
    let mut n = 0usize;
    advance(&mut sim, measure, |sim| {
        if n % stride == 0 {
            energies.push(sim.energy(&region));
        }
        rec.record(&sim.state);
        n += 1;
    })?;
    let energy = energies.iter().sum::<f64>() / energies.len() as f64;
    farfield_q(&rec, energy, 2.0 * PI * f0, keep_pattern)
}

/// `ε|E|²` on the node plane nearest `position` (structure coordinates)
/// normal to `axis`, over the simulated octant. Returns the plane shape as a
/// three-axis size with a 1 along `axis`.
pub fn intensity_slice(profile: &ModeProfile, axis: usize, position: f64) -> ([usize; 3], Vec<f64>) {
    let l = &profile.layout;
    let idx = ((position.abs() + l.origin[axis] as f64).round() as usize).min(l.dims[axis] - 1);
    let mut dims = l.dims;
    dims[axis] = 1;
    let mut out = Vec::with_capacity(dims.iter().product());
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let mut n = [i, j, k];
                n[axis] = idx;
                let p = l.index(n[0], n[1], n[2]);
                out.push(profile.eps[p] * profile.intensity[p]);
            }
        }
    }
    (dims, out)
}

/// Writes a report CSV: the header and one row.
pub fn write_report_csv<W: Write>(mut w: W, reports: &[ModeReport]) -> io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
