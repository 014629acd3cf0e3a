//! Guided-mode band diagrams of the unperturbed perforated slab.
//!
//! One primitive cell is simulated with Bloch-periodic side faces, an even
//! mirror at the slab mid-plane (TE-like modes only) and an absorber above.
//! The y period is sheared by half a lattice constant, so the cell is the
//! hexagonal primitive cell laid out on a rectangle. Frequencies are
//! reported as `a/λ`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{extract_resonances_with, AnalysisError, FitOptions};
use crate::fdtd::{
    AbsorberProfile, Boundary, BoundarySpec, Component, GaussianPulse, Simulation, SolverError,
    DEFAULT_COURANT,
};
use crate::geometry::{rasterize, GeometryError, GridLayout, Hole, HoleSet, PhotonicCrystalSpec};

#[derive(Debug, Error)]
pub enum BandError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid band options: {0}")]
    InvalidOptions(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BandOptions {
    /// Points per edge of the Γ–X–J–Γ path.
    pub points_per_edge: usize,
    pub bands_per_k: usize,
    /// Air between the slab surface and the absorber, in lattice constants.
    pub air_above: f64,
    pub absorber: usize,
    pub steps: usize,
    /// Upper end of the searched range in `a/λ`.
    pub max_frequency: f64,
    pub seed: u64,
    /// Remove the holes and compute the folded bands of the bare slab.
    pub unpatterned: bool,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions {
            points_per_edge: 8,
            bands_per_k: 4,
            air_above: 1.5,
            absorber: 12,
            steps: 8000,
            max_frequency: 0.6,
            seed: 1,
            unpatterned: false,
        }
    }
}

/// Rectangular grid cell with lattice vectors `(nx, 0)` and `(shift, ny)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCell {
    pub nx: usize,
    pub ny: usize,
    pub shift: i64,
    pub holes: HoleSet,
    pub spec: PhotonicCrystalSpec,
}

impl UnitCell {
    /// Primitive cell of the hexagonal lattice. The second lattice vector is
    /// rounded to `(a/2, round(a·√3/2))` cells.
    pub fn hexagonal(spec: &PhotonicCrystalSpec) -> Result<Self, BandError> {
        spec.validate()?;
        if spec.a % 2 != 0 {
            return Err(BandError::InvalidOptions(
                "the hexagonal cell needs an even lattice constant".into(),
            ));
        }
        let nx = spec.a;
        let ny = (spec.a as f64 * 3f64.sqrt() / 2.0).round() as usize;
        let shift = (spec.a / 2) as i64;
        let mut holes = Vec::new();
        // every lattice image that can reach the cell
        for m in -2i64..=2 {
            for n in -2i64..=2 {
                let x = (m * nx as i64 + n * shift) as f64 + 0.5 * nx as f64;
                let y = (n * ny as i64) as f64 + 0.5 * ny as f64;
                holes.push(Hole::circle((x, y), spec.radius()));
            }
        }
        Ok(UnitCell {
            nx,
            ny,
            shift,
            holes: HoleSet { holes },
            spec: *spec,
        })
    }

    /// Rectangular cell of an unpatterned slab.
    pub fn unpatterned(spec: &PhotonicCrystalSpec, nx: usize, ny: usize) -> Self {
        UnitCell {
            nx,
            ny,
            shift: 0,
            holes: HoleSet { holes: vec![] },
            spec: *spec,
        }
    }

    /// Reciprocal lattice vectors in radians per cell.
    pub fn reciprocal(&self) -> [[f64; 2]; 2] {
        let (nx, ny, s) = (self.nx as f64, self.ny as f64, self.shift as f64);
        // b_i · a_j = 2π δ_ij with a1 = (nx, 0), a2 = (s, ny)
        [
            [2.0 * PI / nx, -2.0 * PI * s / (nx * ny)],
            [0.0, 2.0 * PI / ny],
        ]
    }

    /// Wavevector in radians per cell for reduced coordinates `(u, v)`.
    pub fn wavevector(&self, frac: [f64; 2]) -> [f64; 2] {
        let b = self.reciprocal();
        [
            frac[0] * b[0][0] + frac[1] * b[1][0],
            frac[0] * b[0][1] + frac[1] * b[1][1],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    /// Reduced coordinates in the reciprocal basis.
    pub frac: [f64; 2],
    pub arclength: f64,
    pub label: Option<String>,
}

/// Γ–X–J–Γ in reduced coordinates, `per_edge` points per edge, ending at Γ.
pub fn hexagonal_path(cell: &UnitCell, per_edge: usize) -> Vec<KPoint> {
    let vertices = [("G", [0.0, 0.0]), ("X", [0.0, 0.5]), ("J", [1.0 / 3.0, 2.0 / 3.0]), ("G", [0.0, 0.0])];
    let per_edge = per_edge.max(1);
    let mut out = Vec::new();
    let mut s = 0.0;
    for e in 0..3 {
        let (la, a) = vertices[e];
        let (_, b) = vertices[e + 1];
        let ka = cell.wavevector(a);
        let kb = cell.wavevector(b);
        let len = ((kb[0] - ka[0]).powi(2) + (kb[1] - ka[1]).powi(2)).sqrt();
        for m in 0..per_edge {
            let t = m as f64 / per_edge as f64;
            out.push(KPoint {
                frac: [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
                arclength: s + t * len,
                label: (m == 0).then(|| la.to_string()),
            });
        }
        s += len;
    }
    out.push(KPoint {
        frac: [0.0, 0.0],
        arclength: s,
        label: Some("G".into()),
    });
    out
}

/// Guided frequencies at one k-point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSample {
    pub k: KPoint,
    /// Ascending `a/λ` of modes below the light line that are confined
    /// within the simulated air region.
    pub frequencies: Vec<f64>,
    /// Light line `a/λ = |k|a/2π` at this k.
    pub light_line: f64,
    /// Adjacent bands could not be separated in the run time, or nothing
    /// was found.
    pub unresolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandDiagram {
    pub samples: Vec<BandSample>,
    /// `(lower, upper)` in `a/λ`, when the gap is open along the path.
    pub gap: Option<(f64, f64)>,
}

/// Computes the band diagram of `spec` along `path`.
pub fn compute_bands(
    spec: &PhotonicCrystalSpec,
    path: &[KPoint],
    opts: &BandOptions,
) -> Result<BandDiagram, BandError> {
    let mut cell = UnitCell::hexagonal(spec)?;
    if opts.unpatterned {
        cell.holes.holes.clear();
    }
    let samples = path
        .iter()
        .map(|k| guided_modes(&cell, k, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut d = BandDiagram { samples, gap: None };
    d.gap = gap_edges(&d);
    Ok(d)
}

/// Band gap between the first and second guided bands over the whole path:
/// `(max band 1, min band 2)`, or `None` when they overlap. The Γ point,
/// where nothing lies below the light line, does not constrain the edges.
pub fn gap_edges(d: &BandDiagram) -> Option<(f64, f64)> {
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for s in &d.samples {
        let f: Vec<f64> = s.frequencies.iter().copied().filter(|f| *f > 0.0).collect();
        if let Some(f1) = f.first() {
            lower = lower.max(*f1);
        }
        if let Some(f2) = f.get(1) {
            upper = upper.min(*f2);
        }
    }
    (lower.is_finite() && upper.is_finite() && upper > lower).then_some((lower, upper))
}

/// Simulates one k-point of `cell` and returns its guided TE-like modes.
pub fn guided_modes(cell: &UnitCell, k: &KPoint, opts: &BandOptions) -> Result<BandSample, BandError> {
    if opts.steps < 512 || opts.bands_per_k == 0 {
        return Err(BandError::InvalidOptions(
            "need at least 512 steps and one band per k".into(),
        ));
    }
    let spec = &cell.spec;
    let a = spec.a as f64;
    let kv = cell.wavevector(k.frac);
    let kabs = (kv[0] * kv[0] + kv[1] * kv[1]).sqrt();
    let light_line = kabs * a / (2.0 * PI);
    if kabs < 1e-12 {
        // nothing is guided at Γ; the lowest band starts at zero frequency
        return Ok(BandSample {
            k: k.clone(),
            frequencies: vec![0.0],
            light_line: 0.0,
            unresolved: false,
        });
    }

    let air = opts.air_above * a;
    let nz = (0.5 * spec.thickness() + air).ceil() as usize + opts.absorber + 1;
    let layout = GridLayout {
        dims: [cell.nx, cell.ny, nz],
        origin: [0, 0, 0],
        mirror: [false, false, true],
        absorber: [[0, 0], [0, 0], [0, opts.absorber]],
    };
    let grid = rasterize(&cell.holes, spec, &layout, 4);
    let phase = |f: f64| Complex64::from_polar(1.0, 2.0 * PI * f);
    let bx = Boundary::BlochPeriodic {
        phase: phase(k.frac[0]),
        shift: 0,
    };
    let by = Boundary::BlochPeriodic {
        phase: phase(k.frac[1]),
        shift: cell.shift,
    };
    let bounds = BoundarySpec {
        faces: [
            [bx; 2],
            [by; 2],
            [
                Boundary::EvenMirror,
                Boundary::Absorbing(AbsorberProfile::with_thickness(opts.absorber)),
            ],
        ],
    };
    let mut sim = Simulation::<Complex64>::new(&grid, bounds, DEFAULT_COURANT)?;
    let dt = sim.dt();

    // broadband in-plane dipoles and probes at random points inside the slab
    let f_lo = 0.02 / a;
    let f_hi = opts.max_frequency / a;
    let pulse = GaussianPulse::with_bandwidth(0.5 * (f_lo + f_hi), 0.3 * (f_hi - f_lo), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let kmax = ((0.5 * spec.thickness()).floor() as usize).max(1);
    let random_node = |rng: &mut ChaCha8Rng| [rng.gen_range(0..cell.nx), rng.gen_range(0..cell.ny), rng.gen_range(0..kmax)];
    let sources: Vec<(Component, [usize; 3], Complex64)> = (0..4)
        .map(|n| {
            let c = if n % 2 == 0 { Component::Ex } else { Component::Ey };
            (c, random_node(&mut rng), Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)))
        })
        .collect();
    let probes: Vec<(Component, [usize; 3])> = (0..6)
        .map(|n| {
            let c = [Component::Ex, Component::Ey, Component::Hz][n % 3];
            (c, random_node(&mut rng))
        })
        .collect();

    let mut signal = Vec::with_capacity(opts.steps);
    let mut currents = Vec::with_capacity(sources.len());
    let record_start = (pulse.end_time() / dt).ceil() as usize;
    for n in 0..record_start + opts.steps {
        let t = (n as f64 + 0.5) * dt;
        currents.clear();
        if t <= pulse.end_time() {
            let v = pulse.value(t);
            currents.extend(sources.iter().map(|(c, node, amp)| (*c, *node, amp * v)));
        }
        sim.step_with_currents(&currents);
        if n % 64 == 0 {
            if t <= pulse.end_time() {
                let m = sim.state.max_abs();
                sim.set_reference_amplitude(m);
            }
            sim.check_stability()?;
        }
        if n >= record_start {
            let s: Complex64 = probes.iter().map(|(c, [i, j, kk])| sim.state.get(*c, *i, *j, *kk)).sum();
            signal.push(s.re + s.im);
        }
    }
    sim.check_stability()?;

    let fit = FitOptions {
        min_relative_amplitude: 1e-3,
        ..FitOptions::default()
    };
    let found = match extract_resonances_with(&signal, dt, f_lo, f_hi, &fit) {
        Ok(r) => r,
        Err(AnalysisError::NoPeakFound) => vec![],
        Err(e) => return Err(BandError::InvalidOptions(e.to_string())),
    };
    let record_time = opts.steps as f64 * dt;
    let mut freqs: Vec<f64> = found
        .iter()
        // guided modes do not radiate; leaky ones decay within the record
        .filter(|r| r.decay * record_time < 1.0)
        // a mode must also decay by 1/e within the simulated air; modes
        // closer to the light line are not separable from the truncated
        // radiation continuum
        .filter(|r| {
            let w = 2.0 * PI * r.frequency;
            kabs > w && (kabs * kabs - w * w).sqrt() * air >= 1.0
        })
        .map(|r| r.frequency * a)
        .collect();
    freqs.sort_by(f64::total_cmp);
    let resolution = a / record_time;
    let crowded = freqs.windows(2).any(|w| w[1] - w[0] < resolution);
    freqs.truncate(opts.bands_per_k);
    Ok(BandSample {
        k: k.clone(),
        unresolved: freqs.is_empty() || crowded,
        frequencies: freqs,
        light_line,
    })
}

/// CSV with columns `arclength, band, a_over_lambda, below_light_line`,
/// followed by a gap summary comment line.
pub fn write_bands_csv<W: Write>(mut w: W, d: &BandDiagram) -> io::Result<()> {
    writeln!(w, "arclength,band,a_over_lambda,below_light_line")?;
    for s in &d.samples {
        for (b, f) in s.frequencies.iter().enumerate() {
            writeln!(w, "{:.6},{},{:.6},{}", s.k.arclength, b, f, *f <= s.light_line)?;
        }
    }
    match d.gap {
        Some((lo, hi)) => writeln!(w, "# gap {lo:.6} {hi:.6}"),
        None => writeln!(w, "# gap none"),
    }
}

/// Fundamental even TE mode of a symmetric slab with index `n` and
/// thickness `d` (cells) at in-plane wavevector `beta` (rad/cell): the
/// frequency solving `tan(κd/2) = γ/κ`, in cycles per time unit.
pub fn slab_te0_frequency(n: f64, d: f64, beta: f64) -> f64 {
    let residual = |w: f64| {
        let kappa = (n * n * w * w - beta * beta).sqrt();
        let gamma = (beta * beta - w * w).sqrt();
        (kappa * d / 2.0).tan() - gamma / kappa
    };
    // the root lies between the slab light line (κ = 0) and the lower of
    // the air light line and the first tangent pole
    let mut lo = beta / n * (1.0 + 1e-12);
    let pole = ((PI / d).powi(2) + beta * beta).sqrt() / n;
    let mut hi = beta.min(pole) * (1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi) / (2.0 * PI)
}
