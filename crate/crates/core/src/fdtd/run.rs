use std::io::{self, Write};

use super::solver::{Region, Simulation};
use super::source::SourceSpec;
use super::state::Component;
use super::{FieldScalar, SolverError};

/// Steps between divergence checks.
const CHECK_INTERVAL: usize = 64;

/// Field component sampled at one grid node every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointProbe {
    pub component: Component,
    pub node: [usize; 3],
}

/// Poynting flux through a node plane, counted positive along `outward`
/// (`+1.0` or `−1.0` times the axis direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPlane {
    pub axis: usize,
    pub index: usize,
    pub region: Region,
    pub outward: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProbeRecords {
    pub dt: f64,
    pub first_step: usize,
    /// Real part of each point probe, one entry per step.
    pub points: Vec<Vec<f64>>,
    /// Flux through each plane, one entry per step.
    pub flux: Vec<Vec<f64>>,
}

impl ProbeRecords {
    pub fn len(&self) -> usize {
        self.points
            .first()
            .or(self.flux.first())
            .map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Time-integrated flux through each plane (trapezoid rule).
    pub fn accumulated_flux(&self) -> Vec<f64> {
        self.flux
            .iter()
            .map(|f| {
                let s: f64 = f.iter().sum();
                let ends = f.first().copied().unwrap_or(0.0) + f.last().copied().unwrap_or(0.0);
                (s - 0.5 * ends) * self.dt
            })
            .collect()
    }

    /// CSV with columns `step, p0.., f0..`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "step")?;
        for n in 0..self.points.len() {
            write!(w, ",probe{n}")?;
        }
        for n in 0..self.flux.len() {
            write!(w, ",flux{n}")?;
        }
        writeln!(w)?;
        for s in 0..self.len() {
            write!(w, "{}", self.first_step + s + 1)?;
            for p in self.points.iter().chain(&self.flux) {
                write!(w, ",{:e}", p[s])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_probe_node(layout: &crate::geometry::GridLayout, node: [usize; 3]) -> Result<(), SolverError> {
    for ax in 0..3 {
        let (lo, hi) = layout.interior(ax);
        if node[ax] < lo || node[ax] >= hi {
            return Err(SolverError::InvalidProbe(format!(
                "node {node:?} is outside the non-absorbing region"
            )));
        }
    }
    Ok(())
}

/// Steps `sim` with `source`, sampling point probes and flux planes after
/// every step.
pub fn run<T: FieldScalar>(
    sim: &mut Simulation<T>,
    source: &SourceSpec,
    points: &[PointProbe],
    planes: &[FluxPlane],
    steps: usize,
) -> Result<ProbeRecords, SolverError> {
    let layout = *sim.layout();
    for p in points {
        check_probe_node(&layout, p.node)?;
    }
    for f in planes {
        let mut node = f.region.lo;
        node[f.axis] = f.index;
        check_probe_node(&layout, node)?;
    }
    let mut rec = ProbeRecords {
        dt: sim.dt(),
        first_step: sim.state.step,
        points: vec![Vec::with_capacity(steps); points.len()],
        flux: vec![Vec::with_capacity(steps); planes.len()],
    };
    run_with(sim, source, steps, |s| {
        for (r, p) in rec.points.iter_mut().zip(points) {
            r.push(s.state.get(p.component, p.node[0], p.node[1], p.node[2]).re());
        }
        for (r, f) in rec.flux.iter_mut().zip(planes) {
            r.push(f.outward * s.flux(f.axis, f.index, &f.region));
        }
    })?;
    Ok(rec)
}

/// Steps `sim` with `source` and calls `observe` after every step. Source
/// times are measured from the start of this call; an initial field is
/// written before the first step.
pub fn run_with<T: FieldScalar, F: FnMut(&Simulation<T>)>(
    sim: &mut Simulation<T>,
    source: &SourceSpec,
    steps: usize,
    mut observe: F,
) -> Result<(), SolverError> {
    source.apply_initial(sim)?;
    let node = source.dipole_node(sim.layout())?;
    let dt = sim.dt();
    let start = sim.state.step;
    let (pulse_end, polarization, pulse) = match source {
        SourceSpec::PointDipole {
            polarization, pulse, ..
        } => (pulse.end_time(), *polarization, Some(*pulse)),
        _ => (0.0, Component::Ex, None),
    };
    for n in 0..steps {
        let t = (n as f64 + 0.5) * dt;
        match (node, pulse) {
            (Some(node), Some(p)) if t <= pulse_end => {
                let j = T::from_real(p.value(t));
                sim.step_with_currents(&[(polarization, node, j)]);
            }
            _ => sim.step(),
        }
        if (sim.state.step - start) % CHECK_INTERVAL == 0 || n + 1 == steps {
            if t <= pulse_end {
                let m = sim.state.max_abs();
                sim.set_reference_amplitude(m);
            }
            sim.check_stability()?;
        }
        observe(sim);
    }
    Ok(())
}
