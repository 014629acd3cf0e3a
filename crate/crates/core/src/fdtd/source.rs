use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::boundary::Parity;
use super::solver::Simulation;
use super::state::Component;
use super::{FieldScalar, SolverError};

/// Gaussian-envelope sinusoid `A·exp(−(t−t₀)²/2σ²)·sin(2πf(t−t₀))` with
/// `t₀ = 6σ`. Frequencies are in cycles per unit time (c = 1, cell = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub frequency: f64,
    /// Envelope standard deviation in time units.
    pub width: f64,
    pub amplitude: f64,
}

impl GaussianPulse {
    /// Pulse whose spectrum has standard deviation `bandwidth` around `frequency`.
    pub fn with_bandwidth(frequency: f64, bandwidth: f64, amplitude: f64) -> Self {
        GaussianPulse {
            frequency,
            width: 1.0 / (2.0 * PI * bandwidth),
            amplitude,
        }
    }

    pub fn delay(&self) -> f64 {
        6.0 * self.width
    }

    /// Time after which the pulse is negligible.
    pub fn end_time(&self) -> f64 {
        12.0 * self.width
    }

    pub fn value(&self, t: f64) -> f64 {
        let s = t - self.delay();
        if s.abs() > 6.0 * self.width {
            return 0.0;
        }
        self.amplitude * (-0.5 * (s / self.width).powi(2)).exp() * (2.0 * PI * self.frequency * s).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    /// In-plane electric field seeded at t = 0: a Gaussian of width `width`
    /// around `center` (structure coordinates, slab mid-plane), even in z.
    /// A parity makes the pattern symmetric (`Even`) or antisymmetric
    /// (`Odd`) in tangential E across the corresponding mirror plane;
    /// `None` leaves that axis unconstrained.
    InitialField {
        parity_x: Option<Parity>,
        parity_y: Option<Parity>,
        center: (f64, f64),
        width: f64,
    },
    /// Point current at the E sample nearest `location` (structure coordinates).
    PointDipole {
        location: [f64; 3],
        polarization: Component,
        pulse: GaussianPulse,
    },
}

/// Initial-field seed that excites only modes with the given mirror parities.
pub fn excite_dipole_mode(parity_x: Parity, parity_y: Parity, width: f64) -> SourceSpec {
    SourceSpec::InitialField {
        parity_x: Some(parity_x),
        parity_y: Some(parity_y),
        center: (0.0, 0.0),
        width,
    }
}

impl SourceSpec {
    /// Grid sample index of a point dipole, checked against the absorbers.
    pub fn dipole_node(&self, sim_layout: &crate::geometry::GridLayout) -> Result<Option<[usize; 3]>, SolverError> {
        let SourceSpec::PointDipole { location, polarization, .. } = self else {
            return Ok(None);
        };
        if !polarization.is_electric() {
            return Err(SolverError::InvalidSource("dipole polarization must be electric".into()));
        }
        let mut node = [0usize; 3];
        for ax in 0..3 {
            let g = location[ax] + sim_layout.origin[ax] as f64 - polarization.offset(ax);
            let idx = g.round();
            let (lo, hi) = sim_layout.interior(ax);
            if !(idx >= lo as f64 && idx < hi as f64) {
                return Err(SolverError::InvalidSource(format!(
                    "dipole location {location:?} is outside the non-absorbing region"
                )));
            }
            node[ax] = idx as usize;
        }
        Ok(Some(node))
    }

    /// Writes an initial-field pattern into `sim`. Point dipoles are no-ops here.
    pub fn apply_initial<T: FieldScalar>(&self, sim: &mut Simulation<T>) -> Result<(), SolverError> {
        let SourceSpec::InitialField {
            parity_x,
            parity_y,
            center,
            width,
        } = *self
        else {
            return Ok(());
        };
        if !(width > 0.0) {
            return Err(SolverError::InvalidSource("seed width must be positive".into()));
        }
        let layout = *sim.layout();
        let [nx, ny, nz] = layout.dims;
        let parities = [parity_x, parity_y];
        for c in [Component::Ex, Component::Ey] {
            // symmetry of this component in x and y
            let odd = [0, 1].map(|ax| match parities[ax] {
                None => false,
                Some(p) => (p == Parity::Odd) != (c.axis() == ax),
            });
            for i in 0..nx {
                let x = layout.coord(0, i as f64 + c.offset(0));
                for j in 0..ny {
                    let y = layout.coord(1, j as f64 + c.offset(1));
                    let dx = x - center.0;
                    let dy = y - center.1;
                    let mut g = (-(dx * dx + dy * dy) / (2.0 * width * width)).exp();
                    if g < 1e-12 {
                        continue;
                    }
                    if odd[0] {
                        g *= dx / width;
                    }
                    if odd[1] {
                        g *= dy / width;
                    }
                    for k in 0..nz {
                        let z = layout.coord(2, k as f64 + c.offset(2));
                        let v = g * (-(z * z) / (2.0 * width * width)).exp();
                        sim.state.set(c, i, j, k, T::from_real(v));
                    }
                }
            }
        }
        let m = sim.state.max_abs();
        sim.set_reference_amplitude(m);
        Ok(())
    }
}
