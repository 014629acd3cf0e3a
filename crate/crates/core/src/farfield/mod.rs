//! Radiated power of a cavity mode from tangential near fields on a plane
//! above the slab.
//!
//! Phasors use the `e^{+iωt}` time convention. The equivalent surface
//! currents on a plane with normal `ẑ` give radiation vectors
//! `N = (−F[H_y], F[H_x])` and `L = (F[E_y], −F[E_x])`, where
//! `F[f](k) = Σ f(x, y) e^{i(k_x x + k_y y)} ΔA` is evaluated only inside the
//! light cone. Units have ε₀ = μ₀ = c = 1, so the free-space impedance is 1.

mod recorder;
mod transform;

pub use recorder::{check_single_mode, PlaneRecorder};
pub use transform::{
    light_cone_fraction, q_from_radiated_power, radiated_power, radiation_vectors,
    write_pattern_csv, AngularGrid, RadiationPattern, RadiationVectors,
};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FarFieldError {
    #[error("secondary resonance at {frequency} has {ratio:.3} of the main amplitude")]
    MultiMode { frequency: f64, ratio: f64 },
    #[error("no oscillation found on the near-field plane")]
    NoSignal,
    #[error("invalid plane: {0}")]
    InvalidPlane(String),
}

/// One field component sampled on a regular grid: sample `(i, j)` sits at
/// `(x0 + i·step, y0 + j·step)`, stored with `j` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSamples {
    pub x0: f64,
    pub y0: f64,
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Complex64>,
}

impl PlaneSamples {
    pub fn zeros(x0: f64, y0: f64, step: f64, nx: usize, ny: usize) -> Self {
        PlaneSamples {
            x0,
            y0,
            step,
            nx,
            ny,
            values: vec![Complex64::new(0.0, 0.0); nx * ny],
        }
    }

    /// Samples a function of position.
    pub fn from_fn(
        x0: f64,
        y0: f64,
        step: f64,
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Self {
        let mut s = Self::zeros(x0, y0, step, nx, ny);
        for i in 0..nx {
            for j in 0..ny {
                s.values[i * ny + j] = f(x0 + i as f64 * step, y0 + j as f64 * step);
            }
        }
        s
    }

    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.step, self.y0 + j as f64 * self.step)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut s = self.clone();
        s.values.iter_mut().for_each(|v| *v *= c);
        s
    }
}

/// Tangential phasors on a plane at height `height` above the slab mid-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldPlane {
    pub height: f64,
    /// Free-space wavelength in the same length unit as the sample positions.
    pub wavelength: f64,
    pub ex: PlaneSamples,
    pub ey: PlaneSamples,
    pub hx: PlaneSamples,
    pub hy: PlaneSamples,
}

impl NearFieldPlane {
    pub fn scaled(&self, c: Complex64) -> Self {
        NearFieldPlane {
            height: self.height,
            wavelength: self.wavelength,
            ex: self.ex.scaled(c),
            ey: self.ey.scaled(c),
            hx: self.hx.scaled(c),
            hy: self.hy.scaled(c),
        }
    }
}
