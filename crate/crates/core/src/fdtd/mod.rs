//! Time-domain Maxwell solver on a staggered grid (c = 1, cell = 1).

mod boundary;
mod checkpoint;
mod run;
mod scalar;
mod solver;
mod source;
mod state;

pub use boundary::{AbsorberProfile, Boundary, BoundarySpec, Parity};
pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use run::{run, run_with, FluxPlane, PointProbe, ProbeRecords};
pub use scalar::FieldScalar;
pub use solver::{Region, Simulation, DEFAULT_COURANT, INSTABILITY_FACTOR};
pub use source::{excite_dipole_mode, GaussianPulse, SourceSpec};
pub use state::{Component, FieldState};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("time step {0} violates the stability bound 1/sqrt(3)")]
    Courant(f64),
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("invalid probe: {0}")]
    InvalidProbe(String),
    #[error("field diverged at step {step} (max amplitude {amplitude:e})")]
    Unstable { step: usize, amplitude: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
