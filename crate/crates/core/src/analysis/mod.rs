//! Resonance extraction, loss splitting, mode volume and cavity-QED figures.

mod cqed;
mod qsplit;
mod resonance;
mod volume;

pub use resonance::{
    dominant_resonance, extract_resonances, extract_resonances_with, q_from_energy_decay,
    FitOptions, Resonance,
};

pub use cqed::{
    cqed_figures, critical_numbers, field_ratio, CouplingWeight, CqedFigures, CqedInput,
    CESIUM_D2_WAVELENGTH, CESIUM_GAMMA_PERP, SPEED_OF_LIGHT,
};
pub use qsplit::{split_q, QSplit};
pub use volume::{in_half_wavelength_cubes, mode_volume, ModeProfile};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no resonance found in the frequency window")]
    NoPeakFound,
    #[error("ill-conditioned fit: strongest peak at {frequency} lies at the window edge")]
    IllConditioned { frequency: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
