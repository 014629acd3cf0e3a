//! Design toolkit for photonic-crystal slab microcavities: slab and defect
//! geometry, a 3D time-domain solver, resonance and loss analysis, cavity-QED
//! figures of merit, near-to-far-field radiation and band structure.

pub mod analysis;
pub mod bandstructure;
pub mod config;
pub mod farfield;
pub mod fdtd;
pub mod geometry;
pub mod pipeline;
