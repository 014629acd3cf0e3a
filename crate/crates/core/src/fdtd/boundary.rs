use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::geometry::GridLayout;

/// Mirror parity of the tangential electric field across a symmetry plane.
/// `Even` is a magnetic wall (tangential E symmetric), `Odd` an electric wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Graded absorbing layer (convolutional PML, polynomial conductivity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorberProfile {
    pub thickness: usize,
    pub order: f64,
    pub sigma_max: f64,
    pub alpha_max: f64,
}

impl AbsorberProfile {
    pub fn with_thickness(thickness: usize) -> Self {
        let order = 4.0;
        AbsorberProfile {
            thickness,
            order,
            sigma_max: 0.8 * (order + 1.0),
            alpha_max: 0.02,
        }
    }
}

impl Default for AbsorberProfile {
    fn default() -> Self {
        Self::with_thickness(10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Absorbing(AbsorberProfile),
    /// Symmetry plane on node 0 (low faces only).
    EvenMirror,
    OddMirror,
    /// Perfect electric conductor on the face node plane.
    Pec,
    /// `F(r + L) = phase · F(r)`. On the y faces the lattice vector may be
    /// sheared by `shift` cells along x (hexagonal cells).
    BlochPeriodic { phase: Complex64, shift: i64 },
}

impl Boundary {
    pub fn absorber_thickness(&self) -> usize {
        match self {
            Boundary::Absorbing(p) => p.thickness,
            _ => 0,
        }
    }

    pub fn mirror_parity(&self) -> Option<Parity> {
        match self {
            Boundary::EvenMirror => Some(Parity::Even),
            Boundary::OddMirror => Some(Parity::Odd),
            _ => None,
        }
    }
}

/// Boundary condition on the (low, high) face of x, y and z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    pub faces: [[Boundary; 2]; 3],
}

impl BoundarySpec {
    /// Absorbers where the layout has them, mirrors of the given parity on
    /// mirrored axes.
    pub fn for_layout(layout: &GridLayout, parity: [Parity; 3]) -> Self {
        let mut faces = [[Boundary::Pec; 2]; 3];
        for ax in 0..3 {
            for side in 0..2 {
                let t = layout.absorber[ax][side];
                faces[ax][side] = if side == 0 && layout.mirror[ax] {
                    match parity[ax] {
                        Parity::Even => Boundary::EvenMirror,
                        Parity::Odd => Boundary::OddMirror,
                    }
                } else if t > 0 {
                    Boundary::Absorbing(AbsorberProfile::with_thickness(t))
                } else {
                    Boundary::Pec
                };
            }
        }
        BoundarySpec { faces }
    }

    pub fn validate(&self, layout: &GridLayout, complex_fields: bool) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidBoundary(m));
        let names = ["x", "y", "z"];
        for ax in 0..3 {
            let [lo, hi] = self.faces[ax];
            let n = names[ax];
            if hi.mirror_parity().is_some() {
                return bad(format!("mirror boundaries are only allowed on the low {n} face"));
            }
            if lo.mirror_parity().is_some() != layout.mirror[ax] {
                return bad(format!(
                    "low {n} face mirror does not match the grid layout"
                ));
            }
            for (side, f) in [lo, hi].iter().enumerate() {
                if f.absorber_thickness() != layout.absorber[ax][side] {
                    return bad(format!(
                        "absorber thickness on {n} face {side} does not match the grid layout"
                    ));
                }
                if 2 * f.absorber_thickness() >= layout.dims[ax] && f.absorber_thickness() > 0 {
                    return bad(format!("absorbing layers fill the whole {n} extent"));
                }
            }
            match (lo, hi) {
                (
                    Boundary::BlochPeriodic { phase: p0, shift: s0 },
                    Boundary::BlochPeriodic { phase: p1, shift: s1 },
                ) => {
                    if p0 != p1 || s0 != s1 {
                        return bad(format!("Bloch phases on the {n} faces do not match"));
                    }
                    if (p0.norm() - 1.0).abs() > 1e-9 {
                        return bad(format!("Bloch phase on {n} must have unit modulus"));
                    }
                    if !complex_fields && p0.im.abs() > 1e-12 {
                        return bad(format!(
                            "Bloch phase on {n} is complex; use complex fields"
                        ));
                    }
                    if s0 != 0 && ax != 1 {
                        return bad("only the y faces may carry a sheared Bloch shift".into());
                    }
                    if s0 != 0
                        && !matches!(self.faces[0][0], Boundary::BlochPeriodic { .. })
                    {
                        return bad("a sheared y period requires Bloch x faces".into());
                    }
                }
                (Boundary::BlochPeriodic { .. }, _) | (_, Boundary::BlochPeriodic { .. }) => {
                    return bad(format!(
                        "Bloch boundaries must be applied to both {n} faces"
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }
}
