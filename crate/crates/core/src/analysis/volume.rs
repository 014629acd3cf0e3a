use num_complex::Complex64;

use crate::geometry::{GridLayout, PermittivityGrid};

/// Mode intensity `|E|²` and permittivity at the grid nodes, with staggered
/// components averaged onto the nodes. Covers the simulated part of the
/// structure; mirrored axes are unfolded by the node weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub layout: GridLayout,
    pub eps: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl ModeProfile {
    /// Builds the profile from unpadded complex E arrays (row-major, z fastest).
    pub fn from_phasors(grid: &PermittivityGrid, e: [&[Complex64]; 3]) -> Self {
        let layout = grid.layout;
        let [nx, ny, nz] = layout.dims;
        let mut intensity = vec![0.0; layout.len()];
        let strides = [ny * nz, nz, 1];
        for (ax, comp) in e.iter().enumerate() {
            assert_eq!(comp.len(), layout.len(), "phasor array size mismatch");
            for i in 0..nx {
                for j in 0..ny {
                    for k in 0..nz {
                        let p = layout.index(i, j, k);
                        let idx = [i, j, k][ax];
                        let here = comp[p].norm_sqr();
                        // the sample below a mirror plane is the image of this one
                        let below = if idx == 0 { here } else { comp[p - strides[ax]].norm_sqr() };
                        intensity[p] += 0.5 * (here + below);
                    }
                }
            }
        }
        ModeProfile {
            layout,
            eps: grid.eps.clone(),
            intensity,
        }
    }

    /// Profile from a given node intensity `|E|²`.
    pub fn from_intensity(grid: &PermittivityGrid, intensity: Vec<f64>) -> Self {
        assert_eq!(intensity.len(), grid.layout.len());
        ModeProfile {
            layout: grid.layout,
            eps: grid.eps.clone(),
            intensity,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.intensity.iter_mut().for_each(|v| *v *= factor * factor);
        out
    }

    /// Largest `ε|E|²`.
    pub fn max_energy_density(&self) -> f64 {
        self.eps
            .iter()
            .zip(&self.intensity)
            .map(|(e, i)| e * i)
            .fold(0.0, f64::max)
    }

    /// Node nearest to structure coordinates `(x, y, z)`, if inside the grid.
    pub fn nearest_node(&self, x: f64, y: f64, z: f64) -> Option<[usize; 3]> {
        let mut out = [0; 3];
        for (ax, c) in [x, y, z].into_iter().enumerate() {
            let g = (c + self.layout.origin[ax] as f64).round();
            if g < 0.0 || g >= self.layout.dims[ax] as f64 {
                return None;
            }
            out[ax] = g as usize;
        }
        Some(out)
    }

    /// `(ε, |E|)` at a node.
    pub fn at(&self, node: [usize; 3]) -> (f64, f64) {
        let p = self.layout.index(node[0], node[1], node[2]);
        (self.eps[p], self.intensity[p].sqrt())
    }
}

/// `∫ε|E|² dV / max(ε|E|²)` over the full (unfolded) structure, in cells³.
pub fn mode_volume(profile: &ModeProfile) -> f64 {
    let l = &profile.layout;
    let [nx, ny, nz] = l.dims;
    let max = profile.max_energy_density();
    if max == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..nx {
        let wi = l.node_weight(0, i);
        for j in 0..ny {
            let wij = wi * l.node_weight(1, j);
            for k in 0..nz {
                let p = l.index(i, j, k);
                total += wij * l.node_weight(2, k) * profile.eps[p] * profile.intensity[p];
            }
        }
    }
    total * f64::from(1u32 << l.mirror_count()) / max
}

/// Converts a volume in cells³ to units of `(λ/2)³`, with `λ = a/(a/λ)` cells.
pub fn in_half_wavelength_cubes(volume_cells: f64, a_cells: f64, a_over_lambda: f64) -> f64 {
    let half = 0.5 * a_cells / a_over_lambda;
    volume_cells / half.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(mirror: bool) -> GridLayout {
        GridLayout {
            dims: [10, 10, 10],
            origin: if mirror { [0; 3] } else { [5; 3] },
            mirror: [mirror; 3],
            absorber: [[0; 2]; 3],
        }
    }

    #[test]
    fn uniform_box_volume() {
        let l = layout(false);
        let grid = PermittivityGrid::uniform(l, 4.0);
        let mut intensity = vec![0.0; l.len()];
        for i in 2..6 {
            for j in 3..6 {
                for k in 1..3 {
                    intensity[l.index(i, j, k)] = 2.0;
                }
            }
        }
        let p = ModeProfile::from_intensity(&grid, intensity);
        assert_eq!(mode_volume(&p), 24.0);
    }

    #[test]
    fn mirrored_box_unfolds() {
        // nodes 0..3 along each mirrored axis cover −2.5..2.5 with half weight on 0
        let l = layout(true);
        let grid = PermittivityGrid::uniform(l, 1.0);
        let mut intensity = vec![0.0; l.len()];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    intensity[l.index(i, j, k)] = 1.0;
                }
            }
        }
        let p = ModeProfile::from_intensity(&grid, intensity);
        assert_eq!(mode_volume(&p), 125.0);
    }

    #[test]
    fn phasors_average_onto_nodes() {
        let l = layout(false);
        let grid = PermittivityGrid::uniform(l, 1.0);
        let mut ex = vec![Complex64::new(0.0, 0.0); l.len()];
        ex[l.index(4, 5, 5)] = Complex64::new(0.0, 2.0);
        let zero = vec![Complex64::new(0.0, 0.0); l.len()];
        let p = ModeProfile::from_phasors(&grid, [&ex, &zero, &zero]);
        assert_eq!(p.at([4, 5, 5]).1, 2f64.sqrt());
        assert_eq!(p.at([5, 5, 5]).1, 2f64.sqrt());
        assert_eq!(p.at([6, 5, 5]).1, 0.0);
    }
}
