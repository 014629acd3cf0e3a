use serde::{Deserialize, Serialize};

use super::{GeometryError, HoleSet, PhotonicCrystalSpec};

/// Placement of the simulation grid in structure coordinates.
///
/// Nodes sit at integer coordinates `index - origin`. Arrays are stored
/// row-major with z fastest. A mirrored axis has its symmetry plane on node 0,
/// so the grid only covers the non-negative half along that axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridLayout {
    pub dims: [usize; 3],
    pub origin: [usize; 3],
    pub mirror: [bool; 3],
    /// Absorbing layer thickness on the (low, high) face of each axis.
    pub absorber: [[usize; 2]; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutOptions {
    /// Unpatterned margin between the outermost hole edge and the absorber.
    pub padding: f64,
    /// Air between the slab surface and the absorber.
    pub air_above: f64,
    pub absorber: usize,
    pub mirror: [bool; 3],
}

impl GridLayout {
    /// Grid that holds `holes` plus padding, air and absorbing layers.
    pub fn for_structure(
        holes: &HoleSet,
        spec: &PhotonicCrystalSpec,
        opts: &LayoutOptions,
    ) -> Result<Self, GeometryError> {
        let (ex, ey) = holes.extent();
        let half = [
            (ex + opts.padding).ceil() as usize,
            (ey + opts.padding).ceil() as usize,
            (0.5 * spec.thickness() + opts.air_above).ceil() as usize,
        ];
        let mut dims = [0; 3];
        let mut origin = [0; 3];
        let mut absorber = [[0; 2]; 3];
        for ax in 0..3 {
            let outer = half[ax] + opts.absorber;
            if opts.mirror[ax] {
                dims[ax] = outer + 1;
                absorber[ax] = [0, opts.absorber];
            } else {
                dims[ax] = 2 * outer + 1;
                origin[ax] = outer;
                absorber[ax] = [opts.absorber, opts.absorber];
            }
            if dims[ax] as f64 > super::MAX_EXTENT_CELLS {
                return Err(GeometryError::TooLarge {
                    extent: dims[ax] as f64,
                    limit: super::MAX_EXTENT_CELLS,
                });
            }
        }
        Ok(GridLayout {
            dims,
            origin,
            mirror: opts.mirror,
            absorber,
        })
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    /// Structure coordinate of a (possibly half-integer) grid position.
    #[inline]
    pub fn coord(&self, axis: usize, pos: f64) -> f64 {
        pos - self.origin[axis] as f64
    }

    /// Node index range `[lo, hi)` outside the absorbing layers.
    pub fn interior(&self, axis: usize) -> (usize, usize) {
        (
            self.absorber[axis][0],
            self.dims[axis] - self.absorber[axis][1],
        )
    }

    /// Number of mirrored axes; the full structure is `2^n` times larger.
    pub fn mirror_count(&self) -> u32 {
        self.mirror.iter().filter(|m| **m).count() as u32
    }

    /// Weight of node `idx` along `axis` when summing over the full
    /// structure: nodes on a mirror plane are shared by both halves.
    #[inline]
    pub fn node_weight(&self, axis: usize, idx: usize) -> f64 {
        if self.mirror[axis] && idx == 0 {
            0.5
        } else {
            1.0
        }
    }
}

/// Relative permittivity sampled per grid cell (cell centered on a node).
#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityGrid {
    pub layout: GridLayout,
    pub eps: Vec<f64>,
}

impl PermittivityGrid {
    pub fn uniform(layout: GridLayout, eps: f64) -> Self {
        PermittivityGrid {
            layout,
            eps: vec![eps; layout.len()],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.eps[self.layout.index(i, j, k)]
    }

    pub fn max(&self) -> f64 {
        self.eps.iter().copied().fold(1.0, f64::max)
    }
}

/// Rasterizes the slab and its holes. Each cell value is the mean
/// permittivity over an `s×s×s` subsample of the cell (`s = subsamples`).
pub fn rasterize(
    holes: &HoleSet,
    spec: &PhotonicCrystalSpec,
    layout: &GridLayout,
    subsamples: usize,
) -> PermittivityGrid {
    let s = subsamples.max(1);
    let [nx, ny, nz] = layout.dims;
    let eps_slab = spec.eps_slab();
    let offsets: Vec<f64> = (0..s).map(|m| (m as f64 + 0.5) / s as f64 - 0.5).collect();
    let per_sub = 1.0 / (s * s) as f64;

    // In-plane permittivity of the slab layer, averaged over subsamples.
    let mut plane = vec![eps_slab; nx * ny];
    for hole in holes.holes.iter().filter(|h| !h.is_empty()) {
        let eps_hole = hole.fill_index.map_or(1.0, |n| n * n);
        let delta = (eps_hole - eps_slab) * per_sub;
        let (cx, cy) = hole.center;
        let gx = cx + layout.origin[0] as f64;
        let gy = cy + layout.origin[1] as f64;
        if gx + hole.rx + 1.0 < 0.0 || gy + hole.ry + 1.0 < 0.0 {
            continue;
        }
        let i0 = (gx - hole.rx - 1.0).floor().max(0.0) as usize;
        let i1 = ((gx + hole.rx + 1.0).ceil().max(0.0) as usize).min(nx.saturating_sub(1));
        let j0 = (gy - hole.ry - 1.0).floor().max(0.0) as usize;
        let j1 = ((gy + hole.ry + 1.0).ceil().max(0.0) as usize).min(ny.saturating_sub(1));
        for i in i0..=i1 {
            let x = layout.coord(0, i as f64);
            for j in j0..=j1 {
                let y = layout.coord(1, j as f64);
                let mut inside = 0usize;
                for ox in &offsets {
                    for oy in &offsets {
                        if hole.contains(x + ox, y + oy) {
                            inside += 1;
                        }
                    }
                }
                if inside > 0 {
                    plane[i * ny + j] += delta * inside as f64;
                }
            }
        }
    }

    let half_d = 0.5 * spec.thickness();
    let slab_fraction: Vec<f64> = (0..nz)
        .map(|k| {
            let z = layout.coord(2, k as f64);
            offsets.iter().filter(|o| (z + **o).abs() <= half_d).count() as f64 / s as f64
        })
        .collect();

    let mut eps = vec![1.0; layout.len()];
    for (col, &p) in eps.chunks_exact_mut(nz).zip(&plane) {
        for (e, &f) in col.iter_mut().zip(&slab_fraction) {
            *e = f * p + (1.0 - f);
        }
    }
    PermittivityGrid {
        layout: *layout,
        eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_lattice, Hole};

    fn spec(a: usize, r: f64) -> PhotonicCrystalSpec {
        PhotonicCrystalSpec {
            a,
            r_over_a: r,
            d_over_a: 0.5,
            n_slab: 3.4,
            num_layers: 3,
        }
    }

    fn opts(mirror: [bool; 3]) -> LayoutOptions {
        LayoutOptions {
            padding: 4.0,
            air_above: 6.0,
            absorber: 3,
            mirror,
        }
    }

    #[test]
    fn no_holes_gives_plain_slab() {
        let s = spec(20, 0.3);
        let holes = HoleSet { holes: vec![] };
        let mut layout = GridLayout::for_structure(&holes, &s, &opts([false; 3])).unwrap();
        layout.dims[0] = 5;
        layout.dims[1] = 5;
        layout.origin[0] = 2;
        layout.origin[1] = 2;
        let g = rasterize(&holes, &s, &layout, 2);
        let nz = layout.dims[2];
        for k in 0..nz {
            let z = layout.coord(2, k as f64);
            let e = g.at(2, 2, k);
            if z.abs() < 4.5 {
                assert_eq!(e, 3.4 * 3.4);
            } else if z.abs() > 5.5 {
                assert_eq!(e, 1.0);
            }
        }
        // thickness 10 cells: total slab weight in a column equals d
        let total: f64 = (0..nz)
            .map(|k| (g.at(2, 2, k) - 1.0) / (3.4 * 3.4 - 1.0))
            .sum();
        assert!((total - 10.0).abs() < 1e-12);
    }

    #[test]
    fn z_mirror_symmetric_and_bounded() {
        let s = spec(12, 0.3);
        let holes = build_lattice(&s).unwrap();
        let layout = GridLayout::for_structure(&holes, &s, &opts([false; 3])).unwrap();
        let g = rasterize(&holes, &s, &layout, 2);
        let [nx, ny, nz] = layout.dims;
        let oz = layout.origin[2];
        for i in 0..nx {
            for j in 0..ny {
                for dk in 0..=oz {
                    assert_eq!(g.at(i, j, oz + dk), g.at(i, j, oz - dk));
                }
            }
        }
        assert!(g.eps.iter().all(|&e| (1.0..=s.eps_slab()).contains(&e)));
        assert_eq!(nz % 2, 1);
    }

    #[test]
    fn air_fill_fraction_matches_hexagonal_formula() {
        // count air inside the slab over one interior unit cell
        let a = 20usize;
        let s = PhotonicCrystalSpec {
            a,
            r_over_a: 0.3,
            d_over_a: 0.5,
            n_slab: 3.4,
            num_layers: 4,
        };
        let holes = build_lattice(&s).unwrap();
        let layout = GridLayout::for_structure(&holes, &s, &opts([false; 3])).unwrap();
        let g = rasterize(&holes, &s, &layout, 2);
        let oz = layout.origin[2];
        let eps_slab = s.eps_slab();
        // rectangle a × a√3 holds two unit cells
        let (ox, oy) = (layout.origin[0] as f64, layout.origin[1] as f64);
        let h = a as f64 * 3f64.sqrt();
        let mut air = 0.0;
        let mut cells = 0.0;
        for i in 0..layout.dims[0] {
            let x = i as f64 - ox;
            if !(-0.5 * a as f64..0.5 * a as f64).contains(&x) {
                continue;
            }
            for j in 0..layout.dims[1] {
                let y = j as f64 - oy;
                if !(-0.5 * h..0.5 * h).contains(&y) {
                    continue;
                }
                cells += 1.0;
                air += (eps_slab - g.at(i, j, oz)) / (eps_slab - 1.0);
            }
        }
        let analytic = 2.0 * std::f64::consts::PI / 3f64.sqrt() * 0.3f64 * 0.3;
        let measured = air / cells;
        assert!(
            (measured - analytic).abs() / analytic < 0.02,
            "fill {measured} vs {analytic}"
        );
    }

    #[test]
    fn index_filled_hole_uses_defect_permittivity() {
        let s = spec(20, 0.3);
        let mut hole = Hole::circle((0.0, 0.0), 6.0);
        hole.fill_index = Some(2.4);
        let holes = HoleSet { holes: vec![hole] };
        let layout = GridLayout::for_structure(&holes, &s, &opts([true; 3])).unwrap();
        let g = rasterize(&holes, &s, &layout, 2);
        assert!((g.at(0, 0, 0) - 2.4 * 2.4).abs() < 1e-12);
        assert_eq!(layout.origin, [0, 0, 0]);
    }

    #[test]
    fn rasterize_is_deterministic() {
        let s = spec(12, 0.25);
        let holes = build_lattice(&s).unwrap();
        let layout = GridLayout::for_structure(&holes, &s, &opts([true, false, true])).unwrap();
        let a = rasterize(&holes, &s, &layout, 2);
        let b = rasterize(&holes, &s, &layout, 2);
        assert_eq!(a, b);
    }
}
