//! Hexagonal-lattice perforated slabs and their point/line defects.
//!
//! All lengths are in grid cells. The lattice has rows of holes parallel to
//! the x axis, spaced `a·√3/2` apart, so the x axis is a Γ–J direction and
//! the y axis a Γ–X direction of the photonic crystal. The origin is the
//! cavity center and `z = 0` is the middle plane of the slab.

mod export;
mod raster;

pub use export::{read_hole_list, read_raw_grid, write_hole_list, write_raw_grid, RawGrid};
pub use raster::{rasterize, GridLayout, LayoutOptions, PermittivityGrid};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest lattice extent (cells, along x or y) accepted by [`build_lattice`].
pub const MAX_EXTENT_CELLS: f64 = 8192.0;

/// Minimum lattice constant in grid cells.
pub const MIN_LATTICE_CELLS: usize = 10;

const ON_AXIS_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid crystal: {0}")]
    InvalidSpec(String),
    #[error("invalid defect: {0}")]
    InvalidDefect(String),
    #[error("holes {0} and {1} overlap after applying the defect")]
    Overlap(usize, usize),
    #[error("structure extent {extent:.0} cells exceeds the limit of {limit:.0}")]
    TooLarge { extent: f64, limit: f64 },
}

/// Host photonic crystal: lattice constant, hole radius, slab thickness and
/// refractive index, and the number of hexagonal rings around the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonicCrystalSpec {
    pub a: usize,
    pub r_over_a: f64,
    pub d_over_a: f64,
    pub n_slab: f64,
    pub num_layers: usize,
}

impl PhotonicCrystalSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: &str| Err(GeometryError::InvalidSpec(m.to_string()));
        if !(self.r_over_a > 0.0 && self.r_over_a < 0.5) {
            return bad("r_over_a must satisfy 0 < r_over_a < 0.5 (holes must not overlap)");
        }
        if !(self.n_slab > 1.0) {
            return bad("n_slab must be greater than 1");
        }
        if self.num_layers < 1 {
            return bad("num_layers must be at least 1");
        }
        if self.a < MIN_LATTICE_CELLS {
            return bad("a must be at least 10 grid cells");
        }
        if !(self.d_over_a > 0.0) {
            return bad("d_over_a must be positive");
        }
        Ok(())
    }

    pub fn lattice_constant(&self) -> f64 {
        self.a as f64
    }

    /// Hole radius in cells.
    pub fn radius(&self) -> f64 {
        self.r_over_a * self.a as f64
    }

    /// Slab thickness in cells.
    pub fn thickness(&self) -> f64 {
        self.d_over_a * self.a as f64
    }

    pub fn eps_slab(&self) -> f64 {
        self.n_slab * self.n_slab
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// One defect operation. Composite cavities are a list of these applied in
/// order, e.g. a radius change followed by a dislocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DefectSpec {
    /// Fill the central hole with a material of index `n_defect`.
    IndexChange { n_defect: f64 },
    /// Shrink the central hole.
    RadiusChange { r_def_over_a: f64 },
    /// Elongate the holes on `axis` by `p` cells (p/2 each way, perpendicular
    /// to the axis) and translate the two half-spaces apart by `p`.
    FractionalEdgeDislocation { axis: Axis, p: f64 },
    /// Central hole radius `r2`; the four off-axis nearest neighbours get
    /// radius `r1` and move radially outward by `r - r1`.
    FourHoleTuning { r2_over_a: f64, r1_over_a: f64 },
    /// Two reduced holes on either side of an unperturbed central region,
    /// with the rows/columns containing them elongated by `p` cells.
    CoupledDefects {
        orientation: Axis,
        r_def_over_a: f64,
        p: f64,
    },
}

impl DefectSpec {
    pub fn validate(&self, spec: &PhotonicCrystalSpec) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidDefect(m));
        match *self {
            DefectSpec::IndexChange { n_defect } => {
                if !(1.0..=spec.n_slab).contains(&n_defect) {
                    return bad(format!(
                        "n_defect must satisfy 1 <= n_defect <= n_slab ({}), got {n_defect}",
                        spec.n_slab
                    ));
                }
            }
            DefectSpec::RadiusChange { r_def_over_a } => {
                if !(0.0..=spec.r_over_a).contains(&r_def_over_a) {
                    return bad(format!(
                        "r_def_over_a must satisfy 0 <= r_def_over_a <= r_over_a ({}), got {r_def_over_a}",
                        spec.r_over_a
                    ));
                }
            }
            DefectSpec::FractionalEdgeDislocation { p, .. } => {
                if !(p >= 0.0) {
                    return bad(format!("elongation p must be non-negative, got {p}"));
                }
            }
            DefectSpec::FourHoleTuning {
                r2_over_a,
                r1_over_a,
            } => {
                if !(0.0..=spec.r_over_a).contains(&r2_over_a) {
                    return bad(format!(
                        "r2_over_a must satisfy 0 <= r2_over_a <= r_over_a, got {r2_over_a}"
                    ));
                }
                if !(0.0..=spec.r_over_a).contains(&r1_over_a) {
                    return bad(format!(
                        "r1_over_a must satisfy 0 <= r1_over_a <= r_over_a, got {r1_over_a}"
                    ));
                }
            }
            DefectSpec::CoupledDefects {
                r_def_over_a, p, ..
            } => {
                if !(0.0..=spec.r_over_a).contains(&r_def_over_a) {
                    return bad(format!(
                        "r_def_over_a must satisfy 0 <= r_def_over_a <= r_over_a ({}), got {r_def_over_a}",
                        spec.r_over_a
                    ));
                }
                if !(p >= 0.0) {
                    return bad(format!("elongation p must be non-negative, got {p}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HoleRole {
    Lattice,
    /// The hole at the cavity center.
    Central,
    /// A modified hole that is not at the center (coupled defects).
    Defect,
}

/// A through-hole in the slab. Circles have `rx == ry`; otherwise the hole
/// is a stadium elongated along its longer semi-axis with end caps of
/// radius `min(rx, ry)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: (f64, f64),
    pub rx: f64,
    pub ry: f64,
    /// Refractive index filling the hole; `None` is air.
    pub fill_index: Option<f64>,
    pub role: HoleRole,
}

impl Hole {
    pub fn circle(center: (f64, f64), r: f64) -> Self {
        Hole {
            center,
            rx: r,
            ry: r,
            fill_index: None,
            role: HoleRole::Lattice,
        }
    }

    /// Core segment of the stadium as (start, end) points; degenerate for circles.
    fn segment(&self) -> ((f64, f64), (f64, f64), f64) {
        let (cx, cy) = self.center;
        if self.ry > self.rx {
            let h = self.ry - self.rx;
            ((cx, cy - h), (cx, cy + h), self.rx)
        } else {
            let h = self.rx - self.ry;
            ((cx - h, cy), (cx + h, cy), self.ry)
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (p0, p1, r) = self.segment();
        point_segment_dist2((x, y), p0, p1) <= r * r
    }

    pub fn overlaps(&self, other: &Hole) -> bool {
        let (a0, a1, ra) = self.segment();
        let (b0, b1, rb) = other.segment();
        segment_segment_dist(a0, a1, b0, b1) < ra + rb - 1e-9
    }

    pub fn is_empty(&self) -> bool {
        self.rx <= 0.0 || self.ry <= 0.0
    }
}

fn point_segment_dist2(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    qx * qx + qy * qy
}

fn segment_segment_dist(a0: (f64, f64), a1: (f64, f64), b0: (f64, f64), b1: (f64, f64)) -> f64 {
    // Segments here are axis-aligned or points; the endpoint distances are
    // exact unless the segments cross, which only happens for overlapping holes.
    let cross = |o: (f64, f64), p: (f64, f64), q: (f64, f64)| {
        (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0)
    };
    let d1 = cross(a0, a1, b0);
    let d2 = cross(a0, a1, b1);
    let d3 = cross(b0, b1, a0);
    let d4 = cross(b0, b1, a1);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return 0.0;
    }
    [
        point_segment_dist2(a0, b0, b1),
        point_segment_dist2(a1, b0, b1),
        point_segment_dist2(b0, a0, a1),
        point_segment_dist2(b1, a0, a1),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
    .sqrt()
}

/// The holes of a (possibly perturbed) crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleSet {
    pub holes: Vec<Hole>,
}

impl HoleSet {
    pub fn len(&self) -> usize {
        self.holes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holes.is_empty()
    }

    pub fn central(&self) -> Option<&Hole> {
        self.holes.iter().find(|h| h.role == HoleRole::Central)
    }

    /// Largest |x| and |y| reached by any hole edge.
    pub fn extent(&self) -> (f64, f64) {
        self.holes.iter().fold((0.0f64, 0.0f64), |(ex, ey), h| {
            (
                ex.max(h.center.0.abs() + h.rx),
                ey.max(h.center.1.abs() + h.ry),
            )
        })
    }

    pub fn check_overlaps(&self) -> Result<(), GeometryError> {
        for (i, a) in self.holes.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            for (j, b) in self.holes.iter().enumerate().skip(i + 1) {
                if !b.is_empty() && a.overlaps(b) {
                    return Err(GeometryError::Overlap(i, j));
                }
            }
        }
        Ok(())
    }

    fn nearest_mut(&mut self, x: f64, y: f64) -> Option<&mut Hole> {
        self.holes
            .iter_mut()
            .filter(|h| (h.center.0 - x).hypot(h.center.1 - y) < 0.25)
            .min_by(|a, b| {
                let da = (a.center.0 - x).hypot(a.center.1 - y);
                let db = (b.center.0 - x).hypot(b.center.1 - y);
                da.total_cmp(&db)
            })
    }
}

/// Lattice vectors of the hexagonal crystal in cells.
pub fn lattice_vectors(a: f64) -> ((f64, f64), (f64, f64)) {
    ((a, 0.0), (0.5 * a, 0.5 * 3f64.sqrt() * a))
}

/// Ring index of lattice site `n1·a1 + n2·a2` (hexagonal distance).
fn ring_of(n1: i64, n2: i64) -> i64 {
    n1.abs().max(n2.abs()).max((n1 + n2).abs())
}

/// Builds `num_layers` hexagonal rings of holes around a central hole at the
/// origin. The central hole is tagged [`HoleRole::Central`].
pub fn build_lattice(spec: &PhotonicCrystalSpec) -> Result<HoleSet, GeometryError> {
    spec.validate()?;
    let a = spec.lattice_constant();
    let layers = spec.num_layers as i64;
    let extent = 2.0 * (layers as f64 * a + spec.radius());
    if extent > MAX_EXTENT_CELLS {
        return Err(GeometryError::TooLarge {
            extent,
            limit: MAX_EXTENT_CELLS,
        });
    }
    let (a1, a2) = lattice_vectors(a);
    let r = spec.radius();
    let mut holes = Vec::with_capacity((1 + 3 * layers * (layers + 1)) as usize);
    // Order by row then x so exports read naturally.
    for n2 in -layers..=layers {
        for n1 in -layers..=layers {
            if ring_of(n1, n2) > layers {
                continue;
            }
            let x = n1 as f64 * a1.0 + n2 as f64 * a2.0;
            let y = n2 as f64 * a2.1;
            let mut hole = Hole::circle((x, y), r);
            if n1 == 0 && n2 == 0 {
                hole.role = HoleRole::Central;
            }
            holes.push(hole);
        }
    }
    Ok(HoleSet { holes })
}

/// Applies one defect operation. The result is checked for overlapping holes.
pub fn apply_defect(
    holes: &HoleSet,
    defect: &DefectSpec,
    spec: &PhotonicCrystalSpec,
) -> Result<HoleSet, GeometryError> {
    defect.validate(spec)?;
    let a = spec.lattice_constant();
    let r = spec.radius();
    let mut out = holes.clone();
    match *defect {
        DefectSpec::IndexChange { n_defect } => {
            let c = central_mut(&mut out)?;
            c.fill_index = Some(n_defect);
        }
        DefectSpec::RadiusChange { r_def_over_a } => {
            let c = central_mut(&mut out)?;
            set_radius(c, r_def_over_a * a);
        }
        DefectSpec::FractionalEdgeDislocation { axis, p } => {
            dislocate(&mut out, axis, 0.0, p, Dislocation::Symmetric);
        }
        DefectSpec::FourHoleTuning {
            r2_over_a,
            r1_over_a,
        } => {
            let r1 = r1_over_a * a;
            let shift = r - r1;
            set_radius(central_mut(&mut out)?, r2_over_a * a);
            let (_, a2) = lattice_vectors(a);
            for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
                let (x, y) = (sx * a2.0, sy * a2.1);
                let h = out.nearest_mut(x, y).ok_or_else(|| {
                    GeometryError::InvalidDefect("four-hole tuning needs nearest neighbours".into())
                })?;
                // Unit vector along the Γ–J direction through this neighbour.
                let norm = x.hypot(y);
                h.center = (x + shift * x / norm, y + shift * y / norm);
                set_radius(h, r1);
                h.role = HoleRole::Defect;
            }
        }
        DefectSpec::CoupledDefects {
            orientation,
            r_def_over_a,
            p,
        } => {
            let r_def = r_def_over_a * a;
            let (_, a2) = lattice_vectors(a);
            let line = match orientation {
                Axis::X => a,
                Axis::Y => {
                    recenter_on_bond(&mut out, a);
                    a2.1
                }
            };
            let sites = match orientation {
                Axis::X => [(a, 0.0), (-a, 0.0)],
                Axis::Y => [(0.0, a2.1), (0.0, -a2.1)],
            };
            for (x, y) in sites {
                let h = out.nearest_mut(x, y).ok_or_else(|| {
                    GeometryError::InvalidDefect("coupled defect site is outside the lattice".into())
                })?;
                set_radius(h, r_def);
                h.role = HoleRole::Defect;
            }
            // Columns (x) or rows (y) through the defects are elongated along
            // the orientation axis; everything beyond them moves outward by p.
            let perp = match orientation {
                Axis::X => Axis::Y,
                Axis::Y => Axis::X,
            };
            dislocate(&mut out, perp, line, p, Dislocation::Outward);
        }
    }
    out.check_overlaps()?;
    Ok(out)
}

/// Applies a list of defects in order.
pub fn apply_defects(
    holes: &HoleSet,
    defects: &[DefectSpec],
    spec: &PhotonicCrystalSpec,
) -> Result<HoleSet, GeometryError> {
    defects
        .iter()
        .try_fold(holes.clone(), |acc, d| apply_defect(&acc, d, spec))
}

fn central_mut(holes: &mut HoleSet) -> Result<&mut Hole, GeometryError> {
    holes
        .holes
        .iter_mut()
        .find(|h| h.role == HoleRole::Central)
        .ok_or_else(|| GeometryError::InvalidDefect("structure has no central hole".into()))
}

/// Changes the base radius while keeping any elongation.
fn set_radius(h: &mut Hole, r: f64) {
    let base = h.rx.min(h.ry);
    let dx = h.rx - base;
    let dy = h.ry - base;
    h.rx = r + dx;
    h.ry = r + dy;
}

#[derive(Clone, Copy)]
enum Dislocation {
    /// Single line through the origin: on-line holes grow p/2 each way and the
    /// half-spaces move apart by p/2 each.
    Symmetric,
    /// Pair of lines at ±offset: the region between stays fixed, on-line
    /// holes grow by p on their outer side and the outer regions move by p.
    Outward,
}

/// Dislocation along `axis`: holes lying on the line(s) parallel to `axis`
/// are elongated perpendicular to it.
fn dislocate(holes: &mut HoleSet, axis: Axis, offset: f64, p: f64, kind: Dislocation) {
    if p == 0.0 {
        return;
    }
    for h in &mut holes.holes {
        // Coordinate perpendicular to the dislocation line.
        let (coord, radius) = match axis {
            Axis::X => (&mut h.center.1, &mut h.ry),
            Axis::Y => (&mut h.center.0, &mut h.rx),
        };
        let c = *coord;
        match kind {
            Dislocation::Symmetric => {
                if c.abs() < ON_AXIS_TOL {
                    *radius += 0.5 * p;
                } else {
                    *coord += 0.5 * p * c.signum();
                }
            }
            Dislocation::Outward => {
                if (c.abs() - offset).abs() < ON_AXIS_TOL {
                    *radius += 0.5 * p;
                    *coord += 0.5 * p * c.signum();
                } else if c.abs() > offset {
                    *coord += p * c.signum();
                }
            }
        }
    }
}

/// Moves the origin from a hole to the midpoint of two neighbouring holes
/// and restores mirror symmetry in x by adding reflected images.
fn recenter_on_bond(holes: &mut HoleSet, a: f64) {
    let shifted: Vec<Hole> = holes
        .holes
        .iter()
        .map(|h| {
            let mut h = *h;
            h.center.0 -= 0.5 * a;
            if h.role == HoleRole::Central {
                h.role = HoleRole::Lattice;
            }
            h
        })
        .collect();
    let mut all = shifted.clone();
    for h in shifted {
        let mirrored = (-h.center.0, h.center.1);
        let exists = all
            .iter()
            .any(|o| (o.center.0 - mirrored.0).hypot(o.center.1 - mirrored.1) < 1e-6);
        if !exists {
            let mut m = h;
            m.center = mirrored;
            all.push(m);
        }
    }
    // Keep a reference point for atom placement: the central pair of holes.
    for h in &mut all {
        if (h.center.0.abs() - 0.5 * a).abs() < 1e-6 && h.center.1.abs() < 1e-6 {
            h.role = HoleRole::Central;
        }
    }
    all.sort_by(|p, q| {
        p.center
            .1
            .total_cmp(&q.center.1)
            .then(p.center.0.total_cmp(&q.center.0))
    });
    holes.holes = all;
}
