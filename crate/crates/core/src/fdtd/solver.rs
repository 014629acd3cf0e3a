//! Leapfrog update on the staggered grid with ghost-layer boundaries and a
//! convolutional PML.

use num_complex::Complex64;

use super::boundary::{AbsorberProfile, Boundary, BoundarySpec};
use super::state::{Component, FieldState};
use super::{FieldScalar, SolverError};
use crate::geometry::{GridLayout, PermittivityGrid};

/// Default time step in units of cell/c. The 3D stability limit is 1/√3.
pub const DEFAULT_COURANT: f64 = 0.5;

/// Growth factor over the reference amplitude treated as divergence.
pub const INSTABILITY_FACTOR: f64 = 1e6;

/// Node-index box `[lo, hi)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl Region {
    pub fn interior(layout: &GridLayout) -> Self {
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for ax in 0..3 {
            let (a, b) = layout.interior(ax);
            lo[ax] = a;
            hi[ax] = b;
        }
        Region { lo, hi }
    }

    pub fn whole(layout: &GridLayout) -> Self {
        Region {
            lo: [0; 3],
            hi: layout.dims,
        }
    }
}

/// Convolutional PML auxiliary state for the layers normal to one axis.
struct PmlAxis<T> {
    axis: usize,
    lo: usize,
    hi: usize,
    /// Recursion coefficients at node positions (for E) and half positions (for H).
    be: Vec<f64>,
    ce: Vec<f64>,
    bh: Vec<f64>,
    ch: Vec<f64>,
    psi_e: [Vec<T>; 2],
    psi_h: [Vec<T>; 2],
    psi_dims: [usize; 3],
}

/// (E component, H component it differentiates, sign) for E updates and
/// (H component, E component, sign) for H updates, per PML axis.
const PML_TERMS: [[(Component, Component, f64); 2]; 3] = [
    [(Component::Ey, Component::Hz, -1.0), (Component::Ez, Component::Hy, 1.0)],
    [(Component::Ex, Component::Hz, 1.0), (Component::Ez, Component::Hx, -1.0)],
    [(Component::Ex, Component::Hy, -1.0), (Component::Ey, Component::Hx, 1.0)],
];
const PML_TERMS_H: [[(Component, Component, f64); 2]; 3] = [
    [(Component::Hy, Component::Ez, 1.0), (Component::Hz, Component::Ey, -1.0)],
    [(Component::Hx, Component::Ez, -1.0), (Component::Hz, Component::Ex, 1.0)],
    [(Component::Hx, Component::Ey, 1.0), (Component::Hy, Component::Ex, -1.0)],
];

impl<T: FieldScalar> PmlAxis<T> {
    fn new(axis: usize, layout: &GridLayout, lo: &Boundary, hi: &Boundary, dt: f64) -> Option<Self> {
        let n = layout.dims[axis];
        let plo = match lo {
            Boundary::Absorbing(p) => Some(*p),
            _ => None,
        };
        let phi = match hi {
            Boundary::Absorbing(p) => Some(*p),
            _ => None,
        };
        if plo.is_none() && phi.is_none() {
            return None;
        }
        let tlo = plo.map_or(0, |p| p.thickness);
        // H samples half a cell inside the high layer also need auxiliary
        // fields, so the high slab is one node wider.
        let thi = phi.map_or(0, |p| p.thickness + 1);
        let depth = |x: f64| -> Option<(f64, AbsorberProfile)> {
            if let Some(p) = plo {
                let d = (p.thickness as f64 - x) / p.thickness as f64;
                if d > 0.0 {
                    return Some((d.min(1.0), p));
                }
            }
            if let Some(p) = phi {
                let inner = n as f64 - 1.0 - p.thickness as f64;
                let d = (x - inner) / p.thickness as f64;
                if d > 0.0 {
                    return Some((d.min(1.0), p));
                }
            }
            None
        };
        let coeffs = |x: f64| -> (f64, f64) {
            match depth(x) {
                None => (1.0, 0.0),
                Some((d, p)) => {
                    let sigma = p.sigma_max * d.powf(p.order);
                    let alpha = p.alpha_max * (1.0 - d);
                    let b = (-(sigma + alpha) * dt).exp();
                    let c = if sigma > 0.0 {
                        sigma / (sigma + alpha) * (b - 1.0)
                    } else {
                        0.0
                    };
                    (b, c)
                }
            }
        };
        let (be, ce): (Vec<f64>, Vec<f64>) = (0..n).map(|i| coeffs(i as f64)).unzip();
        let (bh, ch): (Vec<f64>, Vec<f64>) = (0..n).map(|i| coeffs(i as f64 + 0.5)).unzip();
        let mut psi_dims = layout.dims;
        psi_dims[axis] = tlo + thi;
        let len: usize = psi_dims.iter().product();
        let z = || vec![T::default(); len];
        Some(PmlAxis {
            axis,
            lo: tlo,
            hi: thi,
            be,
            ce,
            bh,
            ch,
            psi_e: [z(), z()],
            psi_h: [z(), z()],
            psi_dims,
        })
    }
}

/// A running simulation: fields, material coefficients and boundaries.
pub struct Simulation<T: FieldScalar> {
    pub state: FieldState<T>,
    bounds: BoundarySpec,
    /// Permittivity at the E sample positions (padded arrays).
    eps: [Vec<f64>; 3],
    /// `dt / eps` at the E sample positions.
    coef: [Vec<f64>; 3],
    pml: Vec<PmlAxis<T>>,
    reference_amplitude: f64,
}

impl<T: FieldScalar> Simulation<T> {
    pub fn new(grid: &PermittivityGrid, bounds: BoundarySpec, dt: f64) -> Result<Self, SolverError> {
        let layout = grid.layout;
        if !(dt > 0.0 && dt < 1.0 / 3f64.sqrt()) {
            return Err(SolverError::Courant(dt));
        }
        bounds.validate(&layout, T::COMPLEX)?;
        if layout.dims.iter().any(|&n| n < 2) {
            return Err(SolverError::InvalidBoundary(
                "grid must have at least two nodes per axis".into(),
            ));
        }
        let state = FieldState::<T>::zeros(layout, dt);
        let eps = component_permittivity(grid, &bounds, &state);
        let coef = [0, 1, 2].map(|c| eps[c].iter().map(|e| dt / e).collect());
        let pml = (0..3)
            .filter_map(|ax| PmlAxis::new(ax, &layout, &bounds.faces[ax][0], &bounds.faces[ax][1], dt))
            .collect();
        Ok(Simulation {
            state,
            bounds,
            eps,
            coef,
            pml,
            reference_amplitude: 0.0,
        })
    }

    pub fn layout(&self) -> &GridLayout {
        self.state.layout()
    }

    pub fn bounds(&self) -> &BoundarySpec {
        &self.bounds
    }

    pub fn dt(&self) -> f64 {
        self.state.dt
    }

    /// Permittivity at the sample position of E component `axis` at node `(i, j, k)`.
    pub fn eps_at(&self, axis: usize, i: usize, j: usize, k: usize) -> f64 {
        self.eps[axis][self.state.pidx(i, j, k)]
    }

    /// Amplitude scale used by the divergence check.
    pub fn set_reference_amplitude(&mut self, a: f64) {
        self.reference_amplitude = self.reference_amplitude.max(a.abs());
    }

    pub fn reference_amplitude(&self) -> f64 {
        self.reference_amplitude
    }

    /// Adds a current-density contribution `-J·dt/ε` to an E sample.
    pub fn inject_current(&mut self, c: Component, i: usize, j: usize, k: usize, current: T) {
        debug_assert!(c.is_electric());
        let p = self.state.pidx(i, j, k);
        let coef = self.coef[c.axis()][p];
        self.state.e[c.axis()][p] -= current * coef;
    }

    /// Advances H by a half step and E by a full step.
    pub fn step(&mut self) {
        self.step_with_currents(&[]);
    }

    /// Like [`step`](Self::step), with point currents `J` (evaluated at the
    /// half step) added to the E update.
    pub fn step_with_currents(&mut self, currents: &[(Component, [usize; 3], T)]) {
        self.fill_e_ghosts();
        self.update_h();
        self.pml_h();
        self.fill_h_ghosts();
        self.update_e();
        self.pml_e();
        for &(c, [i, j, k], v) in currents {
            self.inject_current(c, i, j, k, v);
        }
        self.enforce_electric_walls();
        self.state.step += 1;
    }

    /// Steps once and returns the discrete energy that the leapfrog scheme
    /// conserves exactly in a lossless closed region:
    /// `½ Σ ε E^n·E^{n+1} + ½ Σ |H^{n+½}|²`.
    pub fn step_with_energy(&mut self, region: &Region) -> f64 {
        let old = self.state.e.clone();
        self.step();
        let st = &self.state;
        let mut total = 0.0;
        for ax in 0..3 {
            let (a, b, eps) = (&old[ax], &st.e[ax], &self.eps[ax]);
            total += weighted_sum(st, Component::e(ax), region, |p| eps[p] * a[p].dot_re(b[p]));
            let h = &st.h[ax];
            total += weighted_sum(st, Component::h(ax), region, |p| h[p].norm_sqr());
        }
        0.5 * total
    }

    /// Fails if any field is non-finite or has grown past the divergence limit.
    pub fn check_stability(&self) -> Result<(), SolverError> {
        let m = self.state.max_abs();
        if !m.is_finite() {
            return Err(SolverError::Unstable {
                step: self.state.step,
                amplitude: m,
            });
        }
        if self.reference_amplitude > 0.0 && m > INSTABILITY_FACTOR * self.reference_amplitude {
            return Err(SolverError::Unstable {
                step: self.state.step,
                amplitude: m,
            });
        }
        Ok(())
    }

    fn update_h(&mut self) {
        let st = &mut self.state;
        let [nx, ny, nz] = st.layout().dims;
        let [sx, sy, _] = st.strides;
        let dt = st.dt;
        let [ex, ey, ez] = &st.e;
        let [hx, hy, hz] = &mut st.h;
        for i in 0..nx {
            for j in 0..ny {
                let p = (i + 1) * sx + (j + 1) * sy + 1;
                let ex0 = &ex[p..p + nz + 1];
                let exy = &ex[p + sy..p + sy + nz];
                let ey0 = &ey[p..p + nz + 1];
                let eyx = &ey[p + sx..p + sx + nz];
                let ez0 = &ez[p..p + nz];
                let ezx = &ez[p + sx..p + sx + nz];
                let ezy = &ez[p + sy..p + sy + nz];
                let hxr = &mut hx[p..p + nz];
                for k in 0..nz {
                    hxr[k] -= ((ezy[k] - ez0[k]) - (ey0[k + 1] - ey0[k])) * dt;
                }
                let hyr = &mut hy[p..p + nz];
                for k in 0..nz {
                    hyr[k] -= ((ex0[k + 1] - ex0[k]) - (ezx[k] - ez0[k])) * dt;
                }
                let hzr = &mut hz[p..p + nz];
                for k in 0..nz {
                    hzr[k] -= ((eyx[k] - ey0[k]) - (exy[k] - ex0[k])) * dt;
                }
            }
        }
    }

    fn update_e(&mut self) {
        let st = &mut self.state;
        let [nx, ny, nz] = st.layout().dims;
        let [sx, sy, _] = st.strides;
        let [hx, hy, hz] = &st.h;
        let [ex, ey, ez] = &mut st.e;
        let [cx, cy, cz] = &self.coef;
        for i in 0..nx {
            for j in 0..ny {
                let p = (i + 1) * sx + (j + 1) * sy + 1;
                let hx0 = &hx[p - 1..p + nz];
                let hxy = &hx[p - sy..p - sy + nz];
                let hy0 = &hy[p - 1..p + nz];
                let hyx = &hy[p - sx..p - sx + nz];
                let hz0 = &hz[p..p + nz];
                let hzx = &hz[p - sx..p - sx + nz];
                let hzy = &hz[p - sy..p - sy + nz];
                let (exr, cxr) = (&mut ex[p..p + nz], &cx[p..p + nz]);
                for k in 0..nz {
                    exr[k] += ((hz0[k] - hzy[k]) - (hy0[k + 1] - hy0[k])) * cxr[k];
                }
                let (eyr, cyr) = (&mut ey[p..p + nz], &cy[p..p + nz]);
                for k in 0..nz {
                    eyr[k] += ((hx0[k + 1] - hx0[k]) - (hz0[k] - hzx[k])) * cyr[k];
                }
                let (ezr, czr) = (&mut ez[p..p + nz], &cz[p..p + nz]);
                for k in 0..nz {
                    ezr[k] += ((hy0[k + 1] - hyx[k]) - (hx0[k + 1] - hxy[k])) * czr[k];
                }
            }
        }
    }

    fn pml_e(&mut self) {
        let st = &mut self.state;
        let dims = st.layout().dims;
        let strides = st.strides;
        for pml in &mut self.pml {
            let ax = pml.axis;
            let s = strides[ax];
            for (slot, &(ec, hc, sign)) in PML_TERMS[ax].iter().enumerate() {
                let harr = &st.h[hc.axis()];
                let earr = &mut st.e[ec.axis()];
                let coef = &self.coef[ec.axis()];
                let psi = &mut pml.psi_e[slot];
                for_layer(dims, strides, ax, pml.lo, pml.hi, pml.psi_dims, |p, q, pos| {
                    let d = harr[p] - harr[p - s];
                    let v = psi[q] * pml.be[pos] + d * pml.ce[pos];
                    psi[q] = v;
                    earr[p] += v * (sign * coef[p]);
                });
            }
        }
    }

    fn pml_h(&mut self) {
        let st = &mut self.state;
        let dims = st.layout().dims;
        let strides = st.strides;
        let dt = st.dt;
        for pml in &mut self.pml {
            let ax = pml.axis;
            let s = strides[ax];
            for (slot, &(hc, ec, sign)) in PML_TERMS_H[ax].iter().enumerate() {
                let earr = &st.e[ec.axis()];
                let harr = &mut st.h[hc.axis()];
                let psi = &mut pml.psi_h[slot];
                for_layer(dims, strides, ax, pml.lo, pml.hi, pml.psi_dims, |p, q, pos| {
                    let d = earr[p + s] - earr[p];
                    let v = psi[q] * pml.bh[pos] + d * pml.ch[pos];
                    psi[q] = v;
                    harr[p] += v * (sign * dt);
                });
            }
        }
    }

    /// E ghosts on the high faces (needed by the H update).
    fn fill_e_ghosts(&mut self) {
        for ax in 0..3 {
            if let Boundary::BlochPeriodic { phase, shift } = self.bounds.faces[ax][1] {
                let xphase = self.x_phase();
                let st = &mut self.state;
                for c in tangential(ax) {
                    bloch_fill(st, Component::e(c), ax, phase, shift, xphase, true);
                }
            }
        }
    }

    /// H ghosts on the low faces (needed by the E update).
    fn fill_h_ghosts(&mut self) {
        for ax in 0..3 {
            let face = self.bounds.faces[ax][0];
            match face {
                Boundary::EvenMirror | Boundary::OddMirror | Boundary::Pec => {
                    let sign = if face == Boundary::EvenMirror { -1.0 } else { 1.0 };
                    let st = &mut self.state;
                    for c in tangential(ax) {
                        mirror_fill(st, Component::h(c), ax, sign);
                    }
                }
                Boundary::BlochPeriodic { phase, shift } => {
                    let xphase = self.x_phase();
                    let st = &mut self.state;
                    for c in tangential(ax) {
                        bloch_fill(st, Component::h(c), ax, phase, shift, xphase, false);
                    }
                }
                Boundary::Absorbing(_) => {}
            }
        }
    }

    /// Tangential E vanishes on odd-mirror planes and on the outermost node
    /// plane of conducting and absorbing faces, so a grid without mirrors
    /// is closed symmetrically about its center.
    fn enforce_electric_walls(&mut self) {
        for ax in 0..3 {
            let n = self.state.layout().dims[ax];
            let [lo, hi] = self.bounds.faces[ax];
            let walls = [
                matches!(lo, Boundary::OddMirror | Boundary::Pec | Boundary::Absorbing(_)).then_some(0),
                matches!(hi, Boundary::Pec | Boundary::Absorbing(_)).then_some(n - 1),
            ];
            for idx in walls.into_iter().flatten() {
                let st = &mut self.state;
                for c in tangential(ax) {
                    for_plane(st, ax, idx, |st, p| st.e[c][p] = T::default());
                }
            }
        }
    }

    fn x_phase(&self) -> Complex64 {
        match self.bounds.faces[0][1] {
            Boundary::BlochPeriodic { phase, .. } => phase,
            _ => Complex64::new(1.0, 0.0),
        }
    }

    /// Electromagnetic energy `½ Σ (ε|E|² + |H|²)` over a node region,
    /// counting samples on mirror planes with weight ½.
    pub fn energy(&self, region: &Region) -> f64 {
        let st = &self.state;
        let mut total = 0.0;
        for c in Component::ALL {
            let arr = st.array(c);
            let eps = c.is_electric().then(|| &self.eps[c.axis()]);
            total += weighted_sum(st, c, region, |p| {
                let v = arr[p].norm_sqr();
                match eps {
                    Some(e) => e[p] * v,
                    None => v,
                }
            });
        }
        0.5 * total
    }

    /// Electric-field energy only, `½ Σ ε|E|²`.
    pub fn electric_energy(&self, region: &Region) -> f64 {
        let st = &self.state;
        let mut total = 0.0;
        for ax in 0..3 {
            let c = Component::e(ax);
            let arr = st.array(c);
            let eps = &self.eps[ax];
            total += weighted_sum(st, c, region, |p| eps[p] * arr[p].norm_sqr());
        }
        0.5 * total
    }

    /// Poynting flux `Σ (E × H)·n̂` through the node plane `index` normal to
    /// `axis`, over the in-plane node ranges of `region`. Magnetic fields are
    /// averaged across the plane.
    pub fn flux(&self, axis: usize, index: usize, region: &Region) -> f64 {
        let st = &self.state;
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        let s = st.strides[axis];
        // S_n = E_a H_b − E_b H_a
        let term = |ec: usize, hc: usize, sign: f64| -> f64 {
            let e = &st.e[ec];
            let h = &st.h[hc];
            let c = Component::e(ec);
            let mut plane = *region;
            plane.lo[axis] = index;
            plane.hi[axis] = index + 1;
            sign * weighted_sum_plane(st, c, &plane, axis, |p| {
                let hav = (h[p] + h[p - s]) * 0.5;
                e[p].dot_re(hav)
            })
        };
        term(a, b, 1.0) + term(b, a, -1.0)
    }
}

/// The two axes tangential to a face normal to `ax`.
fn tangential(ax: usize) -> [usize; 2] {
    [(ax + 1) % 3, (ax + 2) % 3]
}

/// Visits every padded index on node plane `idx` normal to `ax` (including
/// ghost rows of the other axes is unnecessary; interior only).
fn for_plane<T: FieldScalar>(
    st: &mut FieldState<T>,
    ax: usize,
    idx: usize,
    mut f: impl FnMut(&mut FieldState<T>, usize),
) {
    let dims = st.layout().dims;
    let mut range = [0..dims[0], 0..dims[1], 0..dims[2]];
    range[ax] = idx..idx + 1;
    for i in range[0].clone() {
        for j in range[1].clone() {
            for k in range[2].clone() {
                let p = st.pidx(i, j, k);
                f(st, p);
            }
        }
    }
}

/// Low-face mirror ghost: `F[-1] = sign · F[0]`.
fn mirror_fill<T: FieldScalar>(st: &mut FieldState<T>, c: Component, ax: usize, sign: f64) {
    let s = st.strides[ax];
    let dims = st.layout().dims;
    let mut range = [0..dims[0], 0..dims[1], 0..dims[2]];
    range[ax] = 0..1;
    let base: Vec<usize> = range[0]
        .clone()
        .flat_map(|i| {
            let r1 = range[1].clone();
            let r2 = range[2].clone();
            r1.flat_map(move |j| r2.clone().map(move |k| (i, j, k)))
        })
        .map(|(i, j, k)| st.pidx(i, j, k))
        .collect();
    let arr = st.array_mut(c);
    for p in base {
        arr[p - s] = arr[p] * sign;
    }
}

/// Bloch ghost layer. E ghosts sit past the high face, H ghosts before the
/// low face. For the y faces the period may be sheared by `shift` cells in x.
fn bloch_fill<T: FieldScalar>(
    st: &mut FieldState<T>,
    c: Component,
    ax: usize,
    phase: Complex64,
    shift: i64,
    xphase: Complex64,
    high: bool,
) {
    let dims = st.layout().dims;
    let n = dims[ax];
    let nx = dims[0] as i64;
    let s = st.strides[ax];
    let mut writes = Vec::new();
    let (r1, r2) = {
        let t = tangential(ax);
        (t[0], t[1])
    };
    for u in 0..dims[r1] {
        for v in 0..dims[r2] {
            let mut idx = [0usize; 3];
            idx[r1] = u;
            idx[r2] = v;
            let mut src = idx;
            let mut ph;
            let dst;
            if high {
                // ghost at n ← phase · F(index 0), x shifted by −shift
                src[ax] = 0;
                ph = phase;
                if shift != 0 {
                    let xs = idx[0] as i64 - shift;
                    if xs < 0 {
                        src[0] = (xs + nx) as usize;
                        ph *= xphase.conj();
                    } else {
                        src[0] = xs as usize;
                    }
                }
                idx[ax] = n - 1;
                dst = st.pidx(idx[0], idx[1], idx[2]) + s;
            } else {
                // ghost at −1 ← conj(phase) · F(index n−1), x shifted by +shift
                src[ax] = n - 1;
                ph = phase.conj();
                if shift != 0 {
                    let xs = idx[0] as i64 + shift;
                    if xs >= nx {
                        src[0] = (xs - nx) as usize;
                        ph *= xphase;
                    } else {
                        src[0] = xs as usize;
                    }
                }
                idx[ax] = 0;
                dst = st.pidx(idx[0], idx[1], idx[2]) - s;
            }
            let sp = st.pidx(src[0], src[1], src[2]);
            writes.push((dst, sp, ph));
        }
    }
    let arr = st.array_mut(c);
    for (dst, sp, ph) in writes {
        arr[dst] = arr[sp].times_phase(ph);
    }
}

/// Calls `f(padded_index, psi_index, position_along_axis)` for every node in
/// the absorbing layers normal to `ax`.
fn for_layer(
    dims: [usize; 3],
    strides: [usize; 3],
    ax: usize,
    lo: usize,
    hi: usize,
    psi_dims: [usize; 3],
    mut f: impl FnMut(usize, usize, usize),
) {
    let n = dims[ax];
    let layer: Vec<(usize, usize)> = (0..lo)
        .map(|i| (i, i))
        .chain((n - hi..n).enumerate().map(|(l, i)| (i, lo + l)))
        .collect();
    let pidx = |i: usize, j: usize, k: usize| (i + 1) * strides[0] + (j + 1) * strides[1] + k + 1;
    let qidx = |i: usize, j: usize, k: usize| (i * psi_dims[1] + j) * psi_dims[2] + k;
    match ax {
        0 => {
            for &(i, li) in &layer {
                for j in 0..dims[1] {
                    let p0 = pidx(i, j, 0);
                    let q0 = qidx(li, j, 0);
                    for k in 0..dims[2] {
                        f(p0 + k, q0 + k, i);
                    }
                }
            }
        }
        1 => {
            for i in 0..dims[0] {
                for &(j, lj) in &layer {
                    let p0 = pidx(i, j, 0);
                    let q0 = qidx(i, lj, 0);
                    for k in 0..dims[2] {
                        f(p0 + k, q0 + k, j);
                    }
                }
            }
        }
        _ => {
            for i in 0..dims[0] {
                for j in 0..dims[1] {
                    for &(k, lk) in &layer {
                        f(pidx(i, j, k), qidx(i, j, lk), k);
                    }
                }
            }
        }
    }
}

/// Weight of a sample of component `c` at node index `idx` along `ax`.
#[inline]
fn sample_weight(layout: &GridLayout, c: Component, ax: usize, idx: usize) -> f64 {
    if c.is_staggered(ax) {
        1.0
    } else {
        layout.node_weight(ax, idx)
    }
}

fn weighted_sum<T: FieldScalar>(
    st: &FieldState<T>,
    c: Component,
    region: &Region,
    f: impl Fn(usize) -> f64,
) -> f64 {
    let layout = *st.layout();
    let mut total = 0.0;
    for i in region.lo[0]..region.hi[0] {
        let wi = sample_weight(&layout, c, 0, i);
        for j in region.lo[1]..region.hi[1] {
            let wj = wi * sample_weight(&layout, c, 1, j);
            let p0 = st.pidx(i, j, 0);
            let mut row = 0.0;
            for k in region.lo[2]..region.hi[2] {
                row += sample_weight(&layout, c, 2, k) * f(p0 + k);
            }
            total += wj * row;
        }
    }
    total
}

/// Like [`weighted_sum`] but ignores the weight along the plane normal.
fn weighted_sum_plane<T: FieldScalar>(
    st: &FieldState<T>,
    c: Component,
    region: &Region,
    normal: usize,
    f: impl Fn(usize) -> f64,
) -> f64 {
    let layout = *st.layout();
    let w = |ax: usize, idx: usize| {
        if ax == normal {
            1.0
        } else {
            sample_weight(&layout, c, ax, idx)
        }
    };
    let mut total = 0.0;
    for i in region.lo[0]..region.hi[0] {
        for j in region.lo[1]..region.hi[1] {
            let wij = w(0, i) * w(1, j);
            for k in region.lo[2]..region.hi[2] {
                total += wij * w(2, k) * f(st.pidx(i, j, k));
            }
        }
    }
    total
}

/// Permittivity at each E sample position: harmonic mean of the two cells
/// the sample sits between. Periodic axes wrap; other faces clamp.
fn component_permittivity<T: FieldScalar>(
    grid: &PermittivityGrid,
    bounds: &BoundarySpec,
    st: &FieldState<T>,
) -> [Vec<f64>; 3] {
    let layout = grid.layout;
    let dims = layout.dims;
    let len = st.e[0].len();
    let periodic = [0, 1, 2].map(|ax| matches!(bounds.faces[ax][1], Boundary::BlochPeriodic { .. }));
    let yshift = match bounds.faces[1][1] {
        Boundary::BlochPeriodic { shift, .. } => shift,
        _ => 0,
    };
    let node = |mut idx: [i64; 3]| -> f64 {
        for ax in 0..3 {
            let n = dims[ax] as i64;
            if idx[ax] >= n {
                if periodic[ax] {
                    idx[ax] -= n;
                    if ax == 1 && yshift != 0 {
                        idx[0] = (idx[0] - yshift).rem_euclid(dims[0] as i64);
                    }
                } else {
                    idx[ax] = n - 1;
                }
            }
        }
        grid.at(idx[0] as usize, idx[1] as usize, idx[2] as usize)
    };
    let mut out = [vec![1.0; len], vec![1.0; len], vec![1.0; len]];
    for (ax, arr) in out.iter_mut().enumerate() {
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let here = [i as i64, j as i64, k as i64];
                    let mut next = here;
                    next[ax] += 1;
                    let (e0, e1) = (node(here), node(next));
                    arr[st.pidx(i, j, k)] = 2.0 * e0 * e1 / (e0 + e1);
                }
            }
        }
    }
    out
}
