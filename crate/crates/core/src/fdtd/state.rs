use serde::{Deserialize, Serialize};

use super::FieldScalar;
use crate::geometry::GridLayout;

/// Field components on the staggered grid. Relative to node `(i, j, k)`,
/// `E_c` sits half a cell along axis `c` and `H_c` half a cell along both
/// other axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Ex,
    Ey,
    Ez,
    Hx,
    Hy,
    Hz,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Ex,
        Component::Ey,
        Component::Ez,
        Component::Hx,
        Component::Hy,
        Component::Hz,
    ];

    pub fn e(axis: usize) -> Component {
        [Component::Ex, Component::Ey, Component::Ez][axis]
    }

    pub fn h(axis: usize) -> Component {
        [Component::Hx, Component::Hy, Component::Hz][axis]
    }

    pub fn axis(self) -> usize {
        match self {
            Component::Ex | Component::Hx => 0,
            Component::Ey | Component::Hy => 1,
            Component::Ez | Component::Hz => 2,
        }
    }

    pub fn is_electric(self) -> bool {
        matches!(self, Component::Ex | Component::Ey | Component::Ez)
    }

    /// Whether the sample sits half a cell off the node along `axis`.
    pub fn is_staggered(self, axis: usize) -> bool {
        (axis == self.axis()) == self.is_electric()
    }

    pub fn offset(self, axis: usize) -> f64 {
        if self.is_staggered(axis) {
            0.5
        } else {
            0.0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Ex => "ex",
            Component::Ey => "ey",
            Component::Ez => "ez",
            Component::Hx => "hx",
            Component::Hy => "hy",
            Component::Hz => "hz",
        }
    }
}

/// Electric and magnetic field arrays plus the time index.
///
/// After `step` full steps E holds time `step·dt` and H holds
/// `(step − ½)·dt`. Arrays carry one ghost layer on every face.
#[derive(Debug, Clone)]
pub struct FieldState<T> {
    layout: GridLayout,
    pub(crate) e: [Vec<T>; 3],
    pub(crate) h: [Vec<T>; 3],
    pub step: usize,
    pub dt: f64,
    pub(crate) strides: [usize; 3],
}

impl<T: FieldScalar> FieldState<T> {
    pub fn zeros(layout: GridLayout, dt: f64) -> Self {
        let [nx, ny, nz] = layout.dims;
        let len = (nx + 2) * (ny + 2) * (nz + 2);
        let z = || vec![T::default(); len];
        FieldState {
            layout,
            e: [z(), z(), z()],
            h: [z(), z(), z()],
            step: 0,
            dt,
            strides: [(ny + 2) * (nz + 2), nz + 2, 1],
        }
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    /// Padded array index of node `(i, j, k)`.
    #[inline]
    pub(crate) fn pidx(&self, i: usize, j: usize, k: usize) -> usize {
        (i + 1) * self.strides[0] + (j + 1) * self.strides[1] + k + 1
    }

    pub(crate) fn array(&self, c: Component) -> &Vec<T> {
        if c.is_electric() {
            &self.e[c.axis()]
        } else {
            &self.h[c.axis()]
        }
    }

    pub(crate) fn array_mut(&mut self, c: Component) -> &mut Vec<T> {
        if c.is_electric() {
            &mut self.e[c.axis()]
        } else {
            &mut self.h[c.axis()]
        }
    }

    #[inline]
    pub fn get(&self, c: Component, i: usize, j: usize, k: usize) -> T {
        self.array(c)[self.pidx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, c: Component, i: usize, j: usize, k: usize, v: T) {
        let p = self.pidx(i, j, k);
        self.array_mut(c)[p] = v;
    }

    /// Copies one component into an unpadded row-major array.
    pub fn component_values(&self, c: Component) -> Vec<T> {
        let [nx, ny, nz] = self.layout.dims;
        let arr = self.array(c);
        let mut out = Vec::with_capacity(nx * ny * nz);
        for i in 0..nx {
            for j in 0..ny {
                let p = self.pidx(i, j, 0);
                out.extend_from_slice(&arr[p..p + nz]);
            }
        }
        out
    }

    /// Overwrites one component from an unpadded row-major array.
    pub fn set_component_values(&mut self, c: Component, values: &[T]) {
        let [nx, ny, nz] = self.layout.dims;
        assert_eq!(values.len(), nx * ny * nz, "component size mismatch");
        let base: Vec<usize> = (0..nx)
            .flat_map(|i| (0..ny).map(move |j| (i, j)))
            .map(|(i, j)| self.pidx(i, j, 0))
            .collect();
        let arr = self.array_mut(c);
        for (row, p) in values.chunks_exact(nz).zip(base) {
            arr[p..p + nz].copy_from_slice(row);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.e
            .iter()
            .chain(self.h.iter())
            .flat_map(|a| a.iter())
            .fold(0.0f64, |m, v| {
                let n = v.norm_sqr();
                if n.is_nan() || n > m {
                    n
                } else {
                    m
                }
            })
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.e
            .iter()
            .chain(self.h.iter())
            .all(|a| a.iter().all(|v| v.is_finite()))
    }

    pub fn time_e(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn time_h(&self) -> f64 {
        (self.step as f64 - 0.5) * self.dt
    }

    pub fn clear(&mut self) {
        for a in self.e.iter_mut().chain(self.h.iter_mut()) {
            a.iter_mut().for_each(|v| *v = T::default());
        }
    }
}
