use std::f64::consts::PI;

use num_complex::Complex64;

use super::{FarFieldError, NearFieldPlane, PlaneSamples};
use crate::analysis::extract_resonances;
use crate::fdtd::{Component, FieldState, Parity};
use crate::geometry::GridLayout;

const TANGENTIAL: [Component; 4] = [Component::Ex, Component::Ey, Component::Hx, Component::Hy];

/// Running single-frequency DFT of the tangential fields on the node plane
/// `kz`, restricted to the non-absorbing part of the plane.
///
/// Phasors follow `X = (2/N) Σ x(tₙ) e^{−iωtₙ}`, so a steady oscillation
/// `cos(ωt + φ)` gives `e^{iφ}`. `H_x` and `H_y` live half a cell above and
/// below the plane and are averaged onto it.
#[derive(Debug, Clone)]
pub struct PlaneRecorder {
    layout: GridLayout,
    kz: usize,
    frequency: f64,
    parity: [Parity; 2],
    range: [(usize, usize); 2],
    sums: [Vec<Complex64>; 4],
    samples: usize,
}

impl PlaneRecorder {
    /// `parity` gives the tangential-E symmetry across the x and y mirror
    /// planes; it is ignored on axes the layout does not mirror.
    pub fn new(
        layout: &GridLayout,
        kz: usize,
        frequency: f64,
        parity: [Parity; 2],
    ) -> Result<Self, FarFieldError> {
        let (zlo, zhi) = layout.interior(2);
        if kz == 0 || kz < zlo || kz >= zhi {
            return Err(FarFieldError::InvalidPlane(format!(
                "plane index {kz} is not inside the non-absorbing z range [{zlo}, {zhi})"
            )));
        }
        if !(frequency > 0.0) {
            return Err(FarFieldError::InvalidPlane("frequency must be positive".into()));
        }
        let range = [layout.interior(0), layout.interior(1)];
        let n = (range[0].1 - range[0].0) * (range[1].1 - range[1].0);
        let zero = || vec![Complex64::new(0.0, 0.0); n];
        Ok(PlaneRecorder {
            layout: *layout,
            kz,
            frequency,
            parity,
            range,
            sums: [zero(), zero(), zero(), zero()],
            samples: 0,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Adds the current time level of `state`.
    pub fn record(&mut self, state: &FieldState<f64>) {
        let w = 2.0 * PI * self.frequency;
        let pe = Complex64::from_polar(1.0, -w * state.time_e());
        let ph = Complex64::from_polar(1.0, -w * state.time_h());
        let [(i0, i1), (j0, j1)] = self.range;
        let kz = self.kz;
        for (c, sums) in TANGENTIAL.iter().zip(self.sums.iter_mut()) {
            let mut n = 0;
            for i in i0..i1 {
                for j in j0..j1 {
                    if c.is_electric() {
                        sums[n] += pe * state.get(*c, i, j, kz);
                    } else {
                        let v = 0.5 * (state.get(*c, i, j, kz - 1) + state.get(*c, i, j, kz));
                        sums[n] += ph * v;
                    }
                    n += 1;
                }
            }
        }
        self.samples += 1;
    }

    /// Phasors on the full plane, unfolding mirrored axes. Lengths are in
    /// grid cells.
    pub fn finish(&self) -> Result<NearFieldPlane, FarFieldError> {
        if self.samples == 0 {
            return Err(FarFieldError::NoSignal);
        }
        let norm = 2.0 / self.samples as f64;
        let planes: Vec<PlaneSamples> = TANGENTIAL
            .iter()
            .zip(&self.sums)
            .map(|(c, sums)| self.unfold(*c, sums, norm))
            .collect();
        if planes.iter().all(|p| p.values.iter().all(|v| v.norm_sqr() == 0.0)) {
            return Err(FarFieldError::NoSignal);
        }
        let mut it = planes.into_iter();
        let mut next = || it.next().expect("four components");
        Ok(NearFieldPlane {
            height: self.layout.coord(2, self.kz as f64),
            wavelength: 1.0 / self.frequency,
            ex: next(),
            ey: next(),
            hx: next(),
            hy: next(),
        })
    }

    fn unfold(&self, c: Component, sums: &[Complex64], norm: f64) -> PlaneSamples {
        let [(i0, i1), (j0, j1)] = self.range;
        let ny_src = j1 - j0;
        // per axis: list of (source index, sign) and first sample coordinate
        let axis_map = |ax: usize, lo: usize, hi: usize| -> (Vec<(usize, f64)>, f64) {
            let off = c.offset(ax);
            let fwd: Vec<(usize, f64)> = (0..hi - lo).map(|m| (m, 1.0)).collect();
            if !self.layout.mirror[ax] {
                return (fwd, self.layout.coord(ax, lo as f64 + off));
            }
            let sign = mirror_sign(c, ax, self.parity[ax]);
            // a sample on the mirror plane is not duplicated
            let skip = if off == 0.0 { 1 } else { 0 };
            let mut map: Vec<(usize, f64)> = (skip..hi - lo).rev().map(|m| (m, sign)).collect();
            let x0 = -((hi - lo - 1) as f64 + off);
            map.extend(fwd);
            (map, x0)
        };
        let (mx, x0) = axis_map(0, i0, i1);
        let (my, y0) = axis_map(1, j0, j1);
        let mut out = PlaneSamples::zeros(x0, y0, 1.0, mx.len(), my.len());
        for (a, (si, sx)) in mx.iter().enumerate() {
            for (b, (sj, sy)) in my.iter().enumerate() {
                out.values[a * my.len() + b] = sums[si * ny_src + sj] * (norm * sx * sy);
            }
        }
        out
    }
}

/// Sign picked up by component `c` when reflected through the mirror normal
/// to `axis` whose tangential-E parity is `p`.
fn mirror_sign(c: Component, axis: usize, p: Parity) -> f64 {
    let s = p.sign();
    let normal = c.axis() == axis;
    match (c.is_electric(), normal) {
        (true, false) => s,
        (true, true) => -s,
        (false, false) => -s,
        (false, true) => s,
    }
}

/// Fails when `signal` holds a second resonance near `frequency` whose
/// amplitude over the record exceeds `threshold` times the main one.
/// The window is `frequency ± half_width`.
pub fn check_single_mode(
    signal: &[f64],
    dt: f64,
    frequency: f64,
    half_width: f64,
    threshold: f64,
) -> Result<(), FarFieldError> {
    let res = extract_resonances(signal, dt, frequency - half_width, frequency + half_width)
        .map_err(|_| FarFieldError::NoSignal)?;
    let t_mid = 0.5 * signal.len() as f64 * dt;
    let strength = |r: &crate::analysis::Resonance| r.amplitude * (-r.decay * t_mid).exp();
    let main = res
        .iter()
        .min_by(|a, b| {
            (a.frequency - frequency)
                .abs()
                .total_cmp(&(b.frequency - frequency).abs())
        })
        .expect("non-empty");
    let main_strength = strength(main);
    for r in &res {
        if std::ptr::eq(r, main) {
            continue;
        }
        let ratio = strength(r) / main_strength;
        if ratio > threshold {
            return Err(FarFieldError::MultiMode {
                frequency: r.frequency,
                ratio,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(mirror: bool) -> GridLayout {
        GridLayout {
            dims: [6, 5, 8],
            origin: if mirror { [0, 0, 0] } else { [3, 2, 0] },
            mirror: [mirror, mirror, false],
            absorber: [[0, 0], [0, 0], [0, 2]],
        }
    }

    #[test]
    fn steady_cosine_gives_unit_phasor() {
        let l = layout(false);
        let dt = 0.5;
        let f = 0.05;
        let mut rec = PlaneRecorder::new(&l, 3, f, [Parity::Even; 2]).unwrap();
        let mut st = FieldState::<f64>::zeros(l, dt);
        // whole number of periods: 20 time units per period, 400 samples
        for n in 0..400 {
            st.step = n;
            let v = (2.0 * PI * f * st.time_e() + 0.3).cos();
            st.set(Component::Ex, 2, 1, 3, v);
            rec.record(&st);
        }
        let p = rec.finish().unwrap();
        let z = p.ex.values[2 * p.ex.ny + 1];
        assert!((z - Complex64::from_polar(1.0, 0.3)).norm() < 1e-9, "{z}");
        assert_eq!(p.ex.x0, -2.5);
        assert_eq!(p.hy.x0, -2.5);
        assert_eq!(p.ey.y0, -1.5);
    }

    #[test]
    fn mirror_unfolding_follows_parity() {
        let l = layout(true);
        let mut rec = PlaneRecorder::new(&l, 3, 0.05, [Parity::Odd, Parity::Even]).unwrap();
        let mut st = FieldState::<f64>::zeros(l, 0.5);
        st.set(Component::Ex, 1, 2, 3, 1.0);
        st.set(Component::Ey, 2, 1, 3, 1.0);
        rec.record(&st);
        let p = rec.finish().unwrap();
        // Ex is staggered in x: 12 samples; not in y: 9 samples
        assert_eq!((p.ex.nx, p.ex.ny), (12, 9));
        assert_eq!((p.ey.nx, p.ey.ny), (11, 10));
        let ex = |x: f64, y: f64| {
            let i = ((x - p.ex.x0) / p.ex.step).round() as usize;
            let j = ((y - p.ex.y0) / p.ex.step).round() as usize;
            p.ex.values[i * p.ex.ny + j]
        };
        // Ex is normal to the x mirror (odd tangential E -> even Ex) and
        // tangential to the y mirror (even)
        assert_eq!(ex(1.5, 2.0), ex(-1.5, 2.0));
        assert_eq!(ex(1.5, 2.0), ex(1.5, -2.0));
        assert!(ex(1.5, 2.0).norm() > 0.0);
        let ey = |x: f64, y: f64| {
            let i = ((x - p.ey.x0) / p.ey.step).round() as usize;
            let j = ((y - p.ey.y0) / p.ey.step).round() as usize;
            p.ey.values[i * p.ey.ny + j]
        };
        assert_eq!(ey(2.0, 1.5), -ey(-2.0, 1.5));
        assert_eq!(ey(2.0, 1.5), -ey(2.0, -1.5));
    }

    #[test]
    fn plane_inside_absorber_is_rejected() {
        let l = layout(false);
        assert!(PlaneRecorder::new(&l, 6, 0.05, [Parity::Even; 2]).is_err());
        assert!(PlaneRecorder::new(&l, 0, 0.05, [Parity::Even; 2]).is_err());
    }

    #[test]
    fn second_mode_is_detected() {
        let dt = 0.5;
        let sig = |b: f64| -> Vec<f64> {
            (0..6000)
                .map(|n| {
                    let t = n as f64 * dt;
                    (2.0 * PI * 0.1 * t).cos() * (-1e-4 * t).exp()
                        + b * (2.0 * PI * 0.103 * t).cos() * (-2e-4 * t).exp()
                })
                .collect()
        };
        assert!(check_single_mode(&sig(0.0), dt, 0.1, 0.008, 0.05).is_ok());
        assert!(check_single_mode(&sig(0.01), dt, 0.1, 0.008, 0.05).is_ok());
        match check_single_mode(&sig(0.3), dt, 0.1, 0.008, 0.05) {
            Err(FarFieldError::MultiMode { frequency, .. }) => assert!((frequency - 0.103).abs() < 1e-4),
            other => panic!("{other:?}"),
        }
    }
}
