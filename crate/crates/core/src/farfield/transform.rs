use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;

use super::{NearFieldPlane, PlaneSamples};

/// Spherical components of the radiation vectors in one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationVectors {
    pub n_theta: Complex64,
    pub n_phi: Complex64,
    pub l_theta: Complex64,
    pub l_phi: Complex64,
}

impl RadiationVectors {
    /// `K = |N_θ + L_φ/η|² + |N_φ − L_θ/η|²` with η = 1.
    pub fn intensity(&self) -> f64 {
        (self.n_theta + self.l_phi).norm_sqr() + (self.n_phi - self.l_theta).norm_sqr()
    }
}

/// `Σ f(x, y) e^{i(k_x x + k_y y)} ΔA` over the samples.
pub fn ft2(s: &PlaneSamples, kx: f64, ky: f64) -> Complex64 {
    let py = phase_table(s.y0, s.step, s.ny, ky);
    let mut px = Complex64::from_polar(1.0, kx * s.x0);
    let dpx = Complex64::from_polar(1.0, kx * s.step);
    let mut total = Complex64::new(0.0, 0.0);
    for row in s.values.chunks_exact(s.ny) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, p) in row.iter().zip(&py) {
            acc += v * p;
        }
        total += acc * px;
        px *= dpx;
    }
    total * (s.step * s.step)
}

fn phase_table(start: f64, step: f64, n: usize, k: f64) -> Vec<Complex64> {
    // direct evaluation every 64 samples keeps the recurrence error small
    let d = Complex64::from_polar(1.0, k * step);
    let mut out = Vec::with_capacity(n);
    let mut p = Complex64::new(0.0, 0.0);
    for m in 0..n {
        if m % 64 == 0 {
            p = Complex64::from_polar(1.0, k * (start + m as f64 * step));
        }
        out.push(p);
        p *= d;
    }
    out
}

/// Radiation vectors in direction `(θ, φ)`.
pub fn radiation_vectors(plane: &NearFieldPlane, theta: f64, phi: f64) -> RadiationVectors {
    let k0 = 2.0 * PI / plane.wavelength;
    let kx = k0 * theta.sin() * phi.cos();
    let ky = k0 * theta.sin() * phi.sin();
    let nx = -ft2(&plane.hy, kx, ky);
    let ny = ft2(&plane.hx, kx, ky);
    let lx = ft2(&plane.ey, kx, ky);
    let ly = -ft2(&plane.ex, kx, ky);
    let ct = theta.cos();
    let (cp, sp) = (phi.cos(), phi.sin());
    RadiationVectors {
        n_theta: (nx * cp + ny * sp) * ct,
        n_phi: -nx * sp + ny * cp,
        l_theta: (lx * cp + ly * sp) * ct,
        l_phi: -lx * sp + ly * cp,
    }
}

/// θ ∈ [0, π/2] split into `n_theta` intervals, φ ∈ [0, 2π) into `n_phi` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for AngularGrid {
    fn default() -> Self {
        AngularGrid {
            n_theta: 64,
            n_phi: 128,
        }
    }
}

impl AngularGrid {
    pub fn theta(&self, m: usize) -> f64 {
        0.5 * PI * m as f64 / self.n_theta as f64
    }

    pub fn phi(&self, n: usize) -> f64 {
        2.0 * PI * n as f64 / self.n_phi as f64
    }

    fn refined(&self) -> Self {
        AngularGrid {
            n_theta: 2 * self.n_theta,
            n_phi: 2 * self.n_phi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiationPattern {
    pub grid: AngularGrid,
    /// `K(θ_m, φ_n)` at index `m·n_phi + n`.
    pub intensity: Vec<f64>,
    pub power: f64,
    /// Relative change of `power` at the last refinement.
    pub converged_to: f64,
}

impl RadiationPattern {
    pub fn at(&self, m: usize, n: usize) -> f64 {
        self.intensity[m * self.grid.n_phi + n]
    }
}

fn pattern_on(plane: &NearFieldPlane, grid: AngularGrid) -> RadiationPattern {
    let mut intensity = Vec::with_capacity((grid.n_theta + 1) * grid.n_phi);
    for m in 0..=grid.n_theta {
        let theta = grid.theta(m);
        for n in 0..grid.n_phi {
            intensity.push(radiation_vectors(plane, theta, grid.phi(n)).intensity());
        }
    }
    let dtheta = 0.5 * PI / grid.n_theta as f64;
    let dphi = 2.0 * PI / grid.n_phi as f64;
    let mut sum = 0.0;
    for m in 0..=grid.n_theta {
        let w = if m == 0 || m == grid.n_theta { 0.5 } else { 1.0 };
        let s = grid.theta(m).sin();
        let row: f64 = intensity[m * grid.n_phi..(m + 1) * grid.n_phi].iter().sum();
        sum += w * s * row;
    }
    let power = sum * dtheta * dphi / (8.0 * plane.wavelength * plane.wavelength);
    RadiationPattern {
        grid,
        intensity,
        power,
        converged_to: f64::NAN,
    }
}

/// Radiated power `P = η/(8λ²) ∫∫ K sinθ dθ dφ` over the upper half-space,
/// refining the angular grid until successive estimates differ by less
/// than `tolerance` (relative) or `max_refinements` is reached.
pub fn radiated_power(
    plane: &NearFieldPlane,
    start: AngularGrid,
    tolerance: f64,
    max_refinements: usize,
) -> RadiationPattern {
    let mut current = pattern_on(plane, start);
    for _ in 0..max_refinements {
        let next = pattern_on(plane, current.grid.refined());
        let change = if next.power == 0.0 {
            0.0
        } else {
            ((next.power - current.power) / next.power).abs()
        };
        current = RadiationPattern {
            converged_to: change,
            ..next
        };
        if change < tolerance {
            break;
        }
    }
    current
}

/// `Q = ωW/P`; infinite when nothing is radiated.
pub fn q_from_radiated_power(energy: f64, power: f64, omega: f64) -> f64 {
    if power > 0.0 {
        omega * energy / power
    } else {
        f64::INFINITY
    }
}

/// Fraction of the spatial-spectrum weight `∫|F[f]|² d²k` of one component
/// that lies inside the light cone `|k| ≤ 2π/λ`.
pub fn light_cone_fraction(s: &PlaneSamples, wavelength: f64) -> f64 {
    let total: f64 = s.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * s.step * s.step;
    if total == 0.0 {
        return 0.0;
    }
    let k0 = 2.0 * PI / wavelength;
    let (nk, nphi) = (48, 96);
    let dk = k0 / nk as f64;
    let dphi = 2.0 * PI / nphi as f64;
    let mut inside = 0.0;
    for m in 0..nk {
        let k = (m as f64 + 0.5) * dk;
        for n in 0..nphi {
            let phi = n as f64 * dphi;
            inside += ft2(s, k * phi.cos(), k * phi.sin()).norm_sqr() * k;
        }
    }
    inside * dk * dphi / (4.0 * PI * PI) / total
}

/// CSV with columns `theta, phi, k`.
pub fn write_pattern_csv<W: Write>(mut w: W, p: &RadiationPattern) -> io::Result<()> {
    writeln!(w, "theta,phi,k")?;
    for m in 0..=p.grid.n_theta {
        for n in 0..p.grid.n_phi {
            writeln!(w, "{:.6},{:.6},{:e}", p.grid.theta(m), p.grid.phi(n), p.at(m, n))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_plane() -> NearFieldPlane {
        let z = PlaneSamples::zeros(-5.0, -5.0, 1.0, 11, 11);
        NearFieldPlane {
            height: 1.0,
            wavelength: 40.0,
            ex: z.clone(),
            ey: z.clone(),
            hx: z.clone(),
            hy: z,
        }
    }

    #[test]
    fn zero_fields_radiate_nothing() {
        let p = radiated_power(&zero_plane(), AngularGrid::default(), 0.01, 1);
        assert_eq!(p.power, 0.0);
        assert!(p.intensity.iter().all(|k| *k == 0.0));
    }

    #[test]
    fn normal_direction_uses_plane_average() {
        let mut plane = zero_plane();
        plane.ey.values.iter_mut().enumerate().for_each(|(n, v)| *v = Complex64::new(n as f64, 1.0));
        let sum: Complex64 = plane.ey.values.iter().sum();
        let r = radiation_vectors(&plane, 0.0, 0.0);
        // at θ = 0, φ = 0: L_θ = L_x = F[E_y]
        assert!((r.l_theta - sum).norm() < 1e-9);
    }

    #[test]
    fn shift_changes_only_phase() {
        let f = |x: f64, y: f64| Complex64::new((-(x * x + y * y) / 8.0).exp(), 0.3 * x);
        let a = PlaneSamples::from_fn(-6.0, -6.0, 1.0, 13, 13, f);
        let b = PlaneSamples {
            x0: a.x0 + 7.0,
            y0: a.y0 - 3.0,
            ..a.clone()
        };
        for (kx, ky) in [(0.1, 0.05), (-0.12, 0.02)] {
            let fa = ft2(&a, kx, ky);
            let fb = ft2(&b, kx, ky);
            assert!((fa.norm() - fb.norm()).abs() < 1e-12);
            let expected = fa * Complex64::from_polar(1.0, kx * 7.0 - ky * 3.0);
            assert!((fb - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn power_scales_quadratically_and_ignores_global_phase() {
        let f = |x: f64, y: f64| Complex64::new((-(x * x + y * y) / 4.0).exp(), 0.0);
        let mut plane = zero_plane();
        plane.ex = PlaneSamples::from_fn(-5.0, -5.0, 1.0, 11, 11, f);
        plane.hy = plane.ex.clone();
        let g = AngularGrid { n_theta: 16, n_phi: 32 };
        let p1 = radiated_power(&plane, g, 0.01, 0).power;
        let p2 = radiated_power(&plane.scaled(Complex64::new(2.0, 0.0)), g, 0.01, 0).power;
        let p3 = radiated_power(&plane.scaled(Complex64::from_polar(1.0, 0.7)), g, 0.01, 0).power;
        assert!(p1 > 0.0);
        assert!((p2 / p1 - 4.0).abs() < 1e-12);
        assert!((p3 / p1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn light_cone_fraction_of_broad_and_narrow_spots() {
        let broad = PlaneSamples::from_fn(-60.0, -60.0, 1.0, 121, 121, |x, y| {
            Complex64::new((-(x * x + y * y) / (2.0 * 15.0 * 15.0)).exp(), 0.0)
        });
        let narrow = PlaneSamples::from_fn(-60.0, -60.0, 1.0, 121, 121, |x, y| {
            Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0)
        });
        let fb = light_cone_fraction(&broad, 20.0);
        let fnarrow = light_cone_fraction(&narrow, 20.0);
        assert!(fb > 0.95, "{fb}");
        assert!(fnarrow < 0.2, "{fnarrow}");
    }

    #[test]
    fn q_from_power() {
        assert_eq!(q_from_radiated_power(2.0, 0.5, 0.1), 0.4);
        assert!(q_from_radiated_power(2.0, 0.0, 0.1).is_infinite());
    }
}
