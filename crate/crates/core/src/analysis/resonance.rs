//! Resonance extraction from a real time signal.
//!
//! The band of interest is shifted to zero frequency, low-pass filtered with
//! a windowed-sinc FIR and decimated. The short complex series that remains
//! is fitted with a sum of damped exponentials by the matrix-pencil method,
//! which is a rational (Padé-type) model of the band-limited spectrum.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::AnalysisError;

/// A damped sinusoid `A·e^{−Γt}·cos(2πft + φ)` found in a signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    /// Frequency in cycles per unit time.
    pub frequency: f64,
    /// Amplitude decay rate Γ.
    pub decay: f64,
    /// `πf/Γ`; infinite for undamped or growing components.
    pub q: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// Within 10% of the window half-width from a window edge.
    pub near_edge: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Singular values below this fraction of the largest are treated as noise.
    pub rank_tolerance: f64,
    pub max_order: usize,
    /// Components weaker than this fraction of the strongest are dropped.
    pub min_relative_amplitude: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            rank_tolerance: 1e-7,
            max_order: 40,
            min_relative_amplitude: 1e-4,
        }
    }
}

/// Resonances of `signal` (sampled every `dt`) with frequency in
/// `[f_min, f_max]`, strongest first.
pub fn extract_resonances(
    signal: &[f64],
    dt: f64,
    f_min: f64,
    f_max: f64,
) -> Result<Vec<Resonance>, AnalysisError> {
    extract_resonances_with(signal, dt, f_min, f_max, &FitOptions::default())
}

pub fn extract_resonances_with(
    signal: &[f64],
    dt: f64,
    f_min: f64,
    f_max: f64,
    opts: &FitOptions,
) -> Result<Vec<Resonance>, AnalysisError> {
    if !(f_min >= 0.0 && f_max > f_min && dt > 0.0) {
        return Err(AnalysisError::InvalidInput(format!(
            "bad frequency window [{f_min}, {f_max}]"
        )));
    }
    if f_max * dt >= 0.5 {
        return Err(AnalysisError::InvalidInput(
            "window extends past the Nyquist frequency".into(),
        ));
    }
    if signal.iter().all(|v| *v == 0.0) {
        return Err(AnalysisError::NoPeakFound);
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::InvalidInput("signal contains non-finite samples".into()));
    }
    let center = 0.5 * (f_min + f_max);
    let half = 0.5 * (f_max - f_min);
    let (series, tau, t0) = baseband(signal, dt, center, half)?;
    let poles = matrix_pencil(&series, opts)?;
    let amps = amplitudes(&series, &poles);

    // ranked by amplitude at the start of the record, where fast-decaying
    // fit artifacts cannot be inflated by extrapolation back to t = 0
    let mut ranked: Vec<(f64, Resonance)> = poles
        .iter()
        .zip(&amps)
        .filter_map(|(z, c)| {
            let frequency = center + z.arg() / (2.0 * PI * tau);
            let decay = -z.norm().ln() / tau;
            if (frequency - center).abs() > half || frequency <= 0.0 {
                return None;
            }
            // refer amplitude and phase back to t = 0 of the original signal
            let c0 = c * (-Complex64::new(-decay, 2.0 * PI * (frequency - center)) * t0).exp();
            let q = if decay > 0.0 { PI * frequency / decay } else { f64::INFINITY };
            Some((
                c.norm(),
                Resonance {
                    frequency,
                    decay,
                    q,
                    amplitude: 2.0 * c0.norm(),
                    phase: c0.arg(),
                    near_edge: (frequency - center).abs() > 0.9 * half,
                },
            ))
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let top = ranked.first().map_or(0.0, |r| r.0);
    let out: Vec<Resonance> = ranked
        .into_iter()
        .filter(|r| r.0 >= opts.min_relative_amplitude * top)
        .map(|r| r.1)
        .collect();
    if out.is_empty() {
        return Err(AnalysisError::NoPeakFound);
    }
    Ok(out)
}

/// The strongest resonance; fails if it sits at the window edge, where the
/// filter distorts amplitude and decay.
pub fn dominant_resonance(
    signal: &[f64],
    dt: f64,
    f_min: f64,
    f_max: f64,
) -> Result<Resonance, AnalysisError> {
    let best = extract_resonances(signal, dt, f_min, f_max)?[0];
    if best.near_edge {
        return Err(AnalysisError::IllConditioned {
            frequency: best.frequency,
        });
    }
    Ok(best)
}

/// Shifts `[center − half, center + half]` to baseband, filters and
/// decimates. Returns the series, its sample interval and the original time
/// of its first sample.
fn baseband(
    signal: &[f64],
    dt: f64,
    center: f64,
    half: f64,
) -> Result<(Vec<Complex64>, f64, f64), AnalysisError> {
    // Decimated rate 6·half: everything aliasing into the pass band lies at
    // least 5·half away and is in the filter's stop band.
    let decim = ((1.0 / (6.0 * half * dt)).floor() as usize).max(1);
    let cutoff = 3.0 * half * dt;
    let transition = 2.0 * half * dt;
    let mut taps = if decim == 1 {
        1
    } else {
        ((5.5 / transition).ceil() as usize) | 1
    };
    taps = taps.min((signal.len() / 3) | 1);
    let h = lowpass(taps, cutoff);
    let first = taps - 1;
    if signal.len() <= first {
        return Err(AnalysisError::InvalidInput("signal shorter than the filter".into()));
    }
    let count = (signal.len() - first - 1) / decim + 1;
    if count < 12 {
        return Err(AnalysisError::InvalidInput(format!(
            "signal too short for the window: {count} samples after decimation"
        )));
    }
    let w = -2.0 * PI * center * dt;
    let rot: Vec<Complex64> = (0..signal.len())
        .map(|n| Complex64::from_polar(signal[n], w * n as f64))
        .collect();
    let out: Vec<Complex64> = (0..count)
        .map(|m| {
            let n = first + m * decim;
            h.iter()
                .enumerate()
                .map(|(l, &hl)| rot[n - l] * hl)
                .sum::<Complex64>()
        })
        .collect();
    // the linear-phase filter delays by (taps − 1)/2 samples
    let t0 = (first as f64 - (taps - 1) as f64 / 2.0) * dt;
    Ok((out, decim as f64 * dt, t0))
}

/// Blackman-windowed sinc low-pass with unit DC gain; `cutoff` in cycles per sample.
fn lowpass(taps: usize, cutoff: f64) -> Vec<f64> {
    if taps == 1 {
        return vec![1.0];
    }
    let m = (taps - 1) as f64;
    let mut h: Vec<f64> = (0..taps)
        .map(|n| {
            let x = n as f64 - m / 2.0;
            let sinc = if x == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * PI * cutoff * x).sin() / (PI * x)
            };
            let w = 0.42 - 0.5 * (2.0 * PI * n as f64 / m).cos() + 0.08 * (4.0 * PI * n as f64 / m).cos();
            sinc * w
        })
        .collect();
    let s: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= s);
    h
}

/// Signal poles by the total-least-squares matrix pencil.
fn matrix_pencil(y: &[Complex64], opts: &FitOptions) -> Result<Vec<Complex64>, AnalysisError> {
    let n = y.len();
    let p = n / 3;
    let rows = n - p;
    let hankel = DMatrix::from_fn(rows, p + 1, |r, c| y[r + c]);
    let svd = hankel.svd(false, true);
    let vt = svd.v_t.ok_or(AnalysisError::IllConditioned { frequency: f64::NAN })?;
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(AnalysisError::NoPeakFound);
    }
    let order = sv
        .iter()
        .filter(|s| **s > opts.rank_tolerance * smax)
        .count()
        .min(opts.max_order)
        .min(p.saturating_sub(1))
        .max(1);
    // singular values come sorted in decreasing order
    // rows of V^H span the shifted signal vectors (z_k^c)_c
    let v = vt.rows(0, order).transpose();
    let v1 = v.rows(0, p).into_owned();
    let v2 = v.rows(1, p).into_owned();
    let pinv = v1
        .pseudo_inverse(1e-14)
        .map_err(|_| AnalysisError::IllConditioned { frequency: f64::NAN })?;
    let a = pinv * v2;
    let (_, t) = a.schur().unpack();
    Ok((0..order).map(|k| t[(k, k)]).collect())
}

/// Least-squares complex amplitudes of `y[m] = Σ c_k z_k^m`.
fn amplitudes(y: &[Complex64], poles: &[Complex64]) -> Vec<Complex64> {
    let n = y.len();
    let vander = DMatrix::from_fn(n, poles.len(), |m, k| poles[k].powu(m as u32));
    let rhs = DMatrix::from_column_slice(n, 1, y);
    match vander.svd(true, true).solve(&rhs, 1e-14) {
        Ok(c) => c.iter().copied().collect(),
        Err(_) => vec![Complex64::new(0.0, 0.0); poles.len()],
    }
}

/// Quality factor `−2πf/s` from the slope `s` of `ln W(t)` for a decaying
/// stored energy sampled every `dt`.
pub fn q_from_energy_decay(energy: &[f64], dt: f64, frequency: f64) -> Result<f64, AnalysisError> {
    let pts: Vec<(f64, f64)> = energy
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(n, w)| (n as f64 * dt, w.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(AnalysisError::NoPeakFound);
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-2.0 * PI * frequency / slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn damped(f: f64, q: f64, amp: f64, phase: f64, dt: f64, n: usize) -> Vec<f64> {
        let g = PI * f / q;
        (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                amp * (-g * t).exp() * (2.0 * PI * f * t + phase).cos()
            })
            .collect()
    }

    #[test]
    fn single_mode_recovered() {
        let dt = 0.5;
        let s = damped(0.024, 2078.0, 1.0, 0.3, dt, 12000);
        let r = dominant_resonance(&s, dt, 0.02, 0.03).unwrap();
        assert!((r.frequency - 0.024).abs() < 1e-7);
        assert!((r.q / 2078.0 - 1.0).abs() < 0.01, "q {}", r.q);
        assert!((r.amplitude - 1.0).abs() < 1e-3, "amp {}", r.amplitude);
        assert!((r.phase - 0.3).abs() < 1e-3, "phase {}", r.phase);
    }

    #[test]
    fn two_close_modes_resolved() {
        let dt = 0.5;
        let n = 20000;
        let a = damped(0.0240, 1500.0, 1.0, 0.0, dt, n);
        let b = damped(0.0240 * 1.03, 4000.0, 0.6, 1.0, dt, n);
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let mut r = extract_resonances(&s, dt, 0.02, 0.03).unwrap();
        assert!(r.len() >= 2);
        r.truncate(2);
        r.sort_by(|x, y| x.frequency.total_cmp(&y.frequency));
        assert!((r[0].q / 1500.0 - 1.0).abs() < 0.05, "q0 {}", r[0].q);
        assert!((r[1].q / 4000.0 - 1.0).abs() < 0.05, "q1 {}", r[1].q);
    }

    #[test]
    fn strong_out_of_band_mode_is_rejected() {
        let dt = 0.5;
        let n = 16000;
        let a = damped(0.024, 3000.0, 1.0, 0.0, dt, n);
        let b = damped(0.05, 50.0, 100.0, 0.0, dt, n);
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let r = dominant_resonance(&s, dt, 0.02, 0.03).unwrap();
        assert!((r.frequency - 0.024).abs() < 1e-6);
        assert!((r.q / 3000.0 - 1.0).abs() < 0.01, "q {}", r.q);
    }

    #[test]
    fn peak_at_window_edge_is_ill_conditioned() {
        let dt = 0.5;
        let s = damped(0.0299, 800.0, 1.0, 0.0, dt, 12000);
        assert!(matches!(
            dominant_resonance(&s, dt, 0.02, 0.03),
            Err(AnalysisError::IllConditioned { .. })
        ));
    }

    #[test]
    fn zero_signal_has_no_peak() {
        assert_eq!(
            extract_resonances(&[0.0; 1000], 0.5, 0.01, 0.02),
            Err(AnalysisError::NoPeakFound)
        );
    }

    #[test]
    fn energy_slope_gives_q() {
        let f = 0.03;
        let q = 900.0;
        let w: Vec<f64> = (0..200).map(|n| (-2.0 * PI * f / q * n as f64 * 5.0).exp()).collect();
        let got = q_from_energy_decay(&w, 5.0, f).unwrap();
        assert!((got / q - 1.0).abs() < 1e-9);
    }
}
