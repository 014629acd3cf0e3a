use serde::{Deserialize, Serialize};

/// Quality factors split by loss channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QSplit {
    /// `ωW/P_vertical`.
    pub q_perp: f64,
    /// `ωW/P_lateral`.
    pub q_par: f64,
    /// `ωW/(P_vertical + P_lateral)`.
    pub q_total: f64,
    /// A face carried net inward power, which points at interference with
    /// another mode or a monitor too close to the source.
    pub negative_flux: bool,
}

/// Splits the loss of a mode with angular frequency `omega` and cycle-averaged
/// stored energy `energy` into vertical and lateral channels, given the
/// cycle-averaged outward power through each monitor face.
pub fn split_q(omega: f64, energy: f64, vertical: &[f64], lateral: &[f64]) -> QSplit {
    let negative_flux = vertical.iter().chain(lateral).any(|p| *p < 0.0);
    let pv: f64 = vertical.iter().sum();
    let pl: f64 = lateral.iter().sum();
    let q = |p: f64| if p > 0.0 { omega * energy / p } else { f64::INFINITY };
    QSplit {
        q_perp: q(pv),
        q_par: q(pl),
        q_total: q(pv + pl),
        negative_flux,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channels_add_as_inverse_q() {
        let s = split_q(0.2, 50.0, &[0.001, 0.002], &[0.01]);
        assert!((1.0 / s.q_total - 1.0 / s.q_perp - 1.0 / s.q_par).abs() < 1e-15);
        assert!(!s.negative_flux);
        assert!((s.q_perp - 0.2 * 50.0 / 0.003).abs() < 1e-9);
    }

    #[test]
    fn inward_flux_is_flagged() {
        let s = split_q(1.0, 1.0, &[0.1], &[-0.01, 0.02]);
        assert!(s.negative_flux);
    }

    #[test]
    fn lossless_is_unbounded() {
        let s = split_q(1.0, 1.0, &[0.0], &[0.0]);
        assert!(s.q_total.is_infinite());
    }
}
