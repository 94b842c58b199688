use std::collections::BTreeMap;

use crate::fockspace::Mode;
use crate::{Error, Result};

/// Per mode, measured `(n, coherence time in s)` pairs for the superposition
/// `(|0⟩ + |n⟩)/√2`.
pub type CoherenceData = Vec<(Mode, Vec<(usize, f64)>)>;

/// Measured coherence times of `(|0⟩ + |n⟩)/√2` for n = 1, 2 on both modes.
pub fn paper_coherence_data() -> CoherenceData {
    vec![
        (Mode::A, vec![(1, 5.0e-3), (2, 1.2e-3)]),
        (Mode::B, vec![(1, 7.0e-3), (2, 1.4e-3)]),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct DephasingFit {
    /// Number-operator dephasing rate γ in s⁻¹.
    pub gamma: f64,
    /// Residual RMS of the decay rates `1/τ_n`, s⁻¹.
    pub rms_residual: f64,
}

impl DephasingFit {
    pub fn predicted_time(&self, n: usize) -> f64 {
        coherence_time(self.gamma, n)
    }
}

/// `τ_n = 2/(γ n²)`: 1/e decay time of `|ρ_{0n}|` under a `√γ n̂` jump.
pub fn coherence_time(gamma: f64, n: usize) -> f64 {
    2.0 / (gamma * (n * n) as f64)
}

/// Fits γ per mode to `1/τ_n = γ n²/2` by least squares in rate space,
/// where the model is linear in γ.
pub fn calibrate_motional_dephasing(data: &CoherenceData) -> Result<BTreeMap<Mode, DephasingFit>> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("no coherence data given".into()));
    }
    let mut out = BTreeMap::new();
    for (mode, pairs) in data {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no coherence data for mode {mode}"
            )));
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for &(n, tau) in pairs {
            if n == 0 {
                return Err(Error::InvalidParameter(
                    "superposition (0,0) carries no dephasing information".into(),
                ));
            }
            if !(tau > 0.0) || !tau.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "coherence time must be positive, got {tau}"
                )));
            }
            let x = (n * n) as f64 / 2.0;
            num += x / tau;
            den += x * x;
        }
        let gamma = num / den;
        let rms_residual = (pairs
            .iter()
            .map(|&(n, tau)| (1.0 / tau - gamma * (n * n) as f64 / 2.0).powi(2))
            .sum::<f64>()
            / pairs.len() as f64)
            .sqrt();
        out.insert(
            *mode,
            DephasingFit {
                gamma,
                rms_residual,
            },
        );
    }
    Ok(out)
}

/// `p(1−ε) + (1−p)ε`.
pub fn flip_readout(p: f64, detect_err: f64) -> f64 {
    p * (1.0 - detect_err) + (1.0 - p) * detect_err
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_inverts() {
        let fit = calibrate_motional_dephasing(&vec![(Mode::A, vec![(1, 5.0e-3)])]).unwrap();
        assert!((fit[&Mode::A].gamma - 400.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(calibrate_motional_dephasing(&vec![]).is_err());
        assert!(calibrate_motional_dephasing(&vec![(Mode::A, vec![(0, 1e-3)])]).is_err());
        assert!(calibrate_motional_dephasing(&vec![(Mode::A, vec![])]).is_err());
    }

    #[test]
    fn flip_readout_examples() {
        assert_eq!(flip_readout(0.3, 0.0), 0.3);
        assert!((flip_readout(1.0, 0.05) - 0.95).abs() < 1e-15);
        assert!((flip_readout(0.5, 0.2) - 0.5).abs() < 1e-15);
    }
}
