use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::displacement_matrix;
use crate::fockspace::{HybridState, LocalState, Mode, ModeLayout};
use crate::{Error, Result, C64};

/// Recipe for the motional state of one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Preparation {
    Fock {
        n: usize,
    },
    Coherent {
        alpha: C64,
    },
    /// Bose–Einstein distribution with mean `nbar`, renormalised over the
    /// cutoff.
    Thermal {
        nbar: f64,
    },
    /// Explicit Fock amplitudes, normalised on use.
    Amplitudes {
        amplitudes: Vec<C64>,
    },
    /// Incoherent mixture of other recipes.
    Mixture {
        parts: Vec<(f64, Preparation)>,
    },
}

const TAIL: f64 = 1e-12;

impl Preparation {
    pub fn fock(n: usize) -> Self {
        Preparation::Fock { n }
    }

    pub fn coherent(alpha: C64) -> Self {
        Preparation::Coherent { alpha }
    }

    pub fn thermal(nbar: f64) -> Self {
        Preparation::Thermal { nbar }
    }

    pub fn vacuum() -> Self {
        Preparation::Fock { n: 0 }
    }

    /// Highest Fock level carrying more than ~1e−12 of population.
    pub fn support_max(&self) -> usize {
        match self {
            Preparation::Fock { n } => *n,
            Preparation::Coherent { alpha } => {
                let lambda = alpha.norm_sqr();
                let mut p = (-lambda).exp();
                let mut cum = p;
                let mut n = 0;
                while 1.0 - cum > TAIL && n < 10_000 {
                    n += 1;
                    p *= lambda / n as f64;
                    cum += p;
                }
                n
            }
            Preparation::Thermal { nbar } => {
                if *nbar <= 0.0 {
                    return 0;
                }
                // P(n ≥ k) = (n̄/(n̄+1))^k
                let r = nbar / (nbar + 1.0);
                (TAIL.ln() / r.ln()).ceil() as usize
            }
            Preparation::Amplitudes { amplitudes } => amplitudes
                .iter()
                .rposition(|a| a.norm_sqr() > 0.0)
                .unwrap_or(0),
            Preparation::Mixture { parts } => parts
                .iter()
                .filter(|(w, _)| *w > 0.0)
                .map(|(_, p)| p.support_max())
                .max()
                .unwrap_or(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Preparation::Fock { .. } => Ok(()),
            Preparation::Coherent { alpha } if alpha.re.is_finite() && alpha.im.is_finite() => {
                Ok(())
            }
            Preparation::Coherent { .. } => Err(Error::InvalidParameter(
                "coherent amplitude must be finite".into(),
            )),
            Preparation::Thermal { nbar } if *nbar >= 0.0 && nbar.is_finite() => Ok(()),
            Preparation::Thermal { nbar } => Err(Error::InvalidParameter(format!(
                "thermal occupation must be non-negative, got {nbar}"
            ))),
            Preparation::Amplitudes { amplitudes } => {
                if amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() > 0.0 {
                    Ok(())
                } else {
                    Err(Error::ZeroNorm)
                }
            }
            Preparation::Mixture { parts } => {
                if parts.is_empty() || parts.iter().any(|(w, _)| !(*w >= 0.0)) {
                    return Err(Error::InvalidParameter(
                        "mixture weights must be non-negative".into(),
                    ));
                }
                if parts.iter().map(|(w, _)| w).sum::<f64>() <= 0.0 {
                    return Err(Error::ZeroNorm);
                }
                parts.iter().try_for_each(|(_, p)| p.validate())
            }
        }
    }

    /// Pure decomposition `Σ w_k |ψ_k⟩⟨ψ_k|` with normalised weights.
    pub fn components(&self, cutoff: usize, mode: Mode) -> Result<Vec<(f64, DVector<C64>)>> {
        self.validate()?;
        let out_of_range = |n: usize| Error::OccupationOutOfRange {
            mode,
            occupation: n,
            cutoff,
        };
        Ok(match self {
            Preparation::Fock { n } => {
                if *n >= cutoff {
                    return Err(out_of_range(*n));
                }
                vec![(1.0, fock_vector(cutoff, *n))]
            }
            Preparation::Coherent { alpha } => vec![(1.0, coherent_vector(*alpha, cutoff))],
            Preparation::Thermal { nbar } => thermal_weights(*nbar, cutoff)
                .into_iter()
                .enumerate()
                .filter(|(_, w)| *w > 0.0)
                .map(|(n, w)| (w, fock_vector(cutoff, n)))
                .collect(),
            Preparation::Amplitudes { amplitudes } => {
                if let Some(n) = amplitudes
                    .iter()
                    .skip(cutoff)
                    .position(|a| a.norm_sqr() > 0.0)
                {
                    return Err(out_of_range(n + cutoff));
                }
                let mut v = DVector::zeros(cutoff);
                for (k, a) in amplitudes.iter().take(cutoff).enumerate() {
                    v[k] = *a;
                }
                let norm = v.norm();
                vec![(1.0, v / C64::new(norm, 0.0))]
            }
            Preparation::Mixture { parts } => {
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                let mut out = Vec::new();
                for (w, p) in parts {
                    if *w > 0.0 {
                        for (v, psi) in p.components(cutoff, mode)? {
                            out.push((w * v / total, psi));
                        }
                    }
                }
                out
            }
        })
    }

    /// Local state on a mode of the given cutoff.
    pub fn local_state(&self, cutoff: usize, mode: Mode) -> Result<LocalState> {
        let comps = self.components(cutoff, mode)?;
        if comps.len() == 1 {
            return Ok(LocalState::Pure(comps.into_iter().next().unwrap().1));
        }
        Ok(LocalState::Mixed(mix(&comps, cutoff)))
    }

    /// Local state when the mode starts from a thermal background `nbar`
    /// instead of the vacuum. Fock-like recipes are shifted up by the
    /// background excitation; coherent states are displaced thermal states.
    pub fn local_state_with_background(
        &self,
        cutoff: usize,
        mode: Mode,
        nbar: f64,
    ) -> Result<LocalState> {
        if nbar <= 0.0 {
            return self.local_state(cutoff, mode);
        }
        self.validate()?;
        let background = thermal_weights(nbar, cutoff);
        match self {
            Preparation::Coherent { alpha } => {
                let d = displacement_matrix(*alpha, cutoff);
                let thermal = DMatrix::from_diagonal(&DVector::from_iterator(
                    cutoff,
                    background.iter().map(|&w| C64::new(w, 0.0)),
                ));
                let rho = &d * thermal * d.adjoint();
                Ok(LocalState::Mixed(normalise_trace(rho)))
            }
            Preparation::Thermal { nbar: own } => {
                Preparation::thermal(own + nbar).local_state(cutoff, mode)
            }
            Preparation::Mixture { parts } => {
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                let mut rho = DMatrix::zeros(cutoff, cutoff);
                for (w, p) in parts {
                    if *w > 0.0 {
                        let part = match p.local_state_with_background(cutoff, mode, nbar)? {
                            LocalState::Pure(v) => &v * v.adjoint(),
                            LocalState::Mixed(m) => m,
                        };
                        rho += part * C64::new(w / total, 0.0);
                    }
                }
                Ok(LocalState::Mixed(rho))
            }
            Preparation::Fock { .. } | Preparation::Amplitudes { .. } => {
                let comps = self.components(cutoff, mode)?;
                let mut shifted = Vec::new();
                for (k, &pk) in background.iter().enumerate() {
                    if pk <= TAIL {
                        continue;
                    }
                    for (w, psi) in &comps {
                        let mut v = DVector::zeros(cutoff);
                        for n in 0..cutoff.saturating_sub(k) {
                            v[n + k] = psi[n];
                        }
                        let norm = v.norm();
                        if norm > 0.0 {
                            shifted.push((pk * w, v / C64::new(norm, 0.0)));
                        }
                    }
                }
                Ok(LocalState::Mixed(normalise_trace(mix(&shifted, cutoff))))
            }
        }
    }
}

fn normalise_trace(rho: DMatrix<C64>) -> DMatrix<C64> {
    let t = rho.trace().re;
    rho / C64::new(t, 0.0)
}

fn mix(comps: &[(f64, DVector<C64>)], cutoff: usize) -> DMatrix<C64> {
    let mut rho = DMatrix::zeros(cutoff, cutoff);
    for (w, v) in comps {
        rho += v * v.adjoint() * C64::new(*w, 0.0);
    }
    rho
}

fn fock_vector(cutoff: usize, n: usize) -> DVector<C64> {
    let mut v = DVector::zeros(cutoff);
    v[n] = C64::new(1.0, 0.0);
    v
}

/// `e^{−|α|²/2} αⁿ/√n!`, renormalised over the cutoff.
fn coherent_vector(alpha: C64, cutoff: usize) -> DVector<C64> {
    let mut v = DVector::zeros(cutoff);
    let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            amp *= alpha / (n as f64).sqrt();
        }
        v[n] = amp;
    }
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Bose–Einstein weights `n̄ⁿ/(n̄+1)ⁿ⁺¹`, renormalised over the cutoff.
pub(crate) fn thermal_weights(nbar: f64, cutoff: usize) -> Vec<f64> {
    if nbar <= 0.0 {
        let mut w = vec![0.0; cutoff];
        w[0] = 1.0;
        return w;
    }
    let r = nbar / (nbar + 1.0);
    let mut w: Vec<f64> = (0..cutoff)
        .map(|n| r.powi(n as i32) / (nbar + 1.0))
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Prepares `mode` according to `prep`, with the spin in `|g⟩` and every
/// other mode in vacuum.
pub fn prepare(prep: &Preparation, mode: Mode, layout: &ModeLayout) -> Result<HybridState> {
    prepare_with_background(prep, mode, layout, &[])
}

/// As [`prepare`], with per-mode thermal backgrounds `(mode, n̄)`. Modes
/// other than `mode` start thermal.
pub fn prepare_with_background(
    prep: &Preparation,
    mode: Mode,
    layout: &ModeLayout,
    backgrounds: &[(Mode, f64)],
) -> Result<HybridState> {
    let nbar_of = |m: Mode| {
        backgrounds
            .iter()
            .find(|(bm, _)| *bm == m)
            .map_or(0.0, |(_, n)| *n)
    };
    let mut modes = Vec::new();
    for m in layout.modes() {
        let cutoff = layout.cutoff(m)?;
        let local = if m == mode {
            prep.local_state_with_background(cutoff, m, nbar_of(m))?
        } else {
            Preparation::vacuum().local_state_with_background(cutoff, m, nbar_of(m))?
        };
        modes.push(local);
    }
    layout.cutoff(mode)?;
    HybridState::product(layout, LocalState::fock(2, 0), &modes)
}
