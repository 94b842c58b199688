//! Complete experiments and their estimators.

mod fit;
mod fredkin;
mod noon;
mod parity;
mod plan;
mod result;
mod swap;

use serde::{Deserialize, Serialize};

use crate::generators::DEFAULT_XI;
use crate::noise::NoiseParams;

pub use fit::{
    fit_rabi_populations, fit_sinusoid, fit_truncated_poisson, fit_wigner_mixture, laguerre,
    wigner_fock_analytic, MixtureFit, PoissonFit, RabiFit, SinusoidFit, WignerSample,
};
pub use fredkin::{fredkin_table, FredkinResult, FREDKIN_SHOTS};
pub use noon::{
    generate_noon, noon_diagonals, noon_direct, noon_metrics, noon_offdiagonals, noon_phase,
    noon_target, noon_tomography, DiagonalResult, NoonMetrics, NoonState, NoonTomography,
    OffDiagonalResult,
};
pub use parity::{parity_gate, wigner_cutoff, wigner_scan, ParityResult, WignerResult};
pub use plan::{binomial_se, sample_counts, Estimate, Sampling, ShotPlan};
pub use result::{ExperimentResult, SCHEMA_VERSION};
pub(crate) use swap::swap_cutoff;
pub use swap::{
    overlap_matrix, reconstruct_coherent, swap_probability, swap_test, uniform_phases,
    CoherentResult, OverlapResult, SwapTestResult,
};

/// Extra Fock levels kept above the highest populated one.
pub const GUARD: usize = 4;

/// Settings shared by every protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub noise: NoiseParams,
    pub plan: ShotPlan,
    /// Use spin-echoed CBS gates.
    pub echo: bool,
    /// CBS coupling ξ, rad/s.
    pub xi: f64,
    /// Fock cutoff for every mode; chosen per protocol when absent.
    pub cutoff: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            noise: NoiseParams::noiseless(),
            plan: ShotPlan::exact(),
            echo: false,
            xi: DEFAULT_XI,
            cutoff: None,
        }
    }
}

impl RunOptions {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn with_echo(mut self, echo: bool) -> Self {
        self.echo = echo;
        self
    }

    pub fn with_noise(mut self, noise: NoiseParams) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_plan(mut self, plan: ShotPlan) -> Self {
        self.plan = plan;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    /// Noise seen by the gate sequence: echoed runs use the echoed spin
    /// dephasing rate.
    pub fn effective_noise(&self) -> NoiseParams {
        if self.echo {
            self.noise.for_echo()
        } else {
            self.noise.clone()
        }
    }

    fn cutoff_or(&self, auto: usize) -> usize {
        self.cutoff.unwrap_or(auto)
    }
}
