use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_sinusoid, fit_truncated_poisson, PoissonFit, SinusoidFit};
use super::{ExperimentResult, RunOptions, GUARD};
use crate::circuit::{cbs_ops, Ensemble, Op, Simulator};
use crate::fockspace::{Mode, ModeLayout, Spin};
use crate::generators::{spin_rotation, CbsParams, Preparation, RotationParams};
use crate::{Error, Result, C64};

/// Phase steps per swap-test scan used in the experiment.
pub const SWAP_PHASES: usize = 24;

/// `k` phases evenly covering `[0, 2π)`.
pub fn uniform_phases(k: usize) -> Vec<f64> {
    (0..k).map(|i| 2.0 * PI * i as f64 / k as f64).collect()
}

/// Ideal swap-test outcome `½[1 − (−1)^{m+1} cos φ · |⟨m|ψ⟩|²]`.
pub fn swap_probability(overlap_sq: f64, m: usize, phi: f64) -> f64 {
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    0.5 * (1.0 - sign * phi.cos() * overlap_sq)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapTestResult {
    pub m: usize,
    pub phases: Vec<f64>,
    /// Probability of the outcome that reads `|e⟩` in the plain sequence.
    pub probabilities: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub counts: Option<Vec<u64>>,
    /// `None` with fewer than four phases.
    pub fit: Option<SinusoidFit>,
    pub leakage: f64,
}

impl SwapTestResult {
    pub fn contrast(&self) -> Option<f64> {
        self.fit.map(|f| f.contrast())
    }

    pub fn contrast_se(&self) -> Option<f64> {
        self.fit.map(|f| f.contrast_se())
    }

    pub fn to_experiment_result(&self, opts: &RunOptions) -> ExperimentResult {
        let mut r =
            ExperimentResult::new("swaptest", opts.plan, &["phi", "probability", "std_error"]);
        r.setting("m", self.m)
            .setting("echo", opts.echo)
            .setting("phases", &self.phases);
        for (k, phi) in self.phases.iter().enumerate() {
            r.push_row(vec![*phi, self.probabilities[k], self.std_errors[k]]);
        }
        if let Some(f) = self.fit {
            r.derive("contrast", f.contrast(), Some(f.contrast_se()))
                .derive("offset", f.offset, Some(f.offset_se))
                .derive("phase", f.phase, Some(f.phase_se));
        }
        if let Some(c) = &self.counts {
            r.setting("counts", c);
        }
        r.leakage = self.leakage;
        r
    }
}

/// Cutoff that holds `psi` and `|m⟩` with the guard band above both.
pub(crate) fn swap_cutoff(psi: &Preparation, m: usize) -> usize {
    psi.support_max().max(m) + GUARD + 1
}

/// Swap test between `psi` on mode a and `|m⟩` on mode b:
/// `R(π/2, φ) · U_CBS · R(π/2, 0)` on `|g, ψ, m⟩`, one setting per phase.
///
/// With echo the sequence reads the opposite spin state; the reported
/// probability is always the one that obeys the plain-sequence law.
pub fn swap_test(
    psi: &Preparation,
    m: usize,
    phis: &[f64],
    opts: &RunOptions,
) -> Result<SwapTestResult> {
    let cutoff = opts.cutoff_or(swap_cutoff(psi, m));
    swap_test_streamed(psi, m, phis, opts, cutoff, 0)
}

fn swap_test_streamed(
    psi: &Preparation,
    m: usize,
    phis: &[f64],
    opts: &RunOptions,
    cutoff: usize,
    stream_base: u64,
) -> Result<SwapTestResult> {
    psi.validate()?;
    opts.plan.validate()?;
    if m + GUARD >= cutoff {
        return Err(Error::OccupationOutOfRange {
            mode: Mode::B,
            occupation: m,
            cutoff,
        });
    }
    let layout = ModeLayout::new(&[cutoff, cutoff])?;
    let sim = Simulator::new(layout.clone(), opts.effective_noise())?;
    let mut ops = vec![Op::rotate(PI / 2.0, 0.0)];
    ops.extend(cbs_ops(
        CbsParams::gate(opts.xi, 0.0, (Mode::A, Mode::B)),
        opts.echo,
    ));
    let ensemble = Ensemble::prepare(
        &layout,
        &[(Mode::A, psi.clone()), (Mode::B, Preparation::fock(m))],
        &opts.noise,
    )?;
    let before = sim.run_ensemble(&ensemble, &ops)?;
    let leakage = before.leakage();
    let read = if opts.echo { Spin::G } else { Spin::E };

    let exact: Vec<f64> = phis
        .par_iter()
        .map(|&phi| {
            let r = spin_rotation(&RotationParams::new(PI / 2.0, phi), &layout);
            Ok(before.apply(&r)?.spin_population(read))
        })
        .collect::<Result<_>>()?;
    let mut probabilities = Vec::with_capacity(phis.len());
    let mut std_errors = Vec::with_capacity(phis.len());
    let mut counts = Vec::new();
    for (k, p) in exact.iter().enumerate() {
        let e = opts.plan.estimate(*p, stream_base + k as u64)?;
        probabilities.push(e.value);
        std_errors.push(e.se);
        if let Some(c) = e.count {
            counts.push(c);
        }
    }
    let fit = if phis.len() >= 4 {
        let errors = (!opts.plan.is_exact()).then_some(std_errors.as_slice());
        Some(fit_sinusoid(phis, &probabilities, errors, 1.0)?)
    } else {
        None
    };
    Ok(SwapTestResult {
        m,
        phases: phis.to_vec(),
        probabilities,
        std_errors,
        counts: (!opts.plan.is_exact()).then_some(counts),
        fit,
        leakage,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    /// `contrast[n][m]` for `ψ = |n⟩` against `|m⟩`.
    pub contrast: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
    pub leakage: f64,
}

impl OverlapResult {
    pub fn to_experiment_result(&self, opts: &RunOptions) -> ExperimentResult {
        let mut r =
            ExperimentResult::new("overlap", opts.plan, &["n", "m", "contrast", "std_error"]);
        r.setting("n_max", self.contrast.len() - 1)
            .setting("echo", opts.echo)
            .setting("phases", uniform_phases(SWAP_PHASES));
        for (n, row) in self.contrast.iter().enumerate() {
            for (m, c) in row.iter().enumerate() {
                r.push_row(vec![n as f64, m as f64, *c, self.std_errors[n][m]]);
            }
        }
        r.leakage = self.leakage;
        r
    }
}

/// Swap-test contrast of every Fock pair `(n, m)` with `n, m ≤ n_max`,
/// 24 phases each.
pub fn overlap_matrix(n_max: usize, opts: &RunOptions) -> Result<OverlapResult> {
    let cutoff = opts.cutoff_or(n_max + GUARD + 1);
    let phis = uniform_phases(SWAP_PHASES);
    let size = n_max + 1;
    let cells = (0..size * size)
        .into_par_iter()
        .map(|k| {
            let (n, m) = (k / size, k % size);
            swap_test_streamed(
                &Preparation::fock(n),
                m,
                &phis,
                opts,
                cutoff,
                (k as u64) << 16,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut contrast = vec![vec![0.0; size]; size];
    let mut std_errors = vec![vec![0.0; size]; size];
    let mut leakage: f64 = 0.0;
    for (k, cell) in cells.into_iter().enumerate() {
        contrast[k / size][k % size] = cell.contrast().unwrap_or(0.0);
        std_errors[k / size][k % size] = cell.contrast_se().unwrap_or(0.0);
        leakage = leakage.max(cell.leakage);
    }
    Ok(OverlapResult {
        contrast,
        std_errors,
        leakage,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentResult {
    pub alpha: C64,
    /// Measured `|⟨n|α⟩|²` for `n = 0..=n_max`.
    pub populations: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub fit: PoissonFit,
    pub leakage: f64,
}

impl CoherentResult {
    pub fn to_experiment_result(&self, opts: &RunOptions) -> ExperimentResult {
        let mut r = ExperimentResult::new("coherent", opts.plan, &["n", "population", "std_error"]);
        r.setting("alpha", [self.alpha.re, self.alpha.im])
            .setting("echo", opts.echo)
            .setting("phases", uniform_phases(SWAP_PHASES));
        for (n, p) in self.populations.iter().enumerate() {
            r.push_row(vec![n as f64, *p, self.std_errors[n]]);
        }
        r.derive("alpha_sq", self.fit.mean, Some(self.fit.mean_se))
            .derive("alpha_sq_target", self.alpha.norm_sqr(), None);
        r.leakage = self.leakage;
        r
    }
}

/// Fock populations of a coherent state read out with swap tests against
/// `|0⟩ … |n_max⟩`, then `|α|²` by truncated-Poisson maximum likelihood.
pub fn reconstruct_coherent(alpha: C64, n_max: usize, opts: &RunOptions) -> Result<CoherentResult> {
    let psi = Preparation::coherent(alpha);
    let cutoff = opts.cutoff_or(swap_cutoff(&psi, n_max));
    if alpha.norm_sqr() + GUARD as f64 >= cutoff as f64 {
        return Err(Error::InvalidParameter(format!(
            "|α|² = {} does not fit below cutoff {cutoff} with the guard band",
            alpha.norm_sqr()
        )));
    }
    let phis = uniform_phases(SWAP_PHASES);
    let tests = (0..=n_max)
        .into_par_iter()
        .map(|m| swap_test_streamed(&psi, m, &phis, opts, cutoff, (m as u64) << 16))
        .collect::<Result<Vec<_>>>()?;
    let populations: Vec<f64> = tests.iter().map(|t| t.contrast().unwrap_or(0.0)).collect();
    let std_errors: Vec<f64> = tests
        .iter()
        .map(|t| t.contrast_se().unwrap_or(0.0))
        .collect();
    let errors = (!opts.plan.is_exact()).then_some(std_errors.as_slice());
    let fit = fit_truncated_poisson(&populations, errors)?;
    Ok(CoherentResult {
        alpha,
        populations,
        std_errors,
        fit,
        leakage: tests.iter().map(|t| t.leakage).fold(0.0, f64::max),
    })
}
