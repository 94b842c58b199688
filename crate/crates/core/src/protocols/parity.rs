use std::f64::consts::{FRAC_2_PI, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentResult, RunOptions, GUARD};
use crate::circuit::{cbs_ops, Ensemble, Op, Simulator};
use crate::fockspace::{Mode, ModeLayout, Spin};
use crate::generators::{displacement, CbsParams, Preparation};
use crate::{Error, Result, C64};

/// Leakage above which a Wigner sample is flagged as unreliable.
pub const LEAKAGE_FLAG: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityResult {
    pub p_e: f64,
    pub p_g: f64,
    /// Inferred even-parity population of mode a.
    pub p_even: f64,
    pub p_even_se: f64,
    /// `P_even − P_odd`.
    pub parity: f64,
    pub leakage: f64,
}

impl ParityResult {
    pub fn to_experiment_result(&self, opts: &RunOptions) -> ExperimentResult {
        let mut r =
            ExperimentResult::new("parity", opts.plan, &["p_e", "p_g", "p_even", "std_error"]);
        r.setting("echo", opts.echo);
        r.push_row(vec![self.p_e, self.p_g, self.p_even, self.p_even_se]);
        r.derive("parity", self.parity, Some(2.0 * self.p_even_se));
        r.leakage = self.leakage;
        r
    }
}

/// `R(π/2, 0) U_CBS(2τ) R(π/2, 0)` on `|g, ψ, 0⟩`; the echo splits the
/// double-length gate once.
fn parity_ops(opts: &RunOptions) -> Vec<Op> {
    let gate = CbsParams::gate(opts.xi, 0.0, (Mode::A, Mode::B));
    let gate = gate.with_duration(2.0 * gate.duration);
    let mut ops = vec![Op::rotate(PI / 2.0, 0.0)];
    ops.extend(cbs_ops(gate, opts.echo));
    ops.push(Op::rotate(PI / 2.0, 0.0));
    ops
}

/// Spin state that signals even parity: `|e⟩` plain, `|g⟩` with echo.
fn even_spin(echo: bool) -> Spin {
    if echo {
        Spin::G
    } else {
        Spin::E
    }
}

/// Parity of `psi` on mode a read out through the spin, mode b in vacuum.
pub fn parity_gate(psi: &Preparation, opts: &RunOptions) -> Result<ParityResult> {
    psi.validate()?;
    opts.plan.validate()?;
    let cutoff = opts.cutoff_or(psi.support_max() + GUARD + 1);
    let layout = ModeLayout::new(&[cutoff, cutoff])?;
    let sim = Simulator::new(layout.clone(), opts.effective_noise())?;
    let ensemble = Ensemble::prepare(&layout, &[(Mode::A, psi.clone())], &opts.noise)?;
    let out = sim.run_ensemble(&ensemble, &parity_ops(opts))?;
    let p_e = out.spin_population(Spin::E);
    let p_g = out.spin_population(Spin::G);
    let raw = if opts.echo { p_g } else { p_e };
    let est = opts.plan.estimate(raw, 0)?;
    Ok(ParityResult {
        p_e,
        p_g,
        p_even: est.value,
        p_even_se: est.se,
        parity: 2.0 * est.value - 1.0,
        leakage: out.leakage(),
    })
}

/// Cutoff for displaced-parity scans: the state support, ten spare levels
/// and room for the largest displacement.
pub fn wigner_cutoff(support: usize, alpha_max: f64) -> usize {
    support + 10 + (5.0 * alpha_max * alpha_max).ceil() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerResult {
    pub alphas: Vec<C64>,
    pub w: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Points whose displaced state leaked above the flag level.
    pub flagged: Vec<bool>,
    pub leakage: f64,
    pub cutoff: usize,
}

impl WignerResult {
    pub fn to_experiment_result(&self, opts: &RunOptions) -> ExperimentResult {
        let mut r = ExperimentResult::new(
            "wigner",
            opts.plan,
            &["re", "im", "abs", "w", "std_error", "flagged"],
        );
        r.setting("echo", opts.echo).setting("cutoff", self.cutoff);
        for (k, a) in self.alphas.iter().enumerate() {
            r.push_row(vec![
                a.re,
                a.im,
                a.norm(),
                self.w[k],
                self.std_errors[k],
                if self.flagged[k] { 1.0 } else { 0.0 },
            ]);
        }
        r.derive(
            "flagged_points",
            self.flagged.iter().filter(|f| **f).count() as f64,
            None,
        );
        r.leakage = self.leakage;
        r
    }
}

/// `W(α) = (2/π)(P_even − P_odd)` of mode a after `D(−α)`, read with the
/// parity gate at each grid point.
pub fn wigner_scan(prep: &Preparation, alphas: &[C64], opts: &RunOptions) -> Result<WignerResult> {
    prep.validate()?;
    opts.plan.validate()?;
    if alphas
        .iter()
        .any(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        return Err(Error::InvalidParameter(
            "displacements must be finite".into(),
        ));
    }
    let alpha_max = alphas.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let cutoff = opts.cutoff_or(wigner_cutoff(prep.support_max(), alpha_max));
    let layout = ModeLayout::new(&[cutoff, cutoff])?;
    let sim = Simulator::new(layout.clone(), opts.effective_noise())?;
    let ensemble = Ensemble::prepare(&layout, &[(Mode::A, prep.clone())], &opts.noise)?;
    let ops = parity_ops(opts);
    let even = even_spin(opts.echo);

    let points = alphas
        .par_iter()
        .map(|&alpha| {
            let displaced = ensemble.apply(&displacement(-alpha, Mode::A, &layout)?)?;
            let leak = displaced.leakage();
            let out = sim.run_ensemble(&displaced, &ops)?;
            Ok((out.spin_population(even), leak.max(out.leakage())))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut w = Vec::with_capacity(alphas.len());
    let mut std_errors = Vec::with_capacity(alphas.len());
    let mut flagged = Vec::with_capacity(alphas.len());
    let mut leakage: f64 = 0.0;
    for (k, (p_even, leak)) in points.into_iter().enumerate() {
        let est = opts.plan.estimate(p_even, k as u64)?;
        w.push(FRAC_2_PI * (2.0 * est.value - 1.0));
        std_errors.push(2.0 * FRAC_2_PI * est.se);
        flagged.push(leak > LEAKAGE_FLAG);
        leakage = leakage.max(leak);
    }
    Ok(WignerResult {
        alphas: alphas.to_vec(),
        w,
        std_errors,
        flagged,
        leakage,
        cutoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::wigner_fock_analytic;

    #[test]
    fn parity_examples() {
        let opts = RunOptions::noiseless();
        assert!((parity_gate(&Preparation::fock(0), &opts).unwrap().p_e - 1.0).abs() < 1e-12);
        assert!(parity_gate(&Preparation::fock(1), &opts).unwrap().p_e.abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sup = Preparation::Amplitudes {
            amplitudes: vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        };
        assert!((parity_gate(&sup, &opts).unwrap().p_e - 0.5).abs() < 1e-12);
    }

    #[test]
    fn echo_swaps_spin_labels() {
        let psi = Preparation::Amplitudes {
            amplitudes: vec![C64::new(0.3, 0.1), C64::new(0.0, 0.7), C64::new(0.5, 0.0)],
        };
        let plain = parity_gate(&psi, &RunOptions::noiseless()).unwrap();
        let echo = parity_gate(&psi, &RunOptions::noiseless().with_echo(true)).unwrap();
        assert!((plain.p_e - echo.p_g).abs() < 1e-12);
        assert!((plain.p_even - echo.p_even).abs() < 1e-12);
    }

    #[test]
    fn wigner_fock_points() {
        let alphas = [C64::new(0.0, 0.0), C64::new(0.7, -0.4), C64::new(1.5, 0.0)];
        for n in 0..3 {
            let r = wigner_scan(&Preparation::fock(n), &alphas, &RunOptions::noiseless()).unwrap();
            for (a, w) in alphas.iter().zip(&r.w) {
                assert!(
                    (w - wigner_fock_analytic(n, *a)).abs() < 1e-6,
                    "n={n} α={a}"
                );
            }
            assert!(r.flagged.iter().all(|f| !f));
        }
    }
}
