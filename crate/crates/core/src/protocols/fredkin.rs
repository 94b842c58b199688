use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::binomial_se;
use super::{ExperimentResult, RunOptions, GUARD};
use crate::circuit::{Ensemble, Op, Simulator};
use crate::fockspace::{spin_projector, HybridState, Mode, ModeLayout, Spin};
use crate::generators::{CbsParams, SidebandKind};
use crate::{Error, Result, C64};

/// Shots per truth-table row used by the experiment.
pub const FREDKIN_SHOTS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FredkinResult {
    /// `table[input][output]`, basis order `|s, n_a, n_b⟩` with index
    /// `4s + 2n_a + n_b` and `g = 0`.
    pub table: Vec<Vec<f64>>,
    pub std_errors: Vec<Vec<f64>>,
    pub counts: Option<Vec<Vec<u64>>>,
    /// Mean probability of the ideal output over the eight inputs.
    pub success: f64,
    pub success_se: f64,
    pub leakage: f64,
}

/// `(spin, n_a, n_b)` of truth-table index `k`.
pub fn fredkin_label(k: usize) -> (Spin, usize, usize) {
    (if k >= 4 { Spin::E } else { Spin::G }, (k >> 1) & 1, k & 1)
}

fn label_text(k: usize) -> String {
    let (s, a, b) = fredkin_label(k);
    format!("{}{a}{b}", if s == Spin::G { "g" } else { "e" })
}

/// Ideal Fredkin output: swap a and b when the spin is `|e⟩`.
pub fn fredkin_ideal(k: usize) -> usize {
    let (s, a, b) = fredkin_label(k);
    if s == Spin::E {
        4 + 2 * b + a
    } else {
        k
    }
}

/// Truth table of the CBS gate on `{g,e} × {0,1}²`.
///
/// Each input is prepared from the (thermal) ground state with blue
/// sideband and carrier π-pulses, the gate is applied, and every output is
/// scored by three sequential spin projections: spin, then mode a, then
/// mode b, each mode mapped onto the spin with a red-sideband π-pulse.
pub fn fredkin_table(opts: &RunOptions) -> Result<FredkinResult> {
    if opts.echo {
        return Err(Error::InvalidParameter(
            "the truth table is defined for the plain gate only".into(),
        ));
    }
    opts.plan.validate()?;
    let cutoff = opts.cutoff_or(2 + GUARD);
    if cutoff < 3 {
        return Err(Error::InvalidParameter(
            "truth table needs cutoff ≥ 3".into(),
        ));
    }
    let layout = ModeLayout::new(&[cutoff, cutoff])?;
    let sim = Simulator::new(layout.clone(), opts.effective_noise())?;
    let eps = opts.noise.detect_err;
    let gate = CbsParams::gate(opts.xi, 0.0, (Mode::A, Mode::B));

    let rows = (0..8)
        .into_par_iter()
        .map(|input| -> Result<(Vec<f64>, f64)> {
            let (s, na, nb) = fredkin_label(input);
            let mut ops = Vec::new();
            for (mode, n) in [(Mode::A, na), (Mode::B, nb)] {
                if n == 1 {
                    ops.push(Op::Sideband {
                        kind: SidebandKind::Blue,
                        mode,
                    });
                    ops.push(Op::rotate(PI, 0.0));
                }
            }
            if s == Spin::E {
                ops.push(Op::rotate(PI, 0.0));
            }
            ops.push(Op::Cbs(gate));
            let ensemble = Ensemble::prepare(&layout, &[], &opts.noise)?;
            let out = sim
                .run_ensemble(&ensemble, &ops)?
                .to_state()?
                .into_density();
            let leak = out.leakage();
            let probs = (0..8)
                .map(|target| readout(&out, target, eps))
                .collect::<Result<Vec<_>>>()?;
            Ok((probs, leak))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Vec::new();
    let mut std_errors = Vec::new();
    let mut counts = Vec::new();
    let mut leakage: f64 = 0.0;
    for (input, (probs, leak)) in rows.into_iter().enumerate() {
        leakage = leakage.max(leak);
        let probs: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        let normalised: Vec<f64> = probs.iter().map(|p| p / total).collect();
        match opts.plan.counts(&normalised, input as u64)? {
            Some(c) => {
                let shots = opts.plan.shots;
                table.push(c.iter().map(|&k| k as f64 / shots as f64).collect());
                std_errors.push(c.iter().map(|&k| binomial_se(k, shots)).collect());
                counts.push(c);
            }
            None => {
                table.push(probs);
                std_errors.push(vec![0.0; 8]);
            }
        }
    }
    let success = (0..8).map(|k| table[k][fredkin_ideal(k)]).sum::<f64>() / 8.0;
    let success_se = (0..8)
        .map(|k| std_errors[k][fredkin_ideal(k)].powi(2))
        .sum::<f64>()
        .sqrt()
        / 8.0;
    Ok(FredkinResult {
        table,
        std_errors,
        counts: (!opts.plan.is_exact()).then_some(counts),
        success,
        success_se,
        leakage,
    })
}

/// Probability of reading `target` with the three-step projective readout.
fn readout(rho: &HybridState, target: usize, eps: f64) -> Result<f64> {
    let layout = rho.layout().clone();
    let (s, ta, tb) = fredkin_label(target);
    let carrier = Op::rotate(PI, 0.0).unitary(&layout)?;
    let mut state = rho.clone();
    if s == Spin::E {
        state = state.apply(&carrier)?;
    }
    state = project_dark(&state, eps)?;
    for (mode, t) in [(Mode::A, ta), (Mode::B, tb)] {
        let rsb = Op::Sideband {
            kind: SidebandKind::Red,
            mode,
        }
        .unitary(&layout)?;
        state = state.apply(&rsb)?;
        if t == 1 {
            state = state.apply(&carrier)?;
        }
        state = project_dark(&state, eps)?;
    }
    Ok(state.trace())
}

/// Keeps the branch read as "dark" (`|g⟩`), including misreads of `|e⟩`
/// with probability `eps`. The result is unnormalised.
fn project_dark(state: &HybridState, eps: f64) -> Result<HybridState> {
    let layout = state.layout();
    let g = state
        .apply(&spin_projector(layout, Spin::G))?
        .density_matrix();
    let e = state
        .apply(&spin_projector(layout, Spin::E))?
        .density_matrix();
    HybridState::density(
        layout,
        g * C64::new(1.0 - eps, 0.0) + e * C64::new(eps, 0.0),
    )
}

impl FredkinResult {
    pub fn to_experiment_result(&self, opts: &RunOptions) -> ExperimentResult {
        let mut r = ExperimentResult::new(
            "fredkin",
            opts.plan,
            &["input", "output", "probability", "std_error", "ideal"],
        );
        r.setting("basis", (0..8).map(label_text).collect::<Vec<_>>())
            .setting("echo", opts.echo);
        for i in 0..8 {
            for o in 0..8 {
                let ideal = if fredkin_ideal(i) == o { 1.0 } else { 0.0 };
                r.push_row(vec![
                    i as f64,
                    o as f64,
                    self.table[i][o],
                    self.std_errors[i][o],
                    ideal,
                ]);
            }
        }
        r.derive("success_probability", self.success, Some(self.success_se));
        r.derive("paper_reference_success", 0.82, Some(0.01));
        r.leakage = self.leakage;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_and_ideal_map() {
        assert_eq!(fredkin_label(6), (Spin::E, 1, 0));
        assert_eq!(fredkin_ideal(6), 5);
        assert_eq!(fredkin_ideal(2), 2);
        assert_eq!(label_text(5), "e01");
    }

    #[test]
    fn noiseless_table_is_permutation() {
        let r = fredkin_table(&RunOptions::noiseless()).unwrap();
        for (i, row) in r.table.iter().enumerate() {
            for (o, p) in row.iter().enumerate() {
                let ideal = if fredkin_ideal(i) == o { 1.0 } else { 0.0 };
                assert!((p - ideal).abs() < 1e-10, "{i}->{o}: {p}");
            }
        }
        assert!((r.success - 1.0).abs() < 1e-10);
    }
}
