use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_rabi_populations, fit_sinusoid, RabiFit, SinusoidFit};
use super::swap::uniform_phases;
use super::{ExperimentResult, RunOptions, ShotPlan, GUARD};
use crate::circuit::{cbs_ops, Ensemble, Op, Simulator};
use crate::fockspace::{Factor, HybridState, Mode, ModeLayout, Spin};
use crate::generators::{
    blue_sideband_u, joint_sideband_u, u_bs, CbsParams, JointSidebandParams, Preparation,
    DEFAULT_XI,
};
use crate::{Error, Result, C64};

/// Base sideband Rabi frequency used for the population readout, rad/s.
pub const TOMOGRAPHY_OMEGA0: f64 = 2.0 * PI * 1e3;

/// Beam-splitter phases per off-diagonal scan.
pub const OFFDIAGONAL_PHASES: usize = 24;

/// Excitations above `n` whose sideband frequencies are included in the
/// population fits (heating moves population there).
const EXTRA_LEVELS: usize = 2;

/// Middle-pulse phase that makes the sequence produce a NOON state.
pub fn noon_phase(n: usize) -> f64 {
    if n % 2 == 1 {
        0.0
    } else {
        FRAC_PI_2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoonState {
    pub n: usize,
    pub echo: bool,
    pub phi: f64,
    pub state: HybridState,
}

impl NoonState {
    /// Overlap with the ideal output of the sequence.
    pub fn fidelity(&self) -> Result<f64> {
        self.state
            .fidelity_with(&noon_target(self.n, self.echo, self.state.layout())?)
    }
}

/// Ideal output of the NOON sequence on `|g, n, 0⟩`:
///
/// | sequence   | state                                  |
/// |------------|----------------------------------------|
/// | plain, odd | `|g⟩(|n,0⟩ − (−i)ⁿ|0,n⟩)/√2`           |
/// | plain, even| `|e⟩(−i|n,0⟩ + (−i)ⁿ|0,n⟩)/√2`         |
/// | echo, odd  | `i|e⟩(|n,0⟩ − (−i)ⁿ|0,n⟩)/√2`          |
/// | echo, even | `|e⟩(i|n,0⟩ + (−i)ⁿ|0,n⟩)/√2`          |
pub fn noon_target(n: usize, echo: bool, layout: &ModeLayout) -> Result<DVector<C64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("NOON states need n ≥ 1".into()));
    }
    let i = C64::new(0.0, 1.0);
    let phase_n = C64::new(0.0, -1.0).powu(n as u32);
    let one = C64::new(1.0, 0.0);
    let (spin, c_n0, c_0n) = match (echo, n % 2 == 1) {
        (false, true) => (Spin::G, one, -phase_n),
        (false, false) => (Spin::E, -i, phase_n),
        (true, true) => (Spin::E, i, -i * phase_n),
        (true, false) => (Spin::E, i, phase_n),
    };
    let mut v = DVector::zeros(layout.dim());
    v[layout.basis_index(spin, &[n, 0])?] = c_n0 * FRAC_1_SQRT_2;
    v[layout.basis_index(spin, &[0, n])?] = c_0n * FRAC_1_SQRT_2;
    Ok(v)
}

/// `R(π/2, 0) U_CBS R(π/2, φ) U_CBS R(π/2, 0)` on `|g, n, 0⟩`.
///
/// `phi_override` replaces the parity-selected middle phase; with the
/// wrong phase for the parity of `n` the output is not a NOON state.
pub fn generate_noon(n: usize, opts: &RunOptions, phi_override: Option<f64>) -> Result<NoonState> {
    if !(1..=12).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "NOON order must be in 1..=12, got {n}"
        )));
    }
    let phi = phi_override.unwrap_or(noon_phase(n));
    if phi_override.is_some_and(|p| (p - noon_phase(n)).abs() > 1e-12) {
        log::warn!("middle pulse phase {phi} differs from the value required for n = {n}");
    }
    let cutoff = opts.cutoff_or(n + GUARD + 1);
    if cutoff < n + 1 {
        return Err(Error::OccupationOutOfRange {
            mode: Mode::A,
            occupation: n,
            cutoff,
        });
    }
    let layout = ModeLayout::new(&[cutoff, cutoff])?;
    let sim = Simulator::new(layout.clone(), opts.effective_noise())?;
    let gate = CbsParams::gate(opts.xi, 0.0, (Mode::A, Mode::B));
    let mut ops = vec![Op::rotate(PI / 2.0, 0.0)];
    ops.extend(cbs_ops(gate, opts.echo));
    ops.push(Op::rotate(PI / 2.0, phi));
    ops.extend(cbs_ops(gate, opts.echo));
    ops.push(Op::rotate(PI / 2.0, 0.0));
    let ensemble = Ensemble::prepare(&layout, &[(Mode::A, Preparation::fock(n))], &opts.noise)?;
    let state = sim.run_ensemble(&ensemble, &ops)?.to_state()?;
    Ok(NoonState {
        n,
        echo: opts.echo,
        phi,
        state,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoonMetrics {
    pub n: usize,
    /// `P_{n,0} + P_{0,n}`.
    pub diagonal: f64,
    pub diagonal_se: f64,
    /// `|ρ_{n0,0n}|`.
    pub offdiagonal: f64,
    pub offdiagonal_se: f64,
    pub fidelity: f64,
    pub fidelity_se: f64,
    pub fisher: f64,
    pub fisher_se: f64,
}

impl NoonMetrics {
    /// Fidelity above ½ certifies entanglement.
    pub fn entangled(&self) -> bool {
        self.fidelity > 0.5
    }

    /// `F_Q > n` beats every classically correlated state.
    pub fn beats_classical(&self) -> bool {
        self.fisher > self.n as f64
    }
}

/// `F = (P + 2|ρ|)/2` and `F_Q = n²(2|ρ|)²/P` from the NOON diagonal sum
/// `P` and coherence `|ρ|`, with first-order error propagation.
pub fn noon_metrics(diag: (f64, f64), offdiag: (f64, f64), n: usize) -> Result<NoonMetrics> {
    let (d, d_se) = diag;
    let (o, o_se) = offdiag;
    for (name, v) in [("diagonal", d), ("off-diagonal", o)] {
        if !v.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} element {v} outside [0, 1]"
            )));
        }
    }
    if d <= 0.0 {
        return Err(Error::InvalidParameter(
            "zero NOON population: Fisher information undefined".into(),
        ));
    }
    let n2 = (n * n) as f64;
    let fisher = n2 * 4.0 * o * o / d;
    let df_do = 8.0 * n2 * o / d;
    let df_dd = -fisher / d;
    Ok(NoonMetrics {
        n,
        diagonal: d,
        diagonal_se: d_se,
        offdiagonal: o,
        offdiagonal_se: o_se,
        fidelity: (d + 2.0 * o) / 2.0,
        fidelity_se: ((d_se / 2.0).powi(2) + o_se.powi(2)).sqrt(),
        fisher,
        fisher_se: ((df_dd * d_se).powi(2) + (df_do * o_se).powi(2)).sqrt(),
    })
}

/// Metrics from the exact motional density matrix.
pub fn noon_direct(state: &NoonState) -> Result<NoonMetrics> {
    let n = state.n;
    let rho = state
        .state
        .partial_trace(&[Factor::Mode(Mode::A), Factor::Mode(Mode::B)])?;
    let (i, j) = (rho.index(&[n, 0]), rho.index(&[0, n]));
    let diag = rho.matrix[(i, i)].re + rho.matrix[(j, j)].re;
    noon_metrics((diag, 0.0), (rho.matrix[(i, j)].norm(), 0.0), n)
}

/// Sideband scan of one spin-reset state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandScan {
    pub times: Vec<f64>,
    pub pe: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub fit: RabiFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalResult {
    pub n: usize,
    pub omega0: f64,
    /// Joint blue-sideband scan; fit frequencies are `√(d+1)·Ω₀`.
    pub joint: SidebandScan,
    /// Single-mode blue-sideband scans of a and b (only for `n = 3`).
    pub marginals: Option<(SidebandScan, SidebandScan)>,
    /// Component at `d + 1 = n + 1` before any correction.
    pub raw: f64,
    /// `|1,1⟩` upper bound subtracted for `n = 3`.
    pub correction: f64,
    /// Estimated `P_{n,0} + P_{0,n}`.
    pub population: f64,
    pub population_se: f64,
}

/// Distinct products `(i+1)(j+1)` over `i + j ≤ max_total`.
fn joint_products(max_total: usize) -> Vec<usize> {
    let mut set = BTreeSet::new();
    for i in 0..=max_total {
        for j in 0..=max_total - i {
            set.insert((i + 1) * (j + 1));
        }
    }
    set.into_iter().collect()
}

/// Time grid that resolves `frequencies`: spans three periods of the
/// slowest and `2π` over the closest gap (with margin) at twice the
/// Nyquist rate of the fastest.
pub fn sideband_time_grid(frequencies: &[f64]) -> Vec<f64> {
    let mut f = frequencies.to_vec();
    f.sort_by(f64::total_cmp);
    let slowest = f[0];
    let fastest = f[f.len() - 1];
    let gap = f
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let mut span = 6.0 * PI / slowest;
    if gap.is_finite() {
        span = span.max(2.0 * PI / gap);
    }
    span *= 1.25;
    let dt = PI / (2.0 * fastest);
    let count = (span / dt).ceil() as usize + 1;
    (0..count)
        .map(|k| k as f64 * span / (count - 1) as f64)
        .collect()
}

/// Frequencies of the joint sideband fit for a NOON state of order `n`.
pub fn joint_frequencies(n: usize, omega0: f64) -> Vec<f64> {
    joint_products(n + EXTRA_LEVELS)
        .into_iter()
        .map(|p| (p as f64).sqrt() * omega0)
        .collect()
}

fn single_frequencies(n: usize, omega0: f64) -> Vec<f64> {
    (1..=n + EXTRA_LEVELS + 1)
        .map(|k| (k as f64).sqrt() * omega0)
        .collect()
}

/// Excited-state probability after resetting the spin to `|g⟩` and driving
/// `drive(t)` for every time in `times`, sampled per `plan`.
fn scan<F>(
    start: &HybridState,
    times: &[f64],
    plan: &ShotPlan,
    stream_base: u64,
    frequencies: &[f64],
    drive: F,
) -> Result<SidebandScan>
where
    F: Fn(f64) -> Result<crate::fockspace::LinearOperator> + Sync,
{
    let exact: Vec<f64> = times
        .par_iter()
        .map(|&t| Ok(start.apply(&drive(t)?)?.spin_population(Spin::E)))
        .collect::<Result<_>>()?;
    let mut pe = Vec::with_capacity(times.len());
    let mut std_errors = Vec::with_capacity(times.len());
    for (k, p) in exact.into_iter().enumerate() {
        let e = plan.estimate(p, stream_base + k as u64)?;
        pe.push(e.value);
        std_errors.push(e.se);
    }
    let errors = (!plan.is_exact()).then_some(std_errors.as_slice());
    let fit = fit_rabi_populations(times, &pe, errors, frequencies)?;
    Ok(SidebandScan {
        times: times.to_vec(),
        pe,
        std_errors,
        fit,
    })
}

fn component(fit: &RabiFit, frequency: f64) -> (f64, f64) {
    let k = fit
        .frequencies
        .iter()
        .position(|f| (f - frequency).abs() <= 1e-9 * frequency)
        .expect("frequency is part of the fit");
    (fit.populations[k], fit.std_errors[k])
}

/// `P_{n,0} + P_{0,n}` from joint blue-sideband Rabi oscillations.
///
/// The spin is reset to `|g⟩`, the joint sideband is driven for each time in
/// `times`, and populations are fitted at the known frequencies
/// `√((i+1)(j+1))·Ω₀`. For `n = 3`, `|1,1⟩` shares the frequency of
/// `|3,0⟩` and `|0,3⟩`; the smaller single-mode `|1⟩` population (from a
/// single-mode sideband scan on each mode) bounds it and is subtracted.
pub fn noon_diagonals(
    state: &HybridState,
    n: usize,
    omega0: f64,
    times: &[f64],
    plan: &ShotPlan,
) -> Result<DiagonalResult> {
    plan.validate()?;
    let layout = state.layout().clone();
    let reset = state.reset_spin(Spin::G)?;
    let frequencies = joint_frequencies(n, omega0);
    let joint = scan(&reset, times, plan, 0, &frequencies, |t| {
        joint_sideband_u(
            &JointSidebandParams {
                omega0,
                duration: t,
            },
            (Mode::A, Mode::B),
            &layout,
        )
    })?;
    let target = ((n + 1) as f64).sqrt() * omega0;
    let (raw, raw_se) = component(&joint.fit, target);

    let (marginals, correction, correction_se) = if n == 3 {
        let freqs = single_frequencies(n, omega0);
        let single_times = sideband_time_grid(&freqs);
        let run = |mode: Mode, base: u64| {
            scan(&reset, &single_times, plan, base, &freqs, |t| {
                blue_sideband_u(
                    &JointSidebandParams {
                        omega0,
                        duration: t,
                    },
                    mode,
                    &layout,
                )
            })
        };
        let a = run(Mode::A, 1 << 20)?;
        let b = run(Mode::B, 2 << 20)?;
        let one = 2f64.sqrt() * omega0;
        let pa = component(&a.fit, one);
        let pb = component(&b.fit, one);
        let (c, c_se) = if pa.0 <= pb.0 { pa } else { pb };
        (Some((a, b)), c.max(0.0), c_se)
    } else {
        (None, 0.0, 0.0)
    };
    Ok(DiagonalResult {
        n,
        omega0,
        joint,
        marginals,
        raw,
        correction,
        population: raw - correction,
        population_se: raw_se.hypot(correction_se),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalResult {
    pub n: usize,
    pub upsilons: Vec<f64>,
    /// `⟨(−1)^{n̂_a}⟩` after the beam splitter.
    pub parity: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub fit: SinusoidFit,
    /// `|ρ_{n0,0n}|`, half the parity oscillation amplitude.
    pub coherence: f64,
    pub coherence_se: f64,
}

/// `|ρ_{n0,0n}|` from the parity of mode a after a 50:50 beam splitter
/// `U_BS(π/(4ξ), υ)`, swept over `υ` and fitted at harmonic `n`.
pub fn noon_offdiagonals(
    state: &HybridState,
    n: usize,
    upsilons: &[f64],
    plan: &ShotPlan,
) -> Result<OffDiagonalResult> {
    plan.validate()?;
    if upsilons.len() < 5 {
        return Err(Error::Fit(format!(
            "need at least 5 beam-splitter phases, got {}",
            upsilons.len()
        )));
    }
    let layout = state.layout().clone();
    if layout.num_modes() < 2 {
        return Err(Error::InvalidLayout(
            "off-diagonal readout needs modes a and b".into(),
        ));
    }
    let half =
        CbsParams::gate(DEFAULT_XI, 0.0, (Mode::A, Mode::B)).with_duration(PI / (4.0 * DEFAULT_XI));
    let exact: Vec<f64> = upsilons
        .par_iter()
        .map(|&u| {
            let out = state.apply(&u_bs(&half.with_upsilon(u), &layout)?)?;
            let dist = out.mode_distribution(Mode::A)?;
            Ok(dist.iter().step_by(2).sum::<f64>())
        })
        .collect::<Result<_>>()?;
    let mut parity = Vec::with_capacity(upsilons.len());
    let mut std_errors = Vec::with_capacity(upsilons.len());
    for (k, p_even) in exact.into_iter().enumerate() {
        let e = plan.estimate(p_even, (3 << 20) + k as u64)?;
        parity.push(2.0 * e.value - 1.0);
        std_errors.push(2.0 * e.se);
    }
    let errors = (!plan.is_exact()).then_some(std_errors.as_slice());
    let fit = fit_sinusoid(upsilons, &parity, errors, n as f64)?;
    Ok(OffDiagonalResult {
        n,
        upsilons: upsilons.to_vec(),
        parity,
        std_errors,
        coherence: fit.amplitude / 2.0,
        coherence_se: fit.amplitude_se / 2.0,
        fit,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoonTomography {
    pub state: NoonState,
    pub diagonals: DiagonalResult,
    pub offdiagonals: OffDiagonalResult,
    pub metrics: NoonMetrics,
    pub direct: NoonMetrics,
}

/// Generates a NOON state and characterises it with the sideband and
/// beam-splitter readouts.
pub fn noon_tomography(n: usize, opts: &RunOptions) -> Result<NoonTomography> {
    let state = generate_noon(n, opts, None)?;
    let times = sideband_time_grid(&joint_frequencies(n, TOMOGRAPHY_OMEGA0));
    let diagonals = noon_diagonals(&state.state, n, TOMOGRAPHY_OMEGA0, &times, &opts.plan)?;
    let offdiagonals = noon_offdiagonals(
        &state.state,
        n,
        &uniform_phases(OFFDIAGONAL_PHASES),
        &opts.plan,
    )?;
    let metrics = noon_metrics(
        (
            diagonals.population.clamp(0.0, 1.0),
            diagonals.population_se,
        ),
        (
            offdiagonals.coherence.clamp(0.0, 0.5),
            offdiagonals.coherence_se,
        ),
        n,
    )?;
    let direct = noon_direct(&state)?;
    Ok(NoonTomography {
        state,
        diagonals,
        offdiagonals,
        metrics,
        direct,
    })
}

impl NoonTomography {
    /// Series 0 is the joint sideband scan (x = time), 1 the parity scan
    /// (x = υ), 2 and 3 the single-mode scans of a and b when present.
    pub fn to_experiment_result(&self, opts: &RunOptions) -> ExperimentResult {
        let mut r =
            ExperimentResult::new("noon", opts.plan, &["series", "x", "value", "std_error"]);
        r.setting("n", self.state.n)
            .setting("echo", opts.echo)
            .setting("phi", self.state.phi)
            .setting("omega0", self.diagonals.omega0)
            .setting("cutoff", self.state.state.layout().cutoffs());
        let mut push = |series: f64, xs: &[f64], ys: &[f64], es: &[f64]| {
            for k in 0..xs.len() {
                r.push_row(vec![series, xs[k], ys[k], es[k]]);
            }
        };
        let d = &self.diagonals;
        push(0.0, &d.joint.times, &d.joint.pe, &d.joint.std_errors);
        let o = &self.offdiagonals;
        push(1.0, &o.upsilons, &o.parity, &o.std_errors);
        if let Some((a, b)) = &d.marginals {
            push(2.0, &a.times, &a.pe, &a.std_errors);
            push(3.0, &b.times, &b.pe, &b.std_errors);
        }
        let m = &self.metrics;
        r.derive("diagonal", m.diagonal, Some(m.diagonal_se))
            .derive("offdiagonal", m.offdiagonal, Some(m.offdiagonal_se))
            .derive("fidelity", m.fidelity, Some(m.fidelity_se))
            .derive("fisher", m.fisher, Some(m.fisher_se))
            .derive("n11_correction", d.correction, None)
            .derive("direct_fidelity", self.direct.fidelity, None)
            .derive("direct_fisher", self.direct.fisher, None);
        r.leakage = self.state.state.leakage();
        r
    }
}
