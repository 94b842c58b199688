use std::f64::consts::PI;

use super::ast::*;
use super::parse::validate;
use super::print::pretty_print;
use crate::circuit::{Ensemble, Op, Simulator};
use crate::fockspace::{Factor, Mode, ModeLayout, Spin};
use crate::generators::{
    gate_time, CbsParams, JointSidebandParams, Preparation, RotationParams, SidebandKind,
    DEFAULT_XI,
};
use crate::noise::NoiseParams;
use crate::protocols::{binomial_se, noon_metrics, ExperimentResult, ShotPlan};
use crate::{Error, Result};

/// Row kinds in the executor's output table.
pub const ROW_SPIN: f64 = 0.0;
pub const ROW_FOCK: f64 = 1.0;
pub const ROW_PARITY: f64 = 2.0;
pub const ROW_NOON: f64 = 3.0;

/// State reached at the start of the MEASURE block.
#[derive(Clone, Debug)]
pub struct Execution {
    pub layout: ModeLayout,
    pub xi: f64,
    pub ensemble: Ensemble,
    /// Largest truncation leakage seen after any instruction.
    pub leakage: f64,
}

fn at(span: Span, e: Error) -> Error {
    match e {
        Error::Sequence { .. } => e,
        other => Error::Sequence {
            line: span.line,
            column: span.column,
            message: other.to_string(),
        },
    }
}

fn preparation(p: &ModePrep) -> Preparation {
    match *p {
        ModePrep::Fock(n) => Preparation::fock(n),
        ModePrep::Coherent(z) => Preparation::coherent(z),
        ModePrep::Thermal(x) => Preparation::thermal(x),
    }
}

/// Simulator operation for a gate instruction; `None` for preparations and
/// measurements.
pub fn lower(ins: &Instruction, xi: f64) -> Option<Op> {
    let tau = gate_time(xi);
    let cbs = |d: &Duration, u: &Angle, modes: (Mode, Mode)| CbsParams {
        xi,
        upsilon: u.radians(),
        modes,
        duration: d.seconds(tau),
    };
    Some(match ins {
        Instruction::Rotate { theta, phi } => {
            Op::Rotate(RotationParams::new(theta.radians(), phi.radians()))
        }
        Instruction::Cbs {
            duration,
            upsilon,
            modes,
        } => Op::Cbs(cbs(duration, upsilon, *modes)),
        Instruction::Bs {
            duration,
            upsilon,
            modes,
        } => Op::Bs(cbs(duration, upsilon, *modes)),
        Instruction::Disp { alpha, mode } => Op::Displace {
            alpha: *alpha,
            mode: *mode,
        },
        Instruction::Bsb { mode } => Op::Sideband {
            kind: SidebandKind::Blue,
            mode: *mode,
        },
        Instruction::Rsb { mode } => Op::Sideband {
            kind: SidebandKind::Red,
            mode: *mode,
        },
        Instruction::Jsb {
            omega0,
            duration,
            modes,
        } => Op::JointSideband {
            params: JointSidebandParams {
                omega0: *omega0,
                duration: duration.seconds(tau),
            },
            modes: *modes,
        },
        Instruction::Wait { duration } => Op::Wait {
            duration: duration.seconds(tau),
        },
        Instruction::PrepSpin(_) | Instruction::PrepMode { .. } | Instruction::Measure(_) => {
            return None
        }
    })
}

/// Prepares and evolves the program up to its MEASURE block.
///
/// `noise` supplies thermal backgrounds and dissipation; with
/// `echo_dephasing on` the gates see its echoed spin-dephasing rate.
pub fn simulate(program: &Program, noise: &NoiseParams) -> Result<Execution> {
    validate(program)?;
    let h = &program.header;
    let cutoffs = h.cutoffs.as_ref().ok_or_else(|| Error::Sequence {
        line: 1,
        column: 1,
        message: "missing `set cutoffs`".into(),
    })?;
    let layout = ModeLayout::new(cutoffs)?;
    let xi = h.xi.unwrap_or(DEFAULT_XI);
    let gate_noise = if h.echo_dephasing == Some(true) {
        noise.for_echo()
    } else {
        noise.clone()
    };
    let sim = Simulator::new(layout.clone(), gate_noise)?;

    let mut preps = Vec::new();
    let mut excited = false;
    let mut first_span = Span { line: 1, column: 1 };
    for (k, ins) in program.instructions.iter().enumerate() {
        if k == 0 {
            first_span = ins.span;
        }
        match &ins.node {
            Instruction::PrepMode { mode, prep } => preps.push((*mode, preparation(prep))),
            Instruction::PrepSpin(s) => excited = *s == Spin::E,
            _ => {}
        }
    }
    let mut ensemble = Ensemble::prepare(&layout, &preps, noise).map_err(|e| at(first_span, e))?;
    if excited {
        ensemble = ensemble.apply(&Op::rotate(PI, 0.0).unitary(&layout)?)?;
    }
    let mut leakage = ensemble.leakage();
    for ins in &program.instructions {
        if let Some(op) = lower(&ins.node, xi) {
            ensemble = sim
                .run_ensemble(&ensemble, &[op])
                .map_err(|e| at(ins.span, e))?;
            leakage = leakage.max(ensemble.leakage());
        }
    }
    Ok(Execution {
        layout,
        xi,
        ensemble,
        leakage,
    })
}

/// Runs a program and reads out its MEASURE block.
///
/// Rows are `[kind, mode, level, probability, std_error]` with kind 0 for
/// `P(e)`, 1 for a Fock population, 2 for `P(even)` and 3 for NOON
/// elements (level 0: `P_{n,0}+P_{0,n}`, level 1: `|ρ_{n0,0n}|`). NOON
/// elements are read from the state, never sampled. Each measurement `k`
/// samples on its own streams, `(k << 16) + level`.
pub fn execute(
    program: &Program,
    noise: &NoiseParams,
    plan: &ShotPlan,
) -> Result<ExperimentResult> {
    plan.validate()?;
    let run = simulate(program, noise)?;
    let mut r = ExperimentResult::new(
        "sequence",
        *plan,
        &["kind", "mode", "level", "probability", "std_error"],
    );
    r.setting("program", pretty_print(program))
        .setting("cutoffs", run.layout.cutoffs())
        .setting("xi", run.xi)
        .setting(
            "echo_dephasing",
            program.header.echo_dephasing.unwrap_or(false),
        );
    if let Some(name) = &program.header.noise {
        r.setting("noise", name);
    }
    let mut k = 0u64;
    for ins in &program.instructions {
        let Instruction::Measure(obs) = &ins.node else {
            continue;
        };
        let observables = match obs {
            Some(o) => vec![*o],
            None => std::iter::once(Observable::Spin)
                .chain(run.layout.modes().map(Observable::Fock))
                .collect(),
        };
        for o in observables {
            read(&run, &o, plan, k << 16, &mut r).map_err(|e| at(ins.span, e))?;
            k += 1;
        }
    }
    r.leakage = run.leakage;
    Ok(r)
}

fn read(
    run: &Execution,
    obs: &Observable,
    plan: &ShotPlan,
    stream: u64,
    r: &mut ExperimentResult,
) -> Result<()> {
    let e = &run.ensemble;
    match *obs {
        Observable::Spin => {
            let est = plan.estimate(e.spin_population(Spin::E), stream)?;
            r.push_row(vec![ROW_SPIN, -1.0, 1.0, est.value, est.se]);
            r.derive("p_e", est.value, Some(est.se));
        }
        Observable::Fock(m) => {
            let dist = e.mode_distribution(m)?;
            let (values, ses): (Vec<f64>, Vec<f64>) = match plan.counts(&dist, stream)? {
                None => (dist.clone(), vec![0.0; dist.len()]),
                Some(c) => c
                    .iter()
                    .map(|&k| (k as f64 / plan.shots as f64, binomial_se(k, plan.shots)))
                    .unzip(),
            };
            for (level, (v, se)) in values.iter().zip(&ses).enumerate() {
                r.push_row(vec![ROW_FOCK, m.index() as f64, level as f64, *v, *se]);
            }
            let mean: f64 = values.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
            r.derive(&format!("mean_n_{m}"), mean, None);
        }
        Observable::Parity(m) => {
            let dist = e.mode_distribution(m)?;
            let even: f64 = dist.iter().step_by(2).sum();
            let est = plan.estimate(even, stream)?;
            r.push_row(vec![ROW_PARITY, m.index() as f64, 0.0, est.value, est.se]);
            r.derive(
                &format!("parity_{m}"),
                2.0 * est.value - 1.0,
                Some(2.0 * est.se),
            );
        }
        Observable::Noon(n) => {
            let state = e.to_state()?;
            let rho = state.partial_trace(&[Factor::Mode(Mode::A), Factor::Mode(Mode::B)])?;
            let (ca, cb) = (run.layout.cutoff(Mode::A)?, run.layout.cutoff(Mode::B)?);
            if n >= ca || n >= cb {
                return Err(Error::InvalidParameter(format!(
                    "NOON order {n} needs cutoffs above {n}, got {ca} and {cb}"
                )));
            }
            let (i, j) = (rho.index(&[n, 0]), rho.index(&[0, n]));
            let population = rho.matrix[(i, i)].re + rho.matrix[(j, j)].re;
            let coherence = rho.matrix[(i, j)].norm();
            r.push_row(vec![ROW_NOON, -1.0, 0.0, population, 0.0]);
            r.push_row(vec![ROW_NOON, -1.0, 1.0, coherence, 0.0]);
            r.derive("noon_population", population, None)
                .derive("noon_coherence", coherence, None);
            if population > 0.0 {
                let m = noon_metrics((population.min(1.0), 0.0), (coherence.min(1.0), 0.0), n)?;
                r.derive("noon_fidelity", m.fidelity, None)
                    .derive("noon_fisher", m.fisher, None);
            }
        }
    }
    Ok(())
}
