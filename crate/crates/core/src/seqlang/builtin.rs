//! Protocol sequences written as programs. The files under `sequences/`
//! are the canonical text of [`builtin_programs`].

use super::ast::*;
use crate::fockspace::{Mode, Spin};
use crate::generators::Preparation;
use crate::protocols::{swap_cutoff, GUARD};
use crate::{Error, Result, C64};

fn ins(node: Instruction) -> Spanned<Instruction> {
    Spanned::bare(node)
}

fn rot(theta: Angle, phi: Angle) -> Spanned<Instruction> {
    ins(Instruction::Rotate { theta, phi })
}

fn half_pi() -> Angle {
    Angle::pi_over(1, 2)
}

/// CBS of `k·τ` at phase 0, split around a π pulse when echoed.
fn cbs(k: f64, echo: bool) -> Vec<Spanned<Instruction>> {
    let gate = |k: f64, upsilon: Angle| {
        ins(Instruction::Cbs {
            duration: Duration::Tau(k),
            upsilon,
            modes: (Mode::A, Mode::B),
        })
    };
    if echo {
        vec![
            gate(k / 2.0, Angle::zero()),
            rot(Angle::pi_over(1, 1), Angle::zero()),
            gate(k / 2.0, Angle::pi_over(1, 1)),
        ]
    } else {
        vec![gate(k, Angle::zero())]
    }
}

fn header(cutoff: usize, echo: bool) -> Header {
    Header {
        cutoffs: Some(vec![cutoff, cutoff]),
        echo_dephasing: echo.then_some(true),
        ..Header::default()
    }
}

fn mode_prep(p: &Preparation) -> Result<ModePrep> {
    match p {
        Preparation::Fock { n } => Ok(ModePrep::Fock(*n)),
        Preparation::Coherent { alpha } => Ok(ModePrep::Coherent(*alpha)),
        Preparation::Thermal { nbar } => Ok(ModePrep::Thermal(*nbar)),
        other => Err(Error::InvalidParameter(format!(
            "no PREP form for {other:?}"
        ))),
    }
}

/// NOON generation of order `n`, measured with `MEASURE noon n`.
pub fn noon_program(n: usize, echo: bool) -> Program {
    let phi = if n % 2 == 1 { Angle::zero() } else { half_pi() };
    let mut body = vec![
        ins(Instruction::PrepMode {
            mode: Mode::A,
            prep: ModePrep::Fock(n),
        }),
        rot(half_pi(), Angle::zero()),
    ];
    body.extend(cbs(1.0, echo));
    body.push(rot(half_pi(), phi));
    body.extend(cbs(1.0, echo));
    body.push(rot(half_pi(), Angle::zero()));
    body.push(ins(Instruction::Measure(Some(Observable::Noon(n)))));
    Program {
        header: header(n + GUARD + 1, echo),
        instructions: body,
    }
}

/// Swap test of `psi` on mode a against `|m⟩` on mode b at final phase `phi`.
pub fn swap_test_program(psi: &Preparation, m: usize, phi: Angle, echo: bool) -> Result<Program> {
    let mut body = vec![
        ins(Instruction::PrepMode {
            mode: Mode::A,
            prep: mode_prep(psi)?,
        }),
        ins(Instruction::PrepMode {
            mode: Mode::B,
            prep: ModePrep::Fock(m),
        }),
        rot(half_pi(), Angle::zero()),
    ];
    body.extend(cbs(1.0, echo));
    body.push(rot(half_pi(), phi));
    body.push(ins(Instruction::Measure(Some(Observable::Spin))));
    Ok(Program {
        header: header(swap_cutoff(psi, m), echo),
        instructions: body,
    })
}

/// Parity of `psi` on mode a: `P(e) = P_even` plain, `P(g) = P_even` echoed.
/// The plain program also measures the mode parity directly.
pub fn parity_program(psi: &Preparation, echo: bool) -> Result<Program> {
    let mut body = vec![
        ins(Instruction::PrepMode {
            mode: Mode::A,
            prep: mode_prep(psi)?,
        }),
        rot(half_pi(), Angle::zero()),
    ];
    body.extend(cbs(2.0, echo));
    body.push(rot(half_pi(), Angle::zero()));
    body.push(ins(Instruction::Measure(Some(Observable::Spin))));
    if !echo {
        body.push(ins(Instruction::Measure(Some(Observable::Parity(Mode::A)))));
    }
    Ok(Program {
        header: header(psi.support_max() + GUARD + 1, echo),
        instructions: body,
    })
}

/// CBS acting on `|e, 1, 0⟩`: the excitation moves to mode b.
fn conditional_swap_program() -> Program {
    Program {
        header: header(3, false),
        instructions: vec![
            ins(Instruction::PrepSpin(Spin::E)),
            ins(Instruction::PrepMode {
                mode: Mode::A,
                prep: ModePrep::Fock(1),
            }),
            ins(Instruction::Cbs {
                duration: Duration::Tau(1.0),
                upsilon: Angle::zero(),
                modes: (Mode::A, Mode::B),
            }),
            ins(Instruction::Measure(None)),
        ],
    }
}

/// Heating of the ground state over 1 ms, read as Fock populations.
fn heating_program() -> Program {
    Program {
        header: Header {
            cutoffs: Some(vec![6, 6]),
            noise: Some("paper".into()),
            ..Header::default()
        },
        instructions: vec![
            ins(Instruction::Wait {
                duration: Duration::Seconds(1e-3),
            }),
            ins(Instruction::Measure(Some(Observable::Fock(Mode::A)))),
            ins(Instruction::Measure(Some(Observable::Fock(Mode::B)))),
        ],
    }
}

/// Displaced parity of `|1⟩` at `α = 0.5`, sampled.
fn displaced_parity_program() -> Result<Program> {
    let mut p = parity_program(&Preparation::fock(1), false)?;
    p.header.cutoffs = Some(vec![12, 12]);
    p.header.sampling = Some(crate::protocols::Sampling::Sampled);
    p.header.shots = Some(1000);
    p.header.seed = Some(7);
    p.instructions.insert(
        1,
        ins(Instruction::Disp {
            alpha: C64::new(-0.5, 0.0),
            mode: Mode::A,
        }),
    );
    Ok(p)
}

/// Named programs shipped as `sequences/<name>.seq`.
pub fn builtin_programs() -> Vec<(&'static str, Program)> {
    let swap = |psi: Preparation, m, phi, echo| {
        swap_test_program(&psi, m, phi, echo).expect("PREP-expressible recipe")
    };
    let parity =
        |psi: Preparation, echo| parity_program(&psi, echo).expect("PREP-expressible recipe");
    vec![
        ("noon1", noon_program(1, false)),
        ("noon2", noon_program(2, false)),
        ("noon3", noon_program(3, false)),
        ("noon4", noon_program(4, false)),
        ("noon2_echo", noon_program(2, true)),
        ("noon3_echo", noon_program(3, true)),
        (
            "swaptest_fock",
            swap(Preparation::fock(2), 2, Angle::zero(), false),
        ),
        (
            "swaptest_coherent",
            swap(
                Preparation::coherent(C64::new(1.0, 0.0)),
                1,
                half_pi(),
                false,
            ),
        ),
        (
            "swaptest_echo",
            swap(Preparation::fock(1), 1, Angle::zero(), true),
        ),
        ("parity_fock1", parity(Preparation::fock(1), false)),
        ("parity_fock2_echo", parity(Preparation::fock(2), true)),
        (
            "displaced_parity",
            displaced_parity_program().expect("PREP-expressible recipe"),
        ),
        ("conditional_swap", conditional_swap_program()),
        ("heating", heating_program()),
    ]
}
