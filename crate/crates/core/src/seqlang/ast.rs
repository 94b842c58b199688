use std::f64::consts::PI;

use crate::fockspace::{Mode, Spin};
use crate::protocols::{Sampling, ShotPlan};
use crate::C64;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

/// A node with its source position. Equality ignores the position so that
/// re-parsed programs compare equal.
#[derive(Clone, Debug)]
pub struct Spanned<T> {
    pub node: T,
    pub span: Span,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: Span) -> Self {
        Spanned { node, span }
    }

    /// Node without a meaningful position (programs built in code).
    pub fn bare(node: T) -> Self {
        Spanned {
            node,
            span: Span::default(),
        }
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

/// Angle as written: an exact fraction of π or plain radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    /// `num·π/den`, `den ≥ 1`, `num ≠ 0`.
    PiFraction {
        num: i64,
        den: u64,
    },
    Radians(f64),
}

impl Angle {
    pub fn radians(&self) -> f64 {
        match *self {
            Angle::PiFraction { num, den } => PI * num as f64 / den as f64,
            Angle::Radians(r) => r,
        }
    }

    pub fn pi_over(num: i64, den: u64) -> Self {
        Angle::PiFraction { num, den }
    }

    pub fn zero() -> Self {
        Angle::Radians(0.0)
    }
}

/// Duration in seconds or in units of the CBS gate time `τ = π/(2ξ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Duration {
    Tau(f64),
    Seconds(f64),
}

impl Duration {
    pub fn seconds(&self, tau: f64) -> f64 {
        match *self {
            Duration::Tau(k) => k * tau,
            Duration::Seconds(s) => s,
        }
    }
}

/// Motional recipe accepted by `PREP`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModePrep {
    Fock(usize),
    Coherent(C64),
    Thermal(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable {
    /// `P(e)`.
    Spin,
    /// Fock distribution of a mode.
    Fock(Mode),
    /// `P(even)` of a mode.
    Parity(Mode),
    /// NOON populations, coherence, fidelity and Fisher information of
    /// order `n` on modes a and b.
    Noon(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    PrepSpin(Spin),
    PrepMode {
        mode: Mode,
        prep: ModePrep,
    },
    Rotate {
        theta: Angle,
        phi: Angle,
    },
    Cbs {
        duration: Duration,
        upsilon: Angle,
        modes: (Mode, Mode),
    },
    Bs {
        duration: Duration,
        upsilon: Angle,
        modes: (Mode, Mode),
    },
    Disp {
        alpha: C64,
        mode: Mode,
    },
    Bsb {
        mode: Mode,
    },
    Rsb {
        mode: Mode,
    },
    /// Joint blue sideband with base Rabi frequency `omega0` (rad/s).
    Jsb {
        omega0: f64,
        duration: Duration,
        modes: (Mode, Mode),
    },
    Wait {
        duration: Duration,
    },
    /// `None` measures the spin and every mode's Fock distribution.
    Measure(Option<Observable>),
}

impl Instruction {
    pub fn opcode(&self) -> &'static str {
        match self {
            Instruction::PrepSpin(_) | Instruction::PrepMode { .. } => "PREP",
            Instruction::Rotate { .. } => "R",
            Instruction::Cbs { .. } => "CBS",
            Instruction::Bs { .. } => "BS",
            Instruction::Disp { .. } => "DISP",
            Instruction::Bsb { .. } => "BSB",
            Instruction::Rsb { .. } => "RSB",
            Instruction::Jsb { .. } => "JSB",
            Instruction::Wait { .. } => "WAIT",
            Instruction::Measure(_) => "MEASURE",
        }
    }

    pub fn is_prep(&self) -> bool {
        matches!(
            self,
            Instruction::PrepSpin(_) | Instruction::PrepMode { .. }
        )
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, Instruction::Measure(_))
    }

    /// Modes the instruction refers to.
    pub fn modes(&self) -> Vec<Mode> {
        match self {
            Instruction::PrepMode { mode, .. }
            | Instruction::Disp { mode, .. }
            | Instruction::Bsb { mode }
            | Instruction::Rsb { mode } => vec![*mode],
            Instruction::Cbs { modes, .. }
            | Instruction::Bs { modes, .. }
            | Instruction::Jsb { modes, .. } => {
                vec![modes.0, modes.1]
            }
            Instruction::Measure(Some(Observable::Fock(m) | Observable::Parity(m))) => vec![*m],
            Instruction::Measure(Some(Observable::Noon(_))) => vec![Mode::A, Mode::B],
            _ => Vec::new(),
        }
    }
}

/// `set` lines. Absent keys take their defaults at execution time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header {
    pub cutoffs: Option<Vec<usize>>,
    /// CBS coupling ξ in rad/s.
    pub xi: Option<f64>,
    /// Noise profile name, resolved by the front end.
    pub noise: Option<String>,
    pub sampling: Option<Sampling>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    /// Use the echoed spin-dephasing rate.
    pub echo_dephasing: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub header: Header,
    pub instructions: Vec<Spanned<Instruction>>,
}

impl Program {
    /// Number of declared modes.
    pub fn declared_modes(&self) -> usize {
        self.header.cutoffs.as_ref().map_or(0, |c| c.len())
    }

    /// Readout plan named by the header. `shots` without `sampling`
    /// implies sampled readout; the seed defaults to 0.
    pub fn shot_plan(&self) -> ShotPlan {
        let h = &self.header;
        let seed = h.seed.unwrap_or(0);
        match h.sampling.unwrap_or(if h.shots.is_some() {
            Sampling::Sampled
        } else {
            Sampling::Exact
        }) {
            Sampling::Sampled => ShotPlan::sampled(h.shots.unwrap_or(0), seed),
            Sampling::Exact => ShotPlan {
                sampling: Sampling::Exact,
                shots: h.shots.unwrap_or(0),
                seed,
            },
        }
    }
}
