use std::fmt::Write as _;

use super::ast::*;
use crate::fockspace::{Mode, Spin};
use crate::protocols::Sampling;
use crate::C64;

fn angle(a: &Angle) -> String {
    match *a {
        Angle::PiFraction { num, den } => {
            let mut s = match num {
                1 => "pi".to_string(),
                -1 => "-pi".to_string(),
                n => format!("{n}pi"),
            };
            if den != 1 {
                let _ = write!(s, "/{den}");
            }
            s
        }
        Angle::Radians(r) => format!("{r}"),
    }
}

fn duration(d: &Duration) -> String {
    match *d {
        Duration::Tau(k) if k == 1.0 => "tau".to_string(),
        Duration::Tau(k) => format!("{k}tau"),
        Duration::Seconds(s) => format!("{s}s"),
    }
}

fn complex(z: C64) -> String {
    format!("{},{}", z.re, z.im)
}

fn pair(modes: (Mode, Mode)) -> String {
    if modes == (Mode::A, Mode::B) {
        String::new()
    } else {
        format!(" {}{}", modes.0, modes.1)
    }
}

fn instruction(ins: &Instruction) -> String {
    match ins {
        Instruction::PrepSpin(s) => format!("PREP spin {}", if *s == Spin::E { "e" } else { "g" }),
        Instruction::PrepMode { mode, prep } => match prep {
            ModePrep::Fock(n) => format!("PREP fock {n} {mode}"),
            ModePrep::Coherent(z) => format!("PREP coherent {} {mode}", complex(*z)),
            ModePrep::Thermal(x) => format!("PREP thermal {x} {mode}"),
        },
        Instruction::Rotate { theta, phi } => format!("R {} {}", angle(theta), angle(phi)),
        Instruction::Cbs {
            duration: d,
            upsilon,
            modes,
        } => format!("CBS {} {}{}", duration(d), angle(upsilon), pair(*modes)),
        Instruction::Bs {
            duration: d,
            upsilon,
            modes,
        } => format!("BS {} {}{}", duration(d), angle(upsilon), pair(*modes)),
        Instruction::Disp { alpha, mode } => format!("DISP {} {mode}", complex(*alpha)),
        Instruction::Bsb { mode } => format!("BSB {mode}"),
        Instruction::Rsb { mode } => format!("RSB {mode}"),
        Instruction::Jsb {
            omega0,
            duration: d,
            modes,
        } => format!("JSB {omega0} {}{}", duration(d), pair(*modes)),
        Instruction::Wait { duration: d } => format!("WAIT {}", duration(d)),
        Instruction::Measure(obs) => match obs {
            None => "MEASURE".to_string(),
            Some(Observable::Spin) => "MEASURE spin".to_string(),
            Some(Observable::Fock(m)) => format!("MEASURE fock {m}"),
            Some(Observable::Parity(m)) => format!("MEASURE parity {m}"),
            Some(Observable::Noon(n)) => format!("MEASURE noon {n}"),
        },
    }
}

/// Canonical text of a program: header keys in a fixed order, then one
/// instruction per line. `parse(pretty_print(p)) == p` for every valid `p`.
pub fn pretty_print(program: &Program) -> String {
    let h = &program.header;
    let mut out = String::new();
    if let Some(c) = &h.cutoffs {
        let c: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "set cutoffs {}", c.join(" "));
    }
    if let Some(xi) = h.xi {
        let _ = writeln!(out, "set xi {xi}");
    }
    if let Some(name) = &h.noise {
        let _ = writeln!(out, "set noise {name}");
    }
    if let Some(s) = h.sampling {
        let _ = writeln!(
            out,
            "set sampling {}",
            if s == Sampling::Exact {
                "exact"
            } else {
                "sampled"
            }
        );
    }
    if let Some(n) = h.shots {
        let _ = writeln!(out, "set shots {n}");
    }
    if let Some(seed) = h.seed {
        let _ = writeln!(out, "set seed {seed}");
    }
    if let Some(on) = h.echo_dephasing {
        let _ = writeln!(out, "set echo_dephasing {}", if on { "on" } else { "off" });
    }
    if !out.is_empty() && !program.instructions.is_empty() {
        out.push('\n');
    }
    for ins in &program.instructions {
        out.push_str(&instruction(&ins.node));
        out.push('\n');
    }
    out
}

impl std::fmt::Display for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&pretty_print(self))
    }
}

impl std::fmt::Display for Instruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&instruction(self))
    }
}
