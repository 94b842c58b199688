//! Line-based text language for gate sequences.
//!
//! ```text
//! # NOON state of order 2
//! set cutoffs 7 7
//!
//! PREP fock 2 a
//! R pi/2 0
//! CBS tau 0
//! R pi/2 pi/2
//! CBS tau 0
//! R pi/2 0
//! MEASURE noon 2
//! ```
//!
//! Header lines (`set key value...`) come first. Keys: `cutoffs N N [N]`,
//! `xi` (rad/s), `noise NAME`, `sampling exact|sampled`, `shots`, `seed`,
//! `echo_dephasing on|off`.
//!
//! | opcode | arguments |
//! |---|---|
//! | `PREP` | `spin g\|e`, `fock N m`, `coherent RE,IM m`, `thermal NBAR m` |
//! | `R` | `θ φ` |
//! | `CBS`, `BS` | `duration υ [pair]` |
//! | `DISP` | `RE,IM m` |
//! | `BSB`, `RSB` | `m` (π pulse) |
//! | `JSB` | `Ω₀ duration [pair]` |
//! | `WAIT` | `duration` |
//! | `MEASURE` | nothing, `spin`, `fock m`, `parity m` or `noon N` |
//!
//! Angles are radians or multiples of π (`pi`, `-pi/2`, `3pi/4`).
//! Durations are `tau`, `0.5tau`, `tau/2`, or seconds (`1e-3`, `250us`,
//! `2ms`, `0.1s`). Pairs default to `ab`. Preparations precede every
//! other instruction and the MEASURE block ends the program. Opcodes are
//! case-insensitive; `#` starts a comment.

mod ast;
pub mod builtin;
mod exec;
mod parse;
mod print;

pub use ast::{Angle, Duration, Header, Instruction, ModePrep, Observable, Program, Span, Spanned};
pub use exec::{execute, lower, simulate, Execution, ROW_FOCK, ROW_NOON, ROW_PARITY, ROW_SPIN};
pub use parse::{parse, parse_bytes, validate};
pub use print::pretty_print;

#[cfg(test)]
mod tests;
