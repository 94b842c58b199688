//! Truncated Hilbert space of one spin and up to three bosonic modes.

mod layout;
mod operator;
pub(crate) mod sparse;
mod state;

pub use layout::{BasisKet, Factor, Mode, ModeLayout, Spin};
pub use operator::{
    ladder_operators, number_operator, parity_operator, sigma_z, spin_projector, LinearOperator,
    OperatorKind,
};
pub use state::{pure_fidelity, HybridState, LocalState, ReducedState, Representation};
