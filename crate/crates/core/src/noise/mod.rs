//! Open-system layer: noise parameters, Lindblad jump operators, a
//! fixed-step master-equation integrator and calibration helpers.

mod calibrate;
mod lindblad;
mod params;

pub use calibrate::{
    calibrate_motional_dephasing, coherence_time, flip_readout, paper_coherence_data,
    CoherenceData, DephasingFit,
};
pub use lindblad::{collapse_operators, evolve, CollapseOperator, MAX_STEP};
pub use params::NoiseParams;
