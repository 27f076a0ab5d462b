//! Per-unit bases, reference-frame transforms, symmetrical components and
//! the fixed-step integrator shared by every plant and controller model.

mod integrate;
mod linalg;
mod per_unit;
mod sequence;
mod transforms;

pub use integrate::{integrate_step, NonFiniteDerivative};
pub use linalg::solve4;
pub use per_unit::{PerUnitBase, PEAK_POWER_FACTOR};
pub use sequence::{
    fortescue_phasors, instantaneous_power, max_phase_magnitude, phases_from_sequences,
    power_decomposition, PowerDecomposition, SequenceDq, SequencePhasors, PHASE_OP, PHASE_OP_SQ,
};
pub use transforms::{
    clarke, inverse_clarke, inverse_park, park_transform, rotate_from_frame, rotate_to_frame,
    wrap_angle, AlphaBeta, Dq, Dq0, ThreePhaseSample,
};
