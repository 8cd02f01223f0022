//! Convolution with integrable kernels, translation invariance, the
//! uniqueness preconditions and the Lipschitz composition check.

mod compose;
mod conv;
mod kernel;
mod ratios;

use serde::Serialize;

pub use compose::{check_lipschitz, composition_check, CompositionResult, LipschitzProbe, LipschitzReport, TwoVarFunction, CATALOG};
pub use conv::{
    conv_membership, convolution_handle, convolve, convolve_grid, decomposition_recovery, translation_invariance_check,
    ConvMembership, Decomposition, Hypotheses, TranslationCheck, CONV_MIN_DECAY, MAX_RADIUS,
};
pub use kernel::{Envelope, Kernel};
pub use ratios::{check_hhh, check_jj, check_jjj, uniqueness_precondition, RatioBound, ShiftRatios, TauRatio};

/// Outcome of a hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Undecided,
}
