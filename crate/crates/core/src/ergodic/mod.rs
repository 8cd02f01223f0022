//! Limit engine for every `T -> infinity` quantity: ergodic curves, the
//! ratio `theta`, doubly-weighted means and ergodic-space membership.

mod engine;
mod mean;
mod schedule;
mod verdict;

pub use engine::{ergodic_curve, weighted_integral, CurvePoint, ErgodicCurve, KappaParam, Mode};
pub use mean::{
    check_cd, dw_mean, dw_mean_trig, membership_pap0, theta, verify_mean_theorem, CdProbe, MeanResult,
    MeanTheoremCheck, ThetaResult,
};
pub use schedule::Schedule;
pub(crate) use verdict::norm as norm_of;
pub use verdict::{decide, decide_ln, decide_real, LimitKind, LimitVerdict, VerdictRule};
