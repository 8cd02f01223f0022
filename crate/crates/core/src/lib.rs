//! Numerical toolkit for almost periodic functions perturbed by terms that vanish in a two-weight ergodic mean.
//!
//! * [`weight_dsl`] parses weight expressions, classifies polynomial weights
//!   and produces closed-form cumulative masses.
//! * [`weights`] decides weight-class membership with evidence.
//! * [`apfun`] holds trigonometric polynomials and Bohr means, transforms and
//!   spectra.
//! * [`ergodic`] is the limit engine for every `T -> infinity` quantity.
//! * [`transforms`] covers convolution, translation, uniqueness and
//!   composition checks.
//! * [`cli`] is the command surface used by the `dwpap` binary.

pub mod apfun;
pub mod cli;
pub mod ergodic;
pub mod error;
pub mod logval;
pub mod quad;
pub mod transforms;
pub mod weight_dsl;
pub mod weights;

pub use error::{Error, Result};
