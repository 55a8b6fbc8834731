//! Heisenberg-picture vacuum-field calculus for two-photon interference from
//! spontaneous parametric down-conversion.
//!
//! The crate builds detector field operators for a two-crystal interferometer
//! and for a Hong-Ou-Mandel beam splitter, evaluates first- and second-order
//! correlation functions by symbolic normal ordering, and turns the results
//! into delay scans with Poisson counting noise.
//!
//! - [`algebra`]: ladder-operator polynomials, normal ordering, vacuum values
//! - [`oracle`]: truncated Fock-space matrices for independent checks
//! - [`model`]: down-conversion, beam splitters, phase delays, detector fields
//! - [`correlations`]: coincidence rates by three routes, visibility, distinguishability
//! - [`scan`]: delay scans, coherence envelopes, counting simulation, visibility fits
//! - [`config`] and [`cli`]: flat `key=value` configuration and the `spdc` tool
//! - [`verify`]: randomized property suites shared by the CLI and the tests
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example hom_dip`
//! is a good place to start.

pub mod algebra;
pub mod cli;
pub mod config;
pub mod correlations;
pub mod error;
pub mod model;
pub mod oracle;
pub mod scan;
pub mod verify;

pub use algebra::{GainDegree, LadderKind, LadderOp, ModeId, OperatorPoly, OperatorWord};
pub use error::{Error, Result};
pub use num_complex::Complex64;
