//! Order-theoretic probability on finite weighted sample spaces.
//!
//! This crate realizes stochastic-process machinery — vector-lattice
//! operations, band projections, conditional expectation operators,
//! filtrations, martingale difference sequences and mixingale certificates —
//! concretely on finite weighted sample spaces, where every supremum is a
//! finite maximum and every claim is machine-checkable. On top of that
//! model it provides verification suites for the operator identities and
//! bound chains that drive a weak law of large numbers for mixingales,
//! with exhaustive-enumeration and seeded monte-carlo backends.
//!
//! ## Layout
//!
//! - [`lattice`] — sample spaces, lattice elements, the componentwise
//!   f-algebra product and band projections (atom-subset masks).
//! - [`conditional`] — partitions, weighted block-averaging operators,
//!   filtrations over an integer window and independence checks.
//! - [`process`] — product spaces (exhaustive and monte-carlo), coordinate
//!   innovations, moving averages, martingale differences.
//! - [`mixingale`] — dependence certificates `(c_i, Φ_m)`, minimal mixingale
//!   numbers, uniformity profiles and boundedness checks.
//! - [`wlln`] — Cesàro-mean analysis of martingale difference sequences,
//!   telescoping decompositions and the weak-law experiment.
//! - [`config`] / [`runner`] — the TOML experiment front end used by the
//!   `mixingale` binary.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run --example lattice_basics            # elements, bands, truncation
//! cargo run --example conditional_expectation   # block averaging, averaging identity
//! cargo run --example filtration_tower          # tower property, broken filtrations
//! cargo run --example independence              # conditional independence checks
//! cargo run --example processes                 # product spaces, martingale differences
//! cargo run --example mixingale_numbers         # certificates and minimal Φ
//! cargo run --example uniformity                # truncation envelopes
//! cargo run --example cesaro_decay              # mean-absolute Cesàro bounds
//! cargo run --example telescoping               # three-part decomposition
//! cargo run --example monte_carlo_backend       # empirical spaces vs enumeration
//! cargo run --example wlln_experiment           # the full weak-law pipeline
//! ```
//!
//! The `mixingale` binary runs the same suites from a TOML config and writes
//! CSV traces; see the README.

pub mod conditional;
pub mod config;
pub mod error;
pub mod lattice;
pub mod mixingale;
pub mod process;
pub mod report;
pub mod runner;
pub mod util;
pub mod wlln;

pub use conditional::{CondExpectation, Filtration, Partition};
pub use config::{ExperimentConfig, Suite};
pub use error::{Error, Result};
pub use lattice::{BandProjection, LatticeElement, SampleSpace};
pub use mixingale::{MixingaleCertificate, UniformityProfile};
pub use process::{AdaptedSequence, ProcessKind, ProcessSpace, ProcessSpec};
pub use report::{Check, Report, Tolerance};
pub use wlln::{CesaroTrace, Schedule, TelescopeParts};
