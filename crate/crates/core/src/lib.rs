//! Open-system simulation of a two-level spin coupled to a parametrically
//! squeezed resonator.
//!
//! The crate has two independent sides that are cross-checked against each
//! other:
//!
//! * [`lindblad`] builds the exact master-equation generator on a truncated
//!   Fock space (in the rotating or the squeezed frame, see [`model`]) and
//!   computes steady states, two-time correlators and spectra.
//! * [`moments`] evaluates the closed forms: moment equations of the bare
//!   resonator, regression-theorem correlators, integrated photon noise and
//!   the dispersive spin rates.
//!
//! [`spectra`] extracts peaks, splittings and linewidths from sampled
//! spectra, and [`pipeline`] wires the pieces into the sweeps used by the
//! command-line tool.

pub mod error;
pub mod lindblad;
pub mod model;
pub mod moments;
pub mod operators;
pub mod pipeline;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{BathSpec, Frame, ModelParams};
pub use operators::{HilbertLayout, OperatorMatrix};
