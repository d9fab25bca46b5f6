//! Generalized frames (g-frames), controlled g-frames and their multipliers
//! on finite-dimensional complex Hilbert spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`linop`]: dense complex operators, operator order, GL+ certificates,
//!   square roots, singular values and Schatten norms.
//! - [`gframe`]: g-frames, the analysis/synthesis pair, frame operator,
//!   optimal bounds, canonical dual and reconstruction.
//! - [`controlled`]: controllers in GL+, the controlled frame operator and
//!   the bound transfers between g-frames and controlled g-frames.
//! - [`multiplier`]: symbols, g-multipliers and controlled multipliers.
//! - [`recon`]: the frame algorithm (Richardson iteration) with and without
//!   controller preconditioning.
//! - [`generate`], [`suite`], [`cli`]: instance generation, the invariant
//!   suite and the batch harness behind the `gframe-lab` binary.

pub mod cli;
pub mod controlled;
pub mod error;
pub mod generate;
pub mod gframe;
pub mod linop;
pub mod multiplier;
pub mod random;
pub mod recon;
pub mod suite;

pub use controlled::{ControlledBounds, Controller};
pub use error::{Error, Result};
pub use gframe::{BlockVector, FrameBounds, GFrame};
pub use linop::{CVec, LinOp, PositiveCert};
pub use multiplier::Symbol;
pub use recon::SolveReport;
pub use num_complex::Complex64;
