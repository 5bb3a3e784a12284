//! Numerical checks for second- and third-order Szegő asymptotics on the
//! circle, together with the combinatorial identities behind them.
//!
//! The crate is organised bottom-up:
//!
//! * [`combinatorics`]: running minima, Hunt–Dyson type identities, Spitzer's
//!   combinatorial identities, all checked by brute force over symmetric groups.
//! * [`funcmaps`]: the multilinear maps `W2`, `W̃2`, `W3`, `F_{j+1}`, `Φ_j`, `Φ̃_j`.
//! * [`omega`]: piecewise-linear functionals built from running minima.
//! * [`circle_op`]: trigonometric symbols and the banded operator
//!   `T(b0) + T(bsub)·D` over Fourier modes, with exact traces.
//! * [`szego`]: coefficient functionals and asymptotic fits.
//! * [`tracesum`]: partial sums of per-level traces.
//! * [`randwalk`]: joint law of a random walk and its running maximum.

pub mod circle_op;
pub mod combinatorics;
pub mod error;
pub mod funcmaps;
pub mod omega;
pub mod quad;
pub mod randwalk;
pub mod report;
pub mod szego;
pub mod tracesum;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
