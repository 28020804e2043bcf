//! Numerical toolkit for steady 2D Euler flows on the periodic channel
//! `T x [-1, 1]`.
//!
//! The crate builds explicit stationary, traveling-wave and quasiperiodic
//! velocity fields close to shear flows `(v(y), 0)`, and verifies their
//! properties at desk scale: Hölder-norm closeness rates of cutoff shear
//! approximations, exact steadiness of composite shear + vortex fields,
//! streamline-topology diagnostics (laminarity, fluid sub-domains,
//! vorticity-function recovery), the coarea/isoperimetric Dirichlet-energy
//! chain, and time evolution in vorticity/stream-function form.
//!
//! Discretization: Fourier-spectral in the periodic `x` direction,
//! 4th-order finite differences in `y` with one-sided wall stencils.

pub mod energy;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod jet;
pub mod norm2d;
pub mod shear;
pub mod topology;
pub mod vortex;

pub use error::FlowError;
pub use grid::{Grid, ScalarField, VectorField};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, FlowError>;
