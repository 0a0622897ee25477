//! Numerical toolkit for the variable-exponent Laplacian whose exponent is
//! infinite on an interior subdomain D: truncation to F_n, minimization,
//! limit sweeps, a one-dimensional oracle and residual diagnostics.

pub mod config;
pub mod datum;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod exponent;
pub mod geometry;
pub mod grid;
pub mod minimizer;
pub mod oracle;
pub mod output;
pub mod presets;
pub mod sweep;

mod banded;
pub mod cli;

pub use datum::Datum;
pub use energy::{eval_energy, eval_energy_gradient, eval_limit_energy, EnergyReport};
pub use error::{Error, Result};
pub use exponent::{ExponentField, FinitePart, TruncatedExponent};
pub use geometry::{ContactPiece, Domain, Geometry, InterfaceSample, InterfaceSamples, Point, RegionLabel};
pub use grid::{Cell, DiscreteField, Grid};
pub use minimizer::{initial_guess, solve_n, Preconditioner, SolveConfig, SolveStats};
