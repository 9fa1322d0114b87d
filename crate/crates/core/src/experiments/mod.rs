//! Desk-scale numerical checks of the qualitative eigenvalue theory, each
//! producing an [`ExperimentReport`] with data rows, machine-readable
//! pass/fail checks and a plot.
//!
//! Rows of a sweep run in parallel; reports are assembled in row order, so
//! the output depends only on the inputs and the seed.

mod domains;
mod faber_krahn;
mod large;
mod report;
mod stability;
mod symmetry;
mod weyl;

pub use domains::{interval_family, run_domain_monotonicity, square_family};
pub use faber_krahn::run_faber_krahn;
pub use large::run_large_exponents;
pub use report::{Check, ExperimentReport, Row, RowStatus, Series};
pub use stability::run_stability;
pub use symmetry::run_symmetry;
pub use weyl::{loglog_slope, run_weyl};

use crate::discretize::Mesh;
use crate::error::Result;
use crate::orlicz::{NFunctionParams, WeightField, WeightSpec};

/// Names accepted by the `experiment` command.
pub const EXPERIMENTS: [&str; 6] = ["stability", "domains", "faberkrahn", "largeexp", "weyl", "symmetry"];

/// `H = t^p + a t^q` on `mesh`, allowing `p = q`.
pub(crate) fn phase_on(mesh: &Mesh, p: f64, q: f64, weight: &WeightSpec) -> Result<NFunctionParams> {
    NFunctionParams::relaxed(p, q, WeightField::from_spec(weight, mesh)?)
}

/// Largest relative increase along a sequence that should not increase.
pub(crate) fn max_relative_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Cells per side used as the report resolution.
pub(crate) fn resolution_of(mesh: &Mesh) -> usize {
    mesh.grid_shape().0
}
