//! Musielak–Orlicz norms and first/higher eigenvalues for the double-phase
//! integrand `H(x, t) = t^p + a(x) t^q` on uniform 1D and masked 2D meshes.
//!
//! * [`orlicz`]: modulars, Luxemburg norms, embedding constants.
//! * [`discretize`]: meshes, gradients, inradius, rearrangements.
//! * [`oracle1d`]: exact 1D p-Laplacian eigenpairs used as ground truth.
//! * [`eigensolver`]: Rayleigh-quotient minimisation and minimax bounds.
//! * [`experiments`]: drivers producing tabulated reports.

pub mod discretize;
pub mod eigensolver;
pub mod error;
pub mod experiments;
pub mod oracle1d;
pub mod orlicz;
pub mod quad;

pub use error::{Error, Result};
