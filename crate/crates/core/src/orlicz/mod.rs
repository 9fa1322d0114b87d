//! Modulars, Luxemburg norms and embedding constants for the double-phase
//! N-function `H(x, t) = t^p + a(x) t^q`.

mod bounds;
mod norm;
mod params;

pub use bounds::{embedding_constant, sandwich_ratios, sobolev_conjugate_inverse, Sandwich};
pub use norm::{
    closed_form_norm, closed_form_norm_cells, lp_norm_cells, luxemburg_norm, luxemburg_norm_cells, modular,
    modular_cells, modular_nodal, moment_norm, rescaled_norm, rescaled_norm_cells, w_inverse, NormMethod,
    NormResult,
};
pub use params::{NFunctionParams, WeightField, WeightSpec};
