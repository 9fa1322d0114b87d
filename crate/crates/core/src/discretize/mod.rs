//! Meshes, discrete gradients, domain geometry and rearrangements.

mod edt;
pub mod io;
mod mesh;
mod rearrange;

pub use edt::{inradius, squared_distance_to_features};
pub use mesh::{Field, Geometry, GradField, Mesh};
pub use rearrange::{
    dual_gradient_lp, equal_measure_disk, homothety_rescale, mirror_map, polarize, polarize_cells, schwarz_symmetrize,
    schwarz_symmetrize_cells, symmetry_defect, HalfSpace, ReflectionPlane, Symmetrized,
};
