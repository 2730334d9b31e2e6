//! P1 finite elements on structured box meshes.

mod field;
mod mesh;
mod problem;
mod solve;

pub use field::{
    element_gradient, element_gradients, matrix_gradient, minor_fields, minor_fields_from_gradients, prolongate,
    recover_matrix, recover_scalar, scalar_gradient, DiscreteDeformation, MinorFields,
};
pub use mesh::{BoxMesh, FaceSet, Facet};
pub use problem::{BodyProblem, BoundaryMap, Density};
pub use solve::{
    compactness_diagnostic, constrained_minimize_ball, min_det, minimize, refinement_check, MinimizeReport,
    RefinementReport, SolverSettings,
};

/// `assemble_energy` entry point.
pub fn assemble_energy(p: &BodyProblem, y: &DiscreteDeformation) -> f64 {
    p.energy(y)
}

/// `assemble_gradient` entry point.
pub fn assemble_gradient(p: &BodyProblem, y: &DiscreteDeformation) -> crate::error::Result<Vec<f64>> {
    p.gradient(y)
}
