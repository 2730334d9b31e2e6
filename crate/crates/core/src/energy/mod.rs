//! Energy densities and locking constraints.

mod density;
mod elastic;
mod gradpoly;
mod locking;

pub use density::{
    estimate_lipschitz_modulus, sample_ball, DoubleWell, FnEnergy, Modulus, Quadratic, ScalarDensity, StoredEnergy,
    Stvk,
};
pub use elastic::{stvk_phi, stvk_phi_gradient, ElasticTensor};
pub use gradpoly::{
    check_coercivity, check_convexity, check_frame_indifference, coercivity_slack, frame_violation, gradpoly_eval,
    CoercivityReport, GradPolyDensity, GradPolyEnergy, GradPolyPartials, GrowthParams, StvkGradPoly,
};
pub use locking::{locking_eval, LockingConstraint, LockingVariant};

/// `eval_density` entry point.
pub fn eval_density(w: &ScalarDensity, f: &crate::tensor::Matrix) -> f64 {
    w.eval(f)
}

/// `grad_density` entry point.
pub fn grad_density(w: &ScalarDensity, f: &crate::tensor::Matrix) -> crate::error::Result<crate::tensor::Matrix> {
    w.gradient(f)
}
