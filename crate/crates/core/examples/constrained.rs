//! Minimization of ∫|∇y|² subject to |∇y| ≤ 3 and det ∇y ≥ 0.2, started at the diagonal witness.

use lockstrain::energy::{LockingConstraint, ScalarDensity};
use lockstrain::fem::{
    constrained_minimize_ball, BodyProblem, BoundaryMap, BoxMesh, DiscreteDeformation, FaceSet, SolverSettings,
};

fn main() {
    let witness = LockingConstraint::determinant(0.2).unwrap().witness(3);
    let mesh = BoxMesh::unit(3, 4)
        .unwrap()
        .with_tags(FaceSet::face(0, false), FaceSet::none());
    let p = BodyProblem::new(mesh, ScalarDensity::quadratic())
        .unwrap()
        .with_boundary(BoundaryMap::affine(witness, vec![0.0; 3]));
    let y0 = DiscreteDeformation::affine(&p.mesh, &witness, &[0.0; 3]);
    let (_, r) = constrained_minimize_ball(&p, 3.0, 0.2, &y0, &SolverSettings::default()).unwrap();
    println!(
        "energy {:.6} → {:.6}; min det {:.8}, max |∇y| {:.6}, {} iterations",
        r.initial_energy, r.energy, r.min_det, r.max_grad_norm, r.iterations
    );
}
