//! Compression of a gradient-polyconvex cube clamped at 0.5 x on the face x₁ = 0.

use lockstrain::energy::GradPolyDensity;
use lockstrain::fem::{minimize, BodyProblem, BoundaryMap, BoxMesh, DiscreteDeformation, FaceSet, SolverSettings};
use lockstrain::Matrix;

fn main() {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let mesh = BoxMesh::unit(3, n)
        .unwrap()
        .with_tags(FaceSet::face(0, false), FaceSet::none());
    let half = Matrix::identity(3) * 0.5;
    let p = BodyProblem::new(mesh, GradPolyDensity::stvk(1.0, 1.0, 1.0, 4.0, 30.0).unwrap())
        .unwrap()
        .with_boundary(BoundaryMap::affine(half, vec![0.0; 3]));
    let y0 = DiscreteDeformation::affine(&p.mesh, &half, &[0.0; 3]);
    let settings = SolverSettings {
        max_iter: 10000,
        ..SolverSettings::default()
    };
    let (_, r) = minimize(&p, &y0, &settings).unwrap();
    println!(
        "{n}³: energy {:.4e} → {:.6}, min det {:.4}, max det {:.4}, {} iterations, {:?}",
        r.initial_energy, r.energy, r.min_det, r.max_det, r.iterations, r.termination
    );
}
