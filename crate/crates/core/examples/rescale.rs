//! Rescaling a field whose gradient overshoots the locking radius, against the a priori bound.

use lockstrain::energy::ScalarDensity;
use lockstrain::fem::{element_gradients, BodyProblem, BoxMesh, DiscreteDeformation};
use lockstrain::relaxation::{rescale_bound, rescale_to_ball, unlocked_energy};
use lockstrain::Matrix;

fn main() {
    let rho = 2.0;
    let mesh = BoxMesh::unit(2, 8).unwrap();
    let p = BodyProblem::new(mesh, ScalarDensity::quadratic().with_radius(rho).unwrap())
        .unwrap()
        .with_loads(vec![0.0, -1.0], vec![0.0, 0.0])
        .unwrap();
    for eps in [0.1, 0.01] {
        let y = DiscreteDeformation::from_fn(&p.mesh, |x| vec![1.3 * x[0] + 0.2 * (3.0 * x[1]).sin(), 1.3 * x[1]]);
        let max = element_gradients(&p.mesh, &y)
            .iter()
            .map(Matrix::norm)
            .fold(0.0, f64::max);
        let y = y.scaled((rho + eps) / max);
        let z = rescale_to_ball(&p.mesh, &y, rho, eps).unwrap();
        let dj = (unlocked_energy(&p, &z).unwrap() - unlocked_energy(&p, &y).unwrap()).abs();
        println!(
            "ε = {eps}: |ΔJ| = {dj:.4e} ≤ bound {:.4e}",
            rescale_bound(&p, &y, rho, eps).unwrap()
        );
    }
}
