//! Discrete Young measures: barycenter, Jensen checks, homogenization.

use lockstrain::relaxation::{default_convex_tests, homogenize, random_measure, validate_gym, DiscreteYoungMeasure};
use lockstrain::{sampling, Matrix};

fn main() {
    let e11 = Matrix::from_rows2([[1.0, 0.0], [0.0, 0.0]]);
    let nu = DiscreteYoungMeasure::new(vec![(e11, 0.5), (-e11, 0.5)]).unwrap();
    let rep = validate_gym(&nu, 2.0, &default_convex_tests(2, 0));
    println!(
        "two-atom laminate: barycenter {:?}, Jensen violation {:.1e}, passed {}",
        rep.barycenter,
        rep.jensen_violation,
        rep.passed(1e-12)
    );

    let mut rng = sampling::seeded(4);
    let cells: Vec<(f64, DiscreteYoungMeasure)> = [0.1, 0.2, 0.3, 0.4]
        .iter()
        .map(|w| (*w, random_measure(&mut rng, 2, 3, 1.5)))
        .collect();
    let merged = homogenize(&cells).unwrap();
    println!(
        "homogenized {} atoms, support radius {:.4}",
        merged.atoms().len(),
        merged.support_radius()
    );
    println!("⟨ν, |·|²⟩ = {:.6}", merged.pairing(|f| f.norm_sq()).unwrap());
}
