//! StVK gradient-polyconvex density: value, frame indifference, coercivity.

use lockstrain::energy::{check_coercivity, check_frame_indifference, GradPolyDensity};
use lockstrain::{Matrix, ThirdOrderTensor};

fn main() {
    let d = GradPolyDensity::stvk(1.0, 1.0, 1.0, 4.0, 30.0).unwrap();
    let f = Matrix::from_rows3([[1.1, 0.1, 0.0], [0.0, 0.9, 0.2], [0.0, 0.0, 1.0]]);
    let mut d1 = ThirdOrderTensor::zeros();
    d1.as_mut_slice()[4] = 0.3;
    println!("{}: W(F, Δ₁) = {:.6}", d.name(), d.eval(&f, &d1, None));
    println!(
        "frame indifference, worst of 100: {:.2e}",
        check_frame_indifference(&d, 100, 0)
    );
    let c = check_coercivity(&d, 1000, 0);
    println!("coercivity: min slack {:.4} over {} samples", c.min_slack, c.evaluated);

    let d2 = GradPolyDensity::stvk_with_det_gradient(1.0, 1.0, 1.0, 4.0, 30.0, 1.0, 2.0).unwrap();
    println!(
        "{}: W(F, Δ₁, Δ₂) = {:.6}",
        d2.name(),
        d2.eval(&f, &d1, Some(&[0.1, 0.0, -0.2]))
    );
}
