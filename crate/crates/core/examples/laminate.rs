//! Laminate upper bound for the double well on a line through the wells.

use lockstrain::energy::ScalarDensity;
use lockstrain::relaxation::laminate_envelope;
use lockstrain::Matrix;

fn main() {
    let w = ScalarDensity::double_well();
    for s in [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5] {
        let a = Matrix::from_rows2([[s, 0.0], [0.0, 0.0]]);
        let (v, nu) = laminate_envelope(&w, &a, 2.0, 3).unwrap();
        println!(
            "s = {s:+.1}: W = {:.4}, laminate = {v:.3e}, convex envelope = {:.3e}, {} atoms",
            w.eval(&a),
            w.convex_envelope(&a).unwrap(),
            nu.atoms().len()
        );
    }
}
