//! Relaxed density in the interior, on the ball boundary, and at a cube face.

use lockstrain::energy::ScalarDensity;
use lockstrain::relaxation::{wrel, Region, WrelOptions};
use lockstrain::Matrix;

fn main() {
    let w = ScalarDensity::double_well();
    let opts = WrelOptions {
        resolution: 8,
        ..WrelOptions::default()
    };
    let cases = [
        (
            "interior",
            Matrix::from_rows2([[0.5, 0.0], [0.0, 0.0]]),
            Region::ball(2.0).unwrap(),
        ),
        (
            "ball boundary",
            Matrix::from_rows2([[2.0, 0.0], [0.0, 0.0]]),
            Region::ball(2.0).unwrap(),
        ),
        (
            "cube face",
            Matrix::from_rows2([[1.0, 0.0], [0.0, 0.2]]),
            Region::cube(1.0).unwrap(),
        ),
    ];
    for (name, a, region) in cases {
        let v = wrel(&w, &a, &region, &opts).unwrap();
        println!(
            "{name:>13}: W = {:.4}, wrel = {:.4} ± {:.1e} via {:?}",
            w.eval(&a),
            v.value,
            v.uncertainty,
            v.method
        );
    }
}
