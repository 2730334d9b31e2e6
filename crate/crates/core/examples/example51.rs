//! The map with Lipschitz minors but non-integrable second gradient.

use lockstrain::app::{
    deltas_from_levels, example51_cofactor_check, example51_det_interpolation, example51_divergence,
};

fn main() {
    for t in [1.0, 10.0, 100.0] {
        let cof = example51_cofactor_check(t, 100, 0).unwrap();
        let div = example51_divergence(t, &deltas_from_levels(t, &[4.0, 5.0, 6.0])).unwrap();
        let interp = example51_det_interpolation(t, &[4, 8, 16]).unwrap();
        println!(
            "t = {t:>5}: cofactor gap {cof:.1e}, slope {:.4} (expected {:.4}), sup spread {:.1e}, det error ratios {:?}",
            div.slope,
            div.expected_slope,
            div.sup_variation(),
            interp.ratios()
        );
    }
}
