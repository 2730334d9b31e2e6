//! Cofactor identities on a few random matrices.

use lockstrain::sampling;
use lockstrain::tensor::identity_report;

fn main() {
    let mut rng = sampling::seeded(1);
    for _ in 0..5 {
        let f = sampling::random_matrix_with_det(&mut rng, 3, 2.0, 0.1, 10.0);
        let r = identity_report(&f);
        println!(
            "det {:8.4}  det Cof − det² {:+.2e}  Cramer {:.2e}  Hadamard slack {:.4}  h-cof slack {:.4}",
            f.determinant(),
            r.det_cof_residual,
            r.cramer_residual,
            r.hadamard_slack,
            r.hcof_slack.unwrap_or(f64::NAN)
        );
    }
}
