use lockstrain::energy::{frame_violation, GradPolyDensity, LockingConstraint, ScalarDensity};
use lockstrain::fem::{element_gradients, BoxMesh, DiscreteDeformation};
use lockstrain::relaxation::{homogenize, laminate_envelope, rescale_to_ball, DiscreteYoungMeasure, Region};
use lockstrain::tensor::{cofactor_derivative, identity_report, rank_one};
use lockstrain::{sampling, Matrix, ThirdOrderTensor};
use proptest::prelude::*;

fn matrix3() -> impl Strategy<Value = Matrix> {
    prop::array::uniform9(-2.0f64..2.0).prop_map(|v| Matrix::from_row_slice(3, &v))
}

fn matrix2() -> impl Strategy<Value = Matrix> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(|v| Matrix::from_row_slice(2, &v))
}

fn rotation() -> impl Strategy<Value = Matrix> {
    any::<u64>().prop_map(|s| sampling::random_rotation(&mut sampling::seeded(s)))
}

fn scale(m: &Matrix) -> f64 {
    1.0 + m.norm().powi(3)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 256,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn det_of_cofactor_is_det_squared(f in matrix3()) {
        let d = f.determinant();
        prop_assert!((f.cofactor().determinant() - d * d).abs() <= 1e-12 * (1.0 + f.norm().powi(6)));
    }

    #[test]
    fn cramer_rule(f in matrix3()) {
        let r = f * f.cofactor().transpose() - Matrix::identity(3) * f.determinant();
        prop_assert!(r.norm() <= 1e-12 * scale(&f));
        prop_assert!(identity_report(&f).cramer_residual <= 1e-12 * scale(&f));
    }

    #[test]
    fn cofactor_is_multiplicative(a in matrix3(), b in matrix3()) {
        let lhs = (a * b).cofactor();
        let rhs = a.cofactor() * b.cofactor();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + a.norm().powi(2) * b.norm().powi(2)));
    }

    #[test]
    fn hadamard_slacks_nonnegative(f in matrix3()) {
        let r = identity_report(&f);
        prop_assert!(r.hadamard_slack >= 0.0);
        prop_assert!(r.hcof_slack.unwrap() >= 0.0);
    }

    #[test]
    fn two_by_two_cofactor_is_linear(f in matrix2(), g in matrix2(), t in -3.0f64..3.0) {
        let lhs = (f + g * t).cofactor();
        let rhs = f.cofactor() + g.cofactor() * t;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + f.norm() + g.norm() * t.abs()));
    }

    #[test]
    fn cofactor_derivative_matches_difference(f in matrix3(), h in matrix3()) {
        let dc = cofactor_derivative(&f).contract(&h);
        let eps = 1e-6;
        let fd = ((f + h * eps).cofactor() - (f - h * eps).cofactor()) * (0.5 / eps);
        prop_assert!((dc - fd).norm() <= 1e-6 * (1.0 + f.norm() * h.norm()));
    }

    #[test]
    fn rank_one_has_zero_det_in_2d(a in prop::array::uniform2(-2.0f64..2.0), b in prop::array::uniform2(-2.0f64..2.0)) {
        prop_assert!(rank_one(&a, &b).determinant().abs() <= 1e-14 * (1.0 + a[0].abs() + a[1].abs()).powi(2) * (1.0 + b[0].abs() + b[1].abs()).powi(2));
    }

    #[test]
    fn gradpoly_frame_indifferent(seed in any::<u64>(), r in rotation()) {
        let d = GradPolyDensity::stvk(1.0, 2.0, 0.5, 4.0, 30.0).unwrap();
        let mut rng = sampling::seeded(seed);
        let f = Matrix::identity(3) + sampling::random_matrix(&mut rng, 3, 0.3);
        let d1 = sampling::random_third_order(&mut rng, 1.0);
        prop_assert!(frame_violation(&d, &f, &d1, None, &r) <= 1e-10);
    }

    #[test]
    fn gradpoly_infinite_when_inverted(v in prop::array::uniform3(0.1f64..2.0)) {
        let d = GradPolyDensity::stvk(1.0, 1.0, 1.0, 4.0, 30.0).unwrap();
        let f = Matrix::diag(&[-v[0], v[1], v[2]]);
        prop_assert_eq!(d.eval(&f, &ThirdOrderTensor::zeros(), None), f64::INFINITY);
    }

    #[test]
    fn ball_locking_matches_norm(f in matrix3(), rho in 0.5f64..4.0) {
        let l = LockingConstraint::ball(rho).unwrap();
        prop_assert_eq!(l.admissible(&f), f.norm() <= rho);
        prop_assert!(l.admissible(&l.witness(3)));
    }

    #[test]
    fn determinant_witness_admissible(eps in 0.0f64..5.0, dim in 2usize..=3) {
        let l = LockingConstraint::determinant(eps).unwrap();
        prop_assert!(l.admissible(&l.witness(dim)));
    }

    #[test]
    fn dirac_pairing_is_evaluation(f in matrix2()) {
        let w = ScalarDensity::double_well();
        let nu = DiscreteYoungMeasure::dirac(f);
        prop_assert_eq!(nu.barycenter(), f);
        prop_assert_eq!(nu.pairing(|g| w.eval(g)).unwrap(), w.eval(&f));
    }

    #[test]
    fn homogenize_preserves_mean(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = sampling::seeded(seed);
        let total = (0..k).map(|i| 0.5 + i as f64).sum::<f64>();
        let cells: Vec<(f64, DiscreteYoungMeasure)> = (0..k)
            .map(|i| ((0.5 + i as f64) / total, lockstrain::relaxation::random_measure(&mut rng, 2, 3, 1.0)))
            .collect();
        let mut mean = Matrix::zeros(2);
        for (w, nu) in &cells {
            mean += nu.barycenter() * *w;
        }
        let merged = homogenize(&cells).unwrap();
        prop_assert!((merged.barycenter() - mean).norm() <= 1e-12);
        let sq: f64 = cells.iter().map(|(w, nu)| w * nu.pairing(|f| f.norm_sq()).unwrap()).sum();
        prop_assert!((merged.pairing(|f| f.norm_sq()).unwrap() - sq).abs() <= 1e-12);
    }

    #[test]
    fn reach_stays_in_region(f in matrix2(), m in matrix2()) {
        let region = Region::ball(3.0).unwrap();
        let f = if f.norm() > 2.9 { f * (2.9 / f.norm()) } else { f };
        prop_assume!(m.norm() > 1e-6);
        let r = region.reach(&f, &m);
        prop_assert!(r >= 0.0);
        prop_assert!((f + m * (r * (1.0 - 1e-12))).norm() <= 3.0 + 1e-12);
    }

    #[test]
    fn rescaled_field_in_ball(seed in any::<u64>(), eps in 0.001f64..0.5) {
        let mesh = BoxMesh::unit(2, 4).unwrap();
        let mut rng = sampling::seeded(seed);
        let f = sampling::random_matrix(&mut rng, 2, 1.0);
        let y = DiscreteDeformation::from_fn(&mesh, |x| {
            let v = f.mul_vec(x);
            vec![v[0] + 0.1 * (4.0 * x[1]).sin(), v[1] + 0.1 * x[0] * x[0]]
        });
        let max = element_gradients(&mesh, &y).iter().map(Matrix::norm).fold(0.0, f64::max);
        prop_assume!(max > 1e-3);
        let rho = 2.0;
        let y = y.scaled((rho + eps) / max * (1.0 - 1e-12));
        let z = rescale_to_ball(&mesh, &y, rho, eps).unwrap();
        prop_assert!(element_gradients(&mesh, &z).iter().all(|g| g.norm() <= rho));
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn laminate_bounded_by_density(s in -1.8f64..1.8, t in -0.5f64..0.5) {
        let w = ScalarDensity::double_well();
        let a = Matrix::from_rows2([[s, t], [0.0, 0.0]]);
        let (v, nu) = laminate_envelope(&w, &a, 2.0, 2).unwrap();
        prop_assert!(v <= w.eval(&a) + 1e-12);
        prop_assert!(v >= w.convex_envelope(&a).unwrap() - 1e-9);
        prop_assert!((nu.barycenter() - a).norm() <= 1e-10);
        prop_assert!(nu.support_radius() <= 2.0 + 1e-12);
    }
}
