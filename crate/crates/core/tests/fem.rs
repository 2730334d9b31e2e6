use approx::assert_relative_eq;
use lockstrain::energy::{GradPolyDensity, ScalarDensity};
use lockstrain::fem::{
    assemble_energy, assemble_gradient, element_gradients, minimize, minor_fields, prolongate, refinement_check,
    BodyProblem, BoundaryMap, BoxMesh, DiscreteDeformation, FaceSet, SolverSettings,
};
use lockstrain::{sampling, Matrix};
use rand::Rng;

fn affine3() -> Matrix {
    Matrix::from_rows3([[1.1, 0.2, 0.0], [0.0, 0.9, 0.1], [0.3, 0.0, 1.2]])
}

#[test]
fn mesh_counts_and_volume() {
    let m = BoxMesh::new(&[0.0, 0.0, 0.0], &[2.0, 1.0, 1.0], &[4, 2, 3]).unwrap();
    assert_eq!(m.n_nodes(), 5 * 3 * 4);
    assert_eq!(m.n_elements(), 6 * 4 * 2 * 3);
    assert_relative_eq!(m.volumes().iter().sum::<f64>(), 2.0, epsilon = 1e-12);
    assert_relative_eq!(m.measure(), 2.0);
    assert_relative_eq!(m.face_measure(FaceSet::all(3)), 10.0, epsilon = 1e-12);
}

#[test]
fn affine_fields_have_constant_gradients_and_minors() {
    let mesh = BoxMesh::unit(3, 3).unwrap();
    let f = affine3();
    let y = DiscreteDeformation::affine(&mesh, &f, &[0.5, -1.0, 2.0]);
    for g in element_gradients(&mesh, &y) {
        assert!((g - f).max_abs() < 1e-12);
    }
    let mf = minor_fields(&mesh, &y);
    for d in &mf.det_nodal {
        assert_relative_eq!(*d, f.determinant(), epsilon = 1e-12);
    }
}

#[test]
fn prolongation_is_exact_on_affine_fields() {
    let coarse = BoxMesh::unit(3, 2).unwrap();
    let fine = BoxMesh::unit(3, 4).unwrap();
    let f = affine3();
    let y = DiscreteDeformation::affine(&coarse, &f, &[0.0; 3]);
    let p = prolongate(&coarse, &y, &fine).unwrap();
    let exact = DiscreteDeformation::affine(&fine, &f, &[0.0; 3]);
    for (a, b) in p.values().iter().zip(exact.values()) {
        assert_relative_eq!(*a, *b, epsilon = 1e-12);
    }
}

#[test]
fn quadratic_energy_of_affine_state() {
    let mesh = BoxMesh::unit(3, 2).unwrap();
    let p = BodyProblem::new(mesh, ScalarDensity::quadratic()).unwrap();
    let f = affine3();
    let y = DiscreteDeformation::affine(&p.mesh, &f, &[0.0; 3]);
    assert_relative_eq!(assemble_energy(&p, &y), f.norm_sq(), epsilon = 1e-12);
}

fn directional_fd(p: &BodyProblem, y: &DiscreteDeformation, dir: &[f64]) -> f64 {
    let h = 1e-6;
    let shift = |s: f64| {
        let v: Vec<f64> = y.values().iter().zip(dir).map(|(a, b)| a + s * b).collect();
        DiscreteDeformation::new(y.dim(), v).unwrap()
    };
    (assemble_energy(p, &shift(h)) - assemble_energy(p, &shift(-h))) / (2.0 * h)
}

#[test]
fn gradpoly_gradient_matches_difference_quotients() {
    let mesh = BoxMesh::unit(3, 2)
        .unwrap()
        .with_tags(FaceSet::face(0, false), FaceSet::none());
    let p = BodyProblem::new(mesh, GradPolyDensity::stvk(2.0, 1.0, 0.5, 4.0, 30.0).unwrap()).unwrap();
    let mut rng = sampling::seeded(3);
    let free = p.free_mask();
    let mut y = DiscreteDeformation::affine(&p.mesh, &affine3(), &[0.0; 3]);
    p.apply_dirichlet(&mut y);
    for (v, f) in y.values_mut().iter_mut().zip(&free) {
        if *f {
            *v += rng.gen_range(-0.02..0.02);
        }
    }
    let g = assemble_gradient(&p, &y).unwrap();
    for _ in 0..5 {
        let dir: Vec<f64> = free
            .iter()
            .map(|f| if *f { rng.gen_range(-1.0..1.0) } else { 0.0 })
            .collect();
        let an: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        assert_relative_eq!(an, directional_fd(&p, &y, &dir), max_relative = 1e-5);
    }
}

#[test]
fn quadratic_minimizer_is_harmonic_extension() {
    let mesh = BoxMesh::unit(2, 4).unwrap().with_tags(FaceSet::all(2), FaceSet::none());
    let f = Matrix::from_rows2([[1.2, 0.3], [-0.1, 0.8]]);
    let p = BodyProblem::new(mesh, ScalarDensity::quadratic())
        .unwrap()
        .with_boundary(BoundaryMap::affine(f, vec![0.1, 0.0]));
    let start = DiscreteDeformation::identity(&p.mesh);
    let (y, r) = minimize(&p, &start, &SolverSettings::default()).unwrap();
    assert!(r.converged);
    let exact = DiscreteDeformation::affine(&p.mesh, &f, &[0.1, 0.0]);
    for (a, b) in y.values().iter().zip(exact.values()) {
        assert_relative_eq!(*a, *b, epsilon = 1e-6);
    }
    assert_relative_eq!(r.energy, f.norm_sq(), max_relative = 1e-9);
}

#[test]
fn refinement_does_not_raise_energy() {
    let make = |n| {
        let mesh = BoxMesh::unit(2, n)
            .unwrap()
            .with_tags(FaceSet::face(0, false), FaceSet::none());
        BodyProblem::new(mesh, ScalarDensity::quadratic())
            .unwrap()
            .with_loads(vec![0.0, -1.0], vec![0.0, 0.0])
            .unwrap()
    };
    let coarse = make(3);
    let fine = make(6);
    let y0 = DiscreteDeformation::identity(&coarse.mesh);
    let rep = refinement_check(&coarse, &fine, &y0, &SolverSettings::default()).unwrap();
    assert!(rep.fine_energy <= rep.coarse_energy + 1e-9);
    assert!(rep.consistent(1e-9));
}
