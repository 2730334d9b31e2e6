//! Homogeneous discrete gradient Young measures.

use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling;
use crate::tensor::Matrix;

/// Finite convex combination `Σ λ_i δ_{F_i}` of Dirac masses on matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteYoungMeasure {
    atoms: Vec<(Matrix, f64)>,
    support_radius: f64,
}

impl DiscreteYoungMeasure {
    /// Weights must be nonnegative and sum to one within `1e-12`.
    pub fn new(atoms: Vec<(Matrix, f64)>) -> Result<Self> {
        let Some(dim) = atoms.first().map(|(f, _)| f.dim()) else {
            return Err(Error::InvalidMeasure("no atoms".into()));
        };
        let mut total = 0.0;
        let mut radius = 0.0f64;
        for (f, w) in &atoms {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: f.dim(),
                });
            }
            if !f.is_finite() {
                return Err(Error::NonFinite("measure atom"));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidMeasure(format!("weight {w} is not a nonnegative number")));
            }
            total += w;
            radius = radius.max(f.norm());
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(DiscreteYoungMeasure {
            atoms,
            support_radius: radius,
        })
    }

    pub fn dirac(f: Matrix) -> Self {
        let r = f.norm();
        DiscreteYoungMeasure {
            atoms: vec![(f, 1.0)],
            support_radius: r,
        }
    }

    pub fn atoms(&self) -> &[(Matrix, f64)] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.dim()
    }

    /// `max_i |F_i|` over all atoms.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// First moment `Σ λ_i F_i`.
    pub fn barycenter(&self) -> Matrix {
        let mut b = Matrix::zeros(self.dim());
        for (f, w) in &self.atoms {
            b += *f * *w;
        }
        b
    }

    /// `⟨ν, f⟩ = Σ λ_i f(F_i)`; atoms of zero weight are skipped.
    pub fn pairing(&self, f: impl Fn(&Matrix) -> f64) -> Result<f64> {
        let mut s = 0.0;
        for (i, (a, w)) in self.atoms.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let v = f(a);
            if !v.is_finite() {
                return Err(Error::InfiniteAtomValue { index: i });
            }
            s += w * v;
        }
        Ok(s)
    }
}

/// Convex test functions for the Jensen condition.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexTest {
    Norm,
    NormSq,
    /// `F ↦ |F − B|`.
    Distance(Matrix),
    /// `F ↦ M : F`.
    Linear(Matrix),
}

impl ConvexTest {
    pub fn eval(&self, f: &Matrix) -> f64 {
        match self {
            ConvexTest::Norm => f.norm(),
            ConvexTest::NormSq => f.norm_sq(),
            ConvexTest::Distance(b) => (*f - *b).norm(),
            ConvexTest::Linear(m) => m.dot(f),
        }
    }
}

/// `{|·|, |·|², |· − B_k|, ±M_k : ·}` with seeded random `B_k`, `M_k`.
pub fn default_convex_tests(dim: usize, seed: u64) -> Vec<ConvexTest> {
    let mut rng = sampling::seeded(seed);
    let mut t = vec![ConvexTest::Norm, ConvexTest::NormSq];
    for _ in 0..3 {
        t.push(ConvexTest::Distance(sampling::random_matrix(&mut rng, dim, 1.0)));
    }
    for _ in 0..3 {
        let m = sampling::random_matrix(&mut rng, dim, 1.0);
        t.push(ConvexTest::Linear(m));
        t.push(ConvexTest::Linear(-m));
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct GymReport {
    /// `max(0, max_i |F_i| − ϱ)`.
    pub support_violation: f64,
    pub barycenter: Matrix,
    /// `max_f (f(ν̄) − ⟨ν, f⟩)` over the test set; positive values violate Jensen.
    pub jensen_violation: f64,
}

impl GymReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.support_violation == 0.0 && self.jensen_violation <= tol
    }

    pub fn barycenter_error(&self, expected: &Matrix) -> f64 {
        (self.barycenter - *expected).norm()
    }
}

/// Necessary conditions for a homogeneous gradient Young measure supported in `B̄(0,ϱ)`:
/// support, barycenter, and Jensen's inequality for the supplied convex functions.
pub fn validate_gym(nu: &DiscreteYoungMeasure, rho: f64, tests: &[ConvexTest]) -> GymReport {
    let bar = nu.barycenter();
    let mut jensen = f64::NEG_INFINITY;
    for t in tests {
        let lhs = t.eval(&bar);
        let rhs = nu.pairing(|f| t.eval(f)).unwrap_or(f64::INFINITY);
        // rounding slack proportional to the magnitude of the terms
        let tol = 1e-14 * (1.0 + lhs.abs() + rhs.abs());
        jensen = jensen.max(lhs - rhs - tol);
    }
    GymReport {
        support_violation: (nu.support_radius() - rho).max(0.0),
        barycenter: bar,
        jensen_violation: jensen.max(0.0),
    }
}

/// Merges per-cell measures with volume fractions `ω_e` into one homogeneous measure.
pub fn homogenize(field: &[(f64, DiscreteYoungMeasure)]) -> Result<DiscreteYoungMeasure> {
    let total: f64 = field.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-12 || field.iter().any(|(w, _)| !(*w >= 0.0)) {
        return Err(Error::InvalidMeasure(format!("volume fractions sum to {total}")));
    }
    let atoms = field
        .iter()
        .flat_map(|(w, nu)| nu.atoms().iter().map(move |(f, l)| (*f, w * l)))
        .collect();
    DiscreteYoungMeasure::new(atoms)
}

/// Clusters gradient samples into at most `n_atoms` atoms (k-means with farthest-point
/// seeding) weighted by frequency or by the supplied sample weights.
pub fn empirical_measure(samples: &[Matrix], weights: Option<&[f64]>, n_atoms: usize) -> Result<DiscreteYoungMeasure> {
    if samples.is_empty() || n_atoms == 0 {
        return Err(Error::InvalidMeasure("empty sample list".into()));
    }
    let w: Vec<f64> = match weights {
        Some(w) if w.len() == samples.len() => w.to_vec(),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                expected: samples.len(),
                got: w.len(),
            })
        }
        None => vec![1.0; samples.len()],
    };
    let wsum: f64 = w.iter().sum();
    if !(wsum > 0.0) || w.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidMeasure(
            "sample weights must be nonnegative with positive sum".into(),
        ));
    }

    let dist2 = |a: &Matrix, b: &Matrix| (*a - *b).norm_sq();
    let mut centers = vec![samples[0]];
    let mut nearest: Vec<f64> = samples.iter().map(|s| dist2(s, &samples[0])).collect();
    while centers.len() < n_atoms {
        let (i, d) = nearest
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bi, bd), (i, &d)| if d > bd { (i, d) } else { (bi, bd) });
        if d == 0.0 {
            break;
        }
        centers.push(samples[i]);
        for (k, s) in samples.iter().enumerate() {
            nearest[k] = nearest[k].min(dist2(s, &samples[i]));
        }
    }

    let mut assign = vec![0usize; samples.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (k, s) in samples.iter().enumerate() {
            let best = (0..centers.len())
                .min_by(|&a, &b| dist2(s, &centers[a]).total_cmp(&dist2(s, &centers[b])))
                .unwrap();
            if best != assign[k] {
                assign[k] = best;
                changed = true;
            }
        }
        let mut sums = vec![Matrix::zeros(samples[0].dim()); centers.len()];
        let mut mass = vec![0.0; centers.len()];
        for (k, s) in samples.iter().enumerate() {
            sums[assign[k]] += *s * w[k];
            mass[assign[k]] += w[k];
        }
        for c in 0..centers.len() {
            if mass[c] > 0.0 {
                centers[c] = sums[c] * (1.0 / mass[c]);
            }
        }
        if !changed {
            break;
        }
    }
    let mut mass = vec![0.0; centers.len()];
    for (k, a) in assign.iter().enumerate() {
        mass[*a] += w[k];
    }
    let atoms: Vec<(Matrix, f64)> = centers
        .into_iter()
        .zip(mass)
        .filter(|(_, m)| *m > 0.0)
        .map(|(c, m)| (c, m / wsum))
        .collect();
    renormalized(atoms)
}

/// Absorbs the rounding error of the weight sum into the heaviest atom.
fn renormalized(mut atoms: Vec<(Matrix, f64)>) -> Result<DiscreteYoungMeasure> {
    let total: f64 = atoms.iter().map(|(_, w)| w).sum();
    if let Some(k) = (0..atoms.len()).max_by(|&a, &b| atoms[a].1.total_cmp(&atoms[b].1)) {
        atoms[k].1 += 1.0 - total;
    }
    DiscreteYoungMeasure::new(atoms)
}

/// Random measure with `k` atoms in `B̄(0, radius)`; used by property tests and examples.
pub fn random_measure<R: Rng>(rng: &mut R, dim: usize, k: usize, radius: f64) -> DiscreteYoungMeasure {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let atoms = raw
        .iter()
        .map(|w| (crate::energy::sample_ball(rng, dim, radius), w / s))
        .collect();
    renormalized(atoms).expect("valid random measure")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rank_one;

    #[test]
    fn barycenter_examples() {
        let a = Matrix::from_rows3([[1.0, 2.0, 0.0], [0.0, -1.0, 3.0], [0.5, 0.0, 1.0]]);
        let sym = DiscreteYoungMeasure::new(vec![(a, 0.5), (-a, 0.5)]).unwrap();
        assert_eq!(sym.barycenter(), Matrix::zeros(3));
        assert_eq!(DiscreteYoungMeasure::dirac(a).barycenter(), a);
        let id = Matrix::identity(3);
        let nu = DiscreteYoungMeasure::new(vec![(id, 0.25), (id * 2.0, 0.75)]).unwrap();
        assert_eq!(nu.barycenter(), id * 1.75);
    }

    #[test]
    fn pairing_examples() {
        let id = Matrix::identity(3);
        let nu = DiscreteYoungMeasure::new(vec![(id, 0.5), (id * 2.0, 0.5)]).unwrap();
        assert_eq!(nu.pairing(|f| f.determinant()).unwrap(), 4.5);
        assert_eq!(nu.pairing(|_| 3.0).unwrap(), 3.0);
        let a = Matrix::from_rows2([[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(DiscreteYoungMeasure::dirac(a).pairing(|f| f.norm_sq()).unwrap(), 30.0);
        assert!(matches!(
            nu.pairing(|f| if f.trace() > 4.0 { f64::INFINITY } else { 0.0 }),
            Err(Error::InfiniteAtomValue { index: 1 })
        ));
    }

    #[test]
    fn rejects_bad_weights() {
        let id = Matrix::identity(2);
        assert!(DiscreteYoungMeasure::new(vec![(id, 0.5), (id, 0.4)]).is_err());
        assert!(DiscreteYoungMeasure::new(vec![(id, 1.5), (id, -0.5)]).is_err());
    }

    #[test]
    fn laminate_passes_validation() {
        let ab = rank_one(&[1.0, 0.0], &[0.6, 0.8]);
        let nu = DiscreteYoungMeasure::new(vec![(ab, 0.5), (-ab, 0.5)]).unwrap();
        let r = validate_gym(&nu, 1.0, &default_convex_tests(2, 1));
        assert!(r.passed(0.0));
        assert_eq!(r.barycenter, Matrix::zeros(2));
    }

    #[test]
    fn support_violation_flagged() {
        let f = Matrix::identity(2) * (2.0 / 2f64.sqrt() * 2.0);
        let r = validate_gym(&DiscreteYoungMeasure::dirac(f), 2.0, &[ConvexTest::Norm]);
        assert!((r.support_violation - 2.0).abs() < 1e-12);
        assert!(!r.passed(0.0));
    }

    #[test]
    fn dirac_jensen_equality() {
        let a = Matrix::from_rows2([[0.3, -0.2], [0.1, 0.5]]);
        let r = validate_gym(&DiscreteYoungMeasure::dirac(a), 1.0, &[ConvexTest::Norm]);
        assert_eq!(r.jensen_violation, 0.0);
        assert_eq!(
            ConvexTest::Norm.eval(&a),
            DiscreteYoungMeasure::dirac(a).pairing(|f| f.norm()).unwrap()
        );
    }

    #[test]
    fn homogenize_examples() {
        let f1 = Matrix::identity(2);
        let f2 = Matrix::identity(2) * 3.0;
        let nu = DiscreteYoungMeasure::new(vec![(f1, 0.3), (f2, 0.7)]).unwrap();
        assert_eq!(homogenize(&[(1.0, nu.clone())]).unwrap(), nu);
        let h = homogenize(&[
            (0.5, DiscreteYoungMeasure::dirac(f1)),
            (0.5, DiscreteYoungMeasure::dirac(f2)),
        ])
        .unwrap();
        assert_eq!(h.atoms(), &[(f1, 0.5), (f2, 0.5)]);
    }

    #[test]
    fn empirical_examples() {
        let f = Matrix::from_rows2([[1.0, 0.5], [0.0, 2.0]]);
        let nu = empirical_measure(&vec![f; 10], None, 4).unwrap();
        assert_eq!(nu.atoms(), &[(f, 1.0)]);
        let p = rank_one(&[1.0, 0.0], &[1.0, 0.0]);
        let samples: Vec<Matrix> = (0..100).map(|k| if k % 2 == 0 { p } else { -p }).collect();
        let nu = empirical_measure(&samples, None, 2).unwrap();
        assert_eq!(nu.atoms().len(), 2);
        for (a, w) in nu.atoms() {
            assert_eq!(*w, 0.5);
            assert!((*a - p).norm() < 1e-12 || (*a + p).norm() < 1e-12);
        }
    }
}
