//! Locking constraints `L(F) ≤ 0`.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LockingVariant {
    /// `L(F) = |F| − ϱ`.
    Ball { rho: f64 },
    /// `L(F) = ε − det F`.
    Determinant { eps: f64 },
    /// `L(F) = ¼|FᵀF − (|F|²/n) Id|² − ϱ`.
    CiarletNecas { rho: f64 },
    /// `L(F) = |½(F + Fᵀ) + (1 − ⅔ tr F) Id|² − ϱ`.
    Prager { rho: f64 },
    /// `L ≡ 0`.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LockingConstraint {
    variant: LockingVariant,
}

impl LockingConstraint {
    /// Builds the constraint after checking that a witness is admissible in 2D and 3D.
    pub fn new(variant: LockingVariant) -> Result<Self> {
        let param = match variant {
            LockingVariant::Ball { rho } | LockingVariant::CiarletNecas { rho } | LockingVariant::Prager { rho } => rho,
            LockingVariant::Determinant { eps } => eps,
            LockingVariant::None => 0.0,
        };
        if !param.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite locking parameter in {variant:?}"
            )));
        }
        let c = LockingConstraint { variant };
        for dim in [2, 3] {
            let w = c.witness(dim);
            if c.eval(&w) > 0.0 {
                return Err(Error::EmptyAdmissibleSet(format!(
                    "{variant:?}: witness {w:?} has L = {}",
                    c.eval(&w)
                )));
            }
        }
        Ok(c)
    }

    pub fn ball(rho: f64) -> Result<Self> {
        Self::new(LockingVariant::Ball { rho })
    }

    pub fn determinant(eps: f64) -> Result<Self> {
        Self::new(LockingVariant::Determinant { eps })
    }

    pub fn ciarlet_necas(rho: f64) -> Result<Self> {
        Self::new(LockingVariant::CiarletNecas { rho })
    }

    pub fn prager(rho: f64) -> Result<Self> {
        Self::new(LockingVariant::Prager { rho })
    }

    pub fn none() -> Self {
        LockingConstraint {
            variant: LockingVariant::None,
        }
    }

    pub fn variant(&self) -> LockingVariant {
        self.variant
    }

    pub fn eval(&self, f: &Matrix) -> f64 {
        let n = f.dim();
        let id = Matrix::identity(n);
        match self.variant {
            LockingVariant::Ball { rho } => f.norm() - rho,
            LockingVariant::Determinant { eps } => eps - f.determinant(),
            LockingVariant::CiarletNecas { rho } => {
                let dev = f.transpose() * *f - id * (f.norm_sq() / n as f64);
                0.25 * dev.norm_sq() - rho
            }
            LockingVariant::Prager { rho } => {
                let m = (*f + f.transpose()) * 0.5 + id * (1.0 - 2.0 / 3.0 * f.trace());
                m.norm_sq() - rho
            }
            LockingVariant::None => 0.0,
        }
    }

    pub fn admissible(&self, f: &Matrix) -> bool {
        self.eval(f) <= 0.0
    }

    /// A matrix with `L ≤ 0` in dimension `dim`.
    pub fn witness(&self, dim: usize) -> Matrix {
        match self.variant {
            LockingVariant::Ball { .. } => Matrix::zeros(dim),
            LockingVariant::Determinant { eps } => {
                // nudged so rounding in det cannot push it below ε
                Matrix::identity(dim) * (eps.max(0.0).powf(1.0 / dim as f64) * (1.0 + 1e-12))
            }
            LockingVariant::CiarletNecas { .. } | LockingVariant::None => Matrix::identity(dim),
            // a Id with a + 1 − (2/3) n a = 0
            LockingVariant::Prager { .. } => Matrix::identity(dim) * (1.0 / (2.0 * dim as f64 / 3.0 - 1.0)),
        }
    }
}

/// `locking_eval` entry point.
pub fn locking_eval(l: &LockingConstraint, f: &Matrix) -> f64 {
    l.eval(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    #[test]
    fn ball_at_identity() {
        let l = LockingConstraint::ball(2.0).unwrap();
        let v = l.eval(&Matrix::identity(3));
        assert!((v - (3f64.sqrt() - 2.0)).abs() < 1e-15);
        assert!(v < 0.0);
    }

    #[test]
    fn determinant_inadmissible() {
        let l = LockingConstraint::determinant(0.1).unwrap();
        let v = l.eval(&Matrix::diag(&[1.0, 1.0, 0.05]));
        assert!((v - 0.05).abs() < 1e-15);
        assert!(!l.admissible(&Matrix::diag(&[1.0, 1.0, 0.05])));
    }

    #[test]
    fn ciarlet_necas_at_rotations() {
        let l = LockingConstraint::ciarlet_necas(0.3).unwrap();
        let mut rng = sampling::seeded(1);
        for _ in 0..10 {
            let q = sampling::random_rotation(&mut rng);
            assert!((l.eval(&q) + 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn frame_indifference_of_variants() {
        let cn = LockingConstraint::ciarlet_necas(0.5).unwrap();
        let pr = LockingConstraint::prager(0.5).unwrap();
        let mut rng = sampling::seeded(2);
        let mut prager_differs = false;
        for _ in 0..50 {
            let f = sampling::random_matrix(&mut rng, 3, 1.5);
            let r = sampling::random_rotation(&mut rng);
            assert!((cn.eval(&(r * f)) - cn.eval(&f)).abs() <= 1e-10 * (1.0 + cn.eval(&f).abs()));
            if (pr.eval(&(r * f)) - pr.eval(&f)).abs() > 1e-3 {
                prager_differs = true;
            }
        }
        assert!(prager_differs);
    }

    #[test]
    fn ball_scaling() {
        let l = LockingConstraint::ball(1.5).unwrap();
        let f = Matrix::from_rows3([[0.3, 0.1, 0.0], [0.2, 0.9, 0.4], [0.0, 0.1, 0.5]]);
        for t in [0.5, 1.0, 1.3, 1.4, 2.0] {
            assert_eq!(l.admissible(&(f * t)), t * f.norm() <= 1.5);
        }
    }

    #[test]
    fn witnesses_are_admissible() {
        for l in [
            LockingConstraint::ball(0.0).unwrap(),
            LockingConstraint::determinant(5.0).unwrap(),
            LockingConstraint::ciarlet_necas(0.0).unwrap(),
            LockingConstraint::prager(0.0).unwrap(),
            LockingConstraint::none(),
        ] {
            for dim in [2, 3] {
                assert!(l.admissible(&l.witness(dim)));
            }
        }
        assert!(matches!(
            LockingConstraint::ball(-1.0),
            Err(Error::EmptyAdmissibleSet(_))
        ));
    }
}
