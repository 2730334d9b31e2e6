//! Elasticity tensors and the Saint Venant–Kirchhoff stored energy.

use crate::error::{Error, Result};
use crate::sampling;
use crate::tensor::{FourthOrderTensor, Matrix};

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Fourth-order tensor of elastic constants with major and minor symmetries,
/// positive definite on symmetric matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ElasticTensor {
    c: FourthOrderTensor,
}

impl ElasticTensor {
    /// Validates symmetries and positive definiteness on sampled symmetric matrices.
    pub fn new(c: FourthOrderTensor) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFinite("elastic tensor"));
        }
        let tol = 1e-12 * (1.0 + c.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs())));
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = c[(i, j, k, l)];
                        if (v - c[(k, l, i, j)]).abs() > tol
                            || (v - c[(j, i, k, l)]).abs() > tol
                            || (v - c[(i, j, l, k)]).abs() > tol
                        {
                            return Err(Error::InvalidParameter(format!(
                                "elastic tensor lacks major/minor symmetry at ({i},{j},{k},{l})"
                            )));
                        }
                    }
                }
            }
        }
        let tensor = ElasticTensor { c };
        let mut rng = sampling::seeded(0x5eed);
        for s in 0..256 {
            let e = if s < 6 {
                // symmetric basis elements first
                let (a, b) = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)][s];
                let mut e = Matrix::zeros(3);
                e[(a, b)] = 1.0;
                e[(b, a)] = 1.0;
                e
            } else {
                let m = sampling::random_matrix(&mut rng, 3, 1.0);
                (m + m.transpose()) * 0.5
            };
            if e.norm() > 0.0 && tensor.energy_product(&e) <= 0.0 {
                return Err(Error::InvalidParameter(
                    "elastic tensor is not positive definite on symmetric matrices".into(),
                ));
            }
        }
        Ok(tensor)
    }

    /// Isotropic tensor `λ δ_ij δ_kl + μ(δ_ik δ_jl + δ_il δ_jk)`.
    pub fn isotropic(lambda: f64, mu: f64) -> Result<Self> {
        let mut c = FourthOrderTensor::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        c[(i, j, k, l)] = lambda * delta(i, j) * delta(k, l)
                            + mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
                    }
                }
            }
        }
        Self::new(c)
    }

    /// Symmetrized identity; acts as the identity on symmetric matrices.
    pub fn identity() -> Self {
        let mut c = FourthOrderTensor::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        c[(i, j, k, l)] = 0.5 * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
                    }
                }
            }
        }
        ElasticTensor { c }
    }

    pub fn tensor(&self) -> &FourthOrderTensor {
        &self.c
    }

    /// `𝒞E`.
    pub fn apply(&self, e: &Matrix) -> Matrix {
        self.c.contract(e)
    }

    /// `𝒞E : E`.
    pub fn energy_product(&self, e: &Matrix) -> f64 {
        self.apply(e).dot(e)
    }
}

/// `φ(F) = (1/8) 𝒞(FᵀF − Id) : (FᵀF − Id)`.
pub fn stvk_phi(f: &Matrix, c: &ElasticTensor) -> f64 {
    assert_eq!(f.dim(), 3, "stvk_phi is defined for 3×3 matrices");
    let g = f.transpose() * *f - Matrix::identity(3);
    0.125 * c.energy_product(&g)
}

/// `∂φ/∂F = ½ F 𝒞(FᵀF − Id)`.
pub fn stvk_phi_gradient(f: &Matrix, c: &ElasticTensor) -> Matrix {
    let g = f.transpose() * *f - Matrix::identity(3);
    (*f * c.apply(&g)) * 0.5
}
