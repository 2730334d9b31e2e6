//! Scalar stored-energy densities `W(F)` with extended-real values.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::elastic::{stvk_phi, stvk_phi_gradient, ElasticTensor};
use crate::error::{Error, Result};
use crate::sampling;
use crate::tensor::Matrix;

/// A stored energy `W : ℝ^{n×n} → ℝ ∪ {+∞}`.
pub trait StoredEnergy: Send + Sync + fmt::Debug {
    fn energy(&self, f: &Matrix) -> f64;
    /// Analytic gradient; `None` selects finite differences.
    fn gradient(&self, _f: &Matrix) -> Option<Matrix> {
        None
    }
    /// Exact convex envelope when it is known in closed form.
    fn convex_envelope(&self, _f: &Matrix) -> Option<f64> {
        None
    }
    /// True when `W` is known to be convex.
    fn is_convex(&self) -> bool {
        false
    }
    fn supports_dim(&self, dim: usize) -> bool {
        dim == 2 || dim == 3
    }
    fn name(&self) -> String;
}

/// `W(F) = |F|²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quadratic;

impl StoredEnergy for Quadratic {
    fn energy(&self, f: &Matrix) -> f64 {
        f.norm_sq()
    }
    fn gradient(&self, f: &Matrix) -> Option<Matrix> {
        Some(*f * 2.0)
    }
    fn convex_envelope(&self, f: &Matrix) -> Option<f64> {
        Some(f.norm_sq())
    }
    fn is_convex(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "quadratic".into()
    }
}

/// `W(F) = (F₁₁² − 1)² + Σ_{(i,j)≠(1,1)} F_ij²`, wells at `±e₁⊗e₁`.
#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleWell;

impl StoredEnergy for DoubleWell {
    fn energy(&self, f: &Matrix) -> f64 {
        let a = f[(0, 0)];
        (a * a - 1.0).powi(2) + f.norm_sq() - a * a
    }
    fn gradient(&self, f: &Matrix) -> Option<Matrix> {
        let mut g = *f * 2.0;
        let a = f[(0, 0)];
        g[(0, 0)] = 4.0 * a * (a * a - 1.0);
        Some(g)
    }
    fn convex_envelope(&self, f: &Matrix) -> Option<f64> {
        let a = f[(0, 0)];
        Some((a * a - 1.0).max(0.0).powi(2) + f.norm_sq() - a * a)
    }
    fn name(&self) -> String {
        "double-well".into()
    }
}

/// Saint Venant–Kirchhoff energy `φ(F)`, 3×3 only.
#[derive(Clone, Debug)]
pub struct Stvk {
    pub tensor: ElasticTensor,
}

impl StoredEnergy for Stvk {
    fn energy(&self, f: &Matrix) -> f64 {
        stvk_phi(f, &self.tensor)
    }
    fn gradient(&self, f: &Matrix) -> Option<Matrix> {
        Some(stvk_phi_gradient(f, &self.tensor))
    }
    fn supports_dim(&self, dim: usize) -> bool {
        dim == 3
    }
    fn name(&self) -> String {
        "stvk".into()
    }
}

/// Density given by a closure.
pub struct FnEnergy<F> {
    name: String,
    f: F,
}

impl<F> FnEnergy<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnEnergy { name: name.into(), f }
    }
}

impl<F> fmt::Debug for FnEnergy<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnEnergy({})", self.name)
    }
}

impl<F: Fn(&Matrix) -> f64 + Send + Sync> StoredEnergy for FnEnergy<F> {
    fn energy(&self, m: &Matrix) -> f64 {
        (self.f)(m)
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Modulus of continuity `ϑ`.
#[derive(Clone)]
pub enum Modulus {
    /// `ϑ(t) = K t`.
    Lipschitz(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Lipschitz(k) => write!(f, "Lipschitz({k})"),
            Modulus::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Modulus {
    /// Wraps a closure after checking it is nondecreasing on `[0, t_max]`.
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, t_max: f64) -> Result<Self> {
        let mut prev = f(0.0);
        if !(prev.is_finite() && prev >= 0.0) {
            return Err(Error::InvalidParameter(
                "modulus must be finite and nonnegative at 0".into(),
            ));
        }
        for k in 1..=1000 {
            let v = f(t_max * k as f64 / 1000.0);
            if !v.is_finite() || v < prev {
                return Err(Error::InvalidParameter("modulus is not nondecreasing".into()));
            }
            prev = v;
        }
        Ok(Modulus::Custom(Arc::new(f)))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Modulus::Lipschitz(k) => k * t,
            Modulus::Custom(f) => f(t),
        }
    }
}

/// A stored energy with an optional locking radius and modulus of continuity.
/// With a radius `ϱ` set, `W(F) = +∞` whenever `|F| > ϱ`.
#[derive(Clone, Debug)]
pub struct ScalarDensity {
    energy: Arc<dyn StoredEnergy>,
    radius: Option<f64>,
    modulus: Option<Modulus>,
}

impl ScalarDensity {
    pub fn new(e: impl StoredEnergy + 'static) -> Self {
        ScalarDensity {
            energy: Arc::new(e),
            radius: None,
            modulus: None,
        }
    }

    pub fn quadratic() -> Self {
        Self::new(Quadratic)
    }

    pub fn double_well() -> Self {
        Self::new(DoubleWell)
    }

    pub fn stvk(tensor: ElasticTensor) -> Self {
        Self::new(Stvk { tensor })
    }

    pub fn from_fn(name: &str, f: impl Fn(&Matrix) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(FnEnergy::new(name, f))
    }

    /// Locks the density to the closed ball `B̄(0,ϱ)`; checks finiteness on sampled points of the ball.
    pub fn with_radius(mut self, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "locking radius must be positive, got {rho}"
            )));
        }
        let mut rng = sampling::seeded(0xba11);
        for dim in [2usize, 3] {
            if !self.energy.supports_dim(dim) {
                continue;
            }
            for _ in 0..64 {
                let f = sample_ball(&mut rng, dim, rho);
                if !self.energy.energy(&f).is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "density `{}` is not finite on the ball of radius {rho}",
                        self.energy.name()
                    )));
                }
            }
        }
        self.radius = Some(rho);
        Ok(self)
    }

    pub fn with_modulus(mut self, m: Modulus) -> Self {
        self.modulus = Some(m);
        self
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn modulus(&self) -> Option<&Modulus> {
        self.modulus.as_ref()
    }

    pub fn name(&self) -> String {
        self.energy.name()
    }

    pub fn energy(&self) -> &dyn StoredEnergy {
        self.energy.as_ref()
    }

    pub fn is_convex(&self) -> bool {
        self.energy.is_convex()
    }

    pub fn supports_dim(&self, dim: usize) -> bool {
        self.energy.supports_dim(dim)
    }

    /// Closed-form convex envelope of the unlocked density, when known.
    pub fn convex_envelope(&self, f: &Matrix) -> Option<f64> {
        self.energy.convex_envelope(f)
    }

    /// `W(F)`, `+∞` outside the locking ball.
    pub fn eval(&self, f: &Matrix) -> f64 {
        if let Some(rho) = self.radius {
            if f.norm() > rho {
                return f64::INFINITY;
            }
        }
        self.eval_unlocked(f)
    }

    /// `W(F)` ignoring the locking radius.
    pub fn eval_unlocked(&self, f: &Matrix) -> f64 {
        let v = self.energy.energy(f);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// `∂W/∂F`; errors when `W(F) = +∞`.
    pub fn gradient(&self, f: &Matrix) -> Result<Matrix> {
        if !self.eval(f).is_finite() {
            return Err(Error::OutsideDomain);
        }
        self.gradient_unlocked(f)
    }

    /// Gradient of the unlocked density.
    pub fn gradient_unlocked(&self, f: &Matrix) -> Result<Matrix> {
        if let Some(g) = self.energy.gradient(f) {
            return Ok(g);
        }
        fd_gradient(|m| self.energy.energy(m), f)
    }

    /// Central finite-difference gradient regardless of any analytic gradient.
    pub fn fd_gradient(&self, f: &Matrix) -> Result<Matrix> {
        fd_gradient(|m| self.energy.energy(m), f)
    }
}

/// Central differences with step `1e-6·(1+|F|)`.
pub(crate) fn fd_gradient(w: impl Fn(&Matrix) -> f64, f: &Matrix) -> Result<Matrix> {
    let h = 1e-6 * (1.0 + f.norm());
    let n = f.dim();
    let mut g = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut fp = *f;
            let mut fm = *f;
            fp[(i, j)] += h;
            fm[(i, j)] -= h;
            let d = (w(&fp) - w(&fm)) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::OutsideDomain);
            }
            g[(i, j)] = d;
        }
    }
    Ok(g)
}

/// Uniform sample from the closed Frobenius ball of radius `r`.
pub fn sample_ball<R: Rng>(rng: &mut R, dim: usize, r: f64) -> Matrix {
    let k = dim * dim;
    let mut m = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let n = m.norm().max(1e-300);
    let u: f64 = rng.gen();
    m * (r * u.powf(1.0 / k as f64) / n)
}

/// Lipschitz modulus `ϑ(t) = K t` with `K` the largest sampled gradient norm on
/// `B̄(0, radius)`, inflated by 5%.
pub fn estimate_lipschitz_modulus(
    w: &ScalarDensity,
    dim: usize,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<Modulus> {
    let mut rng = sampling::seeded(seed);
    let mut k = 0.0f64;
    for s in 0..samples {
        let mut f = sample_ball(&mut rng, dim, radius);
        if s % 2 == 1 {
            // the sphere carries the largest gradients for growing densities
            f = f * (radius / f.norm().max(1e-300));
        }
        k = k.max(w.gradient_unlocked(&f)?.norm());
    }
    Ok(Modulus::Lipschitz(1.05 * k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_values() {
        let w = ScalarDensity::quadratic();
        assert_eq!(w.eval(&Matrix::identity(3)), 3.0);
        let f = Matrix::from_rows3([[1.0, 2.0, 3.0], [0.5, -1.0, 0.0], [2.0, 1.0, 1.0]]);
        assert_eq!(w.gradient(&f).unwrap(), f * 2.0);
    }

    #[test]
    fn locked_density_is_infinite_outside() {
        let w = ScalarDensity::quadratic().with_radius(1.0).unwrap();
        assert_eq!(w.eval(&(Matrix::identity(2) * 2.0_f64.sqrt())), f64::INFINITY);
        assert!(matches!(
            w.gradient(&(Matrix::identity(3) * 2.0)),
            Err(Error::OutsideDomain)
        ));
    }

    #[test]
    fn double_well_wells() {
        let w = ScalarDensity::double_well();
        let e11 = crate::tensor::rank_one(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]);
        assert_eq!(w.eval(&e11), 0.0);
        assert_eq!(w.eval(&(-e11)), 0.0);
        assert_eq!(w.eval(&Matrix::zeros(2)), 1.0);
    }

    #[test]
    fn analytic_gradients_match_fd() {
        let mut rng = sampling::seeded(5);
        let stvk = ScalarDensity::stvk(ElasticTensor::isotropic(1.0, 1.0).unwrap());
        for w in [ScalarDensity::quadratic(), ScalarDensity::double_well(), stvk] {
            for _ in 0..20 {
                let f = sampling::random_matrix(&mut rng, 3, 1.5);
                let a = w.gradient(&f).unwrap();
                let d = w.fd_gradient(&f).unwrap();
                assert!((a - d).norm() <= 1e-5 * (1.0 + a.norm()), "{}", w.name());
            }
        }
    }

    #[test]
    fn stvk_gradient_vanishes_at_rotations() {
        let w = ScalarDensity::stvk(ElasticTensor::isotropic(1.0, 1.0).unwrap());
        let mut rng = sampling::seeded(2);
        for _ in 0..10 {
            let q = sampling::random_rotation(&mut rng);
            assert!(w.gradient(&q).unwrap().norm() < 1e-13);
            assert!(w.fd_gradient(&q).unwrap().norm() < 1e-8);
        }
    }

    #[test]
    fn closure_density_uses_fd() {
        let w = ScalarDensity::from_fn("cubic", |f| f[(0, 1)].powi(3));
        let mut f = Matrix::zeros(3);
        f[(0, 1)] = 2.0;
        let g = w.gradient(&f).unwrap();
        assert!((g[(0, 1)] - 12.0).abs() < 1e-6);
    }

    #[test]
    fn modulus_rejects_decreasing() {
        assert!(Modulus::custom(|t| -t, 1.0).is_err());
        assert!(Modulus::custom(|t: f64| t.sqrt(), 1.0).is_ok());
    }

    #[test]
    fn lipschitz_modulus_bounds_quadratic() {
        let w = ScalarDensity::quadratic();
        let m = estimate_lipschitz_modulus(&w, 3, 2.0, 200, 1).unwrap();
        // sup |2F| on the ball of radius 2 is 4
        assert!((m.eval(1.0) - 4.2).abs() < 1e-9);
    }
}
