//! Gradient-polyconvex densities `Ŵ(F, Δ₁[, Δ₂])`, where `Δ₁` stands for the
//! gradient of `Cof ∇y` and `Δ₂` for the gradient of `det ∇y`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::elastic::{stvk_phi, stvk_phi_gradient, ElasticTensor};
use crate::error::{Error, Result};
use crate::sampling;
use crate::tensor::{Matrix, ThirdOrderTensor};

/// Parameters of the lower growth bound
/// `Ŵ ≥ c(|F|^p + |Cof F|^q + (det F)^r + (det F)^{−s} + |Δ₁|^q [+ |Δ₂|^r])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthParams {
    pub c: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.c, self.p, self.q, self.r, self.s].iter().all(|v| v.is_finite());
        if !all_finite || self.c <= 0.0 || self.p < 1.0 || self.q < 1.0 || self.r < 1.0 || self.s <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "growth parameters need c > 0, p, q, r ≥ 1, s > 0; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Right-hand side of the growth bound; `None` when `det F ≤ 0`.
    pub fn lower_bound(&self, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> Option<f64> {
        let det = f.determinant();
        if det <= 0.0 {
            return None;
        }
        let mut b = f.norm().powf(self.p)
            + f.cofactor().norm().powf(self.q)
            + det.powf(self.r)
            + det.powf(-self.s)
            + d1.norm().powf(self.q);
        if let Some(d2) = d2 {
            b += vnorm(d2).powf(self.r);
        }
        Some(self.c * b)
    }
}

fn vnorm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Partial derivatives of `Ŵ` with respect to `F`, `Δ₁`, `Δ₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradPolyPartials {
    pub df: Matrix,
    pub dd1: ThirdOrderTensor,
    pub dd2: [f64; 3],
}

pub trait GradPolyEnergy: Send + Sync + fmt::Debug {
    /// Value for `det F > 0`.
    fn value(&self, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> f64;
    fn partials(&self, _f: &Matrix, _d1: &ThirdOrderTensor, _d2: Option<&[f64; 3]>) -> Option<GradPolyPartials> {
        None
    }
    fn uses_det_gradient(&self) -> bool;
    fn name(&self) -> String;
}

/// `Ŵ = φ(F) + α(|Δ₁|^q + (det F)^{−s}) [+ α₂|Δ₂|^r]` with `φ` the StVK energy.
#[derive(Clone, Debug)]
pub struct StvkGradPoly {
    pub tensor: ElasticTensor,
    pub alpha: f64,
    pub q: f64,
    pub s: f64,
    /// `(α₂, r)` for the optional `|Δ₂|^r` term.
    pub det_gradient: Option<(f64, f64)>,
}

impl StvkGradPoly {
    pub fn new(lambda: f64, mu: f64, alpha: f64, q: f64, s: f64) -> Result<Self> {
        if !(alpha > 0.0 && q >= 1.0 && s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need α > 0, q ≥ 1, s > 0; got α={alpha}, q={q}, s={s}"
            )));
        }
        Ok(StvkGradPoly {
            tensor: ElasticTensor::isotropic(lambda, mu)?,
            alpha,
            q,
            s,
            det_gradient: None,
        })
    }

    pub fn with_det_gradient(mut self, coef: f64, r: f64) -> Result<Self> {
        if !(coef > 0.0 && r > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "det-gradient term needs coefficient > 0 and r > 1; got {coef}, {r}"
            )));
        }
        self.det_gradient = Some((coef, r));
        Ok(self)
    }
}

/// `|x|^k` and its gradient `k|x|^{k−2}x`, with the zero subgradient at the origin.
fn power_and_grad(norm: f64, k: f64) -> (f64, f64) {
    if norm == 0.0 {
        (0.0, 0.0)
    } else {
        (norm.powf(k), k * norm.powf(k - 2.0))
    }
}

impl GradPolyEnergy for StvkGradPoly {
    fn value(&self, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> f64 {
        let det = f.determinant();
        let mut v = stvk_phi(f, &self.tensor) + self.alpha * (d1.norm().powf(self.q) + det.powf(-self.s));
        if let (Some((coef, r)), Some(d2)) = (self.det_gradient, d2) {
            v += coef * vnorm(d2).powf(r);
        }
        v
    }

    fn partials(&self, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> Option<GradPolyPartials> {
        let det = f.determinant();
        let df = stvk_phi_gradient(f, &self.tensor) - f.cofactor() * (self.alpha * self.s * det.powf(-self.s - 1.0));
        let (_, k1) = power_and_grad(d1.norm(), self.q);
        let dd1 = d1.scale(self.alpha * k1);
        let mut dd2 = [0.0; 3];
        if let (Some((coef, r)), Some(d2)) = (self.det_gradient, d2) {
            let (_, k2) = power_and_grad(vnorm(d2), r);
            dd2 = d2.map(|v| coef * k2 * v);
        }
        Some(GradPolyPartials { df, dd1, dd2 })
    }

    fn uses_det_gradient(&self) -> bool {
        self.det_gradient.is_some()
    }

    fn name(&self) -> String {
        if self.det_gradient.is_some() {
            "stvk-gradpoly-det".into()
        } else {
            "stvk-gradpoly".into()
        }
    }
}

/// Gradient-polyconvex density together with its declared growth parameters.
/// Evaluates to `+∞` whenever `det F ≤ 0`.
#[derive(Clone, Debug)]
pub struct GradPolyDensity {
    energy: Arc<dyn GradPolyEnergy>,
    growth: GrowthParams,
}

impl GradPolyDensity {
    pub fn new(e: impl GradPolyEnergy + 'static, growth: GrowthParams) -> Result<Self> {
        growth.validate()?;
        Ok(GradPolyDensity {
            energy: Arc::new(e),
            growth,
        })
    }

    /// StVK variant with isotropic `(λ, μ)`, `α`, `q`, `s` and a conservative growth constant.
    pub fn stvk(lambda: f64, mu: f64, alpha: f64, q: f64, s: f64) -> Result<Self> {
        let e = StvkGradPoly::new(lambda, mu, alpha, q, s)?;
        Self::new(e, stvk_growth(alpha, q, s, None))
    }

    /// StVK variant including `α₂|Δ₂|^r`.
    pub fn stvk_with_det_gradient(lambda: f64, mu: f64, alpha: f64, q: f64, s: f64, coef: f64, r: f64) -> Result<Self> {
        let e = StvkGradPoly::new(lambda, mu, alpha, q, s)?.with_det_gradient(coef, r)?;
        Self::new(e, stvk_growth(alpha, q, s, Some(r)))
    }

    pub fn with_growth(mut self, growth: GrowthParams) -> Result<Self> {
        growth.validate()?;
        self.growth = growth;
        Ok(self)
    }

    pub fn growth(&self) -> &GrowthParams {
        &self.growth
    }

    pub fn uses_det_gradient(&self) -> bool {
        self.energy.uses_det_gradient()
    }

    pub fn name(&self) -> String {
        self.energy.name()
    }

    /// `Ŵ(F, Δ₁, Δ₂)`.
    pub fn eval(&self, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> f64 {
        if !(f.determinant() > 0.0) {
            return f64::INFINITY;
        }
        let v = self.energy.value(f, d1, d2);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    /// Partial derivatives, analytic when available, else central differences.
    pub fn partials(&self, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> Result<GradPolyPartials> {
        if !self.eval(f, d1, d2).is_finite() {
            return Err(Error::OutsideDomain);
        }
        match self.energy.partials(f, d1, d2) {
            Some(p) => Ok(p),
            None => self.fd_partials(f, d1, d2),
        }
    }

    /// Central-difference partials with step `1e-6·(1+|x|)` per argument block.
    pub fn fd_partials(&self, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> Result<GradPolyPartials> {
        let fd = |vp: f64, vm: f64, h: f64| -> Result<f64> {
            let d = (vp - vm) / (2.0 * h);
            if d.is_finite() {
                Ok(d)
            } else {
                Err(Error::OutsideDomain)
            }
        };
        let hf = 1e-6 * (1.0 + f.norm());
        let mut df = Matrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                let (mut fp, mut fm) = (*f, *f);
                fp[(i, j)] += hf;
                fm[(i, j)] -= hf;
                df[(i, j)] = fd(self.eval(&fp, d1, d2), self.eval(&fm, d1, d2), hf)?;
            }
        }
        let h1 = 1e-6 * (1.0 + d1.norm());
        let mut dd1 = ThirdOrderTensor::zeros();
        for k in 0..27 {
            let (mut p, mut m) = (*d1, *d1);
            p.as_mut_slice()[k] += h1;
            m.as_mut_slice()[k] -= h1;
            dd1.as_mut_slice()[k] = fd(self.eval(f, &p, d2), self.eval(f, &m, d2), h1)?;
        }
        let mut dd2 = [0.0; 3];
        if let Some(d2) = d2 {
            let h2 = 1e-6 * (1.0 + vnorm(d2));
            for k in 0..3 {
                let (mut p, mut m) = (*d2, *d2);
                p[k] += h2;
                m[k] -= h2;
                dd2[k] = fd(self.eval(f, d1, Some(&p)), self.eval(f, d1, Some(&m)), h2)?;
            }
        }
        Ok(GradPolyPartials { df, dd1, dd2 })
    }
}

/// Growth constant certified by sampling for the StVK family with `λ = μ = 1`
/// scaled down by `min(α, 1)`.
fn stvk_growth(alpha: f64, q: f64, s: f64, r: Option<f64>) -> GrowthParams {
    GrowthParams {
        c: 0.01 * alpha.min(1.0),
        p: 4.0,
        q,
        r: r.unwrap_or(4.0 / 3.0),
        s,
    }
}

/// `gradpoly_eval` entry point.
pub fn gradpoly_eval(d: &GradPolyDensity, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> f64 {
    d.eval(f, d1, d2)
}

/// Relative discrepancy between `Ŵ(F,Δ₁,Δ₂)` and `Ŵ(RF,RΔ₁,Δ₂)`.
pub fn frame_violation(
    d: &GradPolyDensity,
    f: &Matrix,
    d1: &ThirdOrderTensor,
    d2: Option<&[f64; 3]>,
    r: &Matrix,
) -> f64 {
    let a = d.eval(f, d1, d2);
    let b = d.eval(&(*r * *f), &d1.rotate_first(r), d2);
    if a == b {
        return 0.0;
    }
    if !(a.is_finite() && b.is_finite()) {
        return f64::INFINITY;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn sample_args<R: Rng>(rng: &mut R, uses_d2: bool) -> (Matrix, ThirdOrderTensor, Option<[f64; 3]>) {
    let f = Matrix::identity(3) + sampling::random_matrix(rng, 3, 0.5);
    let d1 = sampling::random_third_order(rng, 1.0);
    let d2 = uses_d2.then(|| sampling::random_vec3(rng, 1.0));
    (f, d1, d2)
}

/// Largest frame-indifference violation over seeded samples with `det F > 0`.
pub fn check_frame_indifference(d: &GradPolyDensity, n_samples: usize, seed: u64) -> f64 {
    let mut rng = sampling::seeded(seed);
    let mut worst = 0.0f64;
    let mut taken = 0;
    while taken < n_samples {
        let (f, d1, d2) = sample_args(&mut rng, d.uses_det_gradient());
        let r = sampling::random_rotation(&mut rng);
        if f.determinant() <= 0.05 {
            continue;
        }
        taken += 1;
        worst = worst.max(frame_violation(d, &f, &d1, d2.as_ref(), &r));
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoercivityReport {
    /// Minimum of `Ŵ − bound` over evaluated samples.
    pub min_slack: f64,
    pub evaluated: usize,
    /// Samples with `det F ≤ 0`.
    pub skipped: usize,
}

/// Growth-bound slack at one point; `None` when `det F ≤ 0`.
pub fn coercivity_slack(d: &GradPolyDensity, f: &Matrix, d1: &ThirdOrderTensor, d2: Option<&[f64; 3]>) -> Option<f64> {
    let bound = d.growth.lower_bound(f, d1, d2)?;
    Some(d.eval(f, d1, d2) - bound)
}

/// Samples `F` with entries in `[-2, 2]` and `Δ` entries in `[-2, 2]`.
pub fn check_coercivity(d: &GradPolyDensity, n_samples: usize, seed: u64) -> CoercivityReport {
    let mut rng = sampling::seeded(seed);
    let mut rep = CoercivityReport {
        min_slack: f64::INFINITY,
        evaluated: 0,
        skipped: 0,
    };
    for _ in 0..n_samples {
        let f = sampling::random_matrix(&mut rng, 3, 2.0);
        let d1 = sampling::random_third_order(&mut rng, 2.0);
        let d2 = d.uses_det_gradient().then(|| sampling::random_vec3(&mut rng, 2.0));
        match coercivity_slack(d, &f, &d1, d2.as_ref()) {
            Some(s) => {
                rep.evaluated += 1;
                rep.min_slack = rep.min_slack.min(s);
            }
            None => rep.skipped += 1,
        }
    }
    rep
}

/// Largest midpoint-convexity violation of `Ŵ(F, ·, ·)` for sampled fixed `F`.
pub fn check_convexity(d: &GradPolyDensity, n_samples: usize, seed: u64) -> f64 {
    let mut rng = sampling::seeded(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut taken = 0;
    while taken < n_samples {
        let (f, a1, a2) = sample_args(&mut rng, d.uses_det_gradient());
        if f.determinant() <= 0.05 {
            continue;
        }
        taken += 1;
        let b1 = sampling::random_third_order(&mut rng, 1.0);
        let b2 = a2.map(|_| sampling::random_vec3(&mut rng, 1.0));
        let lam: f64 = rng.gen();
        let m1 = a1.scale(lam).add(&b1.scale(1.0 - lam));
        let m2 = match (a2, b2) {
            (Some(a), Some(b)) => Some(std::array::from_fn(|k| lam * a[k] + (1.0 - lam) * b[k])),
            _ => None,
        };
        let lhs = d.eval(&f, &m1, m2.as_ref());
        let rhs = lam * d.eval(&f, &a1, a2.as_ref()) + (1.0 - lam) * d.eval(&f, &b1, b2.as_ref());
        worst = worst.max(lhs - rhs);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stvk(s: f64) -> GradPolyDensity {
        GradPolyDensity::stvk(1.0, 1.0, 1.0, 2.0, s).unwrap()
    }

    #[test]
    fn infinite_for_nonpositive_det() {
        let d = stvk(2.0);
        let f = Matrix::diag(&[1.0, 1.0, -1.0]);
        assert_eq!(d.eval(&f, &ThirdOrderTensor::zeros(), None), f64::INFINITY);
        assert_eq!(
            d.eval(&Matrix::zeros(3), &ThirdOrderTensor::zeros(), None),
            f64::INFINITY
        );
    }

    #[test]
    fn identity_value() {
        assert_eq!(
            stvk(2.0).eval(&Matrix::identity(3), &ThirdOrderTensor::zeros(), None),
            1.0
        );
    }

    #[test]
    fn delta_term_is_homogeneous() {
        let d = stvk(2.0);
        let id = Matrix::identity(3);
        let mut rng = sampling::seeded(4);
        let d1 = sampling::random_third_order(&mut rng, 1.0);
        let base = d.eval(&id, &ThirdOrderTensor::zeros(), None);
        let t1 = d.eval(&id, &d1, None) - base;
        let t2 = d.eval(&id, &d1.scale(2.0), None) - base;
        assert!((t2 / t1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn frame_indifference() {
        let d = stvk(2.0);
        assert!(check_frame_indifference(&d, 100, 1) <= 1e-8);
        let dd = GradPolyDensity::stvk_with_det_gradient(1.0, 1.0, 1.0, 2.0, 2.0, 1.0, 1.5).unwrap();
        assert!(check_frame_indifference(&dd, 100, 2) <= 1e-8);
        let mut rng = sampling::seeded(3);
        let (f, d1, _) = sample_args(&mut rng, false);
        assert_eq!(frame_violation(&d, &f, &d1, None, &Matrix::identity(3)), 0.0);
    }

    #[derive(Debug)]
    struct Broken;
    impl GradPolyEnergy for Broken {
        fn value(&self, f: &Matrix, _: &ThirdOrderTensor, _: Option<&[f64; 3]>) -> f64 {
            f[(0, 0)]
        }
        fn uses_det_gradient(&self) -> bool {
            false
        }
        fn name(&self) -> String {
            "broken".into()
        }
    }

    #[test]
    fn broken_density_is_caught() {
        let growth = GrowthParams {
            c: 1.0,
            p: 2.0,
            q: 2.0,
            r: 2.0,
            s: 1.0,
        };
        let d = GradPolyDensity::new(Broken, growth).unwrap();
        assert!(check_frame_indifference(&d, 100, 5) > 0.1);
    }

    #[test]
    fn coercivity_with_conservative_constant() {
        let d = stvk(2.0);
        let rep = check_coercivity(&d, 10_000, 7);
        assert!(rep.min_slack >= 0.0, "{rep:?}");
        assert!(rep.skipped > 0);
        let big = d.clone().with_growth(GrowthParams { c: 10.0, ..*d.growth() }).unwrap();
        assert!(check_coercivity(&big, 1000, 7).min_slack < 0.0);
    }

    #[test]
    fn convex_in_gradient_arguments() {
        assert!(check_convexity(&stvk(2.0), 500, 8) <= 1e-10);
        let dd = GradPolyDensity::stvk_with_det_gradient(1.0, 1.0, 1.0, 2.0, 2.0, 1.0, 1.5).unwrap();
        assert!(check_convexity(&dd, 500, 9) <= 1e-10);
    }

    #[test]
    fn barrier_along_compression() {
        let d = stvk(2.0);
        let mut prev = 0.0;
        for k in [1.0, 10.0, 100.0, 1000.0, 1e4] {
            let v = d.eval(&Matrix::diag(&[1.0, 1.0, 1.0 / k]), &ThirdOrderTensor::zeros(), None);
            assert!(v > prev);
            prev = v;
        }
        assert!(prev > 1e7);
    }

    #[test]
    fn analytic_partials_match_fd() {
        let dd = GradPolyDensity::stvk_with_det_gradient(1.0, 1.0, 1.0, 2.0, 2.0, 0.5, 1.5).unwrap();
        let mut rng = sampling::seeded(10);
        for _ in 0..20 {
            let (f, d1, d2) = sample_args(&mut rng, true);
            if f.determinant() < 0.2 {
                continue;
            }
            let a = dd.partials(&f, &d1, d2.as_ref()).unwrap();
            let n = dd.fd_partials(&f, &d1, d2.as_ref()).unwrap();
            assert!((a.df - n.df).norm() <= 1e-5 * (1.0 + a.df.norm()));
            assert!(a.dd1.add(&n.dd1.scale(-1.0)).norm() <= 1e-5 * (1.0 + a.dd1.norm()));
            for k in 0..3 {
                assert!((a.dd2[k] - n.dd2[k]).abs() <= 1e-5 * (1.0 + a.dd2[k].abs()));
            }
        }
    }
}
