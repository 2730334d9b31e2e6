//! Relaxed density on a locking region and the relaxed functional.

use super::cell::{winf_cell, CellProblem, CellSettings};
use super::region::Region;
use super::young::DiscreteYoungMeasure;
use crate::energy::{estimate_lipschitz_modulus, LockingVariant, Modulus, ScalarDensity};
use crate::error::{Error, Result};
use crate::fem::{element_gradients, BodyProblem, Density, DiscreteDeformation, FaceSet};
use crate::tensor::Matrix;

#[derive(Clone, Debug)]
pub struct WrelOptions {
    pub resolution: usize,
    pub cell: CellSettings,
    /// Largest radial offset `ε₀`; the sequence is `ε_j = 2^{-j} ε₀`, `j = 0..=6`.
    pub eps0: f64,
}

impl Default for WrelOptions {
    fn default() -> Self {
        WrelOptions {
            resolution: 16,
            cell: CellSettings::default(),
            eps0: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WrelMethod {
    /// `A` on the boundary of a ball: `W(A)` itself.
    BallBoundary,
    /// Interior point: cell problem.
    Cell,
    /// Boundary of a region that is not strictly convex: extrapolated radial limit.
    RadialLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WrelValue {
    pub value: f64,
    /// Extrapolation residual; zero for the other methods.
    pub uncertainty: f64,
    pub method: WrelMethod,
}

const BOUNDARY_TOL: f64 = 1e-12;

/// Relaxed density `W^rel(A)` on `region`.
pub fn wrel(w: &ScalarDensity, a: &Matrix, region: &Region, opts: &WrelOptions) -> Result<WrelValue> {
    let gauge = region.gauge(a);
    if !(gauge <= 1.0 + BOUNDARY_TOL) {
        return Err(Error::OutsideRegion { gauge });
    }
    let on_boundary = (gauge - 1.0).abs() <= BOUNDARY_TOL;
    if on_boundary && region.strictly_convex() {
        return Ok(WrelValue {
            value: w.eval(a),
            uncertainty: 0.0,
            method: WrelMethod::BallBoundary,
        });
    }
    let cell = |m: Matrix| -> Result<f64> {
        let cp = CellProblem::new(m, *region, opts.resolution)?.with_settings(opts.cell.clone());
        Ok(winf_cell(w, &cp)?.value)
    };
    if !on_boundary {
        return Ok(WrelValue {
            value: cell(*a)?,
            uncertainty: 0.0,
            method: WrelMethod::Cell,
        });
    }

    let norm = a.norm();
    let eps0 = opts.eps0.min(0.5 * norm);
    let mut samples = Vec::with_capacity(7);
    for j in 0..=6 {
        let eps = eps0 * 0.5f64.powi(j);
        samples.push((eps, cell(*a * ((norm - eps) / norm))?));
    }
    let tail = &samples[4..];
    let (intercept, slope) = linear_fit(tail);
    let residual = tail
        .iter()
        .map(|(e, v)| (v - (intercept + slope * e)).abs())
        .fold(0.0, f64::max);
    let last = samples[6].1;
    let value = intercept.min(w.eval(a));
    Ok(WrelValue {
        value,
        uncertainty: residual + (value - last).abs(),
        method: WrelMethod::RadialLimit,
    })
}

/// Least-squares line `v ≈ c₀ + c₁ ε`, returned as `(c₀, c₁)`.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

fn scalar_density(p: &BodyProblem) -> Result<&ScalarDensity> {
    match &p.density {
        Density::Scalar(w) => Ok(w),
        Density::GradPoly(_) => Err(Error::InvalidParameter(
            "relaxation needs a density of the deformation gradient only".into(),
        )),
    }
}

/// Radius of the ball carrying admissible gradients, if any.
fn support_ball(p: &BodyProblem, w: &ScalarDensity) -> Option<f64> {
    let lock = match p.locking.variant() {
        LockingVariant::Ball { rho } => Some(rho),
        _ => None,
    };
    match (w.radius(), lock) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// `J̄ = Σ_e |e|⟨ν_e, W⟩ − ℓ(y) + α‖y − y₀‖_{L²(Γ)}` for one measure per element.
/// A Dirac field at the element gradients reproduces `J(y)` exactly.
pub fn relaxed_energy(field: &[DiscreteYoungMeasure], y: &DiscreteDeformation, p: &BodyProblem) -> Result<f64> {
    let w = scalar_density(p)?;
    if field.len() != p.mesh.n_elements() {
        return Err(Error::DimensionMismatch {
            expected: p.mesh.n_elements(),
            got: field.len(),
        });
    }
    let grads = element_gradients(&p.mesh, y);
    let rho = support_ball(p, w);
    let mut dens = Vec::with_capacity(field.len());
    for (e, (nu, g)) in field.iter().zip(&grads).enumerate() {
        let error = (nu.barycenter() - *g).norm();
        if error > 1e-8 * g.norm().max(1.0) {
            return Err(Error::BarycenterMismatch { cell: e, error });
        }
        if let Some(rho) = rho {
            if nu.support_radius() > rho {
                return Err(Error::SupportViolation {
                    cell: e,
                    norm: nu.support_radius(),
                    rho,
                });
            }
        }
        dens.push(nu.pairing(|f| {
            if p.locking.eval(f) > 0.0 {
                f64::INFINITY
            } else {
                w.eval(f)
            }
        })?);
    }
    Ok(p.sum_volume(&dens) - p.load(y) + p.device_term(y))
}

/// `J` with the density's locking radius ignored.
pub fn unlocked_energy(p: &BodyProblem, y: &DiscreteDeformation) -> Result<f64> {
    let w = scalar_density(p)?;
    let dens: Vec<f64> = element_gradients(&p.mesh, y)
        .iter()
        .map(|f| w.eval_unlocked(f))
        .collect();
    Ok(p.sum_volume(&dens) - p.load(y) + p.device_term(y))
}

/// Scales `y` by `ϱ/(ϱ+ε)` so that every element gradient lies in `B̄(0,ϱ)`.
pub fn rescale_to_ball(
    mesh: &crate::fem::BoxMesh,
    y: &DiscreteDeformation,
    rho: f64,
    eps: f64,
) -> Result<DiscreteDeformation> {
    if !(rho > 0.0 && eps >= 0.0 && rho.is_finite() && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need rho > 0 and eps >= 0, got {rho}, {eps}"
        )));
    }
    let grads = element_gradients(mesh, y);
    let max = grads.iter().map(Matrix::norm).fold(0.0, f64::max);
    if max > rho + eps {
        return Err(Error::PreconditionViolated(format!(
            "max gradient norm {max} exceeds rho + eps = {}",
            rho + eps
        )));
    }
    if eps == 0.0 {
        return Ok(y.clone());
    }
    let mut s = rho / (rho + eps);
    loop {
        let z = y.scaled(s);
        if element_gradients(mesh, &z).iter().all(|f| f.norm() <= rho) {
            return Ok(z);
        }
        // a few ulps down if rounding leaves the largest gradient just outside
        s = f64::from_bits(s.to_bits() - 1);
    }
}

/// Bound on `|J(scaled) − J(y)|`:
/// `|Ω|ϑ(ε) + (C_ℓ + α) ε/(ϱ+ε) (‖y‖_{L²(Γ)} + ‖y‖_∞ + 2)` with `C_ℓ = |b||Ω| + |t||Γ₁|`.
/// Uses the density's modulus when set, otherwise a sampled Lipschitz modulus on `B̄(0,ϱ+ε)`.
pub fn rescale_bound(p: &BodyProblem, y: &DiscreteDeformation, rho: f64, eps: f64) -> Result<f64> {
    let w = scalar_density(p)?;
    let modulus = match w.modulus() {
        Some(m) => m.clone(),
        None if eps == 0.0 => Modulus::Lipschitz(0.0),
        None => estimate_lipschitz_modulus(w, p.dim(), rho + eps, 4000, 0)?,
    };
    let mesh = &p.mesh;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let c_l = norm(&p.body_force) * mesh.measure() + norm(&p.traction) * mesh.face_measure(mesh.free_faces());
    let gamma = p.boundary_l2_norm(y, FaceSet::all(p.dim()));
    Ok(mesh.measure() * modulus.eval(eps) + (c_l + p.alpha) * eps / (rho + eps) * (gamma + y.max_norm() + 2.0))
}
