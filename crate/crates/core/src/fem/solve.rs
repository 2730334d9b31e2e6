//! Minimization drivers and a posteriori diagnostics.

use super::field::{element_gradients, minor_fields, prolongate, DiscreteDeformation};
use super::mesh::BoxMesh;
use super::problem::BodyProblem;
use crate::error::{Error, Result};
use crate::optim::{lbfgs, LbfgsSettings, Objective, Termination};

#[derive(Clone, Debug)]
pub struct SolverSettings {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub f_tol: f64,
    pub memory: usize,
    /// Reject trial points whose minimum determinant drops below this fraction of the current one.
    pub det_safeguard: f64,
    /// Keep every accepted iterate in the report.
    pub record_iterates: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_iter: 2000,
            grad_tol: 1e-9,
            f_tol: 1e-14,
            memory: 10,
            det_safeguard: 1e-3,
            record_iterates: false,
        }
    }
}

impl SolverSettings {
    fn lbfgs(&self) -> LbfgsSettings {
        LbfgsSettings {
            max_iter: self.max_iter,
            grad_tol: self.grad_tol,
            f_tol: self.f_tol,
            memory: self.memory,
            ..LbfgsSettings::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeReport {
    pub energy: f64,
    pub initial_energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub min_det: f64,
    pub min_det_element: usize,
    pub max_det: f64,
    pub max_grad_norm: f64,
    /// Largest positive part of `L(∇y)` over elements.
    pub locking_violation: f64,
    pub converged: bool,
    pub termination: Termination,
    /// Energies of the accepted iterates, starting with the initial one.
    pub energy_history: Vec<f64>,
    pub iterates: Vec<DiscreteDeformation>,
}

/// Exhaustive minimum of the element determinants and its element index.
pub fn min_det(mesh: &BoxMesh, y: &DiscreteDeformation) -> (f64, usize) {
    element_gradients(mesh, y)
        .iter()
        .map(|f| f.determinant())
        .enumerate()
        .fold((f64::INFINITY, 0), |(m, i), (e, d)| if d < m { (d, e) } else { (m, i) })
}

fn max_grad_norm(mesh: &BoxMesh, y: &DiscreteDeformation) -> f64 {
    element_gradients(mesh, y).iter().map(|f| f.norm()).fold(0.0, f64::max)
}

struct Driver<'a, C: FnMut(&DiscreteDeformation) -> bool> {
    p: &'a BodyProblem,
    dim: usize,
    safeguard: Option<f64>,
    current_min_det: f64,
    extra: C,
    history: Vec<f64>,
    iterates: Option<Vec<DiscreteDeformation>>,
}

impl<'a, C: FnMut(&DiscreteDeformation) -> bool> Driver<'a, C> {
    fn field(&self, x: &[f64]) -> DiscreteDeformation {
        DiscreteDeformation::new(self.dim, x.to_vec()).expect("finite iterate")
    }
}

impl<'a, C: FnMut(&DiscreteDeformation) -> bool> Objective for Driver<'a, C> {
    fn value_grad(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        match DiscreteDeformation::new(self.dim, x.to_vec()) {
            Ok(y) => match self.p.energy_and_gradient(&y) {
                Ok(r) => r,
                Err(_) => (f64::INFINITY, vec![0.0; x.len()]),
            },
            Err(_) => (f64::INFINITY, vec![0.0; x.len()]),
        }
    }

    fn feasible(&mut self, x: &[f64]) -> bool {
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let y = self.field(x);
        if let Some(frac) = self.safeguard {
            let (d, _) = min_det(&self.p.mesh, &y);
            if d <= frac * self.current_min_det {
                return false;
            }
        }
        (self.extra)(&y)
    }

    fn accepted(&mut self, x: &[f64], value: f64) {
        self.history.push(value);
        if self.safeguard.is_some() || self.iterates.is_some() {
            let y = self.field(x);
            if self.safeguard.is_some() {
                self.current_min_det = min_det(&self.p.mesh, &y).0;
            }
            if let Some(it) = self.iterates.as_mut() {
                it.push(y);
            }
        }
    }
}

fn run<C: FnMut(&DiscreteDeformation) -> bool>(
    p: &BodyProblem,
    y: DiscreteDeformation,
    settings: &SolverSettings,
    safeguard: bool,
    extra: C,
) -> Result<(DiscreteDeformation, MinimizeReport)> {
    let e0 = p.energy(&y);
    if !e0.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    let free = p.free_mask();
    let d0 = min_det(&p.mesh, &y).0;
    let mut drv = Driver {
        p,
        dim: p.dim(),
        safeguard: safeguard.then_some(settings.det_safeguard),
        current_min_det: d0,
        extra,
        history: vec![e0],
        iterates: settings.record_iterates.then(|| vec![y.clone()]),
    };
    let res = lbfgs(&mut drv, y.into_values(), &free, &settings.lbfgs());
    if res.termination == Termination::LineSearchStalled && res.accepted_steps == 0 && res.grad_norm > settings.grad_tol
    {
        return Err(Error::LineSearchFailure {
            iterations: res.iterations,
        });
    }
    let y = DiscreteDeformation::new(p.dim(), res.x.clone())?;
    let grads = element_gradients(&p.mesh, &y);
    let dets: Vec<f64> = grads.iter().map(|f| f.determinant()).collect();
    let (min_det, min_det_element) =
        dets.iter().enumerate().fold(
            (f64::INFINITY, 0),
            |(m, i), (e, &d)| if d < m { (d, e) } else { (m, i) },
        );
    let report = MinimizeReport {
        energy: res.value,
        initial_energy: e0,
        grad_norm: res.grad_norm,
        iterations: res.iterations,
        min_det,
        min_det_element,
        max_det: dets.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        max_grad_norm: grads.iter().map(|f| f.norm()).fold(0.0, f64::max),
        locking_violation: grads.iter().map(|f| p.locking.eval(f)).fold(0.0, f64::max),
        converged: res.converged(),
        termination: res.termination,
        energy_history: drv.history,
        iterates: drv.iterates.unwrap_or_default(),
    };
    Ok((y, report))
}

/// L-BFGS on the free unknowns. Dirichlet data are applied to `y_init` first; for
/// gradient-polyconvex densities every trial point must keep its minimum determinant
/// above `det_safeguard` times the current one.
pub fn minimize(
    p: &BodyProblem,
    y_init: &DiscreteDeformation,
    settings: &SolverSettings,
) -> Result<(DiscreteDeformation, MinimizeReport)> {
    let mut y = y_init.clone();
    p.apply_dirichlet(&mut y);
    let gradpoly = matches!(p.density, super::problem::Density::GradPoly(_));
    run(p, y, settings, gradpoly, |_| true)
}

/// Minimizes over deformations with `|∇y| ≤ ϱ` and `det ∇y ≥ ε_det` on every element.
/// The start must be feasible; trial points leaving the set are rejected by the line search.
pub fn constrained_minimize_ball(
    p: &BodyProblem,
    rho: f64,
    eps_det: f64,
    y_init: &DiscreteDeformation,
    settings: &SolverSettings,
) -> Result<(DiscreteDeformation, MinimizeReport)> {
    let n = p.dim() as f64;
    if !(eps_det >= 0.0 && rho > n.sqrt() * eps_det.powf(1.0 / n)) {
        return Err(Error::IncompatibleParameters(format!(
            "need ϱ > √n ε^(1/n): ϱ = {rho}, ε = {eps_det}, n = {n}"
        )));
    }
    let mut y = y_init.clone();
    p.apply_dirichlet(&mut y);
    let mesh = &p.mesh;
    let inside = |y: &DiscreteDeformation| {
        element_gradients(mesh, y)
            .iter()
            .all(|f| f.norm() <= rho && f.determinant() >= eps_det)
    };
    if !inside(&y) {
        let (d, _) = min_det(mesh, &y);
        return Err(Error::InfeasibleStart(format!(
            "max |∇y| = {}, min det = {d}",
            max_grad_norm(mesh, &y)
        )));
    }
    run(p, y, settings, false, inside)
}

/// Series `‖∇y‖_{L^p} + ‖Cof ∇y‖_{W^{1,1}} + ‖(det ∇y)^{−s}‖_{L¹}` along iterates, with the
/// Sobolev norm of the cofactor taken on its nodal recovery.
pub fn compactness_diagnostic(mesh: &BoxMesh, history: &[DiscreteDeformation], p: f64, s: f64) -> Vec<f64> {
    history
        .iter()
        .map(|y| {
            let grads = element_gradients(mesh, y);
            let mf = minor_fields(mesh, y);
            let mut lp = 0.0;
            let mut cof = 0.0;
            let mut det = 0.0;
            for e in 0..mesh.n_elements() {
                let v = mesh.volume(e);
                lp += v * grads[e].norm().powf(p);
                let mut c = crate::tensor::Matrix::zeros(mf.cof[e].dim());
                for &a in mesh.element(e) {
                    c += mf.cof_nodal[a];
                }
                c = c * (1.0 / (mesh.dim() + 1) as f64);
                cof += v * (c.norm() + mf.cof_grad[e].norm());
                det += if mf.det[e] > 0.0 {
                    v * mf.det[e].powf(-s)
                } else {
                    f64::INFINITY
                };
            }
            lp.powf(1.0 / p) + cof + det
        })
        .collect()
}

/// Result of comparing minimizations on a mesh and its uniform refinement.
#[derive(Clone, Debug)]
pub struct RefinementReport {
    pub coarse_energy: f64,
    pub fine_energy: f64,
    /// Fine-mesh energy of the prolongated coarse minimizer.
    pub prolongated_energy: f64,
    /// `|J_{h/2}(P y_h) − J_h(y_h)|`.
    pub interpolation_error: f64,
}

impl RefinementReport {
    /// `J_{h/2}* ≤ J_{h/2}(P y_h) ≤ J_h* + error`.
    pub fn consistent(&self, tol: f64) -> bool {
        self.fine_energy <= self.prolongated_energy + tol
            && self.prolongated_energy <= self.coarse_energy + self.interpolation_error + tol
    }
}

/// Minimizes on `coarse`, then on `fine` starting from the prolongated coarse minimizer.
pub fn refinement_check(
    coarse: &BodyProblem,
    fine: &BodyProblem,
    y_init: &DiscreteDeformation,
    settings: &SolverSettings,
) -> Result<RefinementReport> {
    let (yc, rc) = minimize(coarse, y_init, settings)?;
    let py = prolongate(&coarse.mesh, &yc, &fine.mesh)?;
    let pe = fine.energy(&py);
    let (_, rf) = minimize(fine, &py, settings)?;
    Ok(RefinementReport {
        coarse_energy: rc.energy,
        fine_energy: rf.energy,
        prolongated_energy: pe,
        interpolation_error: (pe - rc.energy).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{GradPolyDensity, ScalarDensity};
    use crate::fem::{BoundaryMap, FaceSet};
    use crate::tensor::Matrix;

    #[test]
    fn min_det_examples() {
        let m = BoxMesh::unit(3, 2).unwrap();
        assert!((min_det(&m, &DiscreteDeformation::identity(&m)).0 - 1.0).abs() < 1e-14);
        let y = DiscreteDeformation::affine(&m, &Matrix::diag(&[1.0, 1.0, 0.3]), &[0.0; 3]);
        assert!((min_det(&m, &y).0 - 0.3).abs() < 1e-14);
    }

    #[test]
    fn affine_dirichlet_gives_affine_minimizer() {
        let fbar = Matrix::from_rows2([[1.2, 0.3], [-0.1, 0.8]]);
        let mesh = BoxMesh::unit(2, 6).unwrap().with_tags(FaceSet::all(2), FaceSet::none());
        let p = BodyProblem::new(mesh, ScalarDensity::quadratic())
            .unwrap()
            .with_boundary(BoundaryMap::affine(fbar, vec![0.0, 0.0]));
        let mut y0 = DiscreteDeformation::identity(&p.mesh);
        for (i, v) in y0.values_mut().iter_mut().enumerate() {
            *v += 0.05 * ((i * 7 % 11) as f64 - 5.0) / 5.0;
        }
        let (_, r) = minimize(&p, &y0, &SolverSettings::default()).unwrap();
        assert!((r.energy - fbar.norm_sq()).abs() < 1e-6, "{}", r.energy);
        assert!(r.energy_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn inverted_start_is_rejected() {
        let mesh = BoxMesh::unit(3, 2).unwrap();
        let p = BodyProblem::new(mesh, GradPolyDensity::stvk(1.0, 1.0, 1.0, 2.0, 2.0).unwrap()).unwrap();
        let y = DiscreteDeformation::affine(&p.mesh, &Matrix::diag(&[1.0, 1.0, -1.0]), &[0.0; 3]);
        assert!(matches!(
            minimize(&p, &y, &SolverSettings::default()),
            Err(Error::NonFiniteEnergy)
        ));
    }

    #[test]
    fn incompatible_ball_and_det() {
        let mesh = BoxMesh::unit(3, 2).unwrap();
        let p = BodyProblem::new(mesh, ScalarDensity::quadratic()).unwrap();
        let y = DiscreteDeformation::identity(&p.mesh);
        // √3 · 1 = 1.73 > 1.5
        assert!(matches!(
            constrained_minimize_ball(&p, 1.5, 1.0, &y, &SolverSettings::default()),
            Err(Error::IncompatibleParameters(_))
        ));
        assert!(matches!(
            constrained_minimize_ball(&p, 3.0, 2.0, &y, &SolverSettings::default()),
            Err(Error::InfeasibleStart(_))
        ));
    }

    #[test]
    fn compactness_of_affine_map() {
        let m = BoxMesh::new(&[0.0, 0.0, 0.0], &[2.0, 1.0, 1.0], &[2, 2, 2]).unwrap();
        let f = Matrix::from_rows3([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let y = DiscreteDeformation::affine(&m, &f, &[0.0; 3]);
        let v = compactness_diagnostic(&m, &[y.clone(), y], 4.0, 1.0);
        let omega: f64 = 2.0;
        let expect = omega.powf(0.25) * f.norm() + omega * f.cofactor().norm() + omega;
        assert!((v[0] - expect).abs() < 1e-12 && v[0] == v[1]);
    }
}
