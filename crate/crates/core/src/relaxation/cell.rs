//! Periodic-free cell problem: `inf (1/|Ω|)∫ W(A + ∇φ)` over P1 fields vanishing on `∂Ω`.

use rayon::prelude::*;

use super::laminate::{best_split, LaminateOptions};
use super::region::Region;
use crate::energy::ScalarDensity;
use crate::error::{Error, Result};
use crate::fem::{element_gradient, BoxMesh, DiscreteDeformation};
use crate::optim::{lbfgs, LbfgsSettings, Objective, Termination};
use crate::tensor::Matrix;

#[derive(Clone, Debug)]
pub struct CellSettings {
    pub lbfgs: LbfgsSettings,
    /// Also start from a fine laminate built from the best single rank-one split.
    pub laminate_start: bool,
}

impl Default for CellSettings {
    fn default() -> Self {
        CellSettings {
            lbfgs: LbfgsSettings {
                max_iter: 3000,
                grad_tol: 1e-10,
                f_tol: 1e-14,
                f_patience: 10,
                ..LbfgsSettings::default()
            },
            laminate_start: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CellProblem {
    pub dim: usize,
    /// Subdivisions per axis of the unit cell.
    pub resolution: usize,
    pub a: Matrix,
    pub region: Region,
    pub settings: CellSettings,
    /// Extra starting field; must vanish on the boundary and keep every gradient inside the region.
    pub initial: Option<DiscreteDeformation>,
}

impl CellProblem {
    pub fn new(a: Matrix, region: Region, resolution: usize) -> Result<Self> {
        if !region.contains(&a) {
            return Err(region.outside_error(&a));
        }
        if resolution == 0 {
            return Err(Error::InvalidParameter("cell resolution must be positive".into()));
        }
        Ok(CellProblem {
            dim: a.dim(),
            resolution,
            a,
            region,
            settings: CellSettings::default(),
            initial: None,
        })
    }

    /// Ball-constrained cell problem `|A + ∇φ| ≤ ϱ`.
    pub fn ball(a: Matrix, rho: f64, resolution: usize) -> Result<Self> {
        Self::new(a, Region::ball(rho)?, resolution)
    }

    pub fn with_settings(mut self, settings: CellSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_initial(mut self, phi: DiscreteDeformation) -> Self {
        self.initial = Some(phi);
        self
    }
}

#[derive(Clone, Debug)]
pub struct CellSolution {
    pub value: f64,
    pub phi: DiscreteDeformation,
    pub mesh: BoxMesh,
    /// Largest region gauge of `A + ∇φ` over elements.
    pub max_gauge: f64,
    pub iterations: usize,
    pub termination: Termination,
}

impl CellSolution {
    /// Gradients `A + ∇φ` per element.
    pub fn gradients(&self, a: &Matrix) -> Vec<Matrix> {
        (0..self.mesh.n_elements())
            .map(|e| *a + element_gradient(&self.mesh, &self.phi, e))
            .collect()
    }
}

struct CellObjective<'a> {
    w: &'a ScalarDensity,
    mesh: &'a BoxMesh,
    a: Matrix,
    region: Region,
}

impl CellObjective<'_> {
    fn gradients(&self, x: &[f64]) -> Vec<Matrix> {
        let d = self.mesh.dim();
        (0..self.mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let mut f = self.a;
                for (&n, g) in self.mesh.element(e).iter().zip(self.mesh.basis_gradients(e)) {
                    for i in 0..d {
                        for j in 0..d {
                            f[(i, j)] += x[n * d + i] * g[j];
                        }
                    }
                }
                f
            })
            .collect()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let fs = self.gradients(x);
        let vals: Vec<f64> = fs.par_iter().map(|f| self.w.eval(f)).collect();
        let total: f64 = vals.iter().zip(self.mesh.volumes()).map(|(v, vol)| v * vol).sum();
        total / self.mesh.measure()
    }
}

impl Objective for CellObjective<'_> {
    fn value_grad(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        let d = self.mesh.dim();
        let fs = self.gradients(x);
        let local: Vec<(f64, Option<Matrix>)> = fs
            .par_iter()
            .map(|f| {
                let v = self.w.eval(f);
                if !v.is_finite() {
                    return (v, None);
                }
                (v, self.w.gradient(f).ok())
            })
            .collect();
        let omega = self.mesh.measure();
        let mut total = 0.0;
        let mut grad = vec![0.0; x.len()];
        for (e, (v, g)) in local.iter().enumerate() {
            let vol = self.mesh.volume(e);
            total += v * vol;
            let Some(g) = g else {
                return (f64::INFINITY, grad);
            };
            for (&n, bg) in self.mesh.element(e).iter().zip(self.mesh.basis_gradients(e)) {
                for i in 0..d {
                    let mut s = 0.0;
                    for j in 0..d {
                        s += g[(i, j)] * bg[j];
                    }
                    grad[n * d + i] += vol * s / omega;
                }
            }
        }
        (total / omega, grad)
    }

    fn feasible(&mut self, x: &[f64]) -> bool {
        self.gradients(x).iter().all(|f| self.region.contains(f))
    }
}

/// Sawtooth field realizing the split `A ± ...` in the bulk, cut off linearly in the
/// first layer of elements next to the boundary.
fn laminate_field(mesh: &BoxMesh, a: &[f64], b: &[f64], lambda: f64, t: f64) -> DiscreteDeformation {
    let h = mesh.h();
    let period = h / lambda.min(1.0 - lambda).max(1e-3);
    let saw = |u: f64| {
        let r = u.rem_euclid(period);
        if r < lambda * period {
            (1.0 - lambda) * r
        } else {
            (1.0 - lambda) * lambda * period - lambda * (r - lambda * period)
        }
    };
    DiscreteDeformation::from_fn(mesh, |x| {
        let dist = x.iter().map(|&c| c.min(1.0 - c)).fold(f64::INFINITY, f64::min);
        let cut = (dist / h).min(1.0);
        let u: f64 = x.iter().zip(b).map(|(xi, bi)| xi * bi).sum();
        let s = saw(u) * cut * t;
        a.iter().map(|ai| ai * s).collect()
    })
}

fn max_gauge(obj: &CellObjective, x: &[f64]) -> f64 {
    obj.gradients(x).iter().map(|f| obj.region.gauge(f)).fold(0.0, f64::max)
}

/// Approximates `W^inf(A)` on a `resolution^n` mesh of the unit cell. `φ = 0` is always
/// among the starts, so the value never exceeds `W(A)`.
pub fn winf_cell(w: &ScalarDensity, cp: &CellProblem) -> Result<CellSolution> {
    if !cp.region.contains(&cp.a) {
        return Err(cp.region.outside_error(&cp.a));
    }
    let d = cp.dim;
    let mesh = BoxMesh::unit(d, cp.resolution)?;
    let free: Vec<bool> = (0..mesh.n_nodes())
        .flat_map(|n| std::iter::repeat_n(!mesh.on_boundary(n), d))
        .collect();
    let mut obj = CellObjective {
        w,
        mesh: &mesh,
        a: cp.a,
        region: cp.region,
    };

    let mut starts = vec![DiscreteDeformation::zeros(&mesh)];
    if cp.settings.laminate_start {
        if let Some(split) = best_split(w, &cp.a, &cp.region, &LaminateOptions::default()) {
            if split.value < w.eval(&cp.a) {
                let mut amp = split.t;
                for _ in 0..200 {
                    let phi = laminate_field(&mesh, &split.a, &split.b, split.lambda, amp);
                    if obj.feasible(phi.values()) && obj.value(phi.values()).is_finite() {
                        starts.push(phi);
                        break;
                    }
                    amp *= 0.9;
                }
            }
        }
    }
    if let Some(init) = &cp.initial {
        init.check(&mesh);
        let mut v = init.values().to_vec();
        for (x, &f) in v.iter_mut().zip(&free) {
            if !f {
                *x = 0.0;
            }
        }
        if obj.feasible(&v) && obj.value(&v).is_finite() {
            starts.push(DiscreteDeformation::new(d, v)?);
        }
    }

    let mut best: Option<CellSolution> = None;
    for start in starts {
        if !obj.value(start.values()).is_finite() {
            continue;
        }
        let res = lbfgs(&mut obj, start.into_values(), &free, &cp.settings.lbfgs);
        if best.as_ref().is_none_or(|b| res.value < b.value) {
            let gauge = max_gauge(&obj, &res.x);
            best = Some(CellSolution {
                value: res.value,
                phi: DiscreteDeformation::new(d, res.x)?,
                mesh: mesh.clone(),
                max_gauge: gauge,
                iterations: res.iterations,
                termination: res.termination,
            });
        }
    }
    best.ok_or(Error::NonFiniteEnergy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_density_stays_affine() {
        let w = ScalarDensity::quadratic();
        let a = Matrix::from_rows2([[0.7, -0.2], [0.1, 0.4]]);
        let sol = winf_cell(&w, &CellProblem::ball(a, 2.0, 6).unwrap()).unwrap();
        assert!((sol.value - a.norm_sq()).abs() <= 1e-6);
    }

    #[test]
    fn double_well_decreases_below_pointwise() {
        let w = ScalarDensity::double_well();
        let sol = winf_cell(&w, &CellProblem::ball(Matrix::zeros(2), 2.0, 8).unwrap()).unwrap();
        assert!(sol.value < 0.5, "{}", sol.value);
        assert!(sol.max_gauge <= 1.0 + 1e-12);
        assert!(sol.phi.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rejects_outside_base() {
        assert!(matches!(
            CellProblem::ball(Matrix::identity(2) * 2.0, 2.0, 4),
            Err(Error::InfeasibleBase { .. })
        ));
    }
}
