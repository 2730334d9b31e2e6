//! Energy functionals on a box and their exact discrete gradients.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::field::{element_gradients, minor_fields_from_gradients, DiscreteDeformation};
use super::mesh::{BoxMesh, FaceSet};
use crate::energy::{GradPolyDensity, LockingConstraint, ScalarDensity};
use crate::error::{Error, Result};
use crate::tensor::{cofactor_derivative, Matrix};

#[derive(Clone, Debug)]
pub enum Density {
    Scalar(ScalarDensity),
    GradPoly(GradPolyDensity),
}

impl From<ScalarDensity> for Density {
    fn from(w: ScalarDensity) -> Self {
        Density::Scalar(w)
    }
}

impl From<GradPolyDensity> for Density {
    fn from(w: GradPolyDensity) -> Self {
        Density::GradPoly(w)
    }
}

type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Boundary map `y₀`.
#[derive(Clone)]
pub struct BoundaryMap(Arc<MapFn>);

impl BoundaryMap {
    pub fn new(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        BoundaryMap(Arc::new(f))
    }

    /// `y₀(x) = F x + b`.
    pub fn affine(f: Matrix, b: Vec<f64>) -> Self {
        Self::new(move |x| f.mul_vec(x).iter().zip(&b).map(|(u, v)| u + v).collect())
    }

    pub fn identity() -> Self {
        Self::new(|x| x.to_vec())
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.0)(x)
    }
}

impl fmt::Debug for BoundaryMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryMap")
    }
}

/// `J(y) = ∫ W − ℓ(y) + α‖y − y₀‖_{L²(Γ)}` on a tagged box mesh, with `y = y₀` on Γ₀
/// and `ℓ(y) = ∫ b·y + ∫_{Γ₁} t·y`.
#[derive(Clone, Debug)]
pub struct BodyProblem {
    pub mesh: BoxMesh,
    pub density: Density,
    pub locking: LockingConstraint,
    pub body_force: Vec<f64>,
    pub traction: Vec<f64>,
    pub y0: BoundaryMap,
    pub alpha: f64,
    y0_nodal: DiscreteDeformation,
}

/// Element and nodal quantities shared by energy and gradient.
struct State {
    grads: Vec<Matrix>,
    minors: Option<super::field::MinorFields>,
}

impl BodyProblem {
    pub fn new(mesh: BoxMesh, density: impl Into<Density>) -> Result<Self> {
        let density = density.into();
        let d = mesh.dim();
        match &density {
            Density::GradPoly(_) if d != 3 => {
                return Err(Error::InvalidParameter(
                    "gradient-polyconvex densities need a 3D mesh".into(),
                ))
            }
            Density::Scalar(w) if !w.supports_dim(d) => {
                return Err(Error::InvalidParameter(format!(
                    "density `{}` does not support dimension {d}",
                    w.name()
                )))
            }
            _ => {}
        }
        let y0 = BoundaryMap::identity();
        let y0_nodal = DiscreteDeformation::identity(&mesh);
        Ok(BodyProblem {
            mesh,
            density,
            locking: LockingConstraint::none(),
            body_force: vec![0.0; d],
            traction: vec![0.0; d],
            y0,
            alpha: 0.0,
            y0_nodal,
        })
    }

    pub fn with_boundary(mut self, y0: BoundaryMap) -> Self {
        self.y0_nodal = DiscreteDeformation::from_fn(&self.mesh, |x| y0.eval(x));
        self.y0 = y0;
        self
    }

    pub fn with_locking(mut self, l: LockingConstraint) -> Self {
        self.locking = l;
        self
    }

    pub fn with_loads(mut self, body_force: Vec<f64>, traction: Vec<f64>) -> Result<Self> {
        let d = self.mesh.dim();
        if body_force.len() != d || traction.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: body_force.len().min(traction.len()),
            });
        }
        self.body_force = body_force;
        self.traction = traction;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("α must be ≥ 0, got {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn y0_nodal(&self) -> &DiscreteDeformation {
        &self.y0_nodal
    }

    /// Mask of unknowns not fixed by Γ₀.
    pub fn free_mask(&self) -> Vec<bool> {
        let d = self.dim();
        let g0 = self.mesh.dirichlet_faces();
        (0..self.mesh.n_nodes())
            .flat_map(|a| std::iter::repeat_n(!self.mesh.on_faces(a, g0), d))
            .collect()
    }

    /// Overwrites the Γ₀ nodes with `y₀`.
    pub fn apply_dirichlet(&self, y: &mut DiscreteDeformation) {
        let mask = self.free_mask();
        for (i, v) in y.values_mut().iter_mut().enumerate() {
            if !mask[i] {
                *v = self.y0_nodal.values()[i];
            }
        }
    }

    fn state(&self, y: &DiscreteDeformation) -> State {
        let grads = element_gradients(&self.mesh, y);
        let minors = match self.density {
            Density::GradPoly(_) => Some(minor_fields_from_gradients(&self.mesh, &grads)),
            Density::Scalar(_) => None,
        };
        State { grads, minors }
    }

    fn element_densities(&self, st: &State) -> Vec<f64> {
        let locked = self.locking;
        (0..self.mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let f = &st.grads[e];
                if locked.eval(f) > 0.0 {
                    return f64::INFINITY;
                }
                match &self.density {
                    Density::Scalar(w) => w.eval(f),
                    Density::GradPoly(w) => {
                        let m = st.minors.as_ref().expect("minor fields");
                        let d2 = w.uses_det_gradient().then_some(&m.det_grad[e]);
                        w.eval(f, &m.cof_grad[e], d2)
                    }
                }
            })
            .collect()
    }

    /// `∫_Ω W(∇y)` by centroid quadrature, summed in element order.
    pub fn stored_energy(&self, y: &DiscreteDeformation) -> f64 {
        let st = self.state(y);
        self.sum_volume(&self.element_densities(&st))
    }

    pub(crate) fn sum_volume(&self, dens: &[f64]) -> f64 {
        dens.iter().zip(self.mesh.volumes()).map(|(w, v)| v * w).sum()
    }

    /// `ℓ(y)`, exact for P1 fields.
    pub fn load(&self, y: &DiscreteDeformation) -> f64 {
        self.load_gradient().iter().zip(y.values()).map(|(g, v)| g * v).sum()
    }

    /// Nodal representation of `ℓ`, so that `ℓ(y) = Σ g_i y_i`.
    pub fn load_gradient(&self) -> Vec<f64> {
        let d = self.dim();
        let mut g = vec![0.0; d * self.mesh.n_nodes()];
        if self.body_force.iter().any(|&b| b != 0.0) {
            for e in 0..self.mesh.n_elements() {
                let w = self.mesh.volume(e) / (d + 1) as f64;
                for &a in self.mesh.element(e) {
                    for i in 0..d {
                        g[a * d + i] += w * self.body_force[i];
                    }
                }
            }
        }
        if self.traction.iter().any(|&t| t != 0.0) {
            let free = self.mesh.free_faces();
            for f in self.mesh.facets().iter().filter(|f| free.contains(f.face)) {
                let w = f.measure / d as f64;
                for &a in self.mesh.facet_nodes(f) {
                    for i in 0..d {
                        g[a * d + i] += w * self.traction[i];
                    }
                }
            }
        }
        g
    }

    /// `‖y − y₀‖²_{L²(Γ)}` with exact P1 facet mass matrices.
    fn device_norm_sq(&self, y: &DiscreteDeformation, gamma: FaceSet) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for f in self.mesh.facets().iter().filter(|f| gamma.contains(f.face)) {
            let nodes = self.mesh.facet_nodes(f);
            for i in 0..d {
                let u: Vec<f64> = nodes.iter().map(|&a| y.node(a)[i] - self.y0_nodal.node(a)[i]).collect();
                s += facet_mass_form(f.measure, &u, &u);
            }
        }
        s
    }

    /// `‖y‖_{L²(S)}` over a face set.
    pub fn boundary_l2_norm(&self, y: &DiscreteDeformation, faces: FaceSet) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for f in self.mesh.facets().iter().filter(|f| faces.contains(f.face)) {
            let nodes = self.mesh.facet_nodes(f);
            for i in 0..d {
                let u: Vec<f64> = nodes.iter().map(|&a| y.node(a)[i]).collect();
                s += facet_mass_form(f.measure, &u, &u);
            }
        }
        s.sqrt()
    }

    /// `α‖y − y₀‖_{L²(Γ)}`.
    pub fn device_term(&self, y: &DiscreteDeformation) -> f64 {
        if self.alpha == 0.0 {
            return 0.0;
        }
        self.alpha * self.device_norm_sq(y, self.mesh.device_faces()).sqrt()
    }

    /// The full discrete functional; `+∞` if any element is inadmissible.
    pub fn energy(&self, y: &DiscreteDeformation) -> f64 {
        let w = self.stored_energy(y);
        if !w.is_finite() {
            return f64::INFINITY;
        }
        w - self.load(y) + self.device_term(y)
    }

    /// Exact gradient of [`energy`](Self::energy) with respect to the nodal values.
    pub fn gradient(&self, y: &DiscreteDeformation) -> Result<Vec<f64>> {
        Ok(self.energy_and_gradient(y)?.1)
    }

    pub fn energy_and_gradient(&self, y: &DiscreteDeformation) -> Result<(f64, Vec<f64>)> {
        y.check(&self.mesh);
        let st = self.state(y);
        let dens = self.element_densities(&st);
        let w = self.sum_volume(&dens);
        if !w.is_finite() {
            return Err(Error::OutsideDomain);
        }
        let energy = w - self.load(y) + self.device_term(y);
        let mesh = &self.mesh;
        let d = self.dim();

        // ∂J/∂F_e per element
        let dfe: Vec<Matrix> = match &self.density {
            Density::Scalar(w) => st
                .grads
                .par_iter()
                .enumerate()
                .map(|(e, f)| w.gradient(f).map(|g| g * mesh.volume(e)))
                .collect::<Result<_>>()?,
            Density::GradPoly(w) => self.gradpoly_element_gradients(w, &st)?,
        };

        let mut g = vec![0.0; d * mesh.n_nodes()];
        for (e, de) in dfe.iter().enumerate() {
            for (&a, ga) in mesh.element(e).iter().zip(mesh.basis_gradients(e)) {
                for i in 0..d {
                    let mut s = 0.0;
                    for j in 0..d {
                        s += de[(i, j)] * ga[j];
                    }
                    g[a * d + i] += s;
                }
            }
        }
        for (gi, li) in g.iter_mut().zip(self.load_gradient()) {
            *gi -= li;
        }
        if self.alpha > 0.0 {
            let gamma = mesh.device_faces();
            let norm = self.device_norm_sq(y, gamma).sqrt();
            // zero is a subgradient of the norm at the origin
            if norm > 0.0 {
                let c = self.alpha / norm;
                for f in mesh.facets().iter().filter(|f| gamma.contains(f.face)) {
                    let nodes = mesh.facet_nodes(f);
                    for i in 0..d {
                        let u: Vec<f64> = nodes.iter().map(|&a| y.node(a)[i] - self.y0_nodal.node(a)[i]).collect();
                        for (k, &a) in nodes.iter().enumerate() {
                            let mut mu = 0.0;
                            for (l, ul) in u.iter().enumerate() {
                                mu += facet_mass_entry(f.measure, d, k, l) * ul;
                            }
                            g[a * d + i] += c * mu;
                        }
                    }
                }
            }
        }
        Ok((energy, g))
    }

    /// Chain rule through the cofactor/determinant recovery.
    fn gradpoly_element_gradients(&self, w: &GradPolyDensity, st: &State) -> Result<Vec<Matrix>> {
        let mesh = &self.mesh;
        let m = st.minors.as_ref().expect("minor fields");
        let use_d2 = w.uses_det_gradient();
        let partials: Vec<_> = (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| w.partials(&st.grads[e], &m.cof_grad[e], use_d2.then_some(&m.det_grad[e])))
            .collect::<Result<_>>()?;

        // H_a = Σ_{e∋a} |e| P1_e · ∇λ_a^e, h_a = Σ_{e∋a} |e| P2_e · ∇λ_a^e
        let nodal: Vec<(Matrix, f64)> = (0..mesh.n_nodes())
            .into_par_iter()
            .map(|a| {
                let mut h = Matrix::zeros(3);
                let mut hd = 0.0;
                for &e in mesh.node_elements(a) {
                    let k = mesh.element(e).iter().position(|&b| b == a).unwrap();
                    let ga = mesh.basis_gradients(e)[k];
                    let vol = mesh.volume(e);
                    let p = &partials[e];
                    for j in 0..3 {
                        for kk in 0..3 {
                            let s: f64 = (0..3).map(|l| p.dd1[(j, kk, l)] * ga[l]).sum();
                            h[(j, kk)] += vol * s;
                        }
                    }
                    if use_d2 {
                        hd += vol * (0..3).map(|l| p.dd2[l] * ga[l]).sum::<f64>();
                    }
                }
                (h, hd)
            })
            .collect();

        Ok((0..mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let vol = mesh.volume(e);
                // ∂J/∂Cof_e and ∂J/∂det_e through the recovery weights |e| / Σ|e'|
                let mut gc = Matrix::zeros(3);
                let mut gd = 0.0;
                for &a in mesh.element(e) {
                    let wgt = vol / mesh.node_volume(a);
                    gc += nodal[a].0 * wgt;
                    gd += nodal[a].1 * wgt;
                }
                let f = &st.grads[e];
                let mut de = partials[e].df * vol;
                if gc.max_abs() > 0.0 {
                    de += cofactor_derivative(f).contract_left(&gc);
                }
                if gd != 0.0 {
                    de += f.cofactor() * gd;
                }
                de
            })
            .collect())
    }

    /// Largest `L(∇y)` over elements.
    pub fn max_locking(&self, y: &DiscreteDeformation) -> f64 {
        element_gradients(&self.mesh, y)
            .iter()
            .map(|f| self.locking.eval(f))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Entry `(k, l)` of the P1 mass matrix on a facet of measure `m`
/// (`m/6·[[2,1],[1,2]]` on segments, `m/12·(1+δ_kl)` on triangles).
fn facet_mass_entry(m: f64, dim: usize, k: usize, l: usize) -> f64 {
    let diag = k == l;
    if dim == 2 {
        m / 6.0 * if diag { 2.0 } else { 1.0 }
    } else {
        m / 12.0 * if diag { 2.0 } else { 1.0 }
    }
}

fn facet_mass_form(m: f64, u: &[f64], v: &[f64]) -> f64 {
    let dim = u.len();
    let mut s = 0.0;
    for k in 0..dim {
        for l in 0..dim {
            s += u[k] * facet_mass_entry(m, dim, k, l) * v[l];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::Rng;

    fn perturbed(p: &BodyProblem, amp: f64, seed: u64) -> DiscreteDeformation {
        let mut rng = sampling::seeded(seed);
        let mut y = DiscreteDeformation::identity(&p.mesh);
        for v in y.values_mut() {
            *v += rng.gen_range(-amp..amp);
        }
        y
    }

    fn fd_check(p: &BodyProblem, y: &DiscreteDeformation, seed: u64) {
        let g = p.gradient(y).unwrap();
        let mut rng = sampling::seeded(seed);
        for _ in 0..5 {
            let dir: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = 1e-6;
            let shift = |s: f64| {
                let v: Vec<f64> = y.values().iter().zip(&dir).map(|(a, b)| a + s * b).collect();
                DiscreteDeformation::new(y.dim(), v).unwrap()
            };
            let fd = (p.energy(&shift(h)) - p.energy(&shift(-h))) / (2.0 * h);
            let an: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "fd {fd} vs analytic {an}");
        }
    }

    #[test]
    fn identity_energy_with_gradpoly() {
        let mesh = BoxMesh::unit(3, 2).unwrap();
        let p = BodyProblem::new(mesh, GradPolyDensity::stvk(1.0, 1.0, 1.0, 2.0, 2.0).unwrap()).unwrap();
        let y = DiscreteDeformation::identity(&p.mesh);
        assert!((p.energy(&y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_element_gives_infinity() {
        let mesh = BoxMesh::unit(3, 2).unwrap();
        let p = BodyProblem::new(mesh, GradPolyDensity::stvk(1.0, 1.0, 1.0, 2.0, 2.0).unwrap()).unwrap();
        let mut y = DiscreteDeformation::identity(&p.mesh);
        let centre = (0..p.mesh.n_nodes())
            .find(|&a| p.mesh.node(a) == [0.5, 0.5, 0.5])
            .unwrap();
        y.values_mut()[3 * centre] = 2.0;
        assert_eq!(p.energy(&y), f64::INFINITY);
        assert!(matches!(p.gradient(&y), Err(Error::OutsideDomain)));
    }

    #[test]
    fn translation_changes_only_the_load() {
        let mesh = BoxMesh::unit(2, 3).unwrap().with_tags(FaceSet::none(), FaceSet::none());
        let p = BodyProblem::new(mesh, ScalarDensity::quadratic())
            .unwrap()
            .with_loads(vec![0.3, -1.0], vec![2.0, 0.5])
            .unwrap();
        let y = perturbed(&p, 0.1, 1);
        let c = [0.7, -0.2];
        let shifted: Vec<f64> = y.values().chunks(2).flat_map(|v| [v[0] + c[0], v[1] + c[1]]).collect();
        let shift = DiscreteDeformation::new(2, shifted).unwrap();
        let lc = DiscreteDeformation::from_fn(&p.mesh, |_| c.to_vec());
        let diff = p.energy(&y) - p.energy(&shift);
        assert!((diff - p.load(&lc)).abs() < 1e-12);
        // ∫ b·c + ∫_{∂Ω} t·c with |Ω| = 1 and perimeter 4
        assert!((p.load(&lc) - ((0.3 * 0.7 + 0.2) + 4.0 * (1.4 - 0.1))).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_fd() {
        let mesh = BoxMesh::unit(3, 2)
            .unwrap()
            .with_tags(FaceSet::face(0, false), FaceSet::face(0, true));
        let scalar = BodyProblem::new(mesh.clone(), ScalarDensity::double_well())
            .unwrap()
            .with_loads(vec![0.1, 0.2, 0.3], vec![1.0, 0.0, -1.0])
            .unwrap()
            .with_alpha(0.7)
            .unwrap();
        fd_check(&scalar, &perturbed(&scalar, 0.1, 2), 3);
        let gp = BodyProblem::new(mesh.clone(), GradPolyDensity::stvk(1.0, 1.0, 1.0, 2.0, 2.0).unwrap())
            .unwrap()
            .with_alpha(0.5)
            .unwrap();
        fd_check(&gp, &perturbed(&gp, 0.05, 4), 5);
        let gp2 = BodyProblem::new(
            mesh,
            GradPolyDensity::stvk_with_det_gradient(1.0, 1.0, 1.0, 2.0, 2.0, 1.0, 1.5).unwrap(),
        )
        .unwrap();
        fd_check(&gp2, &perturbed(&gp2, 0.05, 6), 7);
    }

    #[test]
    fn affine_state_is_stationary_inside() {
        let mesh = BoxMesh::unit(3, 3).unwrap();
        let p = BodyProblem::new(mesh, ScalarDensity::quadratic()).unwrap();
        let f = Matrix::from_rows3([[1.1, 0.2, 0.0], [0.0, 0.9, 0.1], [0.3, 0.0, 1.2]]);
        let y = DiscreteDeformation::affine(&p.mesh, &f, &[0.0; 3]);
        let g = p.gradient(&y).unwrap();
        for a in 0..p.mesh.n_nodes() {
            if !p.mesh.on_boundary(a) {
                assert!(g[3 * a..3 * a + 3].iter().all(|v| v.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn device_norm_of_constant_offset() {
        let mesh = BoxMesh::unit(3, 2).unwrap().with_tags(FaceSet::none(), FaceSet::all(3));
        let p = BodyProblem::new(mesh, ScalarDensity::quadratic())
            .unwrap()
            .with_alpha(1.0)
            .unwrap();
        let y = DiscreteDeformation::from_fn(&p.mesh, |x| vec![x[0] + 1.0, x[1], x[2]]);
        // ‖e₁‖_{L²(∂Ω)} = √6
        assert!((p.device_term(&y) - 6f64.sqrt()).abs() < 1e-12);
    }
}
