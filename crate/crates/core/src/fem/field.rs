//! P1 deformations, element gradients and recovered minor fields.

use rayon::prelude::*;

use super::mesh::BoxMesh;
use crate::error::{Error, Result};
use crate::tensor::{Matrix, ThirdOrderTensor};

/// Nodal values of a piecewise-affine map `y : Ω → ℝⁿ`, stored node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDeformation {
    dim: usize,
    values: Vec<f64>,
}

impl DiscreteDeformation {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len() % dim,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("deformation"));
        }
        Ok(DiscreteDeformation { dim, values })
    }

    pub fn zeros(mesh: &BoxMesh) -> Self {
        DiscreteDeformation {
            dim: mesh.dim(),
            values: vec![0.0; mesh.dim() * mesh.n_nodes()],
        }
    }

    /// Interpolates `f` at the nodes.
    pub fn from_fn(mesh: &BoxMesh, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let d = mesh.dim();
        let mut values = Vec::with_capacity(d * mesh.n_nodes());
        for a in 0..mesh.n_nodes() {
            let v = f(mesh.node(a));
            values.extend_from_slice(&v[..d]);
        }
        DiscreteDeformation { dim: d, values }
    }

    pub fn identity(mesh: &BoxMesh) -> Self {
        Self::from_fn(mesh, |x| x.to_vec())
    }

    /// `y(x) = F x + b`.
    pub fn affine(mesh: &BoxMesh, f: &Matrix, b: &[f64]) -> Self {
        Self::from_fn(mesh, |x| f.mul_vec(x).iter().zip(b).map(|(u, v)| u + v).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, a: usize) -> &[f64] {
        &self.values[a * self.dim..(a + 1) * self.dim]
    }

    pub fn scaled(&self, s: f64) -> Self {
        DiscreteDeformation {
            dim: self.dim,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Largest nodal Euclidean norm, which is the sup norm of the interpolant.
    pub fn max_norm(&self) -> f64 {
        self.values
            .chunks(self.dim)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check(&self, mesh: &BoxMesh) {
        assert_eq!(self.dim, mesh.dim(), "deformation/mesh dimension mismatch");
        assert_eq!(self.n_nodes(), mesh.n_nodes(), "deformation/mesh node count mismatch");
    }
}

/// `∇y` on element `e`: `Σ_a y_a ⊗ ∇λ_a`.
pub fn element_gradient(mesh: &BoxMesh, y: &DiscreteDeformation, e: usize) -> Matrix {
    let d = mesh.dim();
    let mut f = Matrix::zeros(d);
    for (&a, g) in mesh.element(e).iter().zip(mesh.basis_gradients(e)) {
        let ya = y.node(a);
        for i in 0..d {
            for j in 0..d {
                f[(i, j)] += ya[i] * g[j];
            }
        }
    }
    f
}

pub fn element_gradients(mesh: &BoxMesh, y: &DiscreteDeformation) -> Vec<Matrix> {
    y.check(mesh);
    (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| element_gradient(mesh, y, e))
        .collect()
}

/// Volume-weighted nodal averages of an element-constant scalar field.
pub fn recover_scalar(mesh: &BoxMesh, v: &[f64]) -> Vec<f64> {
    (0..mesh.n_nodes())
        .into_par_iter()
        .map(|a| {
            let s: f64 = mesh.node_elements(a).iter().map(|&e| mesh.volume(e) * v[e]).sum();
            s / mesh.node_volume(a)
        })
        .collect()
}

/// Volume-weighted nodal averages of an element-constant matrix field.
pub fn recover_matrix(mesh: &BoxMesh, v: &[Matrix]) -> Vec<Matrix> {
    let d = v.first().map_or(mesh.dim(), |m| m.dim());
    (0..mesh.n_nodes())
        .into_par_iter()
        .map(|a| {
            let mut s = Matrix::zeros(d);
            for &e in mesh.node_elements(a) {
                s += v[e] * mesh.volume(e);
            }
            s * (1.0 / mesh.node_volume(a))
        })
        .collect()
}

/// Element gradient of a P1 scalar field.
pub fn scalar_gradient(mesh: &BoxMesh, nodal: &[f64], e: usize) -> [f64; 3] {
    let mut g = [0.0; 3];
    for (&a, ga) in mesh.element(e).iter().zip(mesh.basis_gradients(e)) {
        for l in 0..3 {
            g[l] += nodal[a] * ga[l];
        }
    }
    g
}

/// Element gradient of a P1 matrix field, `[Δ]_{jkl} = ∂M_{jk}/∂x_l`.
pub fn matrix_gradient(mesh: &BoxMesh, nodal: &[Matrix], e: usize) -> ThirdOrderTensor {
    let mut t = ThirdOrderTensor::zeros();
    for (&a, ga) in mesh.element(e).iter().zip(mesh.basis_gradients(e)) {
        let m = &nodal[a];
        let d = m.dim();
        for j in 0..d {
            for k in 0..d {
                for l in 0..3 {
                    t[(j, k, l)] += m[(j, k)] * ga[l];
                }
            }
        }
    }
    t
}

/// Element minors of `∇y`, their nodal recoveries and the element gradients of those.
#[derive(Clone, Debug)]
pub struct MinorFields {
    pub cof: Vec<Matrix>,
    pub det: Vec<f64>,
    pub cof_nodal: Vec<Matrix>,
    pub det_nodal: Vec<f64>,
    /// Discrete `∇[Cof ∇y]` per element.
    pub cof_grad: Vec<ThirdOrderTensor>,
    /// Discrete `∇[det ∇y]` per element.
    pub det_grad: Vec<[f64; 3]>,
}

pub fn minor_fields_from_gradients(mesh: &BoxMesh, grads: &[Matrix]) -> MinorFields {
    let (cof, det): (Vec<Matrix>, Vec<f64>) = grads.par_iter().map(|f| (f.cofactor(), f.determinant())).unzip();
    let cof_nodal = recover_matrix(mesh, &cof);
    let det_nodal = recover_scalar(mesh, &det);
    let (cof_grad, det_grad) = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            (
                matrix_gradient(mesh, &cof_nodal, e),
                scalar_gradient(mesh, &det_nodal, e),
            )
        })
        .unzip();
    MinorFields {
        cof,
        det,
        cof_nodal,
        det_nodal,
        cof_grad,
        det_grad,
    }
}

pub fn minor_fields(mesh: &BoxMesh, y: &DiscreteDeformation) -> MinorFields {
    minor_fields_from_gradients(mesh, &element_gradients(mesh, y))
}

/// Interpolates a coarse-mesh deformation at the nodes of another mesh of the same box.
pub fn prolongate(coarse: &BoxMesh, y: &DiscreteDeformation, fine: &BoxMesh) -> Result<DiscreteDeformation> {
    y.check(coarse);
    let d = coarse.dim();
    let mut values = Vec::with_capacity(d * fine.n_nodes());
    for a in 0..fine.n_nodes() {
        let x = fine.node(a);
        let (e, lam) = coarse
            .locate(x)
            .ok_or_else(|| Error::InvalidParameter("fine mesh node outside the coarse box".into()))?;
        for i in 0..d {
            let v: f64 = coarse
                .element(e)
                .iter()
                .enumerate()
                .map(|(k, &b)| lam[k] * y.node(b)[i])
                .sum();
            values.push(v);
        }
    }
    DiscreteDeformation::new(d, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_gradients_are_exact() {
        let m = BoxMesh::unit(3, 3).unwrap();
        let f = Matrix::from_rows3([[1.2, 0.3, -0.1], [0.0, 0.9, 0.2], [0.4, 0.0, 1.1]]);
        let y = DiscreteDeformation::affine(&m, &f, &[0.5, -1.0, 2.0]);
        for g in element_gradients(&m, &y) {
            assert!((g - f).max_abs() < 1e-13);
        }
        let id = DiscreteDeformation::identity(&m);
        for g in element_gradients(&m, &id) {
            assert!((g - Matrix::identity(3)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn affine_minor_gradients_vanish() {
        let m = BoxMesh::unit(3, 3).unwrap();
        let f = Matrix::from_rows3([[1.2, 0.3, -0.1], [0.0, 0.9, 0.2], [0.4, 0.0, 1.1]]);
        let mf = minor_fields(&m, &DiscreteDeformation::affine(&m, &f, &[0.0; 3]));
        for e in 0..m.n_elements() {
            assert!(mf.cof_grad[e].norm() < 1e-12);
            assert!(mf.det_grad[e].iter().all(|v| v.abs() < 1e-12));
            assert!((mf.det[e] - f.determinant()).abs() < 1e-13);
        }
    }

    #[test]
    fn two_element_laminate_patch() {
        // one square, two triangles; node (1,1) lifted so the gradients differ
        let m = BoxMesh::unit(2, 1).unwrap();
        let mut y = DiscreteDeformation::identity(&m);
        let top_right = (0..m.n_nodes()).find(|&a| m.node(a) == [1.0, 1.0]).unwrap();
        y.values_mut()[2 * top_right] += 1.0;
        let g = element_gradients(&m, &y);
        // lower triangle (0,0),(1,0),(1,1): ∂y₁/∂x₂ = 1; upper (0,0),(1,1),(0,1): ∂y₁/∂x₁ = 2
        assert_eq!(g[0], Matrix::from_rows2([[1.0, 1.0], [0.0, 1.0]]));
        assert_eq!(g[1], Matrix::from_rows2([[2.0, 0.0], [0.0, 1.0]]));
    }

    #[test]
    fn recovery_of_linear_field_is_exact_inside() {
        let m = BoxMesh::unit(3, 4).unwrap();
        // element values of a linear function sampled at centroids
        let v: Vec<f64> = (0..m.n_elements())
            .map(|e| {
                let c = m.centroid(e);
                2.0 * c[0] - c[1] + 0.5 * c[2]
            })
            .collect();
        let r = recover_scalar(&m, &v);
        for e in 0..m.n_elements() {
            if m.element(e).iter().any(|&a| m.on_boundary(a)) {
                continue;
            }
            let g = scalar_gradient(&m, &r, e);
            assert!((g[0] - 2.0).abs() < 1e-10 && (g[1] + 1.0).abs() < 1e-10 && (g[2] - 0.5).abs() < 1e-10);
        }
        let c = recover_scalar(&m, &vec![3.25; m.n_elements()]);
        assert!(c.iter().all(|&x| (x - 3.25).abs() < 1e-14));
    }

    #[test]
    fn prolongation_is_exact_on_nested_meshes() {
        let coarse = BoxMesh::unit(2, 4).unwrap();
        let fine = BoxMesh::unit(2, 8).unwrap();
        let y = DiscreteDeformation::from_fn(&coarse, |x| vec![x[0] * x[0], (3.0 * x[1]).sin()]);
        let p = prolongate(&coarse, &y, &fine).unwrap();
        let fc = element_gradients(&coarse, &y);
        for e in 0..fine.n_elements() {
            let c = fine.centroid(e);
            let (ec, _) = coarse.locate(&c).unwrap();
            assert!((element_gradient(&fine, &p, e) - fc[ec]).max_abs() < 1e-12);
        }
    }
}
