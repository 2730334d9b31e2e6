//! The deformation `y = (x₁², x₂ x₁^{t/(t+1)}, x₃ x₁²)` on `(0,1)³`: its minors are
//! Lipschitz while `∇²y` is not integrable.

use std::path::{Path, PathBuf};

use rand::Rng;

use super::output::{write_vtk, VtkData};
use crate::error::{Error, Result};
use crate::fem::{minor_fields, BoxMesh, DiscreteDeformation};
use crate::sampling;
use crate::tensor::Matrix;

/// Closed-form fields for one value of `t ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Example51Fields {
    t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Example51Point {
    pub y: [f64; 3],
    pub grad: Matrix,
    pub cof: Matrix,
    pub det: f64,
}

impl Example51Fields {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 1.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("need t ≥ 1, got {t}")));
        }
        Ok(Example51Fields { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `t/(t+1)`.
    fn a(&self) -> f64 {
        self.t / (self.t + 1.0)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: x.len(),
            });
        }
        if !(x[0] > 0.0 && x[0] <= 1.0) || x[1..].iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::DomainError(format!("x = {x:?} is outside (0,1]×[0,1]²")));
        }
        Ok(())
    }

    /// `y(x)`; continuous up to `x₁ = 0`.
    pub fn y_clamped(&self, x: &[f64]) -> [f64; 3] {
        let x1 = x[0].max(0.0);
        [x1 * x1, x[1] * x1.powf(self.a()), x[2] * x1 * x1]
    }

    pub fn grad(&self, x: &[f64]) -> Result<Matrix> {
        self.check(x)?;
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        let a = self.a();
        Ok(Matrix::from_rows3([
            [2.0 * x1, 0.0, 0.0],
            [a * x2 * x1.powf(-1.0 / (self.t + 1.0)), x1.powf(a), 0.0],
            [2.0 * x1 * x3, 0.0, x1 * x1],
        ]))
    }

    /// The cofactor matrix in closed form.
    pub fn cof(&self, x: &[f64]) -> Result<Matrix> {
        self.check(x)?;
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        let t = self.t;
        let e3 = x1.powf((3.0 * t + 2.0) / (t + 1.0));
        let e2 = x1.powf((2.0 * t + 1.0) / (t + 1.0));
        Ok(Matrix::from_rows3([
            [e3, -self.a() * x2 * e2, -2.0 * e2 * x3],
            [0.0, 2.0 * x1.powi(3), 0.0],
            [0.0, 0.0, 2.0 * e2],
        ]))
    }

    /// `2 x₁^{(4t+3)/(t+1)}`, extended by zero at `x₁ = 0`.
    pub fn det(&self, x: &[f64]) -> f64 {
        2.0 * x[0].max(0.0).powf((4.0 * self.t + 3.0) / (self.t + 1.0))
    }

    /// `|∇ det ∇y|`.
    pub fn det_grad_norm(&self, x: &[f64]) -> f64 {
        let e = (4.0 * self.t + 3.0) / (self.t + 1.0);
        2.0 * e * x[0].max(0.0).powf(e - 1.0)
    }

    /// `|∇ Cof ∇y|` from the derivatives of the closed-form entries.
    pub fn cof_grad_norm(&self, x: &[f64]) -> f64 {
        let (x1, x2, x3) = (x[0].max(0.0), x[1], x[2]);
        let a = self.a();
        let p = x1.powf(a);
        let d = [
            (a + 2.0) * x1 * p,
            a * (a + 1.0) * x2 * p,
            a * x1 * p,
            2.0 * (a + 1.0) * x3 * p,
            2.0 * x1 * p,
            6.0 * x1 * x1,
            2.0 * (a + 1.0) * p,
        ];
        d.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `|∂²y₂/∂x₁²| = a(1−a) x₂ x₁^{a−2}` with `a = t/(t+1)`.
    pub fn second_derivative(&self, x: &[f64]) -> f64 {
        let a = self.a();
        a * (1.0 - a) * x[1] * x[0].powf(a - 2.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Example51Point> {
        Ok(Example51Point {
            y: self.y_clamped(x),
            grad: self.grad(x)?,
            cof: self.cof(x)?,
            det: self.det(x),
        })
    }
}

/// `example51_eval` entry point.
pub fn example51_eval(t: f64, x: &[f64]) -> Result<Example51Point> {
    Example51Fields::new(t)?.eval(x)
}

/// Largest entrywise gap between the closed-form cofactor and the one computed from `∇y`,
/// over `points` seeded samples in `(0,1]³`.
pub fn example51_cofactor_check(t: f64, points: usize, seed: u64) -> Result<f64> {
    let f = Example51Fields::new(t)?;
    let mut rng = sampling::seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x = [1.0 - rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        let p = f.eval(&x)?;
        worst = worst.max((p.grad.cofactor() - p.cof).max_abs());
    }
    Ok(worst)
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

fn gauss_nodes(lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> {
    let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    GAUSS4.iter().map(move |&(x, w)| (m + h * x, h * w))
}

/// `[δ, 1]` split into panels whose endpoints grow geometrically by a factor 3/2.
fn geometric_panels(delta: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = delta;
    while lo < 1.0 {
        let hi = (1.5 * lo).min(1.0);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport {
    pub t: f64,
    pub deltas: Vec<f64>,
    /// `∫_{x₁>δ} |∂²y₂/∂x₁²|` by quadrature.
    pub integrals: Vec<f64>,
    /// The same integral from the antiderivative.
    pub exact: Vec<f64>,
    /// Least-squares slope of `log ∫` against `log δ`.
    pub slope: f64,
    pub expected_slope: f64,
    pub cof_sup: Vec<f64>,
    pub cof_grad_sup: Vec<f64>,
    pub det_sup: Vec<f64>,
    pub det_grad_sup: Vec<f64>,
}

impl DivergenceReport {
    pub fn slope_error(&self) -> f64 {
        ((self.slope - self.expected_slope) / self.expected_slope).abs()
    }

    /// Largest relative spread `(max − min)/max` of the four sup-norm series across `δ`.
    pub fn sup_variation(&self) -> f64 {
        [&self.cof_sup, &self.cof_grad_sup, &self.det_sup, &self.det_grad_sup]
            .iter()
            .map(|v| {
                let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                (hi - lo) / hi
            })
            .fold(0.0, f64::max)
    }
}

/// Integrates the second derivative over `{x₁ > δ}` for each `δ` (decreasing, in `(0,1)`)
/// and fits the growth exponent; also records sup norms of the minors and their gradients.
pub fn example51_divergence(t: f64, deltas: &[f64]) -> Result<DivergenceReport> {
    let f = Example51Fields::new(t)?;
    if deltas.len() < 2 || deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "deltas must be decreasing in (0,1), at least two".into(),
        ));
    }
    let mut rep = DivergenceReport {
        t,
        deltas: deltas.to_vec(),
        integrals: Vec::new(),
        exact: Vec::new(),
        slope: 0.0,
        expected_slope: -1.0 / (t + 1.0),
        cof_sup: Vec::new(),
        cof_grad_sup: Vec::new(),
        det_sup: Vec::new(),
        det_grad_sup: Vec::new(),
    };
    let inner: Vec<(f64, f64)> = gauss_nodes(0.0, 1.0).collect();
    for &delta in deltas {
        let mut integral = 0.0;
        let mut sups = [0.0f64; 4];
        let mut visit = |x: &[f64; 3]| -> Result<()> {
            sups[0] = sups[0].max(f.cof(x)?.norm());
            sups[1] = sups[1].max(f.cof_grad_norm(x));
            sups[2] = sups[2].max(f.det(x));
            sups[3] = sups[3].max(f.det_grad_norm(x));
            Ok(())
        };
        for (lo, hi) in geometric_panels(delta) {
            for (x1, w1) in gauss_nodes(lo, hi) {
                for &(x2, w2) in &inner {
                    for &(x3, w3) in &inner {
                        let x = [x1, x2, x3];
                        integral += w1 * w2 * w3 * f.second_derivative(&x);
                        visit(&x)?;
                    }
                }
            }
        }
        for c in 0..8 {
            let x1 = if c & 1 == 0 { delta } else { 1.0 };
            visit(&[x1, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64])?;
        }
        rep.integrals.push(integral);
        let a = f.a();
        rep.exact
            .push(0.5 * a * (1.0 - a) * (t + 1.0) * (delta.powf(-1.0 / (t + 1.0)) - 1.0));
        rep.cof_sup.push(sups[0]);
        rep.cof_grad_sup.push(sups[1]);
        rep.det_sup.push(sups[2]);
        rep.det_grad_sup.push(sups[3]);
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = rep.integrals.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    rep.slope = sxy / sxx;
    Ok(rep)
}

/// `δ = exp(−(t+1)L)` for each level `L`.
pub fn deltas_from_levels(t: f64, levels: &[f64]) -> Vec<f64> {
    levels.iter().map(|l| (-(t + 1.0) * l).exp()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationReport {
    pub t: f64,
    pub subdivisions: Vec<usize>,
    /// Max over interior nodes of `|recovered det − det|` for the nodal interpolant.
    pub errors: Vec<f64>,
}

impl InterpolationReport {
    /// `errors[k] / errors[k+1]`.
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

/// Interpolates `y` on unit-cube meshes and compares the recovered nodal determinant
/// with the closed form at interior nodes.
pub fn example51_det_interpolation(t: f64, subdivisions: &[usize]) -> Result<InterpolationReport> {
    let f = Example51Fields::new(t)?;
    let mut errors = Vec::new();
    for &n in subdivisions {
        let mesh = BoxMesh::unit(3, n)?;
        let y = DiscreteDeformation::from_fn(&mesh, |x| f.y_clamped(x).to_vec());
        let mf = minor_fields(&mesh, &y);
        let err = (0..mesh.n_nodes())
            .filter(|&a| !mesh.on_boundary(a))
            .map(|a| (mf.det_nodal[a] - f.det(mesh.node(a))).abs())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    Ok(InterpolationReport {
        t,
        subdivisions: subdivisions.to_vec(),
        errors,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Figure1Summary {
    pub deformed: PathBuf,
    pub reference: PathBuf,
    pub points: usize,
    pub cells: usize,
    /// Range of the first deformed coordinate.
    pub x1_extent: (f64, f64),
}

/// Path of the reference-box companion file: `name.vtk` → `name_reference.vtk`.
pub fn reference_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_reference.vtk"))
}

/// Writes the deformed cube to `path` and the reference box next to it.
pub fn figure1_export(t: f64, subdivisions: &[usize], path: &Path) -> Result<Figure1Summary> {
    let f = Example51Fields::new(t)?;
    let mesh = BoxMesh::new(&[0.0; 3], &[1.0; 3], subdivisions)?;
    let reference: Vec<[f64; 3]> = (0..mesh.n_nodes()).map(|a| mesh.node3(a)).collect();
    let deformed: Vec<[f64; 3]> = reference.iter().map(|x| f.y_clamped(x)).collect();
    let det: Vec<f64> = reference.iter().map(|x| f.det(x)).collect();

    let data = VtkData {
        title: format!("deformed cube, t = {t}"),
        points: &deformed,
        scalars: vec![("det", det.clone())],
        vectors: vec![("reference", reference.clone())],
    };
    let file = std::fs::File::create(path)?;
    write_vtk(std::io::BufWriter::new(file), &mesh, &data)?;

    let ref_path = reference_path(path);
    let data = VtkData {
        title: "reference box".into(),
        points: &reference,
        scalars: vec![],
        vectors: vec![],
    };
    write_vtk(std::io::BufWriter::new(std::fs::File::create(&ref_path)?), &mesh, &data)?;

    let lo = deformed.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = deformed.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(Figure1Summary {
        deformed: path.to_path_buf(),
        reference: ref_path,
        points: mesh.n_nodes(),
        cells: mesh.n_elements(),
        x1_extent: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_values() {
        for t in [1.0, 3.0, 100.0] {
            let p = example51_eval(t, &[1.0, 1.0, 1.0]).unwrap();
            assert_eq!(p.y, [1.0, 1.0, 1.0]);
            assert!((p.det - 2.0).abs() < 1e-15);
            assert!((p.grad.determinant() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cof_22_entry() {
        let p = example51_eval(2.0, &[0.3, 0.4, 0.9]).unwrap();
        assert!((p.cof[(1, 1)] - 2.0 * 0.3 * 0.3 * 0.3).abs() < 1e-15);
    }

    #[test]
    fn domain_error_at_zero() {
        assert!(matches!(
            example51_eval(1.0, &[0.0, 0.5, 0.5]),
            Err(Error::DomainError(_))
        ));
        assert!(matches!(
            example51_eval(0.5, &[0.5, 0.5, 0.5]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn quadrature_matches_antiderivative() {
        let r = example51_divergence(1.0, &deltas_from_levels(1.0, &[4.0, 5.0])).unwrap();
        for (q, e) in r.integrals.iter().zip(&r.exact) {
            assert!((q - e).abs() <= 1e-6 * e, "{q} vs {e}");
        }
    }
}
