//! Small dense tensors for deformation gradients.
//!
//! [`Matrix`] is a 2×2 or 3×3 real matrix stored in a fixed 3×3 buffer, so it
//! is `Copy` and never allocates. The cofactor is built from signed 2×2
//! minors and is therefore defined for singular matrices too; on invertible
//! matrices it coincides with `det(F) F^{-T}`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Default singularity threshold for [`Matrix::inverse_cramer`].
pub const DEFAULT_SINGULAR_THRESHOLD: f64 = 1e-14;

/// Dense real `dim × dim` matrix, `dim ∈ {2, 3}`.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    dim: usize,
    a: [f64; 9],
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)]).collect())
            .collect();
        write!(f, "Matrix{:?}", rows)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "matrix dimension must be 2 or 3");
        Matrix { dim, a: [0.0; 9] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows3(r: [[f64; 3]; 3]) -> Self {
        let mut m = Self::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = r[i][j];
            }
        }
        m
    }

    pub fn from_rows2(r: [[f64; 2]; 2]) -> Self {
        let mut m = Self::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = r[i][j];
            }
        }
        m
    }

    /// Checked constructor from row slices; rejects ragged input and non-finite entries.
    pub fn try_from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite("matrix"));
                }
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// Build from a row-major slice of length `dim²`.
    pub fn from_row_slice(dim: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), dim * dim);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i * dim + j];
            }
        }
        m
    }

    /// Row-major entries, `dim²` of them.
    pub fn to_row_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product `A : B`.
    #[inline]
    pub fn dot(&self, other: &Matrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.a.iter().zip(other.a.iter()).map(|(x, y)| x * y).sum()
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Frobenius norm.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Cofactor expansion along the first row.
    pub fn determinant(&self) -> f64 {
        let m = |i, j| self[(i, j)];
        match self.dim {
            2 => m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
            _ => {
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
        }
    }

    /// Matrix of signed complementary minors; equals `det(M) M^{-T}` when `M` is invertible.
    pub fn cofactor(&self) -> Self {
        let m = |i, j| self[(i, j)];
        match self.dim {
            2 => Matrix::from_rows2([[m(1, 1), -m(1, 0)], [-m(0, 1), m(0, 0)]]),
            _ => {
                let mut c = Self::zeros(3);
                for i in 0..3 {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    for j in 0..3 {
                        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                        // cyclic index shifts absorb the (-1)^{i+j} sign
                        c[(i, j)] = m(i1, j1) * m(i2, j2) - m(i1, j2) * m(i2, j1);
                    }
                }
                c
            }
        }
    }

    /// Inverse via Cramer's rule, `M^{-1} = Cof(M)^T / det M`.
    pub fn inverse_cramer(&self, singular_threshold: f64) -> Result<Self> {
        let det = self.determinant();
        if !(det.abs() > singular_threshold) {
            return Err(Error::SingularMatrix {
                det,
                threshold: singular_threshold,
            });
        }
        Ok(self.cofactor().transpose() * (1.0 / det))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.inverse_cramer(DEFAULT_SINGULAR_THRESHOLD)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = f(self[(i, j)]);
            }
        }
        out
    }
}

/// Outer product `a ⊗ b`, `(a ⊗ b)_{ij} = a_i b_j`.
pub fn rank_one(a: &[f64], b: &[f64]) -> Matrix {
    assert_eq!(a.len(), b.len(), "rank_one: vectors must have matching dimension");
    let mut m = Matrix::zeros(a.len());
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            m[(i, j)] = ai * bj;
        }
    }
    m
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.a[i * 3 + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.a[i * 3 + j]
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(mut self, rhs: Matrix) -> Matrix {
        self += rhs;
        self
    }
}

impl AddAssign for Matrix {
    fn add_assign(&mut self, rhs: Matrix) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (x, y) in self.a.iter_mut().zip(rhs.a.iter()) {
            *x += y;
        }
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(mut self, rhs: Matrix) -> Matrix {
        self -= rhs;
        self
    }
}

impl SubAssign for Matrix {
    fn sub_assign(&mut self, rhs: Matrix) {
        debug_assert_eq!(self.dim, rhs.dim);
        for (x, y) in self.a.iter_mut().zip(rhs.a.iter()) {
            *x -= y;
        }
    }
}

impl Neg for Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self * -1.0
    }
}

impl Mul<f64> for Matrix {
    type Output = Matrix;
    fn mul(mut self, s: f64) -> Matrix {
        for x in self.a.iter_mut() {
            *x *= s;
        }
        self
    }
}

impl Mul<Matrix> for f64 {
    type Output = Matrix;
    fn mul(self, m: Matrix) -> Matrix {
        m * self
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }
}

/// Real 3×3×3 array, e.g. the spatial gradient of a cofactor field.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ThirdOrderTensor {
    a: [f64; 27],
}

impl Default for ThirdOrderTensor {
    fn default() -> Self {
        Self::zeros()
    }
}

impl ThirdOrderTensor {
    pub fn zeros() -> Self {
        ThirdOrderTensor { a: [0.0; 27] }
    }

    pub fn try_from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 27 {
            return Err(Error::DimensionMismatch {
                expected: 27,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("third-order tensor"));
        }
        let mut a = [0.0; 27];
        a.copy_from_slice(v);
        Ok(ThirdOrderTensor { a })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.a
    }

    pub fn norm_sq(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.a.iter().zip(other.a.iter()).map(|(x, y)| x * y).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.a.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        out.a.iter_mut().zip(other.a.iter()).for_each(|(x, y)| *x += y);
        out
    }

    /// Rotation acting on the first index: `[RΔ]_{ijk} = Σ_m R_{im} Δ_{mjk}`.
    pub fn rotate_first(&self, r: &Matrix) -> Self {
        assert_eq!(r.dim(), 3);
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[(i, j, k)] = (0..3).map(|m| r[(i, m)] * self[(m, j, k)]).sum();
                }
            }
        }
        out
    }
}

impl Index<(usize, usize, usize)> for ThirdOrderTensor {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.a[i * 9 + j * 3 + k]
    }
}

impl IndexMut<(usize, usize, usize)> for ThirdOrderTensor {
    #[inline]
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.a[i * 9 + j * 3 + k]
    }
}

/// Real 3×3×3×3 array. Houses `∂(Cof F)_{jk}/∂F_{lm}` and elasticity tensors.
#[derive(Clone, PartialEq, Debug)]
pub struct FourthOrderTensor {
    a: Box<[f64; 81]>,
}

impl FourthOrderTensor {
    pub fn zeros() -> Self {
        FourthOrderTensor { a: Box::new([0.0; 81]) }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a[..]
    }

    /// `(T : E)_{ij} = Σ_{kl} T_{ijkl} E_{kl}` on 3×3 matrices.
    pub fn contract(&self, e: &Matrix) -> Matrix {
        assert_eq!(e.dim(), 3);
        let mut out = Matrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += self[(i, j, k, l)] * e[(k, l)];
                    }
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// `(G : T)_{lm} = Σ_{jk} G_{jk} T_{jklm}`, the adjoint of [`Self::contract`].
    pub fn contract_left(&self, g: &Matrix) -> Matrix {
        assert_eq!(g.dim(), 3);
        let mut out = Matrix::zeros(3);
        for l in 0..3 {
            for m in 0..3 {
                let mut s = 0.0;
                for j in 0..3 {
                    for k in 0..3 {
                        s += g[(j, k)] * self[(j, k, l, m)];
                    }
                }
                out[(l, m)] = s;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.a.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.a
            .iter()
            .zip(other.a.iter())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }
}

impl Index<(usize, usize, usize, usize)> for FourthOrderTensor {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.a[i * 27 + j * 9 + k * 3 + l]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for FourthOrderTensor {
    #[inline]
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.a[i * 27 + j * 9 + k * 3 + l]
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `𝓛_{jklm}(F) = ∂(Cof F)_{jk}/∂F_{lm} = Σ_{b,d} ε_{jlb} ε_{kmd} F_{bd}`, linear in `F`.
pub fn cofactor_derivative(f: &Matrix) -> FourthOrderTensor {
    assert_eq!(f.dim(), 3, "cofactor_derivative is defined for 3×3 matrices");
    let mut t = FourthOrderTensor::zeros();
    for j in 0..3 {
        for l in 0..3 {
            if j == l {
                continue;
            }
            let b = 3 - j - l;
            let e1 = levi_civita(j, l, b);
            for k in 0..3 {
                for m in 0..3 {
                    if k == m {
                        continue;
                    }
                    let d = 3 - k - m;
                    t[(j, k, l, m)] = e1 * levi_civita(k, m, d) * f[(b, d)];
                }
            }
        }
    }
    t
}

/// Residuals of the cofactor/determinant identities at one matrix.
///
/// Identities are reported as signed residuals (0 in exact arithmetic);
/// inequalities as slacks (nonnegative when the inequality holds).
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    /// `det Cof F − (det F)^{n−1}`.
    pub det_cof_residual: f64,
    /// `|F Cof(F)^T − det(F) Id|`.
    pub cramer_residual: f64,
    /// `min over 2×2 submatrices A of |A|²/2 − |det A|`.
    pub hadamard_slack: f64,
    /// `(3/2)|F|² − |Cof F|`; only for 3×3.
    pub hcof_slack: Option<f64>,
    /// `|Cof(F^{-1}) − F^T/det F| + |(Cof F)^{-1} − Cof(F^{-1})|`.
    pub cof_inverse_residual: Option<f64>,
    /// `(3/2)|F^{-1}|² − |(Cof F)^{-1}|`; only for invertible 3×3.
    pub inverse_slack: Option<f64>,
    /// Set when `|det F|` is below the singularity threshold and the
    /// inverse-based checks were skipped.
    pub singular: bool,
}

/// Slack of `|det A| ≤ |A|²/2` for the 2×2 block `[[a, b], [c, d]]`, written
/// as sums of squares so it is nonnegative in floating point.
fn hadamard_block_slack(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let minus = 0.5 * ((a - d) * (a - d) + (b + c) * (b + c));
    let plus = 0.5 * ((a + d) * (a + d) + (b - c) * (b - c));
    minus.min(plus)
}

pub fn identity_report(f: &Matrix) -> IdentityReport {
    let n = f.dim();
    let det = f.determinant();
    let cof = f.cofactor();
    let det_cof_residual = cof.determinant() - det.powi(n as i32 - 1);
    let cramer_residual = (*f * cof.transpose() - Matrix::identity(n) * det).norm();

    let hadamard_slack = if n == 2 {
        hadamard_block_slack(f[(0, 0)], f[(0, 1)], f[(1, 0)], f[(1, 1)])
    } else {
        let mut s = f64::INFINITY;
        for (r0, r1) in [(0, 1), (0, 2), (1, 2)] {
            for (c0, c1) in [(0, 1), (0, 2), (1, 2)] {
                s = s.min(hadamard_block_slack(f[(r0, c0)], f[(r0, c1)], f[(r1, c0)], f[(r1, c1)]));
            }
        }
        s
    };
    let hcof_slack = (n == 3).then(|| 1.5 * f.norm_sq() - cof.norm());

    let (cof_inverse_residual, inverse_slack, singular) =
        match (f.inverse_cramer(DEFAULT_SINGULAR_THRESHOLD), cof.inverse()) {
            (Ok(finv), Ok(cinv)) => {
                let cof_of_inv = finv.cofactor();
                let r = (cof_of_inv - f.transpose() * (1.0 / det)).norm() + (cinv - cof_of_inv).norm();
                let slack = (n == 3).then(|| 1.5 * finv.norm_sq() - cinv.norm());
                (Some(r), slack, false)
            }
            _ => (None, None, true),
        };

    IdentityReport {
        det_cof_residual,
        cramer_residual,
        hadamard_slack,
        hcof_slack,
        cof_inverse_residual,
        inverse_slack,
        singular,
    }
}

/// Lipschitz constant used for `|det F₁ − det F₂| ≤ d(1+|F₁|²+|F₂|²)|F₁−F₂|` at n = 3.
pub const DET_LIPSCHITZ_CONSTANT: f64 = 3.0;

/// Slack `d(1+|F₁|²+|F₂|²)|F₁−F₂| − |det F₁ − det F₂|`.
pub fn det_lipschitz_slack(f1: &Matrix, f2: &Matrix, d: f64) -> f64 {
    d * (1.0 + f1.norm_sq() + f2.norm_sq()) * (*f1 - *f2).norm() - (f1.determinant() - f2.determinant()).abs()
}
