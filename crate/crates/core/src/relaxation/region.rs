//! Closed convex locking regions in matrix space.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// `{|F| ≤ ϱ}`, strictly convex.
    Ball { rho: f64 },
    /// `{max_ij |F_ij| ≤ bound}`, convex but not strictly convex.
    Box { bound: f64 },
}

impl Region {
    pub fn ball(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {rho}"
            )));
        }
        Ok(Region::Ball { rho })
    }

    pub fn cube(bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "box bound must be positive, got {bound}"
            )));
        }
        Ok(Region::Box { bound })
    }

    /// Minkowski gauge: `≤ 1` inside, `= 1` on the boundary.
    pub fn gauge(&self, f: &Matrix) -> f64 {
        match *self {
            Region::Ball { rho } => f.norm() / rho,
            Region::Box { bound } => f.max_abs() / bound,
        }
    }

    pub fn contains(&self, f: &Matrix) -> bool {
        match *self {
            Region::Ball { rho } => f.norm() <= rho,
            Region::Box { bound } => f.max_abs() <= bound,
        }
    }

    pub fn strictly_convex(&self) -> bool {
        matches!(self, Region::Ball { .. })
    }

    /// Largest `s ≥ 0` with `F + sM` in the region; `F` is assumed inside.
    pub fn reach(&self, f: &Matrix, m: &Matrix) -> f64 {
        match *self {
            Region::Ball { rho } => {
                let mm = m.norm_sq();
                if mm == 0.0 {
                    return f64::INFINITY;
                }
                let fm = f.dot(m);
                let c = f.norm_sq() - rho * rho;
                let disc = (fm * fm - mm * c).max(0.0);
                ((-fm + disc.sqrt()) / mm).max(0.0)
            }
            Region::Box { bound } => {
                let n = f.dim();
                let mut s = f64::INFINITY;
                for i in 0..n {
                    for j in 0..n {
                        let (fv, mv) = (f[(i, j)], m[(i, j)]);
                        if mv > 0.0 {
                            s = s.min((bound - fv) / mv);
                        } else if mv < 0.0 {
                            s = s.min((-bound - fv) / mv);
                        }
                    }
                }
                s.max(0.0)
            }
        }
    }

    /// Error describing why `A` is not in the closed region.
    pub fn outside_error(&self, a: &Matrix) -> Error {
        match *self {
            Region::Ball { rho } => Error::InfeasibleBase { norm: a.norm(), rho },
            Region::Box { .. } => Error::OutsideRegion { gauge: self.gauge(a) },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reach_lands_on_boundary() {
        let f = Matrix::from_rows2([[0.2, 0.1], [0.0, -0.3]]);
        let m = Matrix::from_rows2([[1.0, 0.0], [0.5, 0.0]]);
        for r in [Region::ball(2.0).unwrap(), Region::cube(1.0).unwrap()] {
            let s = r.reach(&f, &m);
            assert!((r.gauge(&(f + m * s)) - 1.0).abs() < 1e-14);
        }
    }
}
