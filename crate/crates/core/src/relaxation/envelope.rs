//! Tabulation of `W`, `W^inf`, laminate values and lower bounds along matrix slices.

use std::io::Write;

use rayon::prelude::*;

use super::laminate::{laminate_envelope_with, LaminateOptions};
use super::region::Region;
use super::wrel::{wrel, WrelOptions};
use crate::energy::ScalarDensity;
use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Affine family of matrices `A(s) = base + Σ s_k D_k` sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Slice {
    Line {
        base: Matrix,
        direction: Matrix,
        range: (f64, f64),
        points: usize,
    },
    Plane {
        base: Matrix,
        directions: (Matrix, Matrix),
        ranges: ((f64, f64), (f64, f64)),
        points: (usize, usize),
    },
}

fn grid(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|k| {
            if k == n - 1 {
                range.1
            } else {
                range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

impl Slice {
    /// `s e₁⊗e₁`, `s ∈ [−ϱ, ϱ]`, so both endpoints lie on the ball boundary.
    pub fn diagonal_line(dim: usize, rho: f64, points: usize) -> Self {
        let mut d = Matrix::zeros(dim);
        d[(0, 0)] = 1.0;
        Slice::Line {
            base: Matrix::zeros(dim),
            direction: d,
            range: (-rho, rho),
            points,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Slice::Line { base, .. } | Slice::Plane { base, .. } => base.dim(),
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Slice::Line { .. } => 1,
            Slice::Plane { .. } => 2,
        }
    }

    /// Grid points in row-major order (first parameter fastest).
    pub fn samples(&self) -> Vec<(Vec<f64>, Matrix)> {
        match self {
            Slice::Line {
                base,
                direction,
                range,
                points,
            } => grid(*range, *points)
                .into_iter()
                .map(|s| (vec![s], *base + *direction * s))
                .collect(),
            Slice::Plane {
                base,
                directions,
                ranges,
                points,
            } => {
                let g1 = grid(ranges.0, points.0);
                let g2 = grid(ranges.1, points.1);
                let mut out = Vec::with_capacity(g1.len() * g2.len());
                for &s2 in &g2 {
                    for &s1 in &g1 {
                        out.push((vec![s1, s2], *base + directions.0 * s1 + directions.1 * s2));
                    }
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EnvelopeOptions {
    pub wrel: WrelOptions,
    pub laminate: LaminateOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeRow {
    pub params: Vec<f64>,
    pub a: Matrix,
    pub w: f64,
    pub winf: f64,
    pub winf_uncertainty: f64,
    pub laminate: f64,
    pub lower: f64,
    /// Whether `lower` is a proven lower bound (exact convex envelope) rather than
    /// the convexification of the sampled values along the slice.
    pub lower_certified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeTable {
    pub density: String,
    pub rows: Vec<EnvelopeRow>,
    pub resolution: usize,
    pub depth: usize,
    pub n_params: usize,
}

/// Lower convex hull of `(x_k, v_k)` (sorted in `x`) evaluated at every `x_k`.
fn lower_hull(xs: &[f64], vs: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..xs.len() {
        if !vs[k].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[j] - xs[i]) * (vs[k] - vs[i]) - (vs[j] - vs[i]) * (xs[k] - xs[i]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    xs.iter()
        .map(|&x| {
            let pos = hull.partition_point(|&h| xs[h] < x);
            if pos < hull.len() && xs[hull[pos]] == x {
                return vs[hull[pos]];
            }
            if pos == 0 || pos == hull.len() {
                return f64::NAN;
            }
            let (i, j) = (hull[pos - 1], hull[pos]);
            vs[i] + (vs[j] - vs[i]) * (x - xs[i]) / (xs[j] - xs[i])
        })
        .collect()
}

/// Evaluates every grid point concurrently; rows come back in grid order.
pub fn envelope_table(
    w: &ScalarDensity,
    slice: &Slice,
    region: &Region,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeTable> {
    let samples = slice.samples();
    let rows: Vec<EnvelopeRow> = samples
        .par_iter()
        .map(|(params, a)| -> Result<EnvelopeRow> {
            let wa = w.eval(a);
            let rel = wrel(w, a, region, &opts.wrel)?;
            let lam = laminate_envelope_with(w, a, region, &opts.laminate)?;
            let (lower, certified) = match w.convex_envelope(a) {
                Some(v) => (v, true),
                None => (f64::NAN, false),
            };
            Ok(EnvelopeRow {
                params: params.clone(),
                a: *a,
                w: wa,
                winf: rel.value,
                winf_uncertainty: rel.uncertainty,
                laminate: lam.value,
                lower,
                lower_certified: certified,
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = rows;

    // sampled convexification along the first parameter, for rows without an exact envelope
    let n1 = match slice {
        Slice::Line { points, .. } => *points,
        Slice::Plane { points, .. } => points.0,
    };
    for chunk in rows.chunks_mut(n1) {
        if chunk.iter().all(|r| r.lower_certified) {
            continue;
        }
        let xs: Vec<f64> = chunk.iter().map(|r| r.params[0]).collect();
        let vs: Vec<f64> = chunk.iter().map(|r| r.winf.min(r.laminate)).collect();
        for (r, v) in chunk.iter_mut().zip(lower_hull(&xs, &vs)) {
            if !r.lower_certified {
                r.lower = v;
            }
        }
    }

    Ok(EnvelopeTable {
        density: w.name(),
        rows,
        resolution: opts.wrel.resolution,
        depth: opts.laminate.depth,
        n_params: slice.n_params(),
    })
}

impl EnvelopeTable {
    /// Machine-checkable part of the ordering: `winf ≤ W + tol`, `laminate ≤ W + tol`,
    /// and a certified lower bound below both. Returns one message per violation.
    pub fn check(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (k, r) in self.rows.iter().enumerate() {
            if r.winf > r.w + tol {
                out.push(format!("row {k}: winf {} exceeds W {}", r.winf, r.w));
            }
            if r.laminate > r.w + tol {
                out.push(format!("row {k}: laminate {} exceeds W {}", r.laminate, r.w));
            }
            if r.lower_certified && (r.lower > r.winf + tol || r.lower > r.laminate + tol) {
                out.push(format!(
                    "row {k}: lower bound {} above winf {} or laminate {}",
                    r.lower, r.winf, r.laminate
                ));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.n_params).map(|k| format!("s{k}")).collect();
        header.extend(
            [
                "w",
                "winf",
                "winf_uncertainty",
                "laminate",
                "lower",
                "lower_certified",
                "mesh",
                "depth",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        wtr.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.params.iter().map(|v| format!("{v:.16e}")).collect();
            for v in [r.w, r.winf, r.winf_uncertainty, r.laminate, r.lower] {
                rec.push(format!("{v:.16e}"));
            }
            rec.push(r.lower_certified.to_string());
            rec.push(self.resolution.to_string());
            rec.push(self.depth.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(Error::from)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_double_well_profile() {
        let xs: Vec<f64> = (0..5).map(|k| -2.0 + k as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|x: &f64| (x * x - 1.0).powi(2)).collect();
        let h = lower_hull(&xs, &vs);
        assert_eq!(h, vec![9.0, 0.0, 0.0, 0.0, 9.0]);
    }

    #[test]
    fn convex_line_is_flat() {
        let w = ScalarDensity::quadratic();
        let opts = EnvelopeOptions {
            wrel: WrelOptions {
                resolution: 4,
                ..WrelOptions::default()
            },
            laminate: LaminateOptions {
                depth: 1,
                directions: 8,
                ..LaminateOptions::default()
            },
        };
        let t = envelope_table(&w, &Slice::diagonal_line(2, 2.0, 5), &Region::ball(2.0).unwrap(), &opts).unwrap();
        assert!(t.check(1e-9).is_empty());
        for r in &t.rows {
            assert!((r.winf - r.w).abs() <= 1e-6);
        }
        assert_eq!(t.rows[0].winf, t.rows[0].w);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
    }
}
