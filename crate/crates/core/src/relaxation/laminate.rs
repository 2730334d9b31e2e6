//! Inner approximation of the relaxed density by iterated rank-one splits.

use rayon::prelude::*;

use super::region::Region;
use super::young::DiscreteYoungMeasure;
use crate::energy::ScalarDensity;
use crate::error::Result;
use crate::tensor::{rank_one, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct LaminateOptions {
    /// Direction count for each of `a` and `b` (coordinate axes are always added).
    pub directions: usize,
    /// Number of interior volume fractions `λ`.
    pub lambdas: usize,
    /// Amplitude samples on `(0, t_max]`.
    pub amplitudes: usize,
    pub depth: usize,
}

impl Default for LaminateOptions {
    fn default() -> Self {
        LaminateOptions {
            directions: 64,
            lambdas: 33,
            amplitudes: 16,
            depth: 3,
        }
    }
}

/// One rank-one split `F = λ F₊ + (1−λ) F₋` with `F₊ − F₋ = t a⊗b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub t: f64,
    /// `λ W(F₊) + (1−λ) W(F₋)`.
    pub value: f64,
}

impl Split {
    pub fn plus(&self, f: &Matrix) -> Matrix {
        *f + rank_one(&self.a, &self.b) * ((1.0 - self.lambda) * self.t)
    }

    pub fn minus(&self, f: &Matrix) -> Matrix {
        *f - rank_one(&self.a, &self.b) * (self.lambda * self.t)
    }
}

#[derive(Clone, Debug)]
pub struct LaminateResult {
    pub value: f64,
    pub measure: DiscreteYoungMeasure,
    /// First split used, if any.
    pub top_split: Option<Split>,
}

/// Unit directions: a half circle in 2D, a Fibonacci sphere in 3D, plus the axes.
pub fn direction_set(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = (0..dim)
        .map(|k| (0..dim).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    if dim == 2 {
        for k in 0..count {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
            dirs.push(vec![th.cos(), th.sin()]);
        }
    } else {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for k in 0..count {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * k as f64;
            dirs.push(vec![r * th.cos(), r * th.sin(), z]);
        }
    }
    dirs
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Best single split of `F` by one-level value, or `None` if no admissible split exists.
pub fn best_split(w: &ScalarDensity, f: &Matrix, region: &Region, opts: &LaminateOptions) -> Option<Split> {
    let dim = f.dim();
    let dirs = direction_set(dim, opts.directions);
    let lambdas: Vec<f64> = (1..=opts.lambdas)
        .map(|k| k as f64 / (opts.lambdas + 1) as f64)
        .collect();
    let eval = |a: &[f64], b: &[f64], lam: f64, t: f64| -> f64 {
        let m = rank_one(a, b);
        let fp = *f + m * ((1.0 - lam) * t);
        let fm = *f - m * (lam * t);
        if !(region.contains(&fp) && region.contains(&fm)) {
            return f64::INFINITY;
        }
        lam * w.eval(&fp) + (1.0 - lam) * w.eval(&fm)
    };
    let per_a: Vec<Option<Split>> = dirs
        .par_iter()
        .map(|a| {
            let mut best: Option<Split> = None;
            for b in &dirs {
                let m = rank_one(a, b);
                let r_plus = region.reach(f, &m);
                let r_minus = region.reach(f, &(-m));
                for &lam in &lambdas {
                    // stay strictly inside so that rounding cannot leave the region
                    let t_max = (r_plus / (1.0 - lam)).min(r_minus / lam) * (1.0 - 1e-12);
                    if !(t_max > 0.0) || !t_max.is_finite() {
                        continue;
                    }
                    for j in 1..=opts.amplitudes {
                        let t = t_max * j as f64 / opts.amplitudes as f64;
                        let v = eval(a, b, lam, t);
                        if best.as_ref().is_none_or(|s| v < s.value) {
                            best = Some(Split {
                                a: a.clone(),
                                b: b.clone(),
                                lambda: lam,
                                t,
                                value: v,
                            });
                        }
                    }
                }
            }
            best
        })
        .collect();
    let mut best = per_a.into_iter().flatten().fold(None::<Split>, |acc, s| match acc {
        Some(b) if b.value <= s.value => Some(b),
        _ => Some(s),
    })?;
    if !best.value.is_finite() {
        return None;
    }
    // refine the amplitude around the best grid point
    let m = rank_one(&best.a, &best.b);
    let t_max = (region.reach(f, &m) / (1.0 - best.lambda)).min(region.reach(f, &(-m)) / best.lambda) * (1.0 - 1e-12);
    let step = t_max / opts.amplitudes as f64;
    let lo = (best.t - step).max(0.0);
    let hi = (best.t + step).min(t_max);
    let (t, v) = golden_min(|t| eval(&best.a, &best.b, best.lambda, t), lo, hi, 60);
    if v < best.value {
        best.t = t;
        best.value = v;
    }
    Some(best)
}

fn recurse(
    w: &ScalarDensity,
    f: &Matrix,
    region: &Region,
    opts: &LaminateOptions,
    depth: usize,
) -> (f64, Vec<(Matrix, f64)>, Option<Split>) {
    let wf = w.eval(f);
    if depth == 0 {
        return (wf, vec![(*f, 1.0)], None);
    }
    let Some(split) = best_split(w, f, region, opts) else {
        return (wf, vec![(*f, 1.0)], None);
    };
    let (fp, fm) = (split.plus(f), split.minus(f));
    let (vp, ap, _) = recurse(w, &fp, region, opts, depth - 1);
    let (vm, am, _) = recurse(w, &fm, region, opts, depth - 1);
    let v = split.lambda * vp + (1.0 - split.lambda) * vm;
    if v < wf - 1e-12 * (1.0 + wf.abs()) {
        let mut atoms: Vec<(Matrix, f64)> = ap.into_iter().map(|(m, l)| (m, l * split.lambda)).collect();
        atoms.extend(am.into_iter().map(|(m, l)| (m, l * (1.0 - split.lambda))));
        (v, atoms, Some(split))
    } else {
        (wf, vec![(*f, 1.0)], None)
    }
}

/// Best laminate value over rank-one splits recursed to `opts.depth` levels, with all
/// atoms in the region. The returned measure has barycenter `A`.
pub fn laminate_envelope_with(
    w: &ScalarDensity,
    a: &Matrix,
    region: &Region,
    opts: &LaminateOptions,
) -> Result<LaminateResult> {
    if !region.contains(a) {
        return Err(region.outside_error(a));
    }
    let (value, atoms, top_split) = recurse(w, a, region, opts, opts.depth);
    let total: f64 = atoms.iter().map(|(_, l)| l).sum();
    let atoms = atoms.into_iter().map(|(m, l)| (m, l / total)).collect();
    Ok(LaminateResult {
        value,
        measure: DiscreteYoungMeasure::new(atoms)?,
        top_split,
    })
}

/// `laminate_envelope` on the ball `B̄(0,ϱ)` with default search settings.
pub fn laminate_envelope(w: &ScalarDensity, a: &Matrix, rho: f64, depth: usize) -> Result<(f64, DiscreteYoungMeasure)> {
    let region = Region::ball(rho)?;
    let r = laminate_envelope_with(
        w,
        a,
        &region,
        &LaminateOptions {
            depth,
            ..LaminateOptions::default()
        },
    )?;
    Ok((r.value, r.measure))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::relaxation::young::{default_convex_tests, validate_gym};

    #[test]
    fn double_well_at_zero() {
        let w = ScalarDensity::double_well();
        let (v, nu) = laminate_envelope(&w, &Matrix::zeros(2), 2.0, 1).unwrap();
        assert!(v.abs() <= 1e-8, "{v}");
        let rep = validate_gym(&nu, 2.0, &default_convex_tests(2, 3));
        assert!(rep.passed(0.0));
        assert!(rep.barycenter_error(&Matrix::zeros(2)) <= 1e-10);
    }

    #[test]
    fn convex_density_is_not_split() {
        let w = ScalarDensity::quadratic();
        let a = Matrix::from_rows2([[0.5, 0.2], [-0.3, 0.1]]);
        let (v, nu) = laminate_envelope(&w, &a, 2.0, 2).unwrap();
        assert_eq!(v, w.eval(&a));
        assert_eq!(nu.atoms().len(), 1);
    }

    #[test]
    fn depth_zero_is_identity() {
        let w = ScalarDensity::double_well();
        let a = Matrix::from_rows2([[0.1, 0.0], [0.0, 0.2]]);
        let (v, _) = laminate_envelope(&w, &a, 2.0, 0).unwrap();
        assert_eq!(v, w.eval(&a));
    }

    #[test]
    fn infeasible_base() {
        let w = ScalarDensity::quadratic();
        assert!(matches!(
            laminate_envelope(&w, &(Matrix::identity(2) * 3.0), 2.0, 1),
            Err(Error::InfeasibleBase { .. })
        ));
    }
}
