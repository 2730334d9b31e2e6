//! Limited-memory BFGS with backtracking and a feasibility hook.

use std::collections::VecDeque;

/// Objective seen by [`lbfgs`]. `feasible` is queried on every trial point before
/// the energy is evaluated; `accepted` observes each accepted iterate.
pub trait Objective {
    fn value_grad(&mut self, x: &[f64]) -> (f64, Vec<f64>);
    fn feasible(&mut self, _x: &[f64]) -> bool {
        true
    }
    fn accepted(&mut self, _x: &[f64], _value: f64) {}
}

/// Adapter turning a closure into an [`Objective`].
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> Objective for FnObjective<F> {
    fn value_grad(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.0)(x)
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsSettings {
    pub max_iter: usize,
    /// Stop when the projected gradient 2-norm drops below this.
    pub grad_tol: f64,
    /// Stop when the relative decrease stays below this for `f_patience` iterations.
    pub f_tol: f64,
    pub f_patience: usize,
    pub memory: usize,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsSettings {
    fn default() -> Self {
        LbfgsSettings {
            max_iter: 500,
            grad_tol: 1e-8,
            f_tol: 1e-15,
            f_patience: 5,
            memory: 10,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    FunctionTolerance,
    MaxIterations,
    /// No acceptable step along steepest descent.
    LineSearchStalled,
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub accepted_steps: usize,
    pub termination: Termination,
}

impl LbfgsResult {
    pub fn converged(&self) -> bool {
        matches!(
            self.termination,
            Termination::GradientTolerance | Termination::FunctionTolerance
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(g: &mut [f64], free: &[bool]) {
    for (gi, &f) in g.iter_mut().zip(free) {
        if !f {
            *gi = 0.0;
        }
    }
}

/// Minimizes `obj` over the components marked `free`; fixed components never move.
/// The starting value must be finite.
pub fn lbfgs<O: Objective>(obj: &mut O, x0: Vec<f64>, free: &[bool], settings: &LbfgsSettings) -> LbfgsResult {
    assert_eq!(x0.len(), free.len(), "mask length must match the unknowns");
    let mut x = x0;
    let (mut f, mut g) = obj.value_grad(&x);
    project(&mut g, free);
    let mut gnorm = dot(&g, &g).sqrt();
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut stagnant = 0;
    let mut accepted_steps = 0;
    let mut iter = 0;

    let termination = loop {
        if !f.is_finite() {
            break Termination::LineSearchStalled;
        }
        if gnorm <= settings.grad_tol {
            break Termination::GradientTolerance;
        }
        if iter >= settings.max_iter {
            break Termination::MaxIterations;
        }
        iter += 1;

        let mut step = None;
        for attempt in 0..2 {
            let steepest = attempt == 1 || hist.is_empty();
            let d = if steepest {
                hist.clear();
                g.iter().map(|v| -v).collect::<Vec<_>>()
            } else {
                two_loop(&g, &hist)
            };
            let slope = dot(&g, &d);
            if slope >= 0.0 {
                continue;
            }
            let mut t = if steepest { (1.0 / gnorm).min(1.0) } else { 1.0 };
            for _ in 0..settings.max_backtracks {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
                if obj.feasible(&trial) {
                    let (ft, gt) = obj.value_grad(&trial);
                    if ft.is_finite() && ft <= f + settings.armijo * t * slope {
                        step = Some((trial, ft, gt));
                        break;
                    }
                }
                t *= 0.5;
            }
            if step.is_some() || steepest {
                break;
            }
        }

        let Some((xn, fnew, mut gn)) = step else {
            break Termination::LineSearchStalled;
        };
        project(&mut gn, free);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if hist.len() == settings.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        let rel = (f - fnew) / f.abs().max(fnew.abs()).max(1e-300);
        x = xn;
        f = fnew;
        g = gn;
        gnorm = dot(&g, &g).sqrt();
        accepted_steps += 1;
        obj.accepted(&x, f);
        if rel <= settings.f_tol {
            stagnant += 1;
            if stagnant >= settings.f_patience {
                break Termination::FunctionTolerance;
            }
        } else {
            stagnant = 0;
        }
    };

    LbfgsResult {
        x,
        value: f,
        grad_norm: gnorm,
        iterations: iter,
        accepted_steps,
        termination,
    }
}

fn two_loop(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = hist.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let mut obj = FnObjective(|x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            (f, g)
        });
        let r = lbfgs(&mut obj, vec![-1.2, 1.0], &[true, true], &LbfgsSettings::default());
        assert!(r.converged());
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fixed_components_stay_put() {
        let mut obj = FnObjective(|x: &[f64]| {
            let f: f64 = x.iter().map(|v| (v - 3.0).powi(2)).sum();
            (f, x.iter().map(|v| 2.0 * (v - 3.0)).collect())
        });
        let r = lbfgs(
            &mut obj,
            vec![0.0, 0.0, 0.0],
            &[true, false, true],
            &LbfgsSettings::default(),
        );
        assert_eq!(r.x[1], 0.0);
        assert!((r.x[0] - 3.0).abs() < 1e-8);
    }

    struct Barrier;
    impl Objective for Barrier {
        fn value_grad(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
            if x[0] <= 0.0 {
                return (f64::INFINITY, vec![0.0]);
            }
            (x[0] - x[0].ln() * 1e-3, vec![1.0 - 1e-3 / x[0]])
        }
        fn feasible(&mut self, x: &[f64]) -> bool {
            x[0] > 0.0
        }
    }

    #[test]
    fn feasibility_hook_keeps_iterates_inside() {
        let r = lbfgs(&mut Barrier, vec![1.0], &[true], &LbfgsSettings::default());
        assert!(r.x[0] > 0.0);
        assert!((r.x[0] - 1e-3).abs() < 1e-6);
    }
}
