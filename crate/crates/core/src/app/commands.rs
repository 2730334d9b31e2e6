//! Subcommand bodies. Each returns an [`Outcome`]; files are written by this thread only.

use std::path::PathBuf;
use std::time::Instant;

use super::config::{DensityKind, RunConfig};
use super::example51::{
    deltas_from_levels, example51_cofactor_check, example51_det_interpolation, example51_divergence, figure1_export,
    reference_path,
};
use super::output::{fmt_f64, read_vtk_summary, write_csv, write_deformation_vtk};
use crate::energy::LockingConstraint;
use crate::error::Result;
use crate::fem::{constrained_minimize_ball, minimize, BodyProblem, DiscreteDeformation, MinimizeReport};
use crate::relaxation::{envelope_table, EnvelopeOptions, LaminateOptions, Region, Slice, WrelOptions};
use crate::sampling;
use crate::tensor::identity_report;

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub passed: bool,
    /// Human-readable summary lines.
    pub messages: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

impl Outcome {
    fn say(&mut self, msg: impl Into<String>) {
        self.messages.push(msg.into());
    }
}

fn output_path(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from(default))
}

/// Cofactor/determinant identities on seeded random 3×3 matrices with `det ∈ [0.1, 10]`.
pub fn identities(cfg: &RunConfig) -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = sampling::seeded(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.samples);
    let mut failures = 0;
    for k in 0..cfg.samples {
        let f = sampling::random_matrix_with_det(&mut rng, 3, 2.0, 0.1, 10.0);
        let r = identity_report(&f);
        let n = f.norm();
        let det_tol = 1e-9 * (1.0 + n.powi(6));
        let cramer_tol = 1e-10 * (1.0 + n.powi(3));
        let hcof = r.hcof_slack.unwrap_or(0.0);
        let ok = r.det_cof_residual.abs() <= det_tol
            && r.cramer_residual <= cramer_tol
            && r.hadamard_slack >= 0.0
            && hcof >= 0.0;
        if !ok {
            failures += 1;
        }
        rows.push(vec![
            k.to_string(),
            fmt_f64(f.determinant()),
            fmt_f64(n),
            fmt_f64(r.det_cof_residual),
            fmt_f64(det_tol),
            fmt_f64(r.cramer_residual),
            fmt_f64(cramer_tol),
            fmt_f64(r.hadamard_slack),
            fmt_f64(hcof),
            ok.to_string(),
        ]);
    }
    let path = output_path(cfg, "identities.csv");
    write_csv(
        &path,
        &[
            "index",
            "det",
            "norm",
            "det_cof_residual",
            "det_cof_tol",
            "cramer_residual",
            "cramer_tol",
            "hadamard_slack",
            "hcof_slack",
            "pass",
        ],
        &rows,
    )?;
    let mut out = Outcome {
        passed: failures == 0,
        ..Outcome::default()
    };
    out.say(format!(
        "identities: {} samples, {failures} failures, {:.3} s",
        cfg.samples,
        start.elapsed().as_secs_f64()
    ));
    out.outputs.push(path);
    Ok(out)
}

/// Envelope table along `s e₁⊗e₁`, `s ∈ [−ϱ, ϱ]`.
pub fn envelope(cfg: &RunConfig) -> Result<Outcome> {
    let e = &cfg.envelope;
    let w = cfg.scalar_density()?;
    let slice = Slice::diagonal_line(e.dim, e.rho, e.grid);
    let opts = EnvelopeOptions {
        wrel: WrelOptions {
            resolution: e.resolution,
            ..WrelOptions::default()
        },
        laminate: LaminateOptions {
            depth: e.depth,
            directions: e.directions,
            ..LaminateOptions::default()
        },
    };
    let table = envelope_table(&w, &slice, &e.region, &opts)?;
    let mut violations = table.check(1e-9);
    if let Region::Ball { .. } = e.region {
        for r in &table.rows {
            if (e.region.gauge(&r.a) - 1.0).abs() <= 1e-12 && r.winf != r.w {
                violations.push(format!(
                    "boundary point s = {}: wrel {} differs from W {}",
                    r.params[0], r.winf, r.w
                ));
            }
        }
    }
    let path = output_path(cfg, "envelope.csv");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    table.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    let mut out = Outcome {
        passed: violations.is_empty(),
        ..Outcome::default()
    };
    out.say(format!(
        "envelope: density {}, {} grid points, cell mesh {}, laminate depth {}",
        table.density,
        table.rows.len(),
        table.resolution,
        table.depth
    ));
    for v in violations {
        out.say(v);
    }
    out.outputs.push(path);
    Ok(out)
}

fn initial_field(cfg: &RunConfig, p: &BodyProblem) -> Result<DiscreteDeformation> {
    Ok(match cfg.boundary_matrix()? {
        Some(f) => DiscreteDeformation::affine(&p.mesh, &f, &cfg.boundary.offset),
        None => p.y0_nodal().clone(),
    })
}

fn write_nodes(
    cfg: &RunConfig,
    p: &BodyProblem,
    y: &DiscreteDeformation,
    default: &str,
    out: &mut Outcome,
) -> Result<()> {
    let d = p.dim();
    let mut header: Vec<String> = vec!["node".into()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend((1..=d).map(|i| format!("y{i}")));
    let rows: Vec<Vec<String>> = (0..p.mesh.n_nodes())
        .map(|a| {
            let mut r = vec![a.to_string()];
            r.extend(p.mesh.node(a).iter().map(|v| fmt_f64(*v)));
            r.extend(y.node(a).iter().map(|v| fmt_f64(*v)));
            r
        })
        .collect();
    let path = output_path(cfg, default);
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&path, &h, &rows)?;
    out.outputs.push(path);
    if let Some(vtk) = &cfg.vtk {
        write_deformation_vtk(vtk, &p.mesh, y.values(), "minimizer")?;
        out.outputs.push(vtk.clone());
    }
    Ok(())
}

fn report_lines(r: &MinimizeReport, out: &mut Outcome) {
    out.say(format!(
        "energy {} (start {}), |grad| {:e}, {} iterations, {:?}",
        r.energy, r.initial_energy, r.grad_norm, r.iterations, r.termination
    ));
    out.say(format!(
        "min det {} (element {}), max det {}, max |grad y| {}, locking violation {}",
        r.min_det, r.min_det_element, r.max_det, r.max_grad_norm, r.locking_violation
    ));
}

pub fn minimize_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.problem()?;
    let y0 = initial_field(cfg, &p)?;
    let (y, r) = minimize(&p, &y0, &cfg.solver)?;
    let mut out = Outcome {
        passed: r.energy.is_finite()
            && r.locking_violation <= 0.0
            && (cfg.density.kind != DensityKind::StvkGradPoly || r.min_det > 0.0),
        ..Outcome::default()
    };
    report_lines(&r, &mut out);
    write_nodes(cfg, &p, &y, "minimize.csv", &mut out)?;
    Ok(out)
}

/// `|∇y| ≤ locking.rho` and `det ∇y ≥ locking.eps` enforced by the line search.
pub fn constrained_minimize_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let rho = cfg.locking.rho;
    let eps = cfg.locking.eps;
    let p = cfg.problem()?.with_locking(LockingConstraint::none());
    let y0 = initial_field(cfg, &p)?;
    let (y, r) = constrained_minimize_ball(&p, rho, eps, &y0, &cfg.solver)?;
    let mut out = Outcome {
        passed: r.energy.is_finite() && r.min_det >= eps - 1e-8 && r.max_grad_norm <= rho + 1e-8,
        ..Outcome::default()
    };
    report_lines(&r, &mut out);
    write_nodes(cfg, &p, &y, "constrained.csv", &mut out)?;
    Ok(out)
}

/// Cofactor agreement, divergence rate, and determinant interpolation for every `t`.
pub fn example51_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let e = &cfg.example51;
    let mut rows = Vec::new();
    let mut passed = true;
    let mut push = |check: &str, t: f64, param: String, value: f64, expected: f64, tol: f64, ok: bool| {
        passed &= ok;
        rows.push(vec![
            check.to_string(),
            fmt_f64(t),
            param,
            fmt_f64(value),
            fmt_f64(expected),
            fmt_f64(tol),
            ok.to_string(),
        ]);
    };
    for &t in &e.t {
        let cof = example51_cofactor_check(t, e.points, cfg.seed)?;
        push("cofactor", t, e.points.to_string(), cof, 0.0, 1e-12, cof <= 1e-12);

        let div = example51_divergence(t, &deltas_from_levels(t, &e.levels))?;
        for (d, (q, x)) in div.deltas.iter().zip(div.integrals.iter().zip(&div.exact)) {
            push("integral", t, fmt_f64(*d), *q, *x, 1e-6, (q - x).abs() <= 1e-6 * x);
        }
        let err = div.slope_error();
        push("slope", t, "-".into(), div.slope, div.expected_slope, 0.1, err <= 0.1);
        let var = div.sup_variation();
        push("sup_variation", t, "-".into(), var, 0.0, 0.01, var < 0.01);

        let interp = example51_det_interpolation(t, &e.subdivisions)?;
        for (n, err) in interp.subdivisions.iter().zip(&interp.errors) {
            push("det_interpolation", t, n.to_string(), *err, 0.0, f64::NAN, true);
        }
        for (k, ratio) in interp.ratios().iter().enumerate() {
            push(
                "det_ratio",
                t,
                interp.subdivisions[k + 1].to_string(),
                *ratio,
                1.5,
                1.5,
                *ratio >= 1.5,
            );
        }
    }
    let path = output_path(cfg, "example51.csv");
    write_csv(
        &path,
        &["check", "t", "param", "value", "expected", "tolerance", "pass"],
        &rows,
    )?;
    let mut out = Outcome {
        passed,
        ..Outcome::default()
    };
    out.say(format!("example51: {} checks over t = {:?}", rows.len(), e.t));
    out.outputs.push(path);
    Ok(out)
}

pub fn figure1_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let e = &cfg.example51;
    let path = cfg
        .vtk
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("figure1.vtk"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let s = figure1_export(e.figure_t, &e.figure_subdivisions, &path)?;
    let expected: usize = e.figure_subdivisions.iter().map(|n| n + 1).product();
    let deformed = read_vtk_summary(&s.deformed)?;
    let reference = read_vtk_summary(&reference_path(&path))?;
    let ok = deformed.consistent()
        && reference.consistent()
        && deformed.points == expected
        && deformed.cells == s.cells
        && s.x1_extent == (0.0, 1.0);
    let mut out = Outcome {
        passed: ok,
        ..Outcome::default()
    };
    out.say(format!(
        "figure1: t = {}, {} points, {} cells, deformed x1 in [{}, {}]",
        e.figure_t, s.points, s.cells, s.x1_extent.0, s.x1_extent.1
    ));
    out.outputs.push(s.deformed);
    out.outputs.push(s.reference);
    Ok(out)
}
