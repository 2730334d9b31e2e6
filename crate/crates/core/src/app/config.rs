//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comment
//! [run]
//! seed = 7
//!
//! [density]
//! kind = stvk-gradpoly
//! q = 4
//! ```
//!
//! Keys are addressed as `section.key`; values are numbers, words, or comma-separated lists.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::energy::{ElasticTensor, GradPolyDensity, LockingConstraint, ScalarDensity};
use crate::error::{Error, Result};
use crate::fem::{BodyProblem, BoundaryMap, BoxMesh, Density, FaceSet, SolverSettings};
use crate::relaxation::Region;
use crate::tensor::Matrix;

use super::example51::Example51Fields;

const KEYS: &[&str] = &[
    "run.seed",
    "run.samples",
    "run.output",
    "run.vtk",
    "density.kind",
    "density.lambda",
    "density.mu",
    "density.alpha",
    "density.p",
    "density.q",
    "density.s",
    "density.r",
    "density.det_coef",
    "density.radius",
    "locking.kind",
    "locking.rho",
    "locking.eps",
    "mesh.dim",
    "mesh.lower",
    "mesh.upper",
    "mesh.subdivisions",
    "boundary.map",
    "boundary.matrix",
    "boundary.offset",
    "boundary.t",
    "boundary.dirichlet",
    "boundary.device",
    "boundary.alpha",
    "load.body_force",
    "load.traction",
    "solver.max_iter",
    "solver.grad_tol",
    "solver.f_tol",
    "solver.memory",
    "solver.det_safeguard",
    "envelope.dim",
    "envelope.rho",
    "envelope.region",
    "envelope.grid",
    "envelope.resolution",
    "envelope.depth",
    "envelope.directions",
    "example51.t",
    "example51.levels",
    "example51.points",
    "example51.subdivisions",
    "figure1.t",
    "figure1.subdivisions",
];

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

/// Raw `section.key → value` map with source lines (0 for command-line overrides).
#[derive(Clone, Debug, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, Entry>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(Error::config(line, content, "unterminated section header"));
                };
                section = name.trim().to_string();
                if section.is_empty() || !section.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(Error::config(line, content, "invalid section name"));
                }
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(Error::config(line, content, "expected `key = value`"));
            };
            let k = k.trim();
            if section.is_empty() {
                return Err(Error::config(line, k, "key outside of any [section]"));
            }
            let key = format!("{section}.{k}");
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::config(line, key, "unknown key"));
            }
            if entries.contains_key(&key) {
                return Err(Error::config(line, key, "duplicate key"));
            }
            entries.insert(
                key,
                Entry {
                    value: v.trim().to_string(),
                    line,
                },
            );
        }
        Ok(ConfigMap { entries })
    }

    /// Sets `section.key = value` from the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::config(0, key, "unknown key"));
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.trim().to_string(),
                line: 0,
            },
        );
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|e| (e.value.as_str(), e.line))
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => {
                parse_f64(v).ok_or_else(|| Error::config(line, key, format!("expected a number, got `{v}`")))
            }
        }
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, _)) if v.eq_ignore_ascii_case("none") => Ok(None),
            Some(_) => self.f64_or(key, 0.0).map(Some),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse::<usize>()
                .map_err(|_| Error::config(line, key, format!("expected a nonnegative integer, got `{v}`"))),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse::<u64>()
                .map_err(|_| Error::config(line, key, format!("expected a nonnegative integer, got `{v}`"))),
        }
    }

    fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).map_or(default, |(v, _)| v)
    }

    fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    parse_f64(s.trim())
                        .ok_or_else(|| Error::config(line, key, format!("bad list entry `{}`", s.trim())))
                })
                .collect(),
        }
    }

    fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::config(line, key, format!("bad integer entry `{}`", s.trim())))
                })
                .collect(),
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    Quadratic,
    DoubleWell,
    Stvk,
    StvkGradPoly,
}

impl DensityKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "quadratic" => DensityKind::Quadratic,
            "double-well" => DensityKind::DoubleWell,
            "stvk" => DensityKind::Stvk,
            "stvk-gradpoly" => DensityKind::StvkGradPoly,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensitySpec {
    pub kind: DensityKind,
    pub lambda: f64,
    pub mu: f64,
    /// Coefficient of the gradient terms and of `det^{-s}`.
    pub alpha: f64,
    /// Growth exponent of `|F|` in the coercivity bound.
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub r: f64,
    /// Coefficient of `|∇ det ∇y|^r`; zero disables the term.
    pub det_coef: f64,
    pub radius: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LockingKind {
    None,
    Ball,
    Determinant,
    CiarletNecas,
    Prager,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LockingSpec {
    pub kind: LockingKind,
    pub rho: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshSpec {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub subdivisions: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Identity,
    Affine,
    Example51,
    /// Affine map through the admissible witness of the locking constraint.
    Witness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySpec {
    pub kind: BoundaryKind,
    pub matrix: Matrix,
    pub offset: Vec<f64>,
    pub t: f64,
    pub dirichlet: FaceSet,
    pub device: FaceSet,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSpec {
    pub dim: usize,
    pub rho: f64,
    pub region: Region,
    pub grid: usize,
    pub resolution: usize,
    pub depth: usize,
    pub directions: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Example51Spec {
    pub t: Vec<f64>,
    /// `δ = exp(−(t+1)L)` for each level `L`.
    pub levels: Vec<f64>,
    pub points: usize,
    pub subdivisions: Vec<usize>,
    pub figure_t: f64,
    pub figure_subdivisions: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub output: Option<PathBuf>,
    pub vtk: Option<PathBuf>,
    pub density: DensitySpec,
    pub locking: LockingSpec,
    pub mesh: MeshSpec,
    pub boundary: BoundarySpec,
    pub body_force: Vec<f64>,
    pub traction: Vec<f64>,
    pub solver: SolverSettings,
    pub envelope: EnvelopeSpec,
    pub example51: Example51Spec,
}

fn matrix_from(values: &[f64], line: usize, key: &str) -> Result<Matrix> {
    match values.len() {
        4 => Ok(Matrix::from_rows2([[values[0], values[1]], [values[2], values[3]]])),
        9 => Ok(Matrix::from_rows3([
            [values[0], values[1], values[2]],
            [values[3], values[4], values[5]],
            [values[6], values[7], values[8]],
        ])),
        n => Err(Error::config(
            line,
            key,
            format!("matrix needs 4 or 9 entries, got {n}"),
        )),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&ConfigMap::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_map(&ConfigMap::parse(&std::fs::read_to_string(path)?)?)
    }

    /// Typed view of `map` with defaults filled in, validated before returning.
    pub fn from_map(m: &ConfigMap) -> Result<Self> {
        let kind_s = m.str_or("density.kind", "quadratic");
        let kind = DensityKind::parse(kind_s).ok_or_else(|| {
            Error::config(
                m.line("density.kind"),
                "density.kind",
                format!("unknown density `{kind_s}` (quadratic, double-well, stvk, stvk-gradpoly)"),
            )
        })?;
        let density = DensitySpec {
            kind,
            lambda: m.f64_or("density.lambda", 1.0)?,
            mu: m.f64_or("density.mu", 1.0)?,
            alpha: m.f64_or("density.alpha", 1.0)?,
            p: m.f64_or("density.p", 4.0)?,
            q: m.f64_or("density.q", 4.0)?,
            s: m.f64_or("density.s", 30.0)?,
            r: m.f64_or("density.r", 2.0)?,
            det_coef: m.f64_or("density.det_coef", 0.0)?,
            radius: m.opt_f64("density.radius")?,
        };

        let lk = m.str_or("locking.kind", "none");
        let locking = LockingSpec {
            kind: match lk {
                "none" => LockingKind::None,
                "ball" => LockingKind::Ball,
                "determinant" => LockingKind::Determinant,
                "ciarlet-necas" => LockingKind::CiarletNecas,
                "prager" => LockingKind::Prager,
                other => {
                    return Err(Error::config(
                        m.line("locking.kind"),
                        "locking.kind",
                        format!("unknown locking `{other}` (none, ball, determinant, ciarlet-necas, prager)"),
                    ))
                }
            },
            rho: m.f64_or("locking.rho", 2.0)?,
            eps: m.f64_or("locking.eps", 0.2)?,
        };

        let dim = m.usize_or("mesh.dim", 3)?;
        if dim != 2 && dim != 3 {
            return Err(Error::config(
                m.line("mesh.dim"),
                "mesh.dim",
                "dimension must be 2 or 3",
            ));
        }
        let mut subdivisions = m.usize_list_or("mesh.subdivisions", &[4])?;
        if subdivisions.len() == 1 {
            subdivisions = vec![subdivisions[0]; dim];
        }
        let mesh = MeshSpec {
            dim,
            lower: m.list_or("mesh.lower", &vec![0.0; dim])?,
            upper: m.list_or("mesh.upper", &vec![1.0; dim])?,
            subdivisions,
        };
        for key in ["mesh.lower", "mesh.upper"] {
            let v = if key == "mesh.lower" { &mesh.lower } else { &mesh.upper };
            if v.len() != dim {
                return Err(Error::config(m.line(key), key, format!("expected {dim} entries")));
            }
        }
        if mesh.subdivisions.len() != dim || mesh.subdivisions.contains(&0) {
            return Err(Error::config(
                m.line("mesh.subdivisions"),
                "mesh.subdivisions",
                format!("expected {dim} positive entries"),
            ));
        }
        if mesh.lower.iter().zip(&mesh.upper).any(|(a, b)| !(a < b)) {
            return Err(Error::config(
                m.line("mesh.upper"),
                "mesh.upper",
                "upper corner must exceed lower corner",
            ));
        }

        let bk = m.str_or("boundary.map", "identity");
        let bkind = match bk {
            "identity" => BoundaryKind::Identity,
            "affine" => BoundaryKind::Affine,
            "example51" => BoundaryKind::Example51,
            "witness" => BoundaryKind::Witness,
            other => {
                return Err(Error::config(
                    m.line("boundary.map"),
                    "boundary.map",
                    format!("unknown map `{other}` (identity, affine, example51, witness)"),
                ))
            }
        };
        let id: Vec<f64> = (0..dim * dim)
            .map(|k| if k % (dim + 1) == 0 { 1.0 } else { 0.0 })
            .collect();
        let mvals = m.list_or("boundary.matrix", &id)?;
        let matrix = matrix_from(&mvals, m.line("boundary.matrix"), "boundary.matrix")?;
        if matrix.dim() != dim {
            return Err(Error::config(
                m.line("boundary.matrix"),
                "boundary.matrix",
                "matrix size does not match mesh.dim",
            ));
        }
        let face = |key: &str, default: &str| -> Result<FaceSet> {
            FaceSet::parse(m.str_or(key, default), dim).map_err(|e| Error::config(m.line(key), key, e.to_string()))
        };
        let boundary = BoundarySpec {
            kind: bkind,
            matrix,
            offset: m.list_or("boundary.offset", &vec![0.0; dim])?,
            t: m.f64_or("boundary.t", 1.0)?,
            dirichlet: face("boundary.dirichlet", "x-")?,
            device: face("boundary.device", "none")?,
            alpha: m.f64_or("boundary.alpha", 0.0)?,
        };
        if boundary.offset.len() != dim {
            return Err(Error::config(
                m.line("boundary.offset"),
                "boundary.offset",
                format!("expected {dim} entries"),
            ));
        }
        let body_force = m.list_or("load.body_force", &vec![0.0; dim])?;
        let traction = m.list_or("load.traction", &vec![0.0; dim])?;
        for (key, v) in [("load.body_force", &body_force), ("load.traction", &traction)] {
            if v.len() != dim {
                return Err(Error::config(m.line(key), key, format!("expected {dim} entries")));
            }
        }

        let d = SolverSettings::default();
        let solver = SolverSettings {
            max_iter: m.usize_or("solver.max_iter", d.max_iter)?,
            grad_tol: m.f64_or("solver.grad_tol", d.grad_tol)?,
            f_tol: m.f64_or("solver.f_tol", d.f_tol)?,
            memory: m.usize_or("solver.memory", d.memory)?,
            det_safeguard: m.f64_or("solver.det_safeguard", d.det_safeguard)?,
            record_iterates: false,
        };

        let erho = m.f64_or("envelope.rho", 2.0)?;
        let region = match m.str_or("envelope.region", "ball") {
            "ball" => Region::ball(erho),
            "box" => Region::cube(erho),
            other => {
                return Err(Error::config(
                    m.line("envelope.region"),
                    "envelope.region",
                    format!("unknown region `{other}` (ball, box)"),
                ))
            }
        }
        .map_err(|e| Error::config(m.line("envelope.rho"), "envelope.rho", e.to_string()))?;
        let envelope = EnvelopeSpec {
            dim: m.usize_or("envelope.dim", 2)?,
            rho: erho,
            region,
            grid: m.usize_or("envelope.grid", 41)?,
            resolution: m.usize_or("envelope.resolution", 16)?,
            depth: m.usize_or("envelope.depth", 3)?,
            directions: m.usize_or("envelope.directions", 64)?,
        };

        let example51 = Example51Spec {
            t: m.list_or("example51.t", &[1.0, 10.0, 100.0])?,
            levels: m.list_or("example51.levels", &[4.0, 5.0, 6.0])?,
            points: m.usize_or("example51.points", 100)?,
            subdivisions: m.usize_list_or("example51.subdivisions", &[4, 8, 16])?,
            figure_t: m.f64_or("figure1.t", 100.0)?,
            figure_subdivisions: m.usize_list_or("figure1.subdivisions", &[8, 8, 8])?,
        };

        let cfg = RunConfig {
            seed: m.u64_or("run.seed", 0)?,
            samples: m.usize_or("run.samples", 1000)?,
            output: m.raw("run.output").map(|(v, _)| PathBuf::from(v)),
            vtk: m.raw("run.vtk").map(|(v, _)| PathBuf::from(v)),
            density,
            locking,
            mesh,
            boundary,
            body_force,
            traction,
            solver,
            envelope,
            example51,
        };
        cfg.validate(m)?;
        Ok(cfg)
    }

    fn validate(&self, m: &ConfigMap) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::config(m.line(key), key, msg));
        let d = &self.density;
        if d.kind == DensityKind::StvkGradPoly {
            if !(d.p >= 2.0) {
                return bad("density.p", format!("need p ≥ 2, got {}", d.p));
            }
            if !(d.q >= d.p / (d.p - 1.0)) {
                return bad(
                    "density.q",
                    format!("need q ≥ p/(p−1) = {}, got {}", d.p / (d.p - 1.0), d.q),
                );
            }
            if !(d.r > 1.0) {
                return bad("density.r", format!("need r > 1, got {}", d.r));
            }
            if !(d.s > 0.0) {
                return bad("density.s", format!("need s > 0, got {}", d.s));
            }
            if !(d.alpha > 0.0) {
                return bad("density.alpha", format!("need alpha > 0, got {}", d.alpha));
            }
            if self.mesh.dim != 3 {
                return bad("mesh.dim", "gradient-polyconvex densities need mesh.dim = 3".into());
            }
            if !(d.det_coef >= 0.0) {
                return bad("density.det_coef", format!("need det_coef ≥ 0, got {}", d.det_coef));
            }
        }
        if matches!(d.kind, DensityKind::Stvk | DensityKind::StvkGradPoly)
            && !(d.mu > 0.0 && 3.0 * d.lambda + 2.0 * d.mu > 0.0)
        {
            return bad(
                "density.mu",
                format!("need μ > 0 and 3λ + 2μ > 0, got λ={}, μ={}", d.lambda, d.mu),
            );
        }
        if let Some(r) = d.radius {
            if !(r > 0.0) {
                return bad("density.radius", format!("need radius > 0, got {r}"));
            }
        }
        let l = &self.locking;
        if l.kind != LockingKind::None {
            if let Err(e) = self.locking() {
                let key = if l.kind == LockingKind::Determinant {
                    "locking.eps"
                } else {
                    "locking.rho"
                };
                return bad(key, e.to_string());
            }
        }
        if self.envelope.grid < 2 {
            return bad("envelope.grid", "need at least 2 grid points".into());
        }
        if !matches!(self.envelope.dim, 2 | 3) {
            return bad("envelope.dim", "dimension must be 2 or 3".into());
        }
        if self.envelope.resolution == 0 {
            return bad("envelope.resolution", "need a positive resolution".into());
        }
        if self.envelope.directions == 0 {
            return bad("envelope.directions", "need at least one direction".into());
        }
        let e = &self.example51;
        if e.t.iter().any(|t| !(*t >= 1.0)) || !(e.figure_t >= 1.0) || !(self.boundary.t >= 1.0) {
            let key = if !(e.figure_t >= 1.0) {
                "figure1.t"
            } else if !(self.boundary.t >= 1.0) {
                "boundary.t"
            } else {
                "example51.t"
            };
            return bad(key, "need t ≥ 1".into());
        }
        if e.levels.iter().any(|l| !(*l > 0.0)) || e.levels.windows(2).any(|w| w[1] <= w[0]) {
            return bad("example51.levels", "levels must be positive and increasing".into());
        }
        if e.subdivisions.is_empty() || e.subdivisions.contains(&0) {
            return bad("example51.subdivisions", "need positive subdivisions".into());
        }
        if e.figure_subdivisions.len() != 3 || e.figure_subdivisions.contains(&0) {
            return bad("figure1.subdivisions", "need three positive entries".into());
        }
        if !(self.boundary.alpha >= 0.0) {
            return bad("boundary.alpha", "need alpha ≥ 0".into());
        }
        if self.solver.memory == 0 {
            return bad("solver.memory", "need a positive memory".into());
        }
        Ok(())
    }

    pub fn locking(&self) -> Result<LockingConstraint> {
        let l = &self.locking;
        match l.kind {
            LockingKind::None => Ok(LockingConstraint::none()),
            LockingKind::Ball => LockingConstraint::ball(l.rho),
            LockingKind::Determinant => LockingConstraint::determinant(l.eps),
            LockingKind::CiarletNecas => LockingConstraint::ciarlet_necas(l.rho),
            LockingKind::Prager => LockingConstraint::prager(l.rho),
        }
    }

    pub fn scalar_density(&self) -> Result<ScalarDensity> {
        let d = &self.density;
        let w = match d.kind {
            DensityKind::Quadratic => ScalarDensity::quadratic(),
            DensityKind::DoubleWell => ScalarDensity::double_well(),
            DensityKind::Stvk => ScalarDensity::stvk(ElasticTensor::isotropic(d.lambda, d.mu)?),
            DensityKind::StvkGradPoly => {
                return Err(Error::config(
                    0,
                    "density.kind",
                    "this subcommand needs a density of the deformation gradient only",
                ))
            }
        };
        match d.radius {
            Some(r) => w.with_radius(r),
            None => Ok(w),
        }
    }

    pub fn density(&self) -> Result<Density> {
        let d = &self.density;
        if d.kind == DensityKind::StvkGradPoly {
            let g = if d.det_coef > 0.0 {
                GradPolyDensity::stvk_with_det_gradient(d.lambda, d.mu, d.alpha, d.q, d.s, d.det_coef, d.r)?
            } else {
                GradPolyDensity::stvk(d.lambda, d.mu, d.alpha, d.q, d.s)?
            };
            return Ok(g.into());
        }
        Ok(self.scalar_density()?.into())
    }

    pub fn mesh(&self) -> Result<BoxMesh> {
        let m = &self.mesh;
        Ok(BoxMesh::new(&m.lower, &m.upper, &m.subdivisions)?.with_tags(self.boundary.dirichlet, self.boundary.device))
    }

    /// The matrix `F₀` of an affine boundary map, if the map is affine.
    pub fn boundary_matrix(&self) -> Result<Option<Matrix>> {
        Ok(match self.boundary.kind {
            BoundaryKind::Identity => Some(Matrix::identity(self.mesh.dim)),
            BoundaryKind::Affine => Some(self.boundary.matrix),
            BoundaryKind::Witness => Some(self.locking()?.witness(self.mesh.dim)),
            BoundaryKind::Example51 => None,
        })
    }

    pub fn boundary_map(&self) -> Result<BoundaryMap> {
        if self.boundary.kind == BoundaryKind::Example51 {
            if self.mesh.dim != 3 {
                return Err(Error::config(0, "boundary.map", "the example51 map needs mesh.dim = 3"));
            }
            let fields = Example51Fields::new(self.boundary.t)?;
            return Ok(BoundaryMap::new(move |x| fields.y_clamped(x).to_vec()));
        }
        let f = self.boundary_matrix()?.expect("affine boundary");
        Ok(BoundaryMap::affine(f, self.boundary.offset.clone()))
    }

    pub fn problem(&self) -> Result<BodyProblem> {
        BodyProblem::new(self.mesh()?, self.density()?)?
            .with_boundary(self.boundary_map()?)
            .with_locking(self.locking()?)
            .with_loads(self.body_force.clone(), self.traction.clone())?
            .with_alpha(self.boundary.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.mesh.subdivisions, vec![4, 4, 4]);
        assert_eq!(c.envelope.grid, 41);
    }

    #[test]
    fn diagnostics_carry_line_and_key() {
        let e = RunConfig::parse("[run]\nseed = 1\n[mesh]\ndim = x\n").unwrap_err();
        match e {
            Error::Config { line, key, .. } => {
                assert_eq!(line, 4);
                assert_eq!(key, "mesh.dim");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            RunConfig::parse("[run]\nbogus = 1\n"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("seed = 1\n"),
            Err(Error::Config { line: 1, .. })
        ));
    }

    #[test]
    fn hypotheses_are_enforced() {
        let base = "[density]\nkind = stvk-gradpoly\n";
        assert!(RunConfig::parse(base).is_ok());
        for bad in ["p = 1.5", "q = 1.2", "r = 1", "s = 0"] {
            let text = format!("{base}{bad}\n");
            assert!(
                matches!(RunConfig::parse(&text), Err(Error::Config { line: 3, .. })),
                "{bad}"
            );
        }
    }
}
