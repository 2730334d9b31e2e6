//! CSV and legacy-VTK writers.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::BoxMesh;

pub const VTK_MAGIC: &str = "# vtk DataFile Version 3.0";

/// Full-precision formatting used in every numeric output column.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a header and rows to `path` with the `csv` crate.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub struct VtkData<'a> {
    pub title: String,
    /// Point coordinates, padded to three components.
    pub points: &'a [[f64; 3]],
    pub scalars: Vec<(&'a str, Vec<f64>)>,
    pub vectors: Vec<(&'a str, Vec<[f64; 3]>)>,
}

/// ASCII unstructured grid with the mesh connectivity and the given point positions.
pub fn write_vtk<W: Write>(mut out: W, mesh: &BoxMesh, data: &VtkData) -> Result<()> {
    let n = data.points.len();
    if n != mesh.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_nodes(),
            got: n,
        });
    }
    writeln!(out, "{VTK_MAGIC}")?;
    writeln!(out, "{}", data.title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n} double")?;
    for p in data.points {
        writeln!(out, "{} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]))?;
    }
    let m = mesh.n_elements();
    let k = mesh.dim() + 1;
    writeln!(out, "CELLS {m} {}", m * (k + 1))?;
    for e in 0..m {
        let ids: Vec<String> = mesh.element(e).iter().map(|a| a.to_string()).collect();
        writeln!(out, "{k} {}", ids.join(" "))?;
    }
    writeln!(out, "CELL_TYPES {m}")?;
    let cell_type = if mesh.dim() == 3 { 10 } else { 5 };
    for _ in 0..m {
        writeln!(out, "{cell_type}")?;
    }
    if !data.scalars.is_empty() || !data.vectors.is_empty() {
        writeln!(out, "POINT_DATA {n}")?;
        for (name, v) in &data.scalars {
            writeln!(out, "SCALARS {name} double 1")?;
            writeln!(out, "LOOKUP_TABLE default")?;
            for x in v {
                writeln!(out, "{}", fmt_f64(*x))?;
            }
        }
        for (name, v) in &data.vectors {
            writeln!(out, "VECTORS {name} double")?;
            for p in v {
                writeln!(out, "{} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes a deformation of `mesh` given as node-major values of dimension `mesh.dim()`.
pub fn write_deformation_vtk(path: &Path, mesh: &BoxMesh, values: &[f64], title: &str) -> Result<()> {
    let d = mesh.dim();
    let pad = |c: &[f64]| [c[0], c[1], if d == 3 { c[2] } else { 0.0 }];
    let points: Vec<[f64; 3]> = values.chunks(d).map(pad).collect();
    let reference: Vec<[f64; 3]> = (0..mesh.n_nodes()).map(|a| pad(mesh.node(a))).collect();
    let data = VtkData {
        title: title.to_string(),
        points: &points,
        scalars: vec![],
        vectors: vec![("reference", reference)],
    };
    write_vtk(std::io::BufWriter::new(std::fs::File::create(path)?), mesh, &data)
}

/// Header fields and section sizes of a legacy-VTK file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VtkSummary {
    pub version: String,
    pub dataset: String,
    pub points: usize,
    pub cells: usize,
    pub cell_types: usize,
    /// Coordinate lines actually present after `POINTS`.
    pub point_lines: usize,
    pub cell_lines: usize,
}

impl VtkSummary {
    /// Magic line, dataset type, and declared counts agree with the body.
    pub fn consistent(&self) -> bool {
        self.version == VTK_MAGIC
            && self.dataset == "DATASET UNSTRUCTURED_GRID"
            && self.points == self.point_lines
            && self.cells == self.cell_lines
            && self.cells == self.cell_types
    }
}

fn count_after(lines: &[String], start: usize, n: usize) -> usize {
    lines[start + 1..]
        .iter()
        .take(n)
        .take_while(|l| l.split_whitespace().all(|t| t.parse::<f64>().is_ok()) && !l.trim().is_empty())
        .count()
}

pub fn read_vtk_summary(path: &Path) -> Result<VtkSummary> {
    let file = std::fs::File::open(path)?;
    let lines: Vec<String> = std::io::BufReader::new(file).lines().collect::<std::io::Result<_>>()?;
    let bad = |msg: &str| Error::DomainError(format!("{}: {msg}", path.display()));
    if lines.len() < 4 {
        return Err(bad("truncated header"));
    }
    let find = |prefix: &str| lines.iter().position(|l| l.starts_with(prefix));
    let count = |idx: usize| -> Result<usize> {
        lines[idx]
            .split_whitespace()
            .nth(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("malformed section header"))
    };
    let pi = find("POINTS ").ok_or_else(|| bad("missing POINTS"))?;
    let ci = find("CELLS ").ok_or_else(|| bad("missing CELLS"))?;
    let ti = find("CELL_TYPES ").ok_or_else(|| bad("missing CELL_TYPES"))?;
    let (points, cells, cell_types) = (count(pi)?, count(ci)?, count(ti)?);
    Ok(VtkSummary {
        version: lines[0].clone(),
        dataset: lines[3].clone(),
        points,
        cells,
        cell_types,
        point_lines: count_after(&lines, pi, points),
        cell_lines: count_after(&lines, ci, cells),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::DiscreteDeformation;

    #[test]
    fn vtk_round_trip_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vtk");
        let mesh = BoxMesh::unit(2, 3).unwrap();
        let y = DiscreteDeformation::identity(&mesh);
        write_deformation_vtk(&path, &mesh, y.values(), "id").unwrap();
        let s = read_vtk_summary(&path).unwrap();
        assert!(s.consistent());
        assert_eq!(s.points, 16);
        assert_eq!(s.cells, 18);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
