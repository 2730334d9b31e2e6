//! Structured simplicial meshes of boxes.

use std::fmt;

use crate::error::{Error, Result};

/// Set of box faces, encoded as a bitmask over `2·axis + side` (side 0 low, 1 high).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FaceSet(u8);

const FACE_NAMES: [&str; 6] = ["x-", "x+", "y-", "y+", "z-", "z+"];

impl FaceSet {
    pub fn none() -> Self {
        FaceSet(0)
    }

    pub fn all(dim: usize) -> Self {
        FaceSet(((1u16 << (2 * dim)) - 1) as u8)
    }

    pub fn face(axis: usize, high: bool) -> Self {
        FaceSet(1 << (2 * axis + high as usize))
    }

    pub fn from_indices(faces: &[usize]) -> Self {
        FaceSet(faces.iter().fold(0u8, |m, f| m | (1 << f)))
    }

    pub fn contains(&self, face: usize) -> bool {
        self.0 & (1 << face) != 0
    }

    pub fn union(self, other: Self) -> Self {
        FaceSet(self.0 | other.0)
    }

    pub fn complement(self, dim: usize) -> Self {
        FaceSet(!self.0 & Self::all(dim).0)
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Parses a comma-separated list such as `x-,x+`; also accepts `all` and `none`.
    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let s = s.trim();
        match s {
            "all" => return Ok(Self::all(dim)),
            "none" | "" => return Ok(Self::none()),
            _ => {}
        }
        let mut set = FaceSet::none();
        for tok in s.split(',') {
            let tok = tok.trim();
            let idx = FACE_NAMES[..2 * dim]
                .iter()
                .position(|n| *n == tok)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown face `{tok}` in dimension {dim}")))?;
            set = set.union(FaceSet(1 << idx));
        }
        Ok(set)
    }
}

impl fmt::Debug for FaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = (0..6).filter(|&i| self.contains(i)).map(|i| FACE_NAMES[i]).collect();
        write!(f, "FaceSet[{}]", names.join(","))
    }
}

/// Boundary facet: a segment (2D) or triangle (3D) on one box face.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub nodes: [usize; 3],
    pub measure: f64,
    pub face: usize,
}

/// Box `∏[lo_k, hi_k]` split into squares (two triangles each) or cubes (six Kuhn tetrahedra each).
#[derive(Clone, Debug)]
pub struct BoxMesh {
    dim: usize,
    lower: [f64; 3],
    upper: [f64; 3],
    subdivisions: [usize; 3],
    nodes: Vec<[f64; 3]>,
    elements: Vec<[usize; 4]>,
    volumes: Vec<f64>,
    basis_grads: Vec<[[f64; 3]; 4]>,
    facets: Vec<Facet>,
    node_volume: Vec<f64>,
    node_offsets: Vec<usize>,
    node_elems: Vec<usize>,
    dirichlet: FaceSet,
    device: FaceSet,
}

const KUHN_PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl BoxMesh {
    /// Unit box `(0,1)ⁿ` with `n` subdivisions per axis.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        Self::new(&vec![0.0; dim], &vec![1.0; dim], &vec![n; dim])
    }

    pub fn new(lower: &[f64], upper: &[f64], subdivisions: &[usize]) -> Result<Self> {
        let dim = lower.len();
        if !(dim == 2 || dim == 3) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if upper.len() != dim || subdivisions.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: upper.len().min(subdivisions.len()),
            });
        }
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        let mut sd = [0usize; 3];
        for k in 0..dim {
            if !(lower[k].is_finite() && upper[k].is_finite() && upper[k] > lower[k]) {
                return Err(Error::InvalidParameter(format!(
                    "empty or non-finite extent on axis {k}"
                )));
            }
            if subdivisions[k] == 0 {
                return Err(Error::InvalidParameter("subdivisions must be positive".into()));
            }
            lo[k] = lower[k];
            hi[k] = upper[k];
            sd[k] = subdivisions[k];
        }
        let np = [sd[0] + 1, sd[1] + 1, if dim == 3 { sd[2] + 1 } else { 1 }];
        let mut nodes = Vec::with_capacity(np[0] * np[1] * np[2]);
        for k in 0..np[2] {
            for j in 0..np[1] {
                for i in 0..np[0] {
                    let ijk = [i, j, k];
                    let mut x = [0.0; 3];
                    for a in 0..dim {
                        // exact endpoints
                        x[a] = if ijk[a] == sd[a] {
                            hi[a]
                        } else {
                            lo[a] + (hi[a] - lo[a]) * ijk[a] as f64 / sd[a] as f64
                        };
                    }
                    nodes.push(x);
                }
            }
        }
        let id = |i: usize, j: usize, k: usize| i + np[0] * (j + np[1] * k);
        let mut elements = Vec::new();
        if dim == 2 {
            for j in 0..sd[1] {
                for i in 0..sd[0] {
                    let (v00, v10, v11, v01) = (id(i, j, 0), id(i + 1, j, 0), id(i + 1, j + 1, 0), id(i, j + 1, 0));
                    elements.push([v00, v10, v11, usize::MAX]);
                    elements.push([v00, v11, v01, usize::MAX]);
                }
            }
        } else {
            for k in 0..sd[2] {
                for j in 0..sd[1] {
                    for i in 0..sd[0] {
                        for perm in KUHN_PERMS {
                            let mut c = [i, j, k];
                            let mut tet = [id(c[0], c[1], c[2]), 0, 0, 0];
                            for (s, &ax) in perm.iter().enumerate() {
                                c[ax] += 1;
                                tet[s + 1] = id(c[0], c[1], c[2]);
                            }
                            elements.push(tet);
                        }
                    }
                }
            }
        }
        let mut mesh = BoxMesh {
            dim,
            lower: lo,
            upper: hi,
            subdivisions: sd,
            nodes,
            elements,
            volumes: Vec::new(),
            basis_grads: Vec::new(),
            facets: Vec::new(),
            node_volume: Vec::new(),
            node_offsets: Vec::new(),
            node_elems: Vec::new(),
            dirichlet: FaceSet::none(),
            device: FaceSet::none(),
        };
        mesh.build_geometry();
        mesh.build_facets();
        Ok(mesh)
    }

    fn build_geometry(&mut self) {
        let d = self.dim;
        let mut volumes = Vec::with_capacity(self.elements.len());
        let mut grads = Vec::with_capacity(self.elements.len());
        for el in self.elements.iter_mut() {
            let x0 = self.nodes[el[0]];
            let mut vol = if d == 2 {
                let (a, b) = (sub(self.nodes[el[1]], x0), sub(self.nodes[el[2]], x0));
                0.5 * (a[0] * b[1] - a[1] * b[0])
            } else {
                det3(
                    sub(self.nodes[el[1]], x0),
                    sub(self.nodes[el[2]], x0),
                    sub(self.nodes[el[3]], x0),
                ) / 6.0
            };
            if vol < 0.0 {
                el.swap(1, 2);
                vol = -vol;
            }
            assert!(vol > 0.0, "degenerate element");
            volumes.push(vol);
            // rows of the inverse edge matrix are the barycentric gradients
            let x0 = self.nodes[el[0]];
            let mut g = [[0.0; 3]; 4];
            if d == 2 {
                let (a, b) = (sub(self.nodes[el[1]], x0), sub(self.nodes[el[2]], x0));
                let det = a[0] * b[1] - a[1] * b[0];
                g[1] = [b[1] / det, -b[0] / det, 0.0];
                g[2] = [-a[1] / det, a[0] / det, 0.0];
            } else {
                let e = [
                    sub(self.nodes[el[1]], x0),
                    sub(self.nodes[el[2]], x0),
                    sub(self.nodes[el[3]], x0),
                ];
                let det = det3(e[0], e[1], e[2]);
                let cross = |u: [f64; 3], v: [f64; 3]| {
                    [
                        u[1] * v[2] - u[2] * v[1],
                        u[2] * v[0] - u[0] * v[2],
                        u[0] * v[1] - u[1] * v[0],
                    ]
                };
                let c1 = cross(e[1], e[2]);
                let c2 = cross(e[2], e[0]);
                let c3 = cross(e[0], e[1]);
                g[1] = c1.map(|v| v / det);
                g[2] = c2.map(|v| v / det);
                g[3] = c3.map(|v| v / det);
            }
            for k in 0..3 {
                g[0][k] = -(1..=d).map(|a| g[a][k]).sum::<f64>();
            }
            grads.push(g);
        }
        let nn = self.nodes.len();
        let mut node_volume = vec![0.0; nn];
        let mut counts = vec![0usize; nn + 1];
        for (e, el) in self.elements.iter().enumerate() {
            for &a in &el[..=d] {
                node_volume[a] += volumes[e];
                counts[a + 1] += 1;
            }
        }
        for a in 0..nn {
            counts[a + 1] += counts[a];
        }
        let mut fill = counts.clone();
        let mut node_elems = vec![0usize; counts[nn]];
        for (e, el) in self.elements.iter().enumerate() {
            for &a in &el[..=d] {
                node_elems[fill[a]] = e;
                fill[a] += 1;
            }
        }
        self.volumes = volumes;
        self.basis_grads = grads;
        self.node_volume = node_volume;
        self.node_offsets = counts;
        self.node_elems = node_elems;
    }

    fn build_facets(&mut self) {
        let d = self.dim;
        let mut facets = Vec::new();
        for el in &self.elements {
            for omit in 0..=d {
                let fnodes: Vec<usize> = (0..=d).filter(|&i| i != omit).map(|i| el[i]).collect();
                for face in 0..2 * d {
                    let axis = face / 2;
                    let val = if face % 2 == 0 {
                        self.lower[axis]
                    } else {
                        self.upper[axis]
                    };
                    if fnodes.iter().all(|&n| self.nodes[n][axis] == val) {
                        let p: Vec<[f64; 3]> = fnodes.iter().map(|&n| self.nodes[n]).collect();
                        let measure = if d == 2 {
                            let v = sub(p[1], p[0]);
                            (v[0] * v[0] + v[1] * v[1]).sqrt()
                        } else {
                            let (a, b) = (sub(p[1], p[0]), sub(p[2], p[0]));
                            let c = [
                                a[1] * b[2] - a[2] * b[1],
                                a[2] * b[0] - a[0] * b[2],
                                a[0] * b[1] - a[1] * b[0],
                            ];
                            0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
                        };
                        let mut nodes = [usize::MAX; 3];
                        nodes[..d].copy_from_slice(&fnodes);
                        facets.push(Facet { nodes, measure, face });
                    }
                }
            }
        }
        self.facets = facets;
    }

    /// Tags the Dirichlet part Γ₀ and the elastic-device part Γ.
    pub fn with_tags(mut self, dirichlet: FaceSet, device: FaceSet) -> Self {
        self.dirichlet = dirichlet;
        self.device = device;
        self
    }

    pub fn dirichlet_faces(&self) -> FaceSet {
        self.dirichlet
    }

    pub fn device_faces(&self) -> FaceSet {
        self.device
    }

    /// Γ₁ = ∂Ω \ Γ₀.
    pub fn free_faces(&self) -> FaceSet {
        self.dirichlet.complement(self.dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..self.dim]
    }

    pub fn subdivisions(&self) -> &[usize] {
        &self.subdivisions[..self.dim]
    }

    /// Largest cell edge length.
    pub fn h(&self) -> f64 {
        (0..self.dim)
            .map(|k| (self.upper[k] - self.lower[k]) / self.subdivisions[k] as f64)
            .fold(0.0, f64::max)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn node(&self, a: usize) -> &[f64] {
        &self.nodes[a][..self.dim]
    }

    pub fn node3(&self, a: usize) -> [f64; 3] {
        self.nodes[a]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..=self.dim]
    }

    pub fn volume(&self, e: usize) -> f64 {
        self.volumes[e]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Gradients of the barycentric coordinates, in the local node order.
    pub fn basis_gradients(&self, e: usize) -> &[[f64; 3]] {
        &self.basis_grads[e][..=self.dim]
    }

    pub fn centroid(&self, e: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &a in self.element(e) {
            for k in 0..3 {
                c[k] += self.nodes[a][k];
            }
        }
        c.map(|v| v / (self.dim + 1) as f64)
    }

    /// Elements containing node `a`.
    pub fn node_elements(&self, a: usize) -> &[usize] {
        &self.node_elems[self.node_offsets[a]..self.node_offsets[a + 1]]
    }

    /// Total volume of the elements containing node `a`.
    pub fn node_volume(&self, a: usize) -> f64 {
        self.node_volume[a]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet_nodes<'a>(&self, f: &'a Facet) -> &'a [usize] {
        &f.nodes[..self.dim]
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|k| self.upper[k] - self.lower[k]).product()
    }

    pub fn face_measure(&self, set: FaceSet) -> f64 {
        self.facets
            .iter()
            .filter(|f| set.contains(f.face))
            .map(|f| f.measure)
            .sum()
    }

    /// True when the node lies on a face of `set`.
    pub fn on_faces(&self, a: usize, set: FaceSet) -> bool {
        let x = self.nodes[a];
        (0..2 * self.dim).any(|face| {
            let axis = face / 2;
            let val = if face % 2 == 0 {
                self.lower[axis]
            } else {
                self.upper[axis]
            };
            set.contains(face) && x[axis] == val
        })
    }

    pub fn on_boundary(&self, a: usize) -> bool {
        self.on_faces(a, FaceSet::all(self.dim))
    }

    /// Element containing `x` and its barycentric coordinates.
    pub fn locate(&self, x: &[f64]) -> Option<(usize, [f64; 4])> {
        let d = self.dim;
        let mut cell = [0usize; 3];
        for k in 0..d {
            let t = (x[k] - self.lower[k]) / (self.upper[k] - self.lower[k]);
            if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                return None;
            }
            cell[k] = ((t * self.subdivisions[k] as f64).floor() as usize).min(self.subdivisions[k] - 1);
        }
        let c = cell[0] + self.subdivisions[0] * (cell[1] + self.subdivisions[1] * cell[2]);
        let per = if d == 2 { 2 } else { 6 };
        let mut best = (c * per, [0.0; 4], f64::NEG_INFINITY);
        for e in c * per..(c + 1) * per {
            let lam = self.barycentric(e, x);
            let m = lam[..=d].iter().cloned().fold(f64::INFINITY, f64::min);
            if m > best.2 {
                best = (e, lam, m);
            }
        }
        Some((best.0, best.1))
    }

    pub fn barycentric(&self, e: usize, x: &[f64]) -> [f64; 4] {
        let el = self.element(e);
        let x0 = self.nodes[el[0]];
        let g = &self.basis_grads[e];
        let mut lam = [0.0; 4];
        let mut rest = 1.0;
        for a in 1..=self.dim {
            lam[a] = (0..self.dim).map(|k| g[a][k] * (x[k] - x0[k])).sum();
            rest -= lam[a];
        }
        lam[0] = rest;
        lam
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_volumes() {
        let m = BoxMesh::unit(2, 4).unwrap();
        assert_eq!(m.n_nodes(), 25);
        assert_eq!(m.n_elements(), 32);
        assert!((m.volumes().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let m3 = BoxMesh::new(&[0.0, 0.0, 0.0], &[2.0, 1.0, 1.0], &[2, 3, 4]).unwrap();
        assert_eq!(m3.n_nodes(), 3 * 4 * 5);
        assert_eq!(m3.n_elements(), 6 * 24);
        assert!(m3.volumes().iter().all(|&v| v > 0.0));
        assert!((m3.volumes().iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn facets_tile_the_boundary() {
        let m = BoxMesh::new(&[0.0, 0.0, 0.0], &[2.0, 1.0, 1.0], &[2, 3, 4]).unwrap();
        assert!((m.face_measure(FaceSet::all(3)) - 10.0).abs() < 1e-13);
        assert!((m.face_measure(FaceSet::face(0, false)) - 1.0).abs() < 1e-14);
        let m2 = BoxMesh::unit(2, 5).unwrap();
        assert!((m2.face_measure(FaceSet::all(2)) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn basis_gradients_sum_to_zero_and_reproduce_linears() {
        let m = BoxMesh::unit(3, 2).unwrap();
        for e in 0..m.n_elements() {
            let g = m.basis_gradients(e);
            // Σ_a x_a ⊗ ∇λ_a = Id
            for i in 0..3 {
                for j in 0..3 {
                    let v: f64 = m.element(e).iter().zip(g).map(|(&a, ga)| m.node(a)[i] * ga[j]).sum();
                    assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn locate_points() {
        let m = BoxMesh::unit(3, 3).unwrap();
        let x = [0.41, 0.77, 0.12];
        let (e, lam) = m.locate(&x).unwrap();
        assert!(lam.iter().all(|&l| l >= -1e-12));
        let mut y = [0.0; 3];
        for (k, &a) in m.element(e).iter().enumerate() {
            for i in 0..3 {
                y[i] += lam[k] * m.node(a)[i];
            }
        }
        for i in 0..3 {
            assert!((y[i] - x[i]).abs() < 1e-12);
        }
        assert!(m.locate(&[1.5, 0.0, 0.0]).is_none());
    }

    #[test]
    fn face_set_parsing() {
        let s = FaceSet::parse("x-, x+", 3).unwrap();
        assert!(s.contains(0) && s.contains(1) && !s.contains(2));
        assert_eq!(s.complement(3), FaceSet::parse("y-,y+,z-,z+", 3).unwrap());
        assert!(FaceSet::parse("z-", 2).is_err());
    }
}
