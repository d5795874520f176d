use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::eikonal::{facet_cost, max_pairwise_angle, BoundaryPenalty, Speed};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::cost::CostModel;
use crate::model::MsspProblem;
use crate::Real;

/// Simplicial mesh: vertex coordinates, simplices as vertex tuples and the
/// set of boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec<T> {
    pub vertices: Vec<Vec<T>>,
    pub simplices: Vec<Vec<usize>>,
    pub boundary: Vec<usize>,
}

impl<T: Real> MeshSpec<T> {
    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, Vec::len)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for &b in &self.boundary {
            if b < mask.len() {
                mask[b] = true;
            }
        }
        mask
    }

    fn edge(&self, a: usize, b: usize) -> Vec<T> {
        self.vertices[b]
            .iter()
            .zip(&self.vertices[a])
            .map(|(&y, &x)| y - x)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::InvalidSpec("mesh has no vertices".into()));
        }
        if let Some(v) = self.vertices.iter().position(|v| v.len() != n) {
            return Err(Error::InvalidSpec(format!(
                "vertex {v} has wrong dimension"
            )));
        }
        if self.boundary.is_empty() {
            return Err(Error::InvalidSpec("mesh has no boundary vertices".into()));
        }
        if let Some(&b) = self.boundary.iter().find(|&&b| b >= self.vertices.len()) {
            return Err(Error::InvalidSpec(format!(
                "boundary vertex {b} out of range"
            )));
        }
        for (index, s) in self.simplices.iter().enumerate() {
            let fail = |reason: &str| Error::DegenerateSimplex {
                index,
                reason: reason.to_string(),
            };
            if s.len() != n + 1 {
                return Err(fail(&format!(
                    "expected {} vertices, got {}",
                    n + 1,
                    s.len()
                )));
            }
            if s.iter().any(|&v| v >= self.vertices.len()) {
                return Err(fail("vertex index out of range"));
            }
            let edges: Vec<Vec<T>> = s[1..].iter().map(|&v| self.edge(s[0], v)).collect();
            let g = linalg::gram(&edges);
            let scale = edges
                .iter()
                .map(|e| linalg::dot(e, e))
                .fold(T::zero(), T::max);
            let det = linalg::determinant(&g);
            if !(det > T::lit(1e-12) * scale.powi(n as i32)) {
                return Err(fail("zero volume"));
            }
        }
        let mask = self.is_boundary_mask();
        let fans = self.fans();
        if let Some(v) = (0..self.vertices.len()).find(|&v| !mask[v] && fans[v].is_empty()) {
            return Err(Error::InvalidSpec(format!(
                "interior vertex {v} belongs to no simplex"
            )));
        }
        Ok(())
    }

    /// Simplices incident to each vertex.
    pub fn fans(&self) -> Vec<Vec<usize>> {
        let mut fans = vec![Vec::new(); self.vertices.len()];
        for (k, s) in self.simplices.iter().enumerate() {
            for &v in s {
                if v < fans.len() {
                    fans[v].push(k);
                }
            }
        }
        fans
    }

    /// Smallest edge length over all simplices.
    pub fn min_edge_length(&self) -> T {
        let mut h = T::infinity();
        for s in &self.simplices {
            for (i, &a) in s.iter().enumerate() {
                for &b in &s[i + 1..] {
                    h = h.min(linalg::norm(&self.edge(a, b)));
                }
            }
        }
        h
    }

    /// Largest angle between two edges leaving an interior vertex within one
    /// of its simplices.
    pub fn max_stencil_angle(&self) -> T {
        let mask = self.is_boundary_mask();
        let mut beta = T::zero();
        for (v, fan) in self.fans().iter().enumerate() {
            if mask[v] {
                continue;
            }
            for &k in fan {
                let offsets: Vec<Vec<T>> = self.simplices[k]
                    .iter()
                    .filter(|&&z| z != v)
                    .map(|&z| self.edge(v, z))
                    .collect();
                beta = beta.max(max_pairwise_angle(&offsets));
            }
        }
        beta
    }

    pub fn nearest_vertex(&self, x: &[T]) -> usize {
        let d = |v: &Vec<T>| v.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>();
        (0..self.vertices.len())
            .min_by(|&a, &b| {
                d(&self.vertices[a])
                    .partial_cmp(&d(&self.vertices[b]))
                    .unwrap()
            })
            .unwrap_or(0)
    }

    /// Serializes in the text format `parse_mesh` reads, with the given
    /// boundary penalties (one per boundary vertex).
    pub fn to_text(&self, q: &[T]) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "vertices {} simplices {} boundary {}",
            self.vertices.len(),
            self.simplices.len(),
            self.boundary.len()
        );
        let join = |v: &[String]| v.join(" ");
        for v in &self.vertices {
            let _ = writeln!(
                s,
                "{}",
                join(&v.iter().map(|x| x.to_string()).collect::<Vec<_>>())
            );
        }
        for t in &self.simplices {
            let _ = writeln!(
                s,
                "{}",
                join(&t.iter().map(|x| x.to_string()).collect::<Vec<_>>())
            );
        }
        for (k, &b) in self.boundary.iter().enumerate() {
            let qb = q.get(k).copied().unwrap_or_else(T::zero);
            let _ = writeln!(s, "{b} {qb}");
        }
        s
    }
}

/// Reads the plain-text mesh format: a header
/// `vertices V simplices S boundary B`, then `V` coordinate lines, `S`
/// vertex-index lines and `B` lines `index q`. Blank lines and `#` comments
/// are ignored.
///
/// Returns the mesh and a per-vertex penalty vector (zero off the boundary).
pub fn parse_mesh<T: Real + std::str::FromStr>(text: &str) -> Result<(MeshSpec<T>, Vec<T>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: String| Error::Parse { line, message };
    let (hl, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty mesh file".into()))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 6 || tok[0] != "vertices" || tok[2] != "simplices" || tok[4] != "boundary" {
        return Err(err(
            hl,
            "expected 'vertices V simplices S boundary B'".into(),
        ));
    }
    let count =
        |s: &str| -> Result<usize> { s.parse().map_err(|_| err(hl, format!("bad count '{s}'"))) };
    let (nv, ns, nb) = (count(tok[1])?, count(tok[3])?, count(tok[5])?);
    let mut next = |what: &str| -> Result<(usize, Vec<&str>)> {
        lines
            .next()
            .map(|(i, l)| (i, l.split_whitespace().collect()))
            .ok_or_else(|| err(0, format!("unexpected end of file while reading {what}")))
    };
    let num = |line: usize, s: &str| -> Result<T> {
        s.parse::<T>()
            .map_err(|_| err(line, format!("bad number '{s}'")))
    };
    let idx = |line: usize, s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| err(line, format!("bad index '{s}'")))
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (i, t) = next("vertices")?;
        vertices.push(t.iter().map(|s| num(i, s)).collect::<Result<Vec<T>>>()?);
    }
    let mut simplices = Vec::with_capacity(ns);
    for _ in 0..ns {
        let (i, t) = next("simplices")?;
        simplices.push(
            t.iter()
                .map(|s| idx(i, s))
                .collect::<Result<Vec<usize>>>()?,
        );
    }
    let mut boundary = Vec::with_capacity(nb);
    let mut q = vec![T::zero(); nv];
    for _ in 0..nb {
        let (i, t) = next("boundary")?;
        if t.len() != 2 {
            return Err(err(i, "expected 'index q'".into()));
        }
        let b = idx(i, t[0])?;
        if b >= nv {
            return Err(err(i, format!("boundary vertex {b} out of range")));
        }
        boundary.push(b);
        q[b] = num(i, t[1])?;
    }
    if let Some((i, _)) = lines.next() {
        return Err(err(i, "trailing content".into()));
    }
    let mesh = MeshSpec {
        vertices,
        simplices,
        boundary,
    };
    mesh.validate()?;
    Ok((mesh, q))
}

/// One mode per simplex incident to an interior vertex, over the other
/// vertices of that simplex; boundary vertices exit at cost `q`.
pub fn build_mesh_mssp<T: Real>(
    mesh: &MeshSpec<T>,
    speed: Arc<dyn Speed<T>>,
    q: &BoundaryPenalty<T>,
) -> Result<MsspProblem<T>> {
    mesh.validate()?;
    let m = mesh.vertex_count();
    let mask = mesh.is_boundary_mask();
    let fans = mesh.fans();
    let modes: Vec<Vec<(Vec<usize>, CostModel<T>)>> = (0..m)
        .into_par_iter()
        .map(|v| -> Result<_> {
            let x = &mesh.vertices[v];
            if mask[v] {
                return Ok(vec![(vec![m], CostModel::constant(q.eval(v, x)?))]);
            }
            fans[v]
                .iter()
                .map(|&k| {
                    let succ: Vec<usize> = mesh.simplices[k]
                        .iter()
                        .copied()
                        .filter(|&z| z != v)
                        .collect();
                    let offsets = succ.iter().map(|&z| mesh.edge(v, z)).collect();
                    Ok((succ, facet_cost(offsets, x, &speed)?))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let kappa = modes
        .iter()
        .map(|ms| ms.iter().map(|(s, _)| s.len()).sum::<usize>())
        .max()
        .unwrap_or(1);
    let mut p = MsspProblem::new(m).with_kappa(kappa);
    for (v, ms) in modes.into_iter().enumerate() {
        for (succ, cost) in ms {
            p.add_mode(v, succ, cost);
        }
    }
    p.set_coordinates(mesh.vertices.clone());
    Ok(p)
}

/// Equilateral triangulation of the regular hexagon of radius `k·h`
/// centered at the origin; the outer ring of vertices is the boundary.
pub fn equilateral_hexagon<T: Real>(k: usize, h: T) -> MeshSpec<T> {
    let k = k as i64;
    let half = T::lit(0.5);
    let s3 = T::lit(3.0f64.sqrt() / 2.0);
    let mut index = std::collections::HashMap::new();
    let mut vertices = Vec::new();
    let mut boundary = Vec::new();
    for b in -k..=k {
        for a in -k..=k {
            let r = a.abs().max(b.abs()).max((a + b).abs());
            if r > k {
                continue;
            }
            let id = vertices.len();
            index.insert((a, b), id);
            let (fa, fb) = (T::lit(a as f64), T::lit(b as f64));
            vertices.push(vec![(fa + fb * half) * h, fb * s3 * h]);
            if r == k {
                boundary.push(id);
            }
        }
    }
    let mut simplices = Vec::new();
    for (&(a, b), &v) in &index {
        // the two triangles whose lowest-left corner is (a, b)
        if let (Some(&r), Some(&u)) = (index.get(&(a + 1, b)), index.get(&(a, b + 1))) {
            simplices.push(vec![v, r, u]);
        }
        if let (Some(&r), Some(&d)) = (index.get(&(a + 1, b)), index.get(&(a + 1, b - 1))) {
            simplices.push(vec![v, d, r]);
        }
    }
    simplices.sort();
    MeshSpec {
        vertices,
        simplices,
        boundary,
    }
}
