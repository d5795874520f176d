use std::sync::Arc;

use rayon::prelude::*;

use crate::eikonal::{facet_cost, max_pairwise_angle, BoundaryPenalty, Speed};
use crate::error::{Error, Result};
use crate::model::cost::CostModel;
use crate::model::{Mode, MsspProblem};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Axis neighbors; one mode per quadrant (octant in 3-D).
    Four,
    /// Axis and diagonal neighbors in 2-D; one mode per triangle
    /// `(axis, diagonal)`.
    Eight,
}

impl Stencil {
    pub fn name(self) -> &'static str {
        match self {
            Stencil::Four => "four",
            Stencil::Eight => "eight",
        }
    }

    /// Integer neighbor offsets of every mode, in mode order.
    pub fn mode_offsets(self, dim: usize) -> Vec<Vec<Vec<i64>>> {
        match (self, dim) {
            (Stencil::Four, 2) => [(1, 1), (-1, 1), (-1, -1), (1, -1)]
                .iter()
                .map(|&(sx, sy)| vec![vec![sx, 0], vec![0, sy]])
                .collect(),
            (Stencil::Four, 3) => {
                let mut out = Vec::new();
                for sz in [1, -1] {
                    for (sx, sy) in [(1, 1), (-1, 1), (-1, -1), (1, -1)] {
                        out.push(vec![vec![sx, 0, 0], vec![0, sy, 0], vec![0, 0, sz]]);
                    }
                }
                out
            }
            (Stencil::Eight, 2) => {
                // neighbors counterclockwise from east
                let ring: [[i64; 2]; 8] = [
                    [1, 0],
                    [1, 1],
                    [0, 1],
                    [-1, 1],
                    [-1, 0],
                    [-1, -1],
                    [0, -1],
                    [1, -1],
                ];
                [
                    (0, 1),
                    (2, 1),
                    (2, 3),
                    (4, 3),
                    (4, 5),
                    (6, 5),
                    (6, 7),
                    (0, 7),
                ]
                .iter()
                .map(|&(a, d)| vec![ring[a].to_vec(), ring[d].to_vec()])
                .collect()
            }
            _ => panic!("unsupported stencil/dimension"),
        }
    }

    /// Largest angle between displacement vectors within one mode.
    pub fn max_angle<T: Real>(self, dim: usize) -> T {
        self.mode_offsets(dim)
            .iter()
            .map(|m| {
                let v: Vec<Vec<T>> = m
                    .iter()
                    .map(|o| o.iter().map(|&k| T::lit(k as f64)).collect())
                    .collect();
                max_pairwise_angle(&v)
            })
            .fold(T::zero(), T::max)
    }
}

/// Uniform Cartesian grid on a box; by default the outer layer of nodes is
/// the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub dim: usize,
    pub nodes_per_side: usize,
    pub spacing: T,
    pub origin: Vec<T>,
    pub stencil: Stencil,
    /// Replaces the default perimeter boundary when set.
    pub boundary_mask: Option<Vec<bool>>,
    /// Additional boundary nodes, e.g. a point source.
    pub extra_boundary: Vec<usize>,
}

impl<T: Real> GridSpec<T> {
    pub fn square(nodes_per_side: usize, spacing: T, stencil: Stencil) -> Self {
        GridSpec {
            dim: 2,
            nodes_per_side,
            spacing,
            origin: vec![T::zero(); 2],
            stencil,
            boundary_mask: None,
            extra_boundary: Vec::new(),
        }
    }

    /// `[0,1]²` with `nodes_per_side` nodes per side.
    pub fn unit_square(nodes_per_side: usize, stencil: Stencil) -> Self {
        Self::square(
            nodes_per_side,
            T::one() / T::from_usize_lossy(nodes_per_side - 1),
            stencil,
        )
    }

    pub fn cube(nodes_per_side: usize, spacing: T) -> Self {
        GridSpec {
            dim: 3,
            origin: vec![T::zero(); 3],
            ..Self::square(nodes_per_side, spacing, Stencil::Four)
        }
    }

    pub fn with_origin(mut self, origin: Vec<T>) -> Self {
        self.origin = origin;
        self
    }

    pub fn with_boundary_mask(mut self, mask: Vec<bool>) -> Self {
        self.boundary_mask = Some(mask);
        self
    }

    pub fn with_extra_boundary(mut self, nodes: Vec<usize>) -> Self {
        self.extra_boundary = nodes;
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_side.pow(self.dim as u32)
    }

    /// Multi-index of a node, first coordinate fastest.
    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let n = self.nodes_per_side;
        let mut rest = node;
        (0..self.dim)
            .map(|_| {
                let k = rest % n;
                rest /= n;
                k
            })
            .collect()
    }

    pub fn node_at(&self, idx: &[usize]) -> usize {
        idx.iter()
            .rev()
            .fold(0, |acc, &k| acc * self.nodes_per_side + k)
    }

    pub fn position(&self, node: usize) -> Vec<T> {
        self.multi_index(node)
            .iter()
            .zip(&self.origin)
            .map(|(&k, &o)| o + self.spacing * T::from_usize_lossy(k))
            .collect()
    }

    pub fn is_perimeter(&self, node: usize) -> bool {
        let last = self.nodes_per_side - 1;
        self.multi_index(node).iter().any(|&k| k == 0 || k == last)
    }

    /// Node closest to `x` (rounding each coordinate).
    pub fn nearest_node(&self, x: &[T]) -> usize {
        let last = (self.nodes_per_side - 1) as f64;
        let idx: Vec<usize> = x
            .iter()
            .zip(&self.origin)
            .map(|(&v, &o)| {
                ((v - o) / self.spacing)
                    .to_f64_lossy()
                    .round()
                    .clamp(0.0, last) as usize
            })
            .collect();
        self.node_at(&idx)
    }

    pub fn boundary(&self) -> Vec<bool> {
        let mut mask = match &self.boundary_mask {
            Some(m) => m.clone(),
            None => (0..self.node_count())
                .map(|i| self.is_perimeter(i))
                .collect(),
        };
        for &i in &self.extra_boundary {
            if i < mask.len() {
                mask[i] = true;
            }
        }
        mask
    }

    fn check(&self) -> Result<()> {
        if !(self.spacing > T::zero()) {
            return Err(Error::InvalidSpec("grid spacing must be positive".into()));
        }
        if self.nodes_per_side < 2 {
            return Err(Error::InvalidSpec(
                "grid needs at least 2 nodes per side".into(),
            ));
        }
        match (self.stencil, self.dim) {
            (Stencil::Four, 2 | 3) | (Stencil::Eight, 2) => {}
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "{} stencil not available in {} dimensions",
                    self.stencil.name(),
                    self.dim
                )))
            }
        }
        if self.origin.len() != self.dim {
            return Err(Error::InvalidSpec("origin dimension mismatch".into()));
        }
        if let Some(m) = &self.boundary_mask {
            if m.len() != self.node_count() {
                return Err(Error::InvalidSpec("boundary mask length mismatch".into()));
            }
        }
        if let Some(&i) = self
            .extra_boundary
            .iter()
            .find(|&&i| i >= self.node_count())
        {
            return Err(Error::InvalidSpec(format!(
                "boundary node {i} out of range"
            )));
        }
        Ok(())
    }
}

/// Boundary nodes exit to the target at cost `q(x)`; interior nodes get one
/// mode per stencil facet with cost `τ(ξ)/f`.
pub fn build_grid_mssp<T: Real>(
    grid: &GridSpec<T>,
    speed: Arc<dyn Speed<T>>,
    q: &BoundaryPenalty<T>,
) -> Result<MsspProblem<T>> {
    grid.check()?;
    let mask = grid.boundary();
    let m = grid.node_count();
    if let Some(node) = (0..m).find(|&i| grid.is_perimeter(i) && !mask[i]) {
        return Err(Error::UnflaggedBoundary { node });
    }
    let offsets = grid.stencil.mode_offsets(grid.dim);
    let n = grid.nodes_per_side as i64;
    let modes: Vec<Vec<Mode<T>>> = (0..m)
        .into_par_iter()
        .map(|i| -> Result<Vec<Mode<T>>> {
            let x = grid.position(i);
            if mask[i] {
                let cost = CostModel::constant(q.eval(i, &x)?);
                return Ok(vec![Mode::new(vec![m], cost)]);
            }
            let idx: Vec<i64> = grid.multi_index(i).iter().map(|&k| k as i64).collect();
            offsets
                .iter()
                .map(|mode| {
                    let succ = mode
                        .iter()
                        .map(|o| {
                            let j: Vec<usize> = idx
                                .iter()
                                .zip(o)
                                .map(|(&a, &b)| (a + b).clamp(0, n - 1) as usize)
                                .collect();
                            grid.node_at(&j)
                        })
                        .collect();
                    let disp = mode
                        .iter()
                        .map(|o| o.iter().map(|&k| grid.spacing * T::lit(k as f64)).collect())
                        .collect();
                    Ok(Mode::new(succ, facet_cost(disp, &x, &speed)?))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let kappa = offsets.iter().map(Vec::len).sum::<usize>();
    let mut p = MsspProblem::new(m).with_kappa(kappa);
    for (i, ms) in modes.into_iter().enumerate() {
        for mode in ms {
            p.add_mode(i, mode.successors, mode.cost);
        }
    }
    p.set_coordinates((0..m).map(|i| grid.position(i)).collect());
    Ok(p)
}
