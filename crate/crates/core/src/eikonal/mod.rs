//! Semi-Lagrangian discretizations of `‖∇u‖ f = 1`-type equations (and
//! their anisotropic analogues) on Cartesian grids and simplicial meshes,
//! compiled into MSSPs whose modes are stencil facets.

mod anisotropic;
mod grid;
mod mesh;
mod speed;

use std::sync::Arc;

pub use anisotropic::{check_anisotropic_causality, AnisotropicReport, AnisotropicWitness};
pub use grid::{build_grid_mssp, GridSpec, Stencil};
pub use mesh::{build_mesh_mssp, equilateral_hexagon, parse_mesh, MeshSpec};
pub use speed::{ConstantSpeed, EllipticSpeed, IsotropicField, Speed, SpeedForm};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::cost::CostModel;
use crate::simplex_opt::isotropic_update;
use crate::Real;

/// Exit cost `q(x) ≥ 0` at boundary nodes.
#[derive(Clone)]
pub enum BoundaryPenalty<T> {
    Constant(T),
    /// Indexed by node id; entries at non-boundary nodes are ignored.
    PerNode(Vec<T>),
    Function(Arc<dyn Fn(&[T]) -> T + Send + Sync>),
}

impl<T: Real> BoundaryPenalty<T> {
    pub fn zero() -> Self {
        BoundaryPenalty::Constant(T::zero())
    }

    pub fn eval(&self, node: usize, x: &[T]) -> Result<T> {
        let q = match self {
            BoundaryPenalty::Constant(q) => *q,
            BoundaryPenalty::PerNode(v) => *v.get(node).ok_or_else(|| {
                Error::InvalidSpec(format!("no boundary penalty for node {node}"))
            })?,
            BoundaryPenalty::Function(f) => f(x),
        };
        if !(q >= T::zero()) || !q.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "boundary penalty {q} at node {node} is not in [0, inf)"
            )));
        }
        Ok(q)
    }
}

impl<T: Real> std::fmt::Debug for BoundaryPenalty<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryPenalty::Constant(q) => write!(f, "Constant({q})"),
            BoundaryPenalty::PerNode(v) => write!(f, "PerNode({} entries)", v.len()),
            BoundaryPenalty::Function(_) => write!(f, "Function"),
        }
    }
}

/// Cost of moving from `x` to the facet spanned by `x + offsets`: `τ/f` with
/// the Euclidean closed form when the speed is isotropic.
pub(crate) fn facet_cost<T: Real>(
    offsets: Vec<Vec<T>>,
    position: &[T],
    speed: &Arc<dyn Speed<T>>,
) -> Result<CostModel<T>> {
    let (f1, f2) = speed.bounds();
    let slack = T::lit(1e-12) * f2;
    let check = |f: T| -> Result<()> {
        if f < f1 - slack || f > f2 + slack || !f.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "speed {f} at {position:?} outside declared bounds [{f1}, {f2}]"
            )));
        }
        Ok(())
    };
    if speed.is_isotropic() {
        let f = speed.speed(position, &offsets[0]);
        check(f)?;
        return Ok(CostModel::euclidean_offset(T::one() / f, offsets));
    }
    // sample the directions of the facet's vertices and its barycenter
    let n = T::from_usize_lossy(offsets.len());
    let mut dirs = offsets.clone();
    let dim = offsets[0].len();
    dirs.push(
        (0..dim)
            .map(|k| offsets.iter().map(|v| v[k]).sum::<T>() / n)
            .collect(),
    );
    for d in &dirs {
        let len = linalg::norm(d);
        let a: Vec<T> = d.iter().map(|&v| v / len).collect();
        check(speed.speed(position, &a))?;
    }
    Ok(CostModel::semi_lagrangian(
        offsets,
        position.to_vec(),
        speed.clone(),
    ))
}

/// Maximum pairwise angle between the displacement vectors of one mode.
pub fn max_pairwise_angle<T: Real>(offsets: &[Vec<T>]) -> T {
    let mut beta = T::zero();
    for (i, a) in offsets.iter().enumerate() {
        for b in &offsets[i + 1..] {
            beta = beta.max(linalg::angle_between(a, b));
        }
    }
    beta
}

/// Bucket width `h cos β / F₂` certified for stencils whose pairwise angles
/// stay below `β`, together with the upper bound `h / F₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketWidth<T> {
    pub delta: T,
    pub upper_bound: T,
}

/// `δ = h cos β / F₂` for `β < π/2`, otherwise `0` (Dijkstra only).
pub fn dial_bucket_width<T: Real>(h: T, beta: T, f2: T) -> BucketWidth<T> {
    let right = T::lit(std::f64::consts::FRAC_PI_2);
    let delta = if beta < right {
        (h * beta.cos() / f2).max(T::zero())
    } else {
        T::zero()
    };
    BucketWidth {
        delta,
        upper_bound: h / f2,
    }
}

/// `min_{ξ ∈ Ξ₂} (h/f)‖ξ‖ + ξ₁W₁ + ξ₂W₂` in closed form.
pub fn isotropic_quadrant_update<T: Real>(w1: T, w2: T, h: T, f: T) -> T {
    let s = h / f;
    match (w1.is_finite(), w2.is_finite()) {
        (true, true) => isotropic_update(s, &[w1, w2]).0,
        (true, false) => w1 + s,
        (false, true) => w2 + s,
        (false, false) => T::infinity(),
    }
}
