//! Label-setting solvers, the single-sweep solver for acyclic problems,
//! reachability, and the one-sweep fixed-point check.

mod dial;
mod dijkstra;
mod graph;
mod sweep;

pub use dial::{dial_solve, dial_solve_with, BucketQueue};
pub use dijkstra::{dijkstra_solve, dijkstra_solve_with};
pub use graph::{reachable_set, DependencyGraph};
pub use sweep::{sweep_solve, sweep_solve_with};

use crate::error::Result;
use crate::model::bellman::{apply_t, SspModel};
use crate::model::NodeId;
use crate::scalar::abs_diff;
use crate::simplex_opt::MinimizeOptions;
use crate::Real;

/// Outcome of applying `T` once to a candidate value function.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport<T> {
    pub pass: bool,
    /// `max |(TU)ᵢ − Uᵢ|` over nodes with finite `Uᵢ`.
    pub max_residual: T,
    pub worst_node: Option<NodeId>,
    /// Nodes holding `+∞` although the target is reachable from them.
    pub infinite_inside_reachable: Vec<NodeId>,
}

/// One application of `T`: passes iff the residual on finite entries is
/// within `tol` and no reachable node is left at `+∞`.
pub fn verify_fixed_point<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    values: &[T],
    tol: T,
) -> Result<FixedPointReport<T>> {
    verify_fixed_point_with(model, values, tol, &MinimizeOptions::default())
}

pub fn verify_fixed_point_with<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    values: &[T],
    tol: T,
    opts: &MinimizeOptions<T>,
) -> Result<FixedPointReport<T>> {
    let (tu, _) = apply_t(model, values, opts)?;
    let mut max_residual = T::zero();
    let mut worst_node = None;
    for (i, (&u, &v)) in values.iter().zip(&tu).enumerate() {
        if !u.is_finite() {
            continue;
        }
        let r = abs_diff(u, v);
        if r > max_residual || (worst_node.is_none() && r == max_residual && r > T::zero()) {
            max_residual = r;
            worst_node = Some(i);
        }
    }
    let reach = reachable_set(model);
    let infinite_inside_reachable: Vec<NodeId> = values
        .iter()
        .enumerate()
        .filter(|(i, u)| u.is_infinite() && reach[*i])
        .map(|(i, _)| i)
        .collect();
    Ok(FixedPointReport {
        pass: max_residual <= tol && infinite_inside_reachable.is_empty(),
        max_residual,
        worst_node,
        infinite_inside_reachable,
    })
}

/// Successor lists per `(node, action)` and the reverse index
/// `node ↦ [(owner, action)]` used by the label-setting solvers.
pub(crate) struct ModeIndex {
    pub successors: Vec<Vec<Vec<NodeId>>>,
    pub reverse: Vec<Vec<(NodeId, usize)>>,
}

impl ModeIndex {
    pub fn new<T: Real, P: SspModel<T> + ?Sized>(model: &P) -> Self {
        let n = model.state_count();
        let t = model.target();
        let mut successors = vec![Vec::new(); n];
        let mut reverse = vec![Vec::new(); n];
        for (i, succ) in successors.iter_mut().enumerate() {
            if i == t {
                continue;
            }
            for a in 0..model.action_count(i) {
                let s = model.action_successors(i, a);
                for &j in &s {
                    reverse[j].push((i, a));
                }
                succ.push(s);
            }
        }
        ModeIndex {
            successors,
            reverse,
        }
    }
}
