//! The dynamic-programming operator `T` and value iteration.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::discrete::DiscreteSsp;
use crate::model::{Control, Diagnostics, Method, MsspProblem, NodeId, ValueSolution};
use crate::scalar::{sup_distance, weighted_sum};
use crate::simplex_opt::{minimize_mode, MinimizeOptions};
use crate::Real;

/// Anything `T` can be applied to: a node set with a target and, per node, a
/// list of actions over fixed successor lists.
pub trait SspModel<T: Real>: Sync {
    /// Number of value entries, target included.
    fn state_count(&self) -> usize;

    fn target(&self) -> NodeId {
        self.state_count() - 1
    }

    fn action_count(&self, node: NodeId) -> usize;

    fn action_successors(&self, node: NodeId, action: usize) -> Vec<NodeId>;

    /// Best value of `action` given successor values `w`, and the
    /// distribution attaining it.
    fn action_value(
        &self,
        node: NodeId,
        action: usize,
        w: &[T],
        opts: &MinimizeOptions<T>,
    ) -> Result<(T, Vec<T>)>;

    /// Cost of taking `action` with distribution `xi`.
    fn control_cost(&self, node: NodeId, action: usize, xi: &[T]) -> T;

    /// Whether actions choose any distribution over their successors (MSSP
    /// modes) rather than a fixed one.
    fn flexible_actions(&self) -> bool;
}

impl<T: Real> SspModel<T> for MsspProblem<T> {
    fn state_count(&self) -> usize {
        self.len()
    }

    fn action_count(&self, node: NodeId) -> usize {
        self.modes(node).len()
    }

    fn action_successors(&self, node: NodeId, action: usize) -> Vec<NodeId> {
        self.modes(node)[action].successors.clone()
    }

    fn action_value(
        &self,
        node: NodeId,
        action: usize,
        w: &[T],
        opts: &MinimizeOptions<T>,
    ) -> Result<(T, Vec<T>)> {
        let mode = &self.modes(node)[action];
        let r = minimize_mode(&mode.cost, w, opts);
        if r.value.is_nan() || r.non_finite {
            return Err(Error::NonFiniteCost { node, mode: action });
        }
        Ok((r.value, r.minimizer.xi))
    }

    fn control_cost(&self, node: NodeId, action: usize, xi: &[T]) -> T {
        self.modes(node)[action].cost.eval(xi)
    }

    fn flexible_actions(&self) -> bool {
        true
    }
}

impl<T: Real> SspModel<T> for DiscreteSsp<T> {
    fn state_count(&self) -> usize {
        self.len()
    }

    fn action_count(&self, node: NodeId) -> usize {
        self.controls(node).len()
    }

    fn action_successors(&self, node: NodeId, action: usize) -> Vec<NodeId> {
        self.controls(node)[action]
            .transitions
            .iter()
            .map(|(j, _)| *j)
            .collect()
    }

    fn action_value(
        &self,
        node: NodeId,
        action: usize,
        w: &[T],
        _opts: &MinimizeOptions<T>,
    ) -> Result<(T, Vec<T>)> {
        let c = &self.controls(node)[action];
        if !c.cost.is_finite() {
            return Err(Error::NonFiniteCost { node, mode: action });
        }
        let p: Vec<T> = c.transitions.iter().map(|(_, p)| *p).collect();
        Ok((c.cost + weighted_sum(&p, w), p))
    }

    fn control_cost(&self, node: NodeId, action: usize, _xi: &[T]) -> T {
        self.controls(node)[action].cost
    }

    fn flexible_actions(&self) -> bool {
        false
    }
}

/// Minimizes over the actions of one node given the full value vector.
/// Ties keep the first action in declared order.
pub fn update_node<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    node: NodeId,
    w: &[T],
    opts: &MinimizeOptions<T>,
) -> Result<(T, Option<Control<T>>)> {
    let mut best = (T::infinity(), None);
    for a in 0..model.action_count(node) {
        let succ: Vec<T> = model
            .action_successors(node, a)
            .iter()
            .map(|&j| w[j])
            .collect();
        let (v, xi) = model.action_value(node, a, &succ, opts)?;
        if v < best.0 {
            best = (v, Some(Control { mode_index: a, xi }));
        }
    }
    Ok(best)
}

/// `(TW)ᵢ` for every node, with the argmin control; `(TW)(t) = 0`.
pub fn apply_t<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    w: &[T],
    opts: &MinimizeOptions<T>,
) -> Result<(Vec<T>, Vec<Option<Control<T>>>)> {
    let n = model.state_count();
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    let target = model.target();
    let updates: Vec<(T, Option<Control<T>>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            if i == target {
                Ok((T::zero(), None))
            } else {
                update_node(model, i, w, opts)
            }
        })
        .collect::<Result<_>>()?;
    Ok(updates.into_iter().unzip())
}

#[derive(Debug, Clone)]
pub struct ViOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    pub minimize: MinimizeOptions<T>,
}

impl<T: Real> Default for ViOptions<T> {
    fn default() -> Self {
        ViOptions {
            tol: T::lit(1e-10),
            max_iter: 100_000,
            minimize: MinimizeOptions::default(),
        }
    }
}

/// Iterates `Wⁿ⁺¹ = TWⁿ` until the sup-norm step is within `tol`.
///
/// Nodes outside the reachable set start (and stay) at `+∞`. Hitting
/// `max_iter` is not an error; the solution is flagged unconverged and
/// carries the last residual.
pub fn value_iteration<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    w0: &[T],
    opts: &ViOptions<T>,
) -> Result<ValueSolution<T>> {
    assert!(opts.tol > T::zero(), "tolerance must be positive");
    let mut w = w0.to_vec();
    if w.len() != model.state_count() {
        return Err(Error::DimensionMismatch {
            expected: model.state_count(),
            got: w.len(),
        });
    }
    w[model.target()] = T::zero();
    let reach = crate::solvers::reachable_set(model);
    for (wi, &r) in w.iter_mut().zip(&reach) {
        if !r {
            *wi = T::infinity();
        }
    }
    let mut diag = Diagnostics::new(Method::ValueIteration);
    diag.converged = false;
    let mut policy = vec![None; w.len()];
    while diag.iterations < opts.max_iter {
        let (next, pol) = apply_t(model, &w, &opts.minimize)?;
        let res = sup_distance(&next, &w);
        diag.iterations += 1;
        diag.residual = res;
        diag.residual_history.push(res);
        w = next;
        policy = pol;
        if res <= opts.tol {
            diag.converged = true;
            break;
        }
    }
    Ok(ValueSolution {
        values: w,
        policy,
        diagnostics: diag,
    })
}
