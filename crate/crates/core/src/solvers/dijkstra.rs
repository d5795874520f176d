use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::model::bellman::SspModel;
use crate::model::{Control, Diagnostics, Method, ValueSolution};
use crate::simplex_opt::MinimizeOptions;
use crate::solvers::ModeIndex;
use crate::Real;

/// Heap entry ordered so the smallest value, then the lowest id, pops first.
struct Entry<T>(T, usize);

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Entry<T> {}

impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Dijkstra-like label setting with a lazily pruned binary heap.
///
/// Tentative labels only use controls that move to permanent nodes: when
/// `x̄` is accepted, every mode containing it is re-minimized over the face
/// spanned by its permanent successors. Nodes never accepted keep `+∞`.
pub fn dijkstra_solve<T: Real, P: SspModel<T> + ?Sized>(model: &P) -> Result<ValueSolution<T>> {
    dijkstra_solve_with(model, &MinimizeOptions::default())
}

pub fn dijkstra_solve_with<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    opts: &MinimizeOptions<T>,
) -> Result<ValueSolution<T>> {
    let n = model.state_count();
    let t = model.target();
    let index = ModeIndex::new(model);
    let mut values = vec![T::infinity(); n];
    let mut policy: Vec<Option<Control<T>>> = vec![None; n];
    let mut permanent = vec![false; n];
    let mut diag = Diagnostics::new(Method::Dijkstra);
    values[t] = T::zero();
    let mut heap = BinaryHeap::new();
    heap.push(Entry(T::zero(), t));
    let mut w = Vec::new();
    while let Some(Entry(v, x)) = heap.pop() {
        if permanent[x] || v != values[x] {
            continue;
        }
        permanent[x] = true;
        diag.accept_order.push(x);
        for &(i, a) in &index.reverse[x] {
            if permanent[i] {
                continue;
            }
            w.clear();
            w.extend(index.successors[i][a].iter().map(|&j| {
                if permanent[j] {
                    values[j]
                } else {
                    T::infinity()
                }
            }));
            let (cand, xi) = model.action_value(i, a, &w, opts)?;
            diag.iterations += 1;
            if cand < values[i] {
                values[i] = cand;
                policy[i] = Some(Control { mode_index: a, xi });
                heap.push(Entry(cand, i));
            }
        }
    }
    Ok(ValueSolution {
        values,
        policy,
        diagnostics: diag,
    })
}
