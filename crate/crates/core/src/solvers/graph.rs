use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::bellman::SspModel;
use crate::model::{Control, NodeId};
use crate::Real;

/// Edges `i → j` whenever `j` is a successor of some action of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    target: NodeId,
    succ: Vec<Vec<NodeId>>,
}

impl DependencyGraph {
    /// Union over all actions.
    pub fn from_model<T: Real, P: SspModel<T> + ?Sized>(model: &P) -> Self {
        let n = model.state_count();
        let target = model.target();
        let succ = (0..n)
            .map(|i| {
                if i == target {
                    return Vec::new();
                }
                let mut s: Vec<NodeId> = (0..model.action_count(i))
                    .flat_map(|a| model.action_successors(i, a))
                    .collect();
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        DependencyGraph { target, succ }
    }

    /// Edges used with positive probability by `policy`.
    pub fn for_policy<T: Real, P: SspModel<T> + ?Sized>(
        model: &P,
        policy: &[Option<Control<T>>],
    ) -> Self {
        let target = model.target();
        let succ = policy
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Some(c) if i != target => {
                    let mut s: Vec<NodeId> = model
                        .action_successors(i, c.mode_index)
                        .into_iter()
                        .zip(&c.xi)
                        .filter(|(_, p)| **p > T::zero())
                        .map(|(j, _)| j)
                        .collect();
                    s.sort_unstable();
                    s.dedup();
                    s
                }
                _ => Vec::new(),
            })
            .collect();
        DependencyGraph { target, succ }
    }

    pub fn successors(&self, node: NodeId) -> &[NodeId] {
        &self.succ[node]
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.succ[from].binary_search(&to).is_ok()
    }

    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    /// Order in which every node follows all of its successors; the target
    /// comes first and ties go to the lowest id.
    pub fn topological_order(&self) -> Result<Vec<NodeId>> {
        let n = self.succ.len();
        let mut pending: Vec<usize> = self.succ.iter().map(Vec::len).collect();
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (i, s) in self.succ.iter().enumerate() {
            for &j in s {
                preds[j].push(i);
            }
        }
        let mut ready: BinaryHeap<Reverse<NodeId>> = (0..n)
            .filter(|&i| pending[i] == 0 && i != self.target)
            .map(Reverse)
            .collect();
        let mut order = Vec::with_capacity(n);
        let mut release =
            |j: NodeId, ready: &mut BinaryHeap<Reverse<NodeId>>, order: &mut Vec<NodeId>| {
                order.push(j);
                for &i in &preds[j] {
                    pending[i] -= 1;
                    if pending[i] == 0 {
                        ready.push(Reverse(i));
                    }
                }
            };
        release(self.target, &mut ready, &mut order);
        while let Some(Reverse(j)) = ready.pop() {
            release(j, &mut ready, &mut order);
        }
        if order.len() == n {
            return Ok(order);
        }
        let mut done = vec![false; n];
        for &i in &order {
            done[i] = true;
        }
        Err(Error::Cycle {
            witness: self.cycle_witness(&done),
        })
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Every unfinished node keeps an unfinished successor, so walking from
    /// the lowest one must revisit a node.
    fn cycle_witness(&self, done: &[bool]) -> Vec<NodeId> {
        let start = (0..done.len())
            .find(|&i| !done[i])
            .expect("unfinished node");
        let mut pos = vec![usize::MAX; done.len()];
        let mut path = Vec::new();
        let mut x = start;
        while pos[x] == usize::MAX {
            pos[x] = path.len();
            path.push(x);
            x = *self.succ[x]
                .iter()
                .find(|&&j| !done[j])
                .expect("unfinished successor");
        }
        let mut cycle = path[pos[x]..].to_vec();
        cycle.push(x);
        cycle
    }
}

/// Nodes from which some policy reaches the target with probability one.
///
/// For flexible actions (MSSP modes) a single successor already inside the
/// set suffices, since the pure control onto it is available. Fixed
/// distributions use the nested fixpoint of almost-sure reachability.
pub fn reachable_set<T: Real, P: SspModel<T> + ?Sized>(model: &P) -> Vec<bool> {
    let n = model.state_count();
    let t = model.target();
    let actions: Vec<Vec<Vec<NodeId>>> = (0..n)
        .map(|i| {
            if i == t {
                Vec::new()
            } else {
                (0..model.action_count(i))
                    .map(|a| model.action_successors(i, a))
                    .collect()
            }
        })
        .collect();
    if model.flexible_actions() {
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (i, acts) in actions.iter().enumerate() {
            for s in acts {
                for &j in s {
                    preds[j].push(i);
                }
            }
        }
        let mut inside = vec![false; n];
        inside[t] = true;
        let mut stack = vec![t];
        while let Some(j) = stack.pop() {
            for &i in &preds[j] {
                if !inside[i] {
                    inside[i] = true;
                    stack.push(i);
                }
            }
        }
        return inside;
    }
    let mut allowed = vec![true; n];
    loop {
        // actions that never leave the allowed set
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (i, acts) in actions.iter().enumerate() {
            if !allowed[i] {
                continue;
            }
            for s in acts.iter().filter(|s| s.iter().all(|&j| allowed[j])) {
                for &j in s {
                    preds[j].push(i);
                }
            }
        }
        let mut inside = vec![false; n];
        inside[t] = true;
        let mut stack = vec![t];
        while let Some(j) = stack.pop() {
            for &i in &preds[j] {
                if !inside[i] {
                    inside[i] = true;
                    stack.push(i);
                }
            }
        }
        if inside == allowed {
            return inside;
        }
        allowed = inside;
    }
}
