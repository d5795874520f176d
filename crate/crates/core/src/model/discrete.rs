//! Finite-control SSPs with tabulated transition rows, and the conversions
//! that remove self-transitions.

use crate::error::{Error, Result};
use crate::model::cost::CostModel;
use crate::model::NodeId;
use crate::simplex_opt::golden_section;
use crate::Real;

/// One control: a scalar cost and a probability row over successors.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteControl<T> {
    pub cost: T,
    pub transitions: Vec<(NodeId, T)>,
}

impl<T: Real> DiscreteControl<T> {
    pub fn new(cost: T, transitions: Vec<(NodeId, T)>) -> Self {
        DiscreteControl { cost, transitions }
    }

    pub fn self_probability(&self, node: NodeId) -> T {
        self.transitions
            .iter()
            .filter(|(j, _)| *j == node)
            .map(|(_, p)| *p)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteSsp<T> {
    node_count: usize,
    controls: Vec<Vec<DiscreteControl<T>>>,
}

impl<T: Real> DiscreteSsp<T> {
    pub fn new(node_count: usize) -> Self {
        DiscreteSsp {
            node_count,
            controls: vec![Vec::new(); node_count],
        }
    }

    pub fn add_control(&mut self, node: NodeId, cost: T, transitions: Vec<(NodeId, T)>) -> usize {
        self.controls[node].push(DiscreteControl::new(cost, transitions));
        self.controls[node].len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn target(&self) -> NodeId {
        self.node_count
    }

    pub fn len(&self) -> usize {
        self.node_count + 1
    }

    pub fn is_empty(&self) -> bool {
        self.node_count == 0
    }

    pub fn controls(&self, node: NodeId) -> &[DiscreteControl<T>] {
        if node == self.node_count {
            &[]
        } else {
            &self.controls[node]
        }
    }

    /// Structural problems: rows not summing to one, negative entries,
    /// out-of-range successors, nodes without controls, negative costs.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let tol = T::lit(1e-12);
        for (i, cs) in self.controls.iter().enumerate() {
            if cs.is_empty() {
                out.push(format!("node {i}: no controls"));
            }
            for (k, c) in cs.iter().enumerate() {
                let sum: T = c.transitions.iter().map(|(_, p)| *p).sum();
                if (sum - T::one()).abs() > tol {
                    out.push(format!("node {i}, control {k}: row sums to {sum}"));
                }
                if c.transitions.iter().any(|(_, p)| *p < T::zero()) {
                    out.push(format!("node {i}, control {k}: negative probability"));
                }
                if c.transitions.iter().any(|(j, _)| *j > self.node_count) {
                    out.push(format!("node {i}, control {k}: successor out of range"));
                }
                if !(c.cost >= T::zero()) || !c.cost.is_finite() {
                    out.push(format!(
                        "node {i}, control {k}: cost {} not in [0, inf)",
                        c.cost
                    ));
                }
            }
        }
        out
    }

    /// Rescales every control with `pᵢᵢ > 0` to `C/(1−pᵢᵢ)`,
    /// `pᵢⱼ/(1−pᵢᵢ)`, dropping the self entry.
    pub fn eliminate_self_transitions(&self) -> Result<DiscreteSsp<T>> {
        let mut out = DiscreteSsp::new(self.node_count);
        for (i, cs) in self.controls.iter().enumerate() {
            for (k, c) in cs.iter().enumerate() {
                let pii = c.self_probability(i);
                if pii == T::zero() {
                    out.controls[i].push(c.clone());
                    continue;
                }
                let keep = T::one() - pii;
                if keep <= T::zero() {
                    return Err(Error::AbsorbingState {
                        node: i,
                        control: k,
                    });
                }
                let transitions = c
                    .transitions
                    .iter()
                    .filter(|(j, _)| *j != i)
                    .map(|&(j, p)| (j, p / keep))
                    .collect();
                out.controls[i].push(DiscreteControl::new(c.cost / keep, transitions));
            }
        }
        Ok(out)
    }
}

/// `min_{p ∈ (0,1]} g(p) / p` by a grid scan at `1/resolution` refined with
/// golden-section search; returns `(value, p*)`.
pub fn minimize_ratio<T: Real>(g: impl Fn(T) -> T, resolution: usize) -> (T, T) {
    let r = resolution.max(1);
    let rf = T::from_usize_lossy(r);
    let ratio = |p: T| g(p) / p;
    let mut best = (T::infinity(), r);
    for k in 1..=r {
        let v = ratio(T::from_usize_lossy(k) / rf);
        if v < best.0 {
            best = (v, k);
        }
    }
    let mut p_star = T::from_usize_lossy(best.1) / rf;
    let mut value = best.0;
    let lo = T::from_usize_lossy(best.1 - 1).max(T::lit(1e-3)) / rf;
    let hi = T::from_usize_lossy((best.1 + 1).min(r)) / rf;
    let (p, v) = golden_section(ratio, lo, hi, T::lit(1e-14));
    if v < value {
        value = v;
        p_star = p;
    }
    (value, p_star)
}

/// Replaces a two-successor mode whose second successor is its owner by the
/// deterministic cost `min_{p ∈ (0,1]} C(p, 1−p) / p`; returns `(cost, p*)`.
pub fn collapse_self_loop_mode<T: Real>(cost: &CostModel<T>, resolution: usize) -> (T, T) {
    assert_eq!(
        cost.dim(),
        2,
        "self-loop collapse needs a two-successor mode"
    );
    minimize_ratio(|p| cost.eval(&[p, T::one() - p]), resolution)
}
