//! The MSSP instance, controls, and solution types.

pub mod bellman;
pub mod cost;
pub mod discrete;
pub mod monte_carlo;
pub mod validate;

use crate::Real;
use cost::CostModel;

/// Node index; the target is the index equal to the node count `M`.
pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Mode<T: Real> {
    pub successors: Vec<NodeId>,
    pub cost: CostModel<T>,
}

impl<T: Real> Mode<T> {
    pub fn new(successors: Vec<NodeId>, cost: CostModel<T>) -> Self {
        Mode { successors, cost }
    }

    pub fn len(&self) -> usize {
        self.successors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successors.is_empty()
    }
}

/// Nodes `x₀ … x_{M−1}` plus the target `t = x_M`, each non-target node with
/// an ordered list of modes.
#[derive(Debug, Clone)]
pub struct MsspProblem<T: Real> {
    node_count: usize,
    modes: Vec<Vec<Mode<T>>>,
    labels: Vec<Option<String>>,
    coordinates: Option<Vec<Vec<T>>>,
    kappa: Option<usize>,
}

impl<T: Real> MsspProblem<T> {
    pub fn new(node_count: usize) -> Self {
        MsspProblem {
            node_count,
            modes: vec![Vec::new(); node_count],
            labels: vec![None; node_count + 1],
            coordinates: None,
            kappa: None,
        }
    }

    /// Appends a mode to `node` and returns its index.
    pub fn add_mode(&mut self, node: NodeId, successors: Vec<NodeId>, cost: CostModel<T>) -> usize {
        self.modes[node].push(Mode::new(successors, cost));
        self.modes[node].len() - 1
    }

    pub fn set_label(&mut self, node: NodeId, label: impl Into<String>) {
        self.labels[node] = Some(label.into());
    }

    pub fn with_coordinates(mut self, coords: Vec<Vec<T>>) -> Self {
        self.coordinates = Some(coords);
        self
    }

    pub fn set_coordinates(&mut self, coords: Vec<Vec<T>>) {
        self.coordinates = Some(coords);
    }

    /// Declares the stochastic-outdegree bound checked by validation.
    pub fn with_kappa(mut self, kappa: usize) -> Self {
        self.kappa = Some(kappa);
        self
    }

    /// Number of non-target nodes `M`.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn target(&self) -> NodeId {
        self.node_count
    }

    /// Length of value vectors, `M + 1`.
    pub fn len(&self) -> usize {
        self.node_count + 1
    }

    pub fn is_empty(&self) -> bool {
        self.node_count == 0
    }

    pub fn modes(&self, node: NodeId) -> &[Mode<T>] {
        if node == self.node_count {
            &[]
        } else {
            &self.modes[node]
        }
    }

    pub fn label(&self, node: NodeId) -> Option<&str> {
        self.labels.get(node).and_then(|l| l.as_deref())
    }

    /// Human-readable name: the label if set, else `x{i}` / `t`.
    pub fn display_name(&self, node: NodeId) -> String {
        match self.label(node) {
            Some(l) => l.to_string(),
            None if node == self.node_count => "t".to_string(),
            None => format!("x{node}"),
        }
    }

    pub fn coordinates(&self) -> Option<&[Vec<T>]> {
        self.coordinates.as_deref()
    }

    pub fn kappa(&self) -> Option<usize> {
        self.kappa
    }

    /// `Σ_m |m|` at `node`.
    pub fn stochastic_outdegree(&self, node: NodeId) -> usize {
        self.modes(node).iter().map(Mode::len).sum()
    }

    pub fn mode_count(&self) -> usize {
        self.modes.iter().map(Vec::len).sum()
    }

    /// Iterates `(node, mode index, mode)` over all modes.
    pub fn iter_modes(&self) -> impl Iterator<Item = (NodeId, usize, &Mode<T>)> {
        self.modes
            .iter()
            .enumerate()
            .flat_map(|(i, ms)| ms.iter().enumerate().map(move |(k, m)| (i, k, m)))
    }
}

/// A control `(m, ξ)`: a mode index and barycentric weights over its
/// successors.
#[derive(Debug, Clone, PartialEq)]
pub struct Control<T> {
    pub mode_index: usize,
    pub xi: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ValueIteration,
    Dijkstra,
    Dial,
    Sweep,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ValueIteration => "vi",
            Method::Dijkstra => "dijkstra",
            Method::Dial => "dial",
            Method::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostics<T> {
    pub method: Method,
    /// Operator applications (VI) or node updates (label-setting).
    pub iterations: usize,
    pub residual: T,
    pub residual_history: Vec<T>,
    pub converged: bool,
    /// Nodes in the order they became permanent, target first.
    pub accept_order: Vec<NodeId>,
    pub bucket_width: Option<T>,
    /// Label changes to nodes whose bucket was already accepted. Stays zero
    /// on δ-causal problems.
    pub reupdates_after_acceptance: usize,
}

impl<T: Real> Diagnostics<T> {
    pub fn new(method: Method) -> Self {
        Diagnostics {
            method,
            iterations: 0,
            residual: T::zero(),
            residual_history: Vec::new(),
            converged: true,
            accept_order: Vec::new(),
            bucket_width: None,
            reupdates_after_acceptance: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValueSolution<T> {
    pub values: Vec<T>,
    pub policy: Vec<Option<Control<T>>>,
    pub diagnostics: Diagnostics<T>,
}
