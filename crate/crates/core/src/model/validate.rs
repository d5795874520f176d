//! Structural and sampled checks of an `MsspProblem`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::cost::CostModel;
use crate::model::{MsspProblem, NodeId};
use crate::simplex_opt::{random_simplex_point, simplex_grid};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    /// Every non-target node has at least one non-empty mode.
    HasModes,
    /// A mode never contains its owner.
    OwnerExcluded,
    /// Successors within a mode are pairwise distinct.
    DistinctSuccessors,
    SuccessorInRange,
    /// The cost is defined over the mode's simplex.
    CostDimension,
    /// Costs are positive and finite on the simplex.
    PositiveCost,
    /// `Σ_m |m| ≤ κ`.
    OutdegreeBound,
    /// Declared homogeneity degree holds on samples.
    DegreeMetadata,
}

impl Requirement {
    pub fn describe(self) -> &'static str {
        match self {
            Requirement::HasModes => "node has no modes or an empty mode",
            Requirement::OwnerExcluded => "mode references its owner",
            Requirement::DistinctSuccessors => "duplicate successor in mode",
            Requirement::SuccessorInRange => "successor index out of range",
            Requirement::CostDimension => "cost dimension differs from mode size",
            Requirement::PositiveCost => "cost not positive and finite on the simplex",
            Requirement::OutdegreeBound => "stochastic outdegree exceeds kappa",
            Requirement::DegreeMetadata => "declared homogeneity degree does not hold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub node: NodeId,
    pub mode: Option<usize>,
    pub requirement: Requirement,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}", self.node)?;
        if let Some(m) = self.mode {
            write!(f, ", mode {m}")?;
        }
        write!(f, ": {}", self.requirement.describe())?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Largest grid resolution `≤ 32` whose simplex grid has at most `cap`
/// points; at least the vertices.
pub fn positivity_resolution(n: usize, cap: usize) -> usize {
    let count = |r: usize| -> usize {
        // C(r + n − 1, n − 1), saturating
        let mut c: u128 = 1;
        for i in 1..n {
            c = c * (r + i) as u128 / i as u128;
            if c > cap as u128 {
                return usize::MAX;
            }
        }
        c as usize
    };
    (1..=32).rev().find(|&r| count(r) <= cap).unwrap_or(1)
}

/// Samples `C` on the simplex grid; returns the first offending point.
///
/// When `allow_zero` is set (exit modes whose only successor is the target)
/// zero costs pass.
pub fn check_positive<T: Real>(cost: &CostModel<T>, allow_zero: bool) -> Option<(Vec<T>, T)> {
    let n = cost.dim();
    let r = positivity_resolution(n, 6000);
    simplex_grid::<T>(n, r).into_iter().find_map(|xi| {
        let c = cost.eval(&xi);
        let ok = c.is_finite() && (c > T::zero() || (allow_zero && c == T::zero()));
        (!ok).then_some((xi, c))
    })
}

/// Checks `C(aξ) = a^d C(ξ)` on 100 random `(a, ξ)`; returns the worst
/// relative error when it exceeds tolerance.
pub fn check_degree<T: Real>(cost: &CostModel<T>, d: T, seed: u64) -> Option<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(100.0));
    let mut worst = T::zero();
    for _ in 0..100 {
        let xi: Vec<T> = random_simplex_point(&mut rng, cost.dim());
        let a = T::lit(rng.gen_range(0.25..4.0));
        let scaled: Vec<T> = xi.iter().map(|&v| v * a).collect();
        let lhs = cost.eval(&scaled);
        let rhs = a.powf(d) * cost.eval(&xi);
        let err = (lhs - rhs).abs() / lhs.abs().max(T::min_positive_value());
        if !(err <= tol) {
            worst = if err.is_nan() {
                T::infinity()
            } else {
                worst.max(err)
            };
        }
    }
    (worst > T::zero()).then_some(worst)
}

/// Empty iff the problem satisfies every structural requirement and the
/// sampled cost checks.
pub fn validate_problem<T: Real>(problem: &MsspProblem<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = problem.node_count();
    let target = problem.target();
    for i in 0..m {
        let modes = problem.modes(i);
        if modes.is_empty() {
            out.push(Violation {
                node: i,
                mode: None,
                requirement: Requirement::HasModes,
                detail: String::new(),
            });
        }
        for (k, mode) in modes.iter().enumerate() {
            let mut push = |requirement, detail: String| {
                out.push(Violation {
                    node: i,
                    mode: Some(k),
                    requirement,
                    detail,
                })
            };
            if mode.successors.is_empty() {
                push(Requirement::HasModes, "empty mode".into());
                continue;
            }
            if mode.successors.contains(&i) {
                push(Requirement::OwnerExcluded, String::new());
            }
            if let Some(&bad) = mode.successors.iter().find(|&&j| j > target) {
                push(Requirement::SuccessorInRange, format!("successor {bad}"));
            }
            let mut sorted = mode.successors.clone();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                push(
                    Requirement::DistinctSuccessors,
                    format!("successor {}", w[0]),
                );
            }
            if mode.cost.dim() != mode.successors.len() {
                push(
                    Requirement::CostDimension,
                    format!(
                        "cost dim {} vs {} successors",
                        mode.cost.dim(),
                        mode.successors.len()
                    ),
                );
                continue;
            }
            let exit = mode.successors == [target];
            if let Some((xi, c)) = check_positive(&mode.cost, exit) {
                push(Requirement::PositiveCost, format!("C({xi:?}) = {c}"));
            }
            if let Some(d) = mode.cost.degree() {
                if let Some(err) = check_degree(&mode.cost, d, (i * 31 + k) as u64) {
                    push(
                        Requirement::DegreeMetadata,
                        format!("degree {d}, relative error {err}"),
                    );
                }
            }
        }
        if let Some(kappa) = problem.kappa() {
            let deg = problem.stochastic_outdegree(i);
            if deg > kappa {
                out.push(Violation {
                    node: i,
                    mode: None,
                    requirement: Requirement::OutdegreeBound,
                    detail: format!("{deg} > {kappa}"),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_successor_is_reported_once() {
        let mut p = MsspProblem::new(2);
        p.add_mode(0, vec![1, 1], CostModel::<f64>::euclidean(1.0, 2));
        p.add_mode(1, vec![2], CostModel::<f64>::constant(1.0));
        let v = validate_problem(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].requirement, Requirement::DistinctSuccessors);
        assert_eq!((v[0].node, v[0].mode), (0, Some(0)));
    }

    #[test]
    fn nonpositive_cost_sample_is_reported() {
        let mut p = MsspProblem::new(2);
        // 1 − 2ξ₁ξ₂·4 dips to −1 at the midpoint
        let c =
            CostModel::<f64>::custom(2, std::sync::Arc::new(|x: &[f64]| 1.0 - 8.0 * x[0] * x[1]));
        p.add_mode(0, vec![1, 2], c);
        p.add_mode(1, vec![2], CostModel::<f64>::constant(1.0));
        let v = validate_problem(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].requirement, Requirement::PositiveCost);
    }

    #[test]
    fn owner_and_kappa() {
        let mut p = MsspProblem::new(1).with_kappa(1);
        p.add_mode(0, vec![0, 1], CostModel::<f64>::euclidean(1.0, 2));
        let reqs: Vec<_> = validate_problem(&p)
            .into_iter()
            .map(|v| v.requirement)
            .collect();
        assert_eq!(
            reqs,
            vec![Requirement::OwnerExcluded, Requirement::OutdegreeBound]
        );
    }

    #[test]
    fn false_degree_claim_is_caught() {
        let mut p = MsspProblem::new(2);
        p.add_mode(
            0,
            vec![1, 2],
            CostModel::<f64>::polynomial(vec![1.0, 1.0]).with_degree(1.0),
        );
        p.add_mode(1, vec![2], CostModel::<f64>::constant(1.0));
        let v = validate_problem(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].requirement, Requirement::DegreeMetadata);
    }

    #[test]
    fn exit_mode_may_be_free() {
        let mut p = MsspProblem::new(1);
        p.add_mode(0, vec![1], CostModel::<f64>::constant(0.0));
        assert!(validate_problem(&p).is_empty());
    }
}
