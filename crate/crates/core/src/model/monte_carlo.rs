//! Monte Carlo estimates of a stationary policy's expected cost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::bellman::SspModel;
use crate::model::{Control, NodeId};
use crate::Real;

pub const STEP_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    /// Set when some rollout cannot or did not reach the target; `mean` is
    /// then `+∞`.
    pub improper: bool,
}

/// Nodes from which the policy's transition graph (positive-probability
/// edges only) reaches the target.
fn policy_reaches_target<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    policy: &[Option<Control<T>>],
) -> Vec<bool> {
    let n = model.state_count();
    let t = model.target();
    let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (i, c) in policy.iter().enumerate() {
        if i == t {
            continue;
        }
        if let Some(c) = c {
            for (j, &p) in model.action_successors(i, c.mode_index).iter().zip(&c.xi) {
                if p > T::zero() {
                    preds[*j].push(i);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    seen[t] = true;
    let mut stack = vec![t];
    while let Some(j) = stack.pop() {
        for &i in &preds[j] {
            if !seen[i] {
                seen[i] = true;
                stack.push(i);
            }
        }
    }
    seen
}

/// Simulates `trials` rollouts from `node` under `policy`.
///
/// Nodes that cannot reach the target under the policy are flagged without
/// simulating; otherwise rollouts are capped at `STEP_CAP` steps and a
/// capped rollout flags the estimate as improper.
pub fn evaluate_policy_monte_carlo<T: Real, P: SspModel<T> + ?Sized>(
    model: &P,
    policy: &[Option<Control<T>>],
    node: NodeId,
    trials: usize,
    seed: u64,
) -> PolicyEstimate {
    let t = model.target();
    let flagged = PolicyEstimate {
        mean: f64::INFINITY,
        std_error: f64::INFINITY,
        trials,
        improper: true,
    };
    let reach = policy_reaches_target(model, policy);
    if !reach[node] {
        return flagged;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Welford running mean and squared deviations
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for trial in 0..trials {
        let mut x = node;
        let mut total = 0.0;
        let mut steps = 0;
        while x != t {
            if steps == STEP_CAP {
                return flagged;
            }
            let Some(c) = &policy[x] else {
                return flagged;
            };
            total += model.control_cost(x, c.mode_index, &c.xi).to_f64_lossy();
            let succ = model.action_successors(x, c.mode_index);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut next = succ[succ.len() - 1];
            for (&j, &p) in succ.iter().zip(&c.xi) {
                acc += p.to_f64_lossy();
                if u < acc {
                    next = j;
                    break;
                }
            }
            x = next;
            steps += 1;
        }
        let delta = total - mean;
        mean += delta / (trial + 1) as f64;
        m2 += delta * (total - mean);
    }
    let k = trials as f64;
    let var = if trials > 1 { m2 / (k - 1.0) } else { 0.0 };
    PolicyEstimate {
        mean,
        std_error: (var / k).sqrt(),
        trials,
        improper: false,
    }
}
