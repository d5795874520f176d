//! Generators for the worked examples: the two-node loop, the auxiliary
//! single-mode problems, the circular list, both coin-tossing games and the
//! multitasking lattices.

use crate::error::{Error, Result};
use crate::model::cost::CostModel;
use crate::model::discrete::{minimize_ratio, DiscreteSsp};
use crate::model::MsspProblem;
use crate::simplex_opt::{minimize_mode, MinimizeOptions};
use crate::Real;

/// Grid resolution for the one-dimensional ratio minimizations.
pub const RATIO_RESOLUTION: usize = 20_000;

/// Default cost of the deterministic exits of the multitasking lattice.
pub const TERMINAL_EPSILON: f64 = 1e-6;

/// A generated MSSP with what is known about it a priori.
#[derive(Debug, Clone)]
pub struct Generated<T: Real> {
    pub problem: MsspProblem<T>,
    /// The union of all modes' successor graphs is acyclic.
    pub explicitly_causal: bool,
    /// Closed-form or independently computed values, target included.
    pub expected: Option<Vec<T>>,
}

/// `C₁(p) = 3 + 2p − p⁴ − (1−p)²`, concave.
pub fn cost_c1<T: Real>() -> CostModel<T> {
    CostModel::polynomial(
        [2.0, 4.0, -1.0, 0.0, -1.0]
            .iter()
            .map(|&c| T::lit(c))
            .collect(),
    )
    .declare_concave()
}

/// `C₂(p) = √(p² + (1−p)²)`, homogeneous of degree one.
pub fn cost_c2<T: Real>() -> CostModel<T> {
    CostModel::euclidean(T::one(), 2)
}

/// `C₃(p) = 4 + (p − ½)³`.
pub fn cost_c3<T: Real>() -> CostModel<T> {
    CostModel::polynomial(
        [3.875, 0.75, -1.5, 1.0]
            .iter()
            .map(|&c| T::lit(c))
            .collect(),
    )
}

/// Two nodes, each moving to the other or to `t` with probability ½ at cost
/// `c`; returns the model and its solution `(2c, 2c, 0)`.
pub fn make_fig1<T: Real>(c: T) -> Result<(DiscreteSsp<T>, Vec<T>)> {
    if !(c > T::zero()) {
        return Err(Error::InvalidSpec("cost must be positive".into()));
    }
    let half = T::lit(0.5);
    let mut d = DiscreteSsp::new(2);
    d.add_control(0, c, vec![(1, half), (2, half)]);
    d.add_control(1, c, vec![(0, half), (2, half)]);
    let u = c + c;
    Ok((d, vec![u, u, T::zero()]))
}

/// Single-mode problem around one mode: node `0` is `x` with the mode
/// `(z₁, …, zₙ)`, node `j` is `zⱼ` with a deterministic exit at cost `Wⱼ`.
pub fn make_auxiliary<T: Real>(cost: CostModel<T>, w: &[T]) -> Result<Generated<T>> {
    let n = cost.dim();
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    if w.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidSpec(
            "exit costs must be finite and nonnegative".into(),
        ));
    }
    let t = n + 1;
    let mut p = MsspProblem::new(n + 1);
    p.set_label(0, "x");
    p.add_mode(0, (1..=n).collect(), cost.clone());
    for (j, &c) in w.iter().enumerate() {
        p.set_label(j + 1, format!("z{}", j + 1));
        p.add_mode(j + 1, vec![t], CostModel::constant(c));
    }
    let r = minimize_mode(&cost, w, &MinimizeOptions::default());
    let mut expected = vec![r.value];
    expected.extend_from_slice(w);
    expected.push(T::zero());
    Ok(Generated {
        problem: p,
        explicitly_causal: true,
        expected: Some(expected),
    })
}

/// Three nodes: `x₁` and `x₃` exit at `c1t`, `c3t`; `x₂` has the single mode
/// `(x₁, x₃)`.
pub fn make_aux1<T: Real>(cost: CostModel<T>, c1t: T, c3t: T) -> Result<Generated<T>> {
    if cost.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: cost.dim(),
        });
    }
    if !(c1t > T::zero() && c3t > T::zero()) {
        return Err(Error::InvalidSpec("exit costs must be positive".into()));
    }
    let mut p = MsspProblem::new(3);
    for i in 0..3 {
        p.set_label(i, format!("x{}", i + 1));
    }
    p.add_mode(0, vec![3], CostModel::constant(c1t));
    p.add_mode(1, vec![0, 2], cost.clone());
    p.add_mode(2, vec![3], CostModel::constant(c3t));
    let u2 = minimize_mode(&cost, &[c1t, c3t], &MinimizeOptions::default()).value;
    Ok(Generated {
        problem: p,
        explicitly_causal: true,
        expected: Some(vec![c1t, u2, c3t, T::zero()]),
    })
}

/// Circular doubly linked list: node `i` has the mode `(i−1, i+1)` (mod `M`)
/// and the exit `{t}` at cost `exit_costs[i]`.
pub fn make_circular_list<T: Real>(
    exit_costs: &[T],
    mode_cost: CostModel<T>,
) -> Result<Generated<T>> {
    let m = exit_costs.len();
    if m < 3 {
        return Err(Error::InvalidSpec(
            "circular list needs at least 3 nodes".into(),
        ));
    }
    if mode_cost.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: mode_cost.dim(),
        });
    }
    if exit_costs
        .iter()
        .any(|&c| !(c > T::zero()) || !c.is_finite())
    {
        return Err(Error::InvalidSpec("exit costs must be positive".into()));
    }
    let mut p = MsspProblem::new(m).with_kappa(3);
    for i in 0..m {
        p.set_label(i, format!("x{}", i + 1));
        p.add_mode(i, vec![(i + m - 1) % m, (i + 1) % m], mode_cost.clone());
        p.add_mode(i, vec![m], CostModel::constant(exit_costs[i]));
    }
    Ok(Generated {
        problem: p,
        explicitly_causal: false,
        expected: None,
    })
}

/// Link costs of the first coin game: `Lᵢ` is the cost of the deterministic
/// transition `xᵢ → xᵢ₊₁` after collapsing every restart loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution<T> {
    pub links: Vec<T>,
    /// Optimal heads probability at each node.
    pub p_star: Vec<T>,
    /// `Uᵢ = Σ_{k ≥ i} Lₖ`, target included.
    pub values: Vec<T>,
}

/// Solves the first coin game in `K` one-dimensional minimizations:
/// `Lᵢ = min_p (C(p) + (1−p) Sᵢ) / p` with `Sᵢ = L₀ + … + Lᵢ₋₁`.
pub fn chain_collapse<T: Real>(cost: &CostModel<T>, k: usize) -> ChainSolution<T> {
    let mut links = Vec::with_capacity(k);
    let mut p_star = Vec::with_capacity(k);
    let mut s = T::zero();
    for _ in 0..k {
        let (l, p) = minimize_ratio(
            |p| cost.eval(&[p, T::one() - p]) + (T::one() - p) * s,
            RATIO_RESOLUTION,
        );
        links.push(l);
        p_star.push(p);
        s += l;
    }
    let mut values = vec![T::zero(); k + 1];
    for i in (0..k).rev() {
        values[i] = values[i + 1] + links[i];
    }
    ChainSolution {
        links,
        p_star,
        values,
    }
}

/// First coin game: `xᵢ` (after `i` heads) has the mode `(xᵢ₊₁, x₀)` with
/// `x_K = t`; the restart loop at `x₀` is pre-collapsed into a deterministic
/// step to `x₁`.
pub fn make_rg_game1<T: Real>(
    k: usize,
    cost: CostModel<T>,
) -> Result<(Generated<T>, ChainSolution<T>)> {
    if k == 0 {
        return Err(Error::InvalidSpec("K must be at least 1".into()));
    }
    if cost.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: cost.dim(),
        });
    }
    let chain = chain_collapse(&cost, k);
    let mut p = MsspProblem::new(k);
    for i in 0..k {
        p.set_label(i, format!("x{i}"));
    }
    p.add_mode(0, vec![1], CostModel::constant(chain.links[0]));
    for i in 1..k {
        p.add_mode(i, vec![i + 1, 0], cost.clone());
    }
    Ok((
        Generated {
            problem: p,
            explicitly_causal: k == 1,
            expected: Some(chain.values.clone()),
        },
        chain,
    ))
}

/// Second coin game: runs of `kh` heads or `kt` tails end the game. Node
/// `0` is `x₀`, nodes `1..kh` are `x₁ʰ…`, the next `kt − 1` are `x₁ᵗ…`.
/// Every node has the single mode (heads successor, tails successor).
pub fn make_rg_game2<T: Real>(kh: usize, kt: usize, cost: CostModel<T>) -> Result<Generated<T>> {
    if kh == 0 || kt == 0 {
        return Err(Error::InvalidSpec("K_h and K_t must be at least 1".into()));
    }
    if cost.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: cost.dim(),
        });
    }
    let m = kh + kt - 1;
    let t = m;
    let heads = |i: usize| {
        if i >= kh {
            t
        } else if i == 0 {
            0
        } else {
            i
        }
    };
    let tails = |i: usize| {
        if i >= kt {
            t
        } else if i == 0 {
            0
        } else {
            kh + i - 1
        }
    };
    let mut p = MsspProblem::new(m);
    // both outcomes end the game: pay the cheapest coin
    let both_exit =
        minimize_mode(&cost, &[T::zero(), T::zero()], &MinimizeOptions::default()).value;
    let mut add = |node: usize, h: usize, tl: usize| {
        if h == tl {
            p.add_mode(node, vec![h], CostModel::constant(both_exit));
        } else {
            p.add_mode(node, vec![h, tl], cost.clone());
        }
    };
    add(0, heads(1), tails(1));
    for i in 1..kh {
        add(heads(i), heads(i + 1), tails(1));
    }
    for i in 1..kt {
        add(tails(i), heads(1), tails(i + 1));
    }
    p.set_label(0, "x0");
    for i in 1..kh {
        p.set_label(heads(i), format!("h{i}"));
    }
    for i in 1..kt {
        p.set_label(tails(i), format!("t{i}"));
    }
    Ok(Generated {
        problem: p,
        explicitly_causal: kh == 1 || kt == 1,
        expected: None,
    })
}

/// Node layout of the multitasking lattices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    pub ka: usize,
    pub kb: usize,
}

impl Lattice {
    /// Interior nodes `x_{i,j}` (`i < K_A`, `j < K_B`) come first in
    /// row-major order, then `x_{K_A,j}`, then `x_{i,K_B}`.
    pub fn node(&self, i: usize, j: usize) -> usize {
        if i < self.ka && j < self.kb {
            i * self.kb + j
        } else if i == self.ka && j < self.kb {
            self.ka * self.kb + j
        } else {
            assert!(
                j == self.kb && i < self.ka,
                "x_({i},{j}) is not a lattice node"
            );
            self.ka * self.kb + self.kb + i
        }
    }

    pub fn node_count(&self) -> usize {
        self.ka * self.kb + self.ka + self.kb
    }
}

fn lattice_checks<T: Real>(
    ka: usize,
    kb: usize,
    cost: &CostModel<T>,
    dim: usize,
    eps: T,
) -> Result<()> {
    if ka == 0 || kb == 0 {
        return Err(Error::InvalidSpec("K_A and K_B must be at least 1".into()));
    }
    if cost.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: cost.dim(),
        });
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidSpec("terminal cost must be positive".into()));
    }
    Ok(())
}

fn lattice_problem<T: Real>(
    lat: Lattice,
    terminal_cost: T,
    mut interior: impl FnMut(&mut MsspProblem<T>, usize, usize),
) -> MsspProblem<T> {
    let mut p = MsspProblem::new(lat.node_count());
    let t = lat.node_count();
    for i in 0..=lat.ka {
        for j in 0..=lat.kb {
            if i == lat.ka && j == lat.kb {
                continue;
            }
            let x = lat.node(i, j);
            p.set_label(x, format!("x{i}_{j}"));
            if i == lat.ka || j == lat.kb {
                p.add_mode(x, vec![t], CostModel::constant(terminal_cost));
            } else {
                interior(&mut p, i, j);
            }
        }
    }
    p
}

/// Attention split between activities A and B: `x_{i,j}` has the single mode
/// `(x_{i+1,j}, x_{i,j+1})` over `(ξ_A, ξ_B)`; nodes with `i = K_A` or
/// `j = K_B` exit at `terminal_cost`.
pub fn make_multitask<T: Real>(
    ka: usize,
    kb: usize,
    cost: CostModel<T>,
    terminal_cost: T,
) -> Result<Generated<T>> {
    lattice_checks(ka, kb, &cost, 2, terminal_cost)?;
    let lat = Lattice { ka, kb };
    let p = lattice_problem(lat, terminal_cost, |p, i, j| {
        p.add_mode(
            lat.node(i, j),
            vec![lat.node(i + 1, j), lat.node(i, j + 1)],
            cost.clone(),
        );
    });
    Ok(Generated {
        problem: p,
        explicitly_causal: true,
        expected: None,
    })
}

/// The multitasking lattice with a third outcome, distraction, that resets
/// to `x_{0,0}`: modes `(x_{i+1,j}, x_{i,j+1}, x_{0,0})` over
/// `(ξ_A, ξ_B, ξ_D)`. At `x_{0,0}` itself the mode is restricted to the
/// `ξ_D = 0` facet.
pub fn make_multitask_distraction<T: Real>(
    ka: usize,
    kb: usize,
    cost: CostModel<T>,
    terminal_cost: T,
) -> Result<Generated<T>> {
    lattice_checks(ka, kb, &cost, 3, terminal_cost)?;
    let lat = Lattice { ka, kb };
    let origin = lat.node(0, 0);
    let facet = cost.restricted_to(vec![0, 1]);
    let p = lattice_problem(lat, terminal_cost, |p, i, j| {
        let x = lat.node(i, j);
        let (a, b) = (lat.node(i + 1, j), lat.node(i, j + 1));
        if x == origin {
            p.add_mode(x, vec![a, b], facet.clone());
        } else {
            p.add_mode(x, vec![a, b, origin], cost.clone());
        }
    });
    Ok(Generated {
        problem: p,
        explicitly_causal: ka == 1 && kb == 1,
        expected: None,
    })
}

/// Linear distraction cost `c_A ξ_A + c_B ξ_B + c_D ξ_D`: concave, so
/// label-setting applies; decreasing in `ξ_D` when `c_D` is the smallest.
pub fn linear_distraction_cost<T: Real>(ca: T, cb: T, cd: T) -> CostModel<T> {
    CostModel::linear(vec![ca, cb, cd])
}
