//! Certificates that a mode is absolutely δ-causal, their aggregation over a
//! problem, and a brute-force oracle for the defining property.
//!
//! A mode is absolutely δ-causal when for every `W ≥ 0`, every minimizer
//! `ξ*` of `C(ξ) + ξᵀW` and every `j` with `ξ*ⱼ > 0` we have
//! `V > Wⱼ + δ`. Three sufficient conditions are checked by sampling:
//! concavity (`δ = minⱼ C(eⱼ)`), the gradient bound for homogeneous costs
//! (`∂ⱼC − (d−1)C > δ` where `ξⱼ > 0`), and a bound on the projected Hessian
//! (`Λ_max < minⱼ C(eⱼ)`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::cost::CostModel;
use crate::model::{MsspProblem, NodeId};
use crate::simplex_opt::{minimize_mode, random_simplex_point, simplex_grid, MinimizeOptions};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeVerdict {
    CausalConcave,
    CausalHomogeneous,
    CausalHessianBound,
    Uncertified,
}

impl ModeVerdict {
    pub fn name(self) -> &'static str {
        match self {
            ModeVerdict::CausalConcave => "causal_concave",
            ModeVerdict::CausalHomogeneous => "causal_homogeneous",
            ModeVerdict::CausalHessianBound => "causal_hessian_bound",
            ModeVerdict::Uncertified => "uncertified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rigor {
    Structural,
    Sampled,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evidence<T> {
    pub min_vertex_cost: Option<T>,
    /// Sampled infimum of `∂ⱼC − (d−1)C` over the closed simplex.
    pub inf_gradient: Option<T>,
    pub max_projected_eigenvalue: Option<T>,
    pub samples: usize,
    /// Some derivative came from finite differences, one-sided on the
    /// simplex boundary.
    pub finite_differences: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeCertificate<T> {
    pub verdict: ModeVerdict,
    /// Largest certified δ; `None` when uncertified.
    pub delta: Option<T>,
    pub rigor: Rigor,
    pub evidence: Evidence<T>,
    /// Why the last criterion tried did not certify.
    pub reason: Option<String>,
}

impl<T: Real> ModeCertificate<T> {
    fn uncertified(evidence: Evidence<T>, reason: String) -> Self {
        ModeCertificate {
            verdict: ModeVerdict::Uncertified,
            delta: None,
            rigor: Rigor::Sampled,
            evidence,
            reason: Some(reason),
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict != ModeVerdict::Uncertified
    }
}

#[derive(Debug, Clone)]
pub struct CertifyOptions<T> {
    /// Subtracted from sampled infima and gaps.
    pub margin: T,
    pub midpoint_pairs: usize,
    pub midpoint_tol: T,
    pub seed: u64,
    /// Overrides the sampling grid resolution of the derivative criteria.
    pub resolution: Option<usize>,
    /// Run every criterion and keep the best δ instead of stopping at the
    /// first success.
    pub run_all: bool,
}

impl<T: Real> Default for CertifyOptions<T> {
    fn default() -> Self {
        CertifyOptions {
            margin: T::lit(1e-9),
            midpoint_pairs: 500,
            midpoint_tol: T::lit(1e-10),
            seed: 0x00c0_ffee,
            resolution: None,
            run_all: false,
        }
    }
}

/// Sampling resolution for the derivative criteria: 128 on `Ξ₂`, 32 on
/// `Ξ₃`, and coarser beyond so the grid stays near 6000 points.
pub fn certificate_resolution(n: usize) -> usize {
    match n {
        0..=2 => 128,
        3 => 32,
        _ => crate::model::validate::positivity_resolution(n, 6000),
    }
}

fn min_vertex_cost<T: Real>(cost: &CostModel<T>) -> T {
    cost.vertex_values().into_iter().fold(T::infinity(), T::min)
}

/// Concavity criterion: linear costs pass structurally; others by a midpoint
/// test on random pairs plus projected-Hessian signs when available.
pub fn certify_concave<T: Real>(
    cost: &CostModel<T>,
    opts: &CertifyOptions<T>,
) -> ModeCertificate<T> {
    let n = cost.dim();
    let vmin = min_vertex_cost(cost);
    let mut evidence = Evidence {
        min_vertex_cost: Some(vmin),
        ..Default::default()
    };
    if cost.is_linear() || n == 1 {
        return ModeCertificate {
            verdict: ModeVerdict::CausalConcave,
            delta: Some(vmin),
            rigor: if cost.is_linear() {
                Rigor::Structural
            } else {
                Rigor::Sampled
            },
            evidence,
            reason: None,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let half = T::lit(0.5);
    for _ in 0..opts.midpoint_pairs {
        let a: Vec<T> = random_simplex_point(&mut rng, n);
        let b: Vec<T> = random_simplex_point(&mut rng, n);
        let mid: Vec<T> = a.iter().zip(&b).map(|(&x, &y)| (x + y) * half).collect();
        let lhs = cost.eval(&mid);
        let rhs = (cost.eval(&a) + cost.eval(&b)) * half;
        evidence.samples += 1;
        if !(lhs >= rhs - opts.midpoint_tol) {
            return ModeCertificate::uncertified(
                evidence,
                format!("midpoint test failed: C(mid) = {lhs} < {rhs}"),
            );
        }
    }
    if cost.has_hessian() {
        let basis = linalg::simplex_tangent_basis::<T>(n);
        let r = certificate_resolution(n).min(32);
        let mut lmax = T::neg_infinity();
        for xi in simplex_grid::<T>(n, r) {
            if let Some(h) = cost.hessian(&xi) {
                if h.iter().flatten().all(|v| v.is_finite()) {
                    let eig = linalg::symmetric_eigenvalues(&linalg::congruence(&basis, &h));
                    lmax = lmax.max(eig[eig.len() - 1]);
                    evidence.samples += 1;
                }
            }
        }
        evidence.max_projected_eigenvalue = Some(lmax);
        if lmax > opts.midpoint_tol {
            return ModeCertificate::uncertified(
                evidence,
                format!("projected Hessian eigenvalue {lmax} > 0"),
            );
        }
    }
    ModeCertificate {
        verdict: ModeVerdict::CausalConcave,
        delta: Some(vmin),
        rigor: Rigor::Sampled,
        evidence,
        reason: None,
    }
}

/// `g(ξ, j) = ∂ⱼC(ξ) − (d − 1) C(ξ)`.
pub fn homogeneous_margin<T: Real>(cost: &CostModel<T>, d: T, xi: &[T]) -> Vec<T> {
    let c = cost.eval(xi);
    let g = cost.gradient_or_fd(xi);
    g.into_iter().map(|gj| gj - (d - T::one()) * c).collect()
}

/// Gradient criterion for homogeneous costs.
///
/// Certified iff `g(ξ, j) > 0` at every sampled `ξ` and `j` with `ξⱼ > 0`.
/// The reported δ is the infimum of `g` over the closed simplex (including
/// boundary points with `ξⱼ = 0`) minus the margin, floored at zero.
pub fn certify_homogeneous<T: Real>(
    cost: &CostModel<T>,
    opts: &CertifyOptions<T>,
) -> Result<ModeCertificate<T>> {
    let d = cost
        .degree()
        .ok_or(Error::MissingMetadata("homogeneity degree"))?;
    if !cost.has_gradient() {
        return Err(Error::MissingMetadata("gradient"));
    }
    let n = cost.dim();
    let r = opts.resolution.unwrap_or(certificate_resolution(n));
    let mut evidence = Evidence {
        min_vertex_cost: Some(min_vertex_cost(cost)),
        finite_differences: !cost.gradient_is_exact(),
        ..Default::default()
    };
    let mut inf_support = T::infinity();
    let mut witness = None;
    let mut inf_closure = T::infinity();
    for xi in simplex_grid::<T>(n, r) {
        let g = homogeneous_margin(cost, d, &xi);
        evidence.samples += 1;
        for (j, &gj) in g.iter().enumerate() {
            if gj.is_nan() {
                return Ok(ModeCertificate::uncertified(
                    evidence,
                    format!("non-finite gradient at {xi:?}"),
                ));
            }
            inf_closure = inf_closure.min(gj);
            if xi[j] > T::zero() && gj < inf_support {
                inf_support = gj;
                witness = Some((xi.clone(), j));
            }
        }
    }
    evidence.inf_gradient = Some(inf_closure);
    if !(inf_support > T::zero()) {
        let (xi, j) = witness.unwrap_or_default();
        return Ok(ModeCertificate::uncertified(
            evidence,
            format!("dC/dxi_{j} - (d-1)C = {inf_support} <= 0 at {xi:?}"),
        ));
    }
    Ok(ModeCertificate {
        verdict: ModeVerdict::CausalHomogeneous,
        delta: Some((inf_closure - opts.margin).max(T::zero())),
        rigor: Rigor::Sampled,
        evidence,
        reason: None,
    })
}

/// Eigenvalues of `BᵀH(ξ)B`, ascending.
pub fn projected_hessian_eigenvalues<T: Real>(h: &Matrix<T>, basis: &Matrix<T>) -> Vec<T> {
    linalg::symmetric_eigenvalues(&linalg::congruence(basis, h))
}

/// Projected-Hessian criterion: certified iff
/// `minⱼ C(eⱼ) > max(0, Λ_max)` with `Λ_max` the largest sampled eigenvalue
/// of `BᵀHB`; the gap minus the margin is reported as δ.
pub fn certify_hessian_bound<T: Real>(
    cost: &CostModel<T>,
    opts: &CertifyOptions<T>,
) -> Result<ModeCertificate<T>> {
    let n = cost.dim();
    if n < 2 {
        return Err(Error::InvalidSpec(
            "projected Hessian needs at least two successors".into(),
        ));
    }
    if !cost.has_hessian() && !cost.has_gradient() {
        return Err(Error::MissingMetadata("second derivatives"));
    }
    let basis = linalg::simplex_tangent_basis::<T>(n);
    let r = opts.resolution.unwrap_or(certificate_resolution(n));
    let step = T::lit(1e-5);
    let vmin = min_vertex_cost(cost);
    let mut evidence = Evidence {
        min_vertex_cost: Some(vmin),
        finite_differences: !cost.has_hessian(),
        ..Default::default()
    };
    let mut lmax = T::neg_infinity();
    for xi in simplex_grid::<T>(n, r) {
        let h = cost
            .hessian(&xi)
            .unwrap_or_else(|| cost.fd_hessian(&xi, step));
        if h.iter().flatten().any(|v| !v.is_finite()) {
            return Ok(ModeCertificate::uncertified(
                evidence,
                format!("non-finite Hessian at {xi:?}"),
            ));
        }
        let eig = projected_hessian_eigenvalues(&h, &basis);
        lmax = lmax.max(eig[eig.len() - 1]);
        evidence.samples += 1;
    }
    evidence.max_projected_eigenvalue = Some(lmax);
    let gap = vmin - lmax.max(T::zero());
    if !(gap > opts.margin) {
        return Ok(ModeCertificate::uncertified(
            evidence,
            format!("max projected eigenvalue {lmax} not below min vertex cost {vmin}"),
        ));
    }
    Ok(ModeCertificate {
        verdict: ModeVerdict::CausalHessianBound,
        delta: Some(gap - opts.margin),
        rigor: Rigor::Sampled,
        evidence,
        reason: None,
    })
}

/// Concave, then homogeneous, then Hessian bound; the first success wins
/// unless `run_all` is set, in which case the largest δ is kept.
pub fn certify_mode<T: Real>(cost: &CostModel<T>, opts: &CertifyOptions<T>) -> ModeCertificate<T> {
    let mut best: Option<ModeCertificate<T>> = None;
    let mut reasons = Vec::new();
    let criteria: [&dyn Fn() -> Result<ModeCertificate<T>>; 3] = [
        &|| Ok(certify_concave(cost, opts)),
        &|| certify_homogeneous(cost, opts),
        &|| certify_hessian_bound(cost, opts),
    ];
    for criterion in criteria {
        match criterion() {
            Ok(c) if c.is_certified() => {
                if best.as_ref().is_none_or(|b| c.delta > b.delta) {
                    best = Some(c);
                }
                if !opts.run_all {
                    break;
                }
            }
            Ok(c) => reasons.push(c.reason.unwrap_or_default()),
            Err(e) => reasons.push(e.to_string()),
        }
    }
    best.unwrap_or_else(|| {
        ModeCertificate::uncertified(
            Evidence {
                min_vertex_cost: Some(min_vertex_cost(cost)),
                ..Default::default()
            },
            reasons.join("; "),
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemVerdict<T> {
    DialOk(T),
    DijkstraOk,
    Unknown,
}

impl<T: Real> ProblemVerdict<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemVerdict::DialOk(_) => "dial_ok",
            ProblemVerdict::DijkstraOk => "dijkstra_ok",
            ProblemVerdict::Unknown => "unknown",
        }
    }

    pub fn label_setting_ok(&self) -> bool {
        !matches!(self, ProblemVerdict::Unknown)
    }
}

#[derive(Debug, Clone)]
pub struct ProblemCertificate<T> {
    /// Per node, per mode.
    pub modes: Vec<Vec<ModeCertificate<T>>>,
    /// Minimum certified δ over modes that do not lead straight to the
    /// target; `None` if some mode is uncertified.
    pub delta: Option<T>,
    pub verdict: ProblemVerdict<T>,
}

impl<T: Real> ProblemCertificate<T> {
    /// Width to hand to `dial_solve`: `Δ`, or `0.99·Δ` when a Hessian-bound
    /// certificate is involved since that criterion holds only strictly
    /// below its gap.
    pub fn bucket_width(&self) -> Option<T> {
        match self.verdict {
            ProblemVerdict::DialOk(d) => {
                let hessian = self
                    .modes
                    .iter()
                    .flatten()
                    .any(|c| c.verdict == ModeVerdict::CausalHessianBound);
                Some(if hessian { d * T::lit(0.99) } else { d })
            }
            _ => None,
        }
    }

    pub fn uncertified_modes(&self) -> Vec<(NodeId, usize, &ModeCertificate<T>)> {
        self.modes
            .iter()
            .enumerate()
            .flat_map(|(i, ms)| ms.iter().enumerate().map(move |(k, c)| (i, k, c)))
            .filter(|(_, _, c)| !c.is_certified())
            .collect()
    }
}

/// Certifies every mode and aggregates.
///
/// Exit modes (whose only successor is the target) never constrain the
/// bucket width: the target is permanent before anything else is labeled.
pub fn certify_problem<T: Real>(
    problem: &MsspProblem<T>,
    opts: &CertifyOptions<T>,
) -> ProblemCertificate<T> {
    let target = problem.target();
    let modes: Vec<Vec<ModeCertificate<T>>> = (0..problem.node_count())
        .into_par_iter()
        .map(|i| {
            problem
                .modes(i)
                .iter()
                .map(|m| certify_mode(&m.cost, opts))
                .collect()
        })
        .collect();
    let mut all = true;
    let mut delta_inner = T::infinity();
    let mut delta_exit = T::infinity();
    for (i, ms) in modes.iter().enumerate() {
        for (k, c) in ms.iter().enumerate() {
            match c.delta {
                Some(d) if c.is_certified() => {
                    if problem.modes(i)[k].successors == [target] {
                        delta_exit = delta_exit.min(d);
                    } else {
                        delta_inner = delta_inner.min(d);
                    }
                }
                _ => all = false,
            }
        }
    }
    let delta = if !all {
        None
    } else if delta_inner.is_finite() {
        Some(delta_inner)
    } else if delta_exit.is_finite() {
        Some(delta_exit)
    } else {
        Some(T::zero())
    };
    let verdict = match delta {
        Some(d) if d > T::zero() => ProblemVerdict::DialOk(d),
        Some(_) => ProblemVerdict::DijkstraOk,
        None => ProblemVerdict::Unknown,
    };
    ProblemCertificate {
        modes,
        delta,
        verdict,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalityViolation<T> {
    pub w: Vec<T>,
    pub xi: Vec<T>,
    pub j: usize,
    pub value: T,
}

#[derive(Debug, Clone)]
pub struct OracleOptions<T> {
    pub samples: usize,
    pub w_max: T,
    pub seed: u64,
    /// Minimize numerically even where a closed form exists, so the oracle
    /// does not lean on the closed forms it is checking.
    pub force_numeric: bool,
    pub slack: T,
}

impl<T: Real> Default for OracleOptions<T> {
    fn default() -> Self {
        OracleOptions {
            samples: 1000,
            w_max: T::lit(10.0),
            seed: 0x5eed,
            force_numeric: true,
            slack: T::lit(1e-7),
        }
    }
}

/// Tests the defining inequality at one `W`: any near-minimizer `ξ` with
/// `ξⱼ > 1e-9` and `V ≤ Wⱼ + δ − 1e-9` is a violation.
pub fn oracle_check_w<T: Real>(
    cost: &CostModel<T>,
    w: &[T],
    delta: T,
    opts: &OracleOptions<T>,
) -> Option<CausalityViolation<T>> {
    let mopts = MinimizeOptions {
        collect_near_minimizers: true,
        force_numeric: opts.force_numeric,
        slack: opts.slack,
        ..Default::default()
    };
    let r = minimize_mode(cost, w, &mopts);
    let eps = T::lit(1e-9);
    for p in &r.near_minimizers {
        for (j, &x) in p.xi.iter().enumerate() {
            if x > eps && r.value <= w[j] + delta - eps {
                return Some(CausalityViolation {
                    w: w.to_vec(),
                    xi: p.xi.clone(),
                    j,
                    value: r.value,
                });
            }
        }
    }
    None
}

/// Brute-force search for a counterexample to absolute δ-causality:
/// structured corners (zero, scaled one-hot, all equal) followed by
/// `samples` uniform draws from `[0, W_max]ⁿ`.
pub fn oracle_mode_causality<T: Real>(
    cost: &CostModel<T>,
    delta: T,
    opts: &OracleOptions<T>,
) -> Option<CausalityViolation<T>> {
    let n = cost.dim();
    let mut ws: Vec<Vec<T>> = vec![vec![T::zero(); n]];
    for j in 0..n {
        let mut w = vec![T::zero(); n];
        w[j] = opts.w_max;
        ws.push(w);
    }
    ws.push(vec![opts.w_max / T::lit(2.0); n]);
    if let Some(v) = ws.iter().find_map(|w| oracle_check_w(cost, w, delta, opts)) {
        return Some(v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws: Vec<Vec<T>> = (0..opts.samples)
        .map(|_| {
            (0..n)
                .map(|_| T::lit(rng.gen::<f64>()) * opts.w_max)
                .collect()
        })
        .collect();
    draws
        .par_iter()
        .map(|w| oracle_check_w(cost, w, delta, opts))
        .find_first(|v| v.is_some())
        .flatten()
}

/// The explicit counterexample for strictly convex homogeneous costs: an
/// interior `ξ̄` and `j` with `g(ξ̄, j) ≤ δ`, and
/// `Wᵢ = K − ∂ᵢC(ξ̄)` with `K = 1 + maxᵢ ∂ᵢC(ξ̄)`, which makes `ξ̄` the
/// unique minimizer with `V − Wⱼ = g(ξ̄, j)`.
///
/// Returns `(ξ̄, j, W)` for the interior grid point with the smallest `g`,
/// or `None` if none is at most δ.
pub fn necessity_witness<T: Real>(
    cost: &CostModel<T>,
    delta: T,
    resolution: usize,
) -> Result<Option<(Vec<T>, usize, Vec<T>)>> {
    let d = cost
        .degree()
        .ok_or(Error::MissingMetadata("homogeneity degree"))?;
    if !cost.has_gradient() {
        return Err(Error::MissingMetadata("gradient"));
    }
    let n = cost.dim();
    let mut best: Option<(T, Vec<T>, usize)> = None;
    for xi in simplex_grid::<T>(n, resolution) {
        if xi.iter().any(|&v| v == T::zero()) {
            continue;
        }
        let g = homogeneous_margin(cost, d, &xi);
        for (j, &gj) in g.iter().enumerate() {
            if best.as_ref().is_none_or(|b| gj < b.0) {
                best = Some((gj, xi.clone(), j));
            }
        }
    }
    let Some((g, xi, j)) = best else {
        return Ok(None);
    };
    if g > delta {
        return Ok(None);
    }
    let grad = cost.gradient_or_fd(&xi);
    let k = T::one() + grad.iter().copied().fold(T::neg_infinity(), T::max);
    let w = grad.iter().map(|&gi| k - gi).collect();
    Ok(Some((xi, j, w)))
}
