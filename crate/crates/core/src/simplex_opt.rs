//! Minimization of `F(ξ, W) = C(ξ) + ξᵀW` over the probability simplex.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::cost::{unit, CostModel};
use crate::scalar::weighted_sum;
use crate::Real;

/// Entries at or below this are treated as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<T> {
    pub xi: Vec<T>,
    pub support: Vec<usize>,
}

impl<T: Real> SimplexPoint<T> {
    pub fn new(xi: Vec<T>) -> Self {
        let tol = T::lit(SUPPORT_TOL);
        let support = xi
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > tol)
            .map(|(i, _)| i)
            .collect();
        SimplexPoint { xi, support }
    }

    pub fn vertex(n: usize, j: usize) -> Self {
        Self::new(unit(n, j))
    }

    pub fn empty() -> Self {
        SimplexPoint {
            xi: Vec::new(),
            support: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinMethod {
    SingleSuccessor,
    Vertex,
    ClosedForm,
    GoldenSection,
    GridPolish,
    Unreachable,
}

#[derive(Debug, Clone)]
pub struct ModeMinResult<T> {
    pub value: T,
    pub minimizer: SimplexPoint<T>,
    /// Points whose objective lies within the slack of `value`; always
    /// contains the minimizer when collection was requested.
    pub near_minimizers: Vec<SimplexPoint<T>>,
    pub method: MinMethod,
    /// Some cost evaluation returned NaN or ±∞.
    pub non_finite: bool,
}

#[derive(Debug, Clone)]
pub struct MinimizeOptions<T> {
    /// Grid resolution override; defaults depend on `n`.
    pub resolution: Option<usize>,
    /// Polishing stops once a step moves `ξ` less than this (sup norm).
    pub polish_tol: T,
    /// Relative slack for near-minimizers: `slack · (1 + |V|)`.
    pub slack: T,
    pub collect_near_minimizers: bool,
    /// Skip vertex and closed-form shortcuts.
    pub force_numeric: bool,
}

impl<T: Real> Default for MinimizeOptions<T> {
    fn default() -> Self {
        MinimizeOptions {
            resolution: None,
            polish_tol: T::lit(1e-10),
            slack: T::lit(1e-7),
            collect_near_minimizers: false,
            force_numeric: false,
        }
    }
}

pub fn default_resolution(n: usize) -> usize {
    match n {
        0..=2 => 256,
        3 => 64,
        _ => 16,
    }
}

/// All points `k / r` with nonnegative integer `k` summing to `r`, in
/// ascending lexicographic order of `k`.
pub fn simplex_grid<T: Real>(n: usize, r: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut k = vec![0usize; n];
    let rf = T::from_usize_lossy(r);
    fn rec<T: Real>(pos: usize, left: usize, k: &mut [usize], rf: T, out: &mut Vec<Vec<T>>) {
        let n = k.len();
        if pos == n - 1 {
            k[pos] = left;
            out.push(k.iter().map(|&v| T::from_usize_lossy(v) / rf).collect());
            return;
        }
        for v in 0..=left {
            k[pos] = v;
            rec(pos + 1, left - v, k, rf, out);
        }
    }
    if n == 0 {
        return out;
    }
    rec(0, r, &mut k, rf, &mut out);
    out
}

/// Uniformly distributed point of `Ξₙ`.
pub fn random_simplex_point<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<T> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| T::lit(v / s)).collect()
}

fn objective<T: Real>(cost: &CostModel<T>, w: &[T], xi: &[T], bad: &mut bool) -> T {
    let c = cost.eval(xi);
    if !c.is_finite() {
        *bad = true;
    }
    c + weighted_sum(xi, w)
}

/// Solves `min_{ξ ∈ Ξₙ} C(ξ) + ξᵀW`.
///
/// Infinite `Wⱼ` force `ξⱼ = 0`; if every entry is infinite the value is `+∞`
/// with an empty minimizer.
pub fn minimize_mode<T: Real>(
    cost: &CostModel<T>,
    w: &[T],
    opts: &MinimizeOptions<T>,
) -> ModeMinResult<T> {
    let n = cost.dim();
    assert_eq!(w.len(), n, "W length must match mode size");
    let finite: Vec<usize> = (0..n).filter(|&j| w[j].is_finite()).collect();
    if finite.is_empty() {
        return ModeMinResult {
            value: T::infinity(),
            minimizer: SimplexPoint::empty(),
            near_minimizers: Vec::new(),
            method: MinMethod::Unreachable,
            non_finite: false,
        };
    }
    if finite.len() < n {
        let sub = cost.restricted_to(finite.clone());
        let sub_w: Vec<T> = finite.iter().map(|&j| w[j]).collect();
        let r = minimize_mode(&sub, &sub_w, opts);
        let lift = |p: &SimplexPoint<T>| {
            let mut xi = vec![T::zero(); n];
            for (&j, &v) in finite.iter().zip(&p.xi) {
                xi[j] = v;
            }
            SimplexPoint::new(xi)
        };
        return ModeMinResult {
            value: r.value,
            minimizer: lift(&r.minimizer),
            near_minimizers: r.near_minimizers.iter().map(lift).collect(),
            method: r.method,
            non_finite: r.non_finite,
        };
    }
    let mut bad = false;
    let mut result = if n == 1 {
        let value = objective(cost, w, &[T::one()], &mut bad);
        ModeMinResult {
            value,
            minimizer: SimplexPoint::vertex(1, 0),
            near_minimizers: Vec::new(),
            method: MinMethod::SingleSuccessor,
            non_finite: bad,
        }
    } else if !opts.force_numeric && cost.is_concave() {
        vertex_min(cost, w)
    } else if let (false, Some(s)) = (opts.force_numeric, cost.isotropic_scale()) {
        let (value, xi) = isotropic_update(s, w);
        ModeMinResult {
            value,
            minimizer: SimplexPoint::new(xi),
            near_minimizers: Vec::new(),
            method: MinMethod::ClosedForm,
            non_finite: !value.is_finite(),
        }
    } else if n == 2 {
        golden_min(cost, w, opts)
    } else {
        grid_polish_min(cost, w, opts)
    };
    if opts.collect_near_minimizers {
        result.near_minimizers = near_minimizers(cost, w, &result, opts);
    }
    result
}

/// `minⱼ C(eⱼ) + Wⱼ`, lowest index on ties.
///
/// Only valid for concave costs, and refuses anything not marked concave.
pub fn vertex_shortcut<T: Real>(cost: &CostModel<T>, w: &[T]) -> Result<ModeMinResult<T>> {
    if !cost.is_concave() {
        return Err(Error::NotConcave);
    }
    let n = cost.dim();
    let finite: Vec<usize> = (0..n).filter(|&j| w[j].is_finite()).collect();
    if finite.is_empty() {
        return Ok(minimize_mode(cost, w, &MinimizeOptions::default()));
    }
    Ok(vertex_min(cost, w))
}

fn vertex_min<T: Real>(cost: &CostModel<T>, w: &[T]) -> ModeMinResult<T> {
    let n = cost.dim();
    let mut bad = false;
    let mut best = (T::infinity(), 0usize);
    for j in 0..n {
        if !w[j].is_finite() {
            continue;
        }
        let v = objective(cost, w, &unit(n, j), &mut bad);
        if v < best.0 {
            best = (v, j);
        }
    }
    ModeMinResult {
        value: best.0,
        minimizer: SimplexPoint::vertex(n, best.1),
        near_minimizers: Vec::new(),
        method: MinMethod::Vertex,
        non_finite: bad,
    }
}

/// Closed-form minimizer of `s‖ξ‖₂ + ξᵀW` over `Ξₙ` for finite `W`.
///
/// At the optimum `V − Wⱼ = s ξⱼ/‖ξ‖` on the support, so `ξⱼ ∝ V − Wⱼ` and
/// `Σ (V − Wⱼ)² = s²`; the support is the `k` smallest entries of `W` for
/// the first `k` whose root does not exceed the next entry.
pub fn isotropic_update<T: Real>(s: T, w: &[T]) -> (T, Vec<T>) {
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        w[a].partial_cmp(&w[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    let mut value = w[order[0]] + s;
    let mut k_used = 1;
    for k in 1..=n {
        let wk = w[order[k - 1]];
        if !wk.is_finite() {
            break;
        }
        sum += wk;
        sum_sq += wk * wk;
        let kf = T::from_usize_lossy(k);
        let disc = sum * sum - kf * (sum_sq - s * s);
        if disc < T::zero() {
            break;
        }
        let u = (sum + disc.sqrt()) / kf;
        if u < wk {
            break;
        }
        value = u;
        k_used = k;
        if k == n || u <= w[order[k]] {
            break;
        }
    }
    let mut xi = vec![T::zero(); n];
    let total: T = order[..k_used].iter().map(|&j| value - w[j]).sum();
    if total > T::zero() {
        for &j in &order[..k_used] {
            xi[j] = (value - w[j]) / total;
        }
    } else {
        xi[order[0]] = T::one();
    }
    (value, xi)
}

fn golden_min<T: Real>(
    cost: &CostModel<T>,
    w: &[T],
    opts: &MinimizeOptions<T>,
) -> ModeMinResult<T> {
    let r = opts.resolution.unwrap_or(default_resolution(2));
    let mut bad = false;
    let f = |t: T, bad: &mut bool| objective(cost, w, &[t, T::one() - t], bad);
    let rf = T::from_usize_lossy(r);
    // scan in the ascending lexicographic order of (ξ₁, ξ₂)
    let mut best = (T::infinity(), 0usize);
    for k in 0..=r {
        let v = f(T::from_usize_lossy(k) / rf, &mut bad);
        if v < best.0 {
            best = (v, k);
        }
    }
    let mut best_t = T::from_usize_lossy(best.1) / rf;
    let mut best_v = best.0;
    let lo = T::from_usize_lossy(best.1.saturating_sub(1)) / rf;
    let hi = T::from_usize_lossy((best.1 + 1).min(r)) / rf;
    let (t, v) = golden_section(|t| f(t, &mut bad), lo, hi, T::lit(1e-12));
    // a vertex wins exact ties so boundary minima are not smeared inward
    let tie = T::lit(1e-15) * (T::one() + best_v.abs());
    if v < best_v - tie {
        best_t = t;
        best_v = v;
    }
    // e₁ is t = 1, e₂ is t = 0
    for vt in [T::one(), T::zero()] {
        let vv = f(vt, &mut bad);
        if vv <= best_v + tie {
            best_t = vt;
            best_v = vv;
            break;
        }
    }
    ModeMinResult {
        value: best_v,
        minimizer: SimplexPoint::new(vec![best_t, T::one() - best_t]),
        near_minimizers: Vec::new(),
        method: MinMethod::GoldenSection,
        non_finite: bad,
    }
}

/// Golden-section search on `[a, b]`; returns the best point seen.
pub fn golden_section<T: Real>(mut f: impl FnMut(T) -> T, a: T, b: T, tol: T) -> (T, T) {
    let g = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

fn grid_polish_min<T: Real>(
    cost: &CostModel<T>,
    w: &[T],
    opts: &MinimizeOptions<T>,
) -> ModeMinResult<T> {
    let n = cost.dim();
    let r = opts.resolution.unwrap_or(default_resolution(n));
    let mut bad = false;
    let mut best: (T, Vec<T>) = (T::infinity(), unit(n, 0));
    for p in simplex_grid::<T>(n, r) {
        let v = objective(cost, w, &p, &mut bad);
        if v < best.0 {
            best = (v, p);
        }
    }
    let (mut x, mut fx) = (best.1, best.0);
    let step0 = T::lit(1.0 / r as f64);
    let fd_step = T::lit(crate::model::cost::FD_STEP);
    let mut alpha = step0;
    for _ in 0..2000 {
        let mut g = cost
            .gradient(&x)
            .unwrap_or_else(|| cost.fd_gradient(&x, fd_step));
        for (gj, &wj) in g.iter_mut().zip(w) {
            *gj += wj;
        }
        // Armijo backtracking along the projected path
        let mut improved = false;
        let mut a = alpha * T::lit(4.0);
        while a > T::lit(1e-14) {
            let trial: Vec<T> = x.iter().zip(&g).map(|(&xi, &gi)| xi - a * gi).collect();
            let y = linalg::project_to_simplex(&trial);
            let fy = objective(cost, w, &y, &mut bad);
            let decrease: T = x
                .iter()
                .zip(&y)
                .zip(&g)
                .map(|((&xi, &yi), &gi)| gi * (xi - yi))
                .sum();
            if fy < fx && fx - fy >= T::lit(1e-4) * decrease {
                let moved = crate::scalar::sup_distance(&x, &y);
                x = y;
                fx = fy;
                alpha = a;
                improved = moved > opts.polish_tol;
                break;
            }
            a /= T::lit(2.0);
        }
        if !improved {
            break;
        }
    }
    for j in 0..n {
        let vv = objective(cost, w, &unit(n, j), &mut bad);
        if vv <= fx {
            x = unit(n, j);
            fx = vv;
            break;
        }
    }
    ModeMinResult {
        value: fx,
        minimizer: SimplexPoint::new(x),
        near_minimizers: Vec::new(),
        method: MinMethod::GridPolish,
        non_finite: bad,
    }
}

fn near_minimizers<T: Real>(
    cost: &CostModel<T>,
    w: &[T],
    result: &ModeMinResult<T>,
    opts: &MinimizeOptions<T>,
) -> Vec<SimplexPoint<T>> {
    let n = cost.dim();
    let mut out = vec![result.minimizer.clone()];
    if n == 1 || !result.value.is_finite() {
        return out;
    }
    let cutoff = result.value + opts.slack * (T::one() + result.value.abs());
    let finite: Vec<usize> = (0..n).filter(|&j| w[j].is_finite()).collect();
    let r = opts.resolution.unwrap_or(default_resolution(finite.len()));
    let mut bad = false;
    for p in simplex_grid::<T>(finite.len(), r) {
        let mut xi = vec![T::zero(); n];
        for (&j, &v) in finite.iter().zip(&p) {
            xi[j] = v;
        }
        if objective(cost, w, &xi, &mut bad) <= cutoff && xi != result.minimizer.xi {
            out.push(SimplexPoint::new(xi));
        }
    }
    out
}
