//! Per-mode transition costs `C(ξ)` over the probability simplex.

use std::fmt;
use std::sync::Arc;

use crate::eikonal::Speed;
use crate::linalg::{self, Matrix};
use crate::Real;

pub type ValueFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type GradientFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
pub type HessianFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;

/// Default finite-difference step on barycentric coordinates.
pub const FD_STEP: f64 = 1e-6;

/// The cost families the toolkit knows how to evaluate, differentiate and
/// serialize.
#[derive(Clone)]
pub enum CostKind<T: Real> {
    /// `Σ cⱼ ξⱼ`.
    Linear { coeffs: Vec<T> },
    /// `s · √(Σ wⱼ ξⱼ²)`; the isotropic 4-stencil cost when all `wⱼ = 1`.
    WeightedEuclidean { scale: T, weights: Vec<T> },
    /// `s · ‖Σ ξⱼ vⱼ‖` for displacement vectors `vⱼ`; covers the 8-stencil
    /// and isotropic simplicial-mesh costs.
    EuclideanOffset { scale: T, offsets: Vec<Vec<T>> },
    /// Univariate polynomial `Σ aₖ pᵏ` in `p = ξ₁` on the 2-simplex.
    Polynomial { coeffs: Vec<T> },
    /// `τ(ξ) / f(x, a_ξ)` with `τ(ξ) = ‖Σ ξⱼ vⱼ‖` and `a_ξ` the unit
    /// displacement direction.
    SemiLagrangian {
        offsets: Vec<Vec<T>>,
        position: Vec<T>,
        speed: Arc<dyn Speed<T>>,
    },
    /// The inner cost restricted to the face spanned by `keep`.
    Facet {
        inner: Box<CostModel<T>>,
        keep: Vec<usize>,
    },
    /// `‖ξ‖₁ · C(ξ / ‖ξ‖₁)`, the degree-one extension of any cost.
    Homogenized { inner: Box<CostModel<T>> },
    Custom {
        dim: usize,
        value: ValueFn<T>,
        gradient: Option<GradientFn<T>>,
        hessian: Option<HessianFn<T>>,
    },
}

/// A cost function together with the metadata certifiers rely on.
#[derive(Clone)]
pub struct CostModel<T: Real> {
    kind: CostKind<T>,
    degree: Option<T>,
    concave: bool,
}

impl<T: Real> CostModel<T> {
    fn with_kind(kind: CostKind<T>, degree: Option<T>) -> Self {
        CostModel {
            kind,
            degree,
            concave: false,
        }
    }

    pub fn linear(coeffs: Vec<T>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "linear cost needs at least one coefficient"
        );
        Self::with_kind(CostKind::Linear { coeffs }, Some(T::one()))
    }

    /// Deterministic single-successor cost.
    pub fn constant(c: T) -> Self {
        Self::linear(vec![c])
    }

    pub fn weighted_euclidean(scale: T, weights: Vec<T>) -> Self {
        assert!(!weights.is_empty());
        Self::with_kind(
            CostKind::WeightedEuclidean { scale, weights },
            Some(T::one()),
        )
    }

    /// `s · ‖ξ‖₂` on `Ξₙ`.
    pub fn euclidean(scale: T, n: usize) -> Self {
        Self::weighted_euclidean(scale, vec![T::one(); n])
    }

    pub fn euclidean_offset(scale: T, offsets: Vec<Vec<T>>) -> Self {
        assert!(!offsets.is_empty());
        Self::with_kind(CostKind::EuclideanOffset { scale, offsets }, Some(T::one()))
    }

    /// Polynomial in `p = ξ₁` on `Ξ₂`, coefficients in increasing degree.
    pub fn polynomial(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty());
        Self::with_kind(CostKind::Polynomial { coeffs }, None)
    }

    pub fn semi_lagrangian(
        offsets: Vec<Vec<T>>,
        position: Vec<T>,
        speed: Arc<dyn Speed<T>>,
    ) -> Self {
        assert!(!offsets.is_empty());
        Self::with_kind(
            CostKind::SemiLagrangian {
                offsets,
                position,
                speed,
            },
            Some(T::one()),
        )
    }

    pub fn custom(dim: usize, value: ValueFn<T>) -> Self {
        Self::with_kind(
            CostKind::Custom {
                dim,
                value,
                gradient: None,
                hessian: None,
            },
            None,
        )
    }

    /// Attaches an analytic gradient. Only meaningful for custom costs.
    pub fn with_gradient(mut self, g: GradientFn<T>) -> Self {
        if let CostKind::Custom { gradient, .. } = &mut self.kind {
            *gradient = Some(g);
        }
        self
    }

    /// Attaches an analytic Hessian. Only meaningful for custom costs.
    pub fn with_hessian(mut self, h: HessianFn<T>) -> Self {
        if let CostKind::Custom { hessian, .. } = &mut self.kind {
            *hessian = Some(h);
        }
        self
    }

    /// Declares homogeneity of degree `d`; checked by `validate_problem`.
    pub fn with_degree(mut self, d: T) -> Self {
        self.degree = Some(d);
        self
    }

    /// Declares the cost concave on the simplex. Enables the vertex shortcut
    /// in the mode minimizer; the concavity certifier re-checks it by sampling.
    pub fn declare_concave(mut self) -> Self {
        self.concave = true;
        self
    }

    /// Restricts the cost to the face `{ξ : ξᵢ = 0 for i ∉ keep}`.
    pub fn restricted_to(&self, keep: Vec<usize>) -> Self {
        assert!(!keep.is_empty() && keep.iter().all(|&i| i < self.dim()));
        CostModel {
            kind: CostKind::Facet {
                inner: Box::new(self.clone()),
                keep,
            },
            degree: self.degree,
            concave: self.is_concave(),
        }
    }

    /// The degree-one homogeneous extension `‖ξ‖₁ C(ξ/‖ξ‖₁)`.
    pub fn homogenized(&self) -> Self {
        CostModel {
            kind: CostKind::Homogenized {
                inner: Box::new(self.clone()),
            },
            degree: Some(T::one()),
            concave: false,
        }
    }

    pub fn kind(&self) -> &CostKind<T> {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            CostKind::Linear { .. } => "linear",
            CostKind::WeightedEuclidean { .. } => "weighted-euclidean",
            CostKind::EuclideanOffset { .. } => "euclidean-offset",
            CostKind::Polynomial { .. } => "polynomial",
            CostKind::SemiLagrangian { .. } => "semi-lagrangian",
            CostKind::Facet { .. } => "facet",
            CostKind::Homogenized { .. } => "homogenized",
            CostKind::Custom { .. } => "custom",
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            CostKind::Linear { coeffs } => coeffs.len(),
            CostKind::WeightedEuclidean { weights, .. } => weights.len(),
            CostKind::EuclideanOffset { offsets, .. } => offsets.len(),
            CostKind::Polynomial { .. } => 2,
            CostKind::SemiLagrangian { offsets, .. } => offsets.len(),
            CostKind::Facet { keep, .. } => keep.len(),
            CostKind::Homogenized { inner } => inner.dim(),
            CostKind::Custom { dim, .. } => *dim,
        }
    }

    pub fn degree(&self) -> Option<T> {
        self.degree
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, CostKind::Linear { .. })
    }

    /// Linear, single-successor, or declared concave.
    pub fn is_concave(&self) -> bool {
        self.concave || self.is_linear() || self.dim() == 1
    }

    /// The factor `s` when the cost is `s·‖ξ‖₂` (equal weights, or orthogonal
    /// offsets of equal length); these have a closed-form minimizer.
    pub fn isotropic_scale(&self) -> Option<T> {
        match &self.kind {
            CostKind::WeightedEuclidean { scale, weights } => {
                let w0 = weights[0];
                if weights.iter().all(|&w| w == w0) && w0 > T::zero() {
                    Some(*scale * w0.sqrt())
                } else {
                    None
                }
            }
            CostKind::EuclideanOffset { scale, offsets } => {
                // mutually orthogonal offsets of equal length reduce to s·h·‖ξ‖
                let len2 = linalg::dot(&offsets[0], &offsets[0]);
                let tol = T::lit(1e-12) * len2;
                for (i, a) in offsets.iter().enumerate() {
                    if (linalg::dot(a, a) - len2).abs() > tol {
                        return None;
                    }
                    for b in &offsets[i + 1..] {
                        if linalg::dot(a, b).abs() > tol {
                            return None;
                        }
                    }
                }
                Some(*scale * len2.sqrt())
            }
            _ => None,
        }
    }

    pub fn eval(&self, xi: &[T]) -> T {
        match &self.kind {
            CostKind::Linear { coeffs } => linalg::dot(coeffs, xi),
            CostKind::WeightedEuclidean { scale, weights } => {
                *scale
                    * weights
                        .iter()
                        .zip(xi)
                        .map(|(&w, &x)| w * x * x)
                        .sum::<T>()
                        .sqrt()
            }
            CostKind::EuclideanOffset { scale, offsets } => {
                *scale * linalg::norm(&combine(offsets, xi))
            }
            CostKind::Polynomial { coeffs } => horner(coeffs, xi[0]),
            CostKind::SemiLagrangian {
                offsets,
                position,
                speed,
            } => {
                let y = combine(offsets, xi);
                let tau = linalg::norm(&y);
                let a: Vec<T> = y.iter().map(|&v| v / tau).collect();
                tau / speed.speed(position, &a)
            }
            CostKind::Facet { inner, keep } => inner.eval(&embed(inner.dim(), keep, xi)),
            CostKind::Homogenized { inner } => {
                let s: T = xi.iter().copied().sum();
                let eta: Vec<T> = xi.iter().map(|&v| v / s).collect();
                s * inner.eval(&eta)
            }
            CostKind::Custom { value, .. } => value(xi),
        }
    }

    /// Whether `gradient` returns `Some`.
    pub fn has_gradient(&self) -> bool {
        match &self.kind {
            CostKind::Custom { gradient, .. } => gradient.is_some(),
            CostKind::Facet { inner, .. } | CostKind::Homogenized { inner } => inner.has_gradient(),
            _ => true,
        }
    }

    /// Whether the gradient is exact rather than assembled from finite
    /// differences somewhere inside.
    pub fn gradient_is_exact(&self) -> bool {
        match &self.kind {
            CostKind::SemiLagrangian { speed, .. } => speed.has_direction_gradient(),
            CostKind::Facet { inner, .. } | CostKind::Homogenized { inner } => {
                inner.gradient_is_exact()
            }
            _ => self.has_gradient(),
        }
    }

    /// Whether `hessian` returns `Some`.
    pub fn has_hessian(&self) -> bool {
        match &self.kind {
            CostKind::Custom { hessian, .. } => hessian.is_some(),
            CostKind::Facet { inner, .. } => inner.has_hessian(),
            CostKind::SemiLagrangian { .. } | CostKind::Homogenized { .. } => false,
            _ => true,
        }
    }

    /// Gradient with respect to `ξ`, analytic where available.
    ///
    /// Semi-Lagrangian costs use the chain rule through `a_ξ` when the speed
    /// exposes a directional gradient, otherwise differences of `f` in `ξ`.
    pub fn gradient(&self, xi: &[T]) -> Option<Vec<T>> {
        match &self.kind {
            CostKind::Linear { coeffs } => Some(coeffs.clone()),
            CostKind::WeightedEuclidean { scale, weights } => {
                let r = weights
                    .iter()
                    .zip(xi)
                    .map(|(&w, &x)| w * x * x)
                    .sum::<T>()
                    .sqrt();
                Some(
                    weights
                        .iter()
                        .zip(xi)
                        .map(|(&w, &x)| *scale * w * x / r)
                        .collect(),
                )
            }
            CostKind::EuclideanOffset { scale, offsets } => {
                let y = combine(offsets, xi);
                let tau = linalg::norm(&y);
                Some(
                    offsets
                        .iter()
                        .map(|v| *scale * linalg::dot(v, &y) / tau)
                        .collect(),
                )
            }
            CostKind::Polynomial { coeffs } => {
                Some(vec![horner(&derivative(coeffs), xi[0]), T::zero()])
            }
            CostKind::SemiLagrangian {
                offsets,
                position,
                speed,
            } => Some(semi_lagrangian_gradient(
                offsets,
                position,
                speed.as_ref(),
                xi,
            )),
            CostKind::Facet { inner, keep } => {
                let g = inner.gradient(&embed(inner.dim(), keep, xi))?;
                Some(keep.iter().map(|&i| g[i]).collect())
            }
            CostKind::Homogenized { inner } => {
                let s: T = xi.iter().copied().sum();
                let eta: Vec<T> = xi.iter().map(|&v| v / s).collect();
                let g = inner.gradient(&eta)?;
                let c = inner.eval(&eta);
                let mean = linalg::dot(&eta, &g);
                Some(g.iter().map(|&gj| c + gj - mean).collect())
            }
            CostKind::Custom { gradient, .. } => gradient.as_ref().map(|g| g(xi)),
        }
    }

    pub fn hessian(&self, xi: &[T]) -> Option<Matrix<T>> {
        let n = self.dim();
        match &self.kind {
            CostKind::Linear { .. } => Some(linalg::zeros(n, n)),
            CostKind::WeightedEuclidean { scale, weights } => {
                let wx: Vec<T> = weights.iter().zip(xi).map(|(&w, &x)| w * x).collect();
                let r = linalg::dot(&wx, xi).sqrt();
                let r3 = r * r * r;
                Some(
                    (0..n)
                        .map(|i| {
                            (0..n)
                                .map(|j| {
                                    let d = if i == j { weights[i] / r } else { T::zero() };
                                    *scale * (d - wx[i] * wx[j] / r3)
                                })
                                .collect()
                        })
                        .collect(),
                )
            }
            CostKind::EuclideanOffset { scale, offsets } => {
                let g = linalg::gram(offsets);
                let gx = linalg::matvec(&g, xi);
                let tau = linalg::dot(xi, &gx).sqrt();
                let t3 = tau * tau * tau;
                Some(
                    (0..n)
                        .map(|i| {
                            (0..n)
                                .map(|j| *scale * (g[i][j] / tau - gx[i] * gx[j] / t3))
                                .collect()
                        })
                        .collect(),
                )
            }
            CostKind::Polynomial { coeffs } => {
                let second = horner(&derivative(&derivative(coeffs)), xi[0]);
                Some(vec![vec![second, T::zero()], vec![T::zero(), T::zero()]])
            }
            CostKind::Facet { inner, keep } => {
                let h = inner.hessian(&embed(inner.dim(), keep, xi))?;
                Some(
                    keep.iter()
                        .map(|&i| keep.iter().map(|&j| h[i][j]).collect())
                        .collect(),
                )
            }
            CostKind::Custom { hessian, .. } => hessian.as_ref().map(|h| h(xi)),
            CostKind::SemiLagrangian { .. } | CostKind::Homogenized { .. } => None,
        }
    }

    /// Central-difference gradient; one-sided in coordinates that sit on the
    /// simplex boundary.
    pub fn fd_gradient(&self, xi: &[T], step: T) -> Vec<T> {
        fd_gradient_of(|x| self.eval(x), xi, step)
    }

    /// Finite-difference Hessian: differences of the analytic gradient when
    /// available, of values otherwise.
    pub fn fd_hessian(&self, xi: &[T], step: T) -> Matrix<T> {
        let n = xi.len();
        let grad = |x: &[T]| {
            self.gradient(x)
                .unwrap_or_else(|| self.fd_gradient(x, step))
        };
        let mut h = linalg::zeros(n, n);
        for j in 0..n {
            let (lo, hi, span) = fd_stencil(xi, j, step);
            let gl = grad(&lo);
            let gh = grad(&hi);
            for i in 0..n {
                h[i][j] = (gh[i] - gl[i]) / span;
            }
        }
        // symmetrize
        for i in 0..n {
            for j in (i + 1)..n {
                let m = (h[i][j] + h[j][i]) / T::lit(2.0);
                h[i][j] = m;
                h[j][i] = m;
            }
        }
        h
    }

    /// Gradient for certification: analytic if present, differences otherwise.
    pub fn gradient_or_fd(&self, xi: &[T]) -> Vec<T> {
        self.gradient(xi)
            .unwrap_or_else(|| self.fd_gradient(xi, T::lit(FD_STEP)))
    }

    pub fn vertex_values(&self) -> Vec<T> {
        let n = self.dim();
        (0..n).map(|j| self.eval(&unit(n, j))).collect()
    }
}

impl<T: Real> fmt::Debug for CostModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("CostModel");
        d.field("kind", &self.kind_name()).field("dim", &self.dim());
        match &self.kind {
            CostKind::Linear { coeffs } => d.field("coeffs", coeffs),
            CostKind::WeightedEuclidean { scale, weights } => {
                d.field("scale", scale).field("weights", weights)
            }
            CostKind::EuclideanOffset { scale, offsets } => {
                d.field("scale", scale).field("offsets", offsets)
            }
            CostKind::Polynomial { coeffs } => d.field("coeffs", coeffs),
            CostKind::SemiLagrangian { offsets, speed, .. } => {
                d.field("offsets", offsets).field("speed", speed)
            }
            CostKind::Facet { inner, keep } => d.field("inner", inner).field("keep", keep),
            CostKind::Homogenized { inner } => d.field("inner", inner),
            CostKind::Custom { .. } => &mut d,
        };
        d.field("degree", &self.degree)
            .field("concave", &self.concave)
            .finish()
    }
}

pub fn unit<T: Real>(n: usize, j: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n];
    e[j] = T::one();
    e
}

fn combine<T: Real>(offsets: &[Vec<T>], xi: &[T]) -> Vec<T> {
    let dim = offsets[0].len();
    let mut y = vec![T::zero(); dim];
    for (v, &w) in offsets.iter().zip(xi) {
        if w == T::zero() {
            continue;
        }
        for (yk, &vk) in y.iter_mut().zip(v) {
            *yk += w * vk;
        }
    }
    y
}

fn embed<T: Real>(n: usize, keep: &[usize], xi: &[T]) -> Vec<T> {
    let mut full = vec![T::zero(); n];
    for (&i, &v) in keep.iter().zip(xi) {
        full[i] = v;
    }
    full
}

fn horner<T: Real>(coeffs: &[T], p: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * p + c)
}

fn derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    if coeffs.len() <= 1 {
        return vec![T::zero()];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * T::from_usize_lossy(k))
        .collect()
}

/// Points straddling `xi` in coordinate `j`; one-sided when `ξⱼ < step`.
fn fd_stencil<T: Real>(xi: &[T], j: usize, step: T) -> (Vec<T>, Vec<T>, T) {
    let mut lo = xi.to_vec();
    let mut hi = xi.to_vec();
    if xi[j] >= step {
        lo[j] -= step;
        hi[j] += step;
        (lo, hi, step + step)
    } else {
        hi[j] += step;
        (lo, hi, step)
    }
}

pub(crate) fn fd_gradient_of<T: Real>(f: impl Fn(&[T]) -> T, xi: &[T], step: T) -> Vec<T> {
    (0..xi.len())
        .map(|j| {
            let (lo, hi, span) = fd_stencil(xi, j, step);
            (f(&hi) - f(&lo)) / span
        })
        .collect()
}

/// Quantities shared by the semi-Lagrangian gradient and the anisotropic
/// causality check at one `ξ`.
pub(crate) struct SemiLagrangianJet<T> {
    pub tau: T,
    pub speed: T,
    /// `∂τ/∂ξⱼ = vⱼ · a_ξ`.
    pub dtau: Vec<T>,
    /// `∂f(x, a_ξ)/∂ξⱼ`.
    pub dspeed: Vec<T>,
}

pub(crate) fn semi_lagrangian_jet<T: Real>(
    offsets: &[Vec<T>],
    position: &[T],
    speed: &dyn Speed<T>,
    xi: &[T],
) -> SemiLagrangianJet<T> {
    let y = combine(offsets, xi);
    let tau = linalg::norm(&y);
    let a: Vec<T> = y.iter().map(|&v| v / tau).collect();
    let f = speed.speed(position, &a);
    let dtau: Vec<T> = offsets.iter().map(|v| linalg::dot(v, &a)).collect();
    let dspeed = match speed.direction_gradient(position, &a) {
        Some(grad_a) => offsets
            .iter()
            .zip(&dtau)
            .map(|(v, &va)| {
                // ∂a/∂ξⱼ = (vⱼ − a (a·vⱼ)) / τ
                let da: Vec<T> = v
                    .iter()
                    .zip(&a)
                    .map(|(&vk, &ak)| (vk - ak * va) / tau)
                    .collect();
                linalg::dot(&grad_a, &da)
            })
            .collect(),
        None => fd_gradient_of(
            |x| {
                let y = combine(offsets, x);
                let t = linalg::norm(&y);
                let a: Vec<T> = y.iter().map(|&v| v / t).collect();
                speed.speed(position, &a)
            },
            xi,
            T::lit(FD_STEP),
        ),
    };
    SemiLagrangianJet {
        tau,
        speed: f,
        dtau,
        dspeed,
    }
}

fn semi_lagrangian_gradient<T: Real>(
    offsets: &[Vec<T>],
    position: &[T],
    speed: &dyn Speed<T>,
    xi: &[T],
) -> Vec<T> {
    let jet = semi_lagrangian_jet(offsets, position, speed, xi);
    let f2 = jet.speed * jet.speed;
    jet.dtau
        .iter()
        .zip(&jet.dspeed)
        .map(|(&dt, &df)| (jet.speed * dt - jet.tau * df) / f2)
        .collect()
}
