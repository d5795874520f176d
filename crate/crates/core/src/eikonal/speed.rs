//! Speed profiles `f(x, a)` with declared bounds `0 < F₁ ≤ f ≤ F₂`.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{self, Matrix};
use crate::Real;

pub trait Speed<T: Real>: Send + Sync + fmt::Debug {
    /// Speed at position `x` in unit direction `a`.
    fn speed(&self, x: &[T], a: &[T]) -> T;

    /// `∇ₐ f(x, a)` if known in closed form.
    fn direction_gradient(&self, _x: &[T], _a: &[T]) -> Option<Vec<T>> {
        None
    }

    /// Whether `direction_gradient` returns `Some`.
    fn has_direction_gradient(&self) -> bool {
        false
    }

    /// Declared `(F₁, F₂)`.
    fn bounds(&self) -> (T, T);

    /// `f` does not depend on the direction.
    fn is_isotropic(&self) -> bool {
        false
    }

    /// Closed description of the profile, for profiles that can be written
    /// out and rebuilt.
    fn form(&self) -> Option<SpeedForm<T>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpeedForm<T> {
    Constant(T),
    /// `f(a) = ‖D a‖`.
    Elliptic(Matrix<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSpeed<T>(pub T);

impl<T: Real> Speed<T> for ConstantSpeed<T> {
    fn speed(&self, _x: &[T], _a: &[T]) -> T {
        self.0
    }

    fn direction_gradient(&self, _x: &[T], a: &[T]) -> Option<Vec<T>> {
        Some(vec![T::zero(); a.len()])
    }

    fn has_direction_gradient(&self) -> bool {
        true
    }

    fn bounds(&self) -> (T, T) {
        (self.0, self.0)
    }

    fn is_isotropic(&self) -> bool {
        true
    }

    fn form(&self) -> Option<SpeedForm<T>> {
        Some(SpeedForm::Constant(self.0))
    }
}

/// Position-dependent isotropic speed `f(x)`.
#[derive(Clone)]
pub struct IsotropicField<T> {
    f: Arc<dyn Fn(&[T]) -> T + Send + Sync>,
    bounds: (T, T),
}

impl<T: Real> IsotropicField<T> {
    pub fn new(f: Arc<dyn Fn(&[T]) -> T + Send + Sync>, f1: T, f2: T) -> Self {
        IsotropicField {
            f,
            bounds: (f1, f2),
        }
    }
}

impl<T: Real> fmt::Debug for IsotropicField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IsotropicField")
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl<T: Real> Speed<T> for IsotropicField<T> {
    fn speed(&self, x: &[T], _a: &[T]) -> T {
        (self.f)(x)
    }

    fn direction_gradient(&self, _x: &[T], a: &[T]) -> Option<Vec<T>> {
        Some(vec![T::zero(); a.len()])
    }

    fn has_direction_gradient(&self) -> bool {
        true
    }

    fn bounds(&self) -> (T, T) {
        self.bounds
    }

    fn is_isotropic(&self) -> bool {
        true
    }
}

/// `f(a) = ‖D a‖`; the speed profile is an ellipse whose semi-axes are the
/// singular values of `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticSpeed<T> {
    d: Matrix<T>,
    bounds: (T, T),
}

impl<T: Real> EllipticSpeed<T> {
    pub fn new(d: Matrix<T>) -> Self {
        let dtd = linalg::matmul(&linalg::transpose(&d), &d);
        let eig = linalg::symmetric_eigenvalues(&dtd);
        let bounds = (eig[0].max(T::zero()).sqrt(), eig[eig.len() - 1].sqrt());
        EllipticSpeed { d, bounds }
    }

    /// Planar ellipse with semi-axes `eccentricity` along `angle` and 1
    /// across it.
    pub fn planar(eccentricity: T, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let r = vec![vec![c, -s], vec![s, c]];
        let scale = vec![vec![eccentricity, T::zero()], vec![T::zero(), T::one()]];
        let d = linalg::matmul(&linalg::matmul(&r, &scale), &linalg::transpose(&r));
        Self::new(d)
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.d
    }
}

impl<T: Real> Speed<T> for EllipticSpeed<T> {
    fn speed(&self, _x: &[T], a: &[T]) -> T {
        linalg::norm(&linalg::matvec(&self.d, a))
    }

    fn direction_gradient(&self, _x: &[T], a: &[T]) -> Option<Vec<T>> {
        let da = linalg::matvec(&self.d, a);
        let n = linalg::norm(&da);
        let dt = linalg::transpose(&self.d);
        Some(
            linalg::matvec(&dt, &da)
                .into_iter()
                .map(|v| v / n)
                .collect(),
        )
    }

    fn has_direction_gradient(&self) -> bool {
        true
    }

    fn bounds(&self) -> (T, T) {
        self.bounds
    }

    fn form(&self) -> Option<SpeedForm<T>> {
        Some(SpeedForm::Elliptic(self.d.clone()))
    }
}
