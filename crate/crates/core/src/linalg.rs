//! Small dense linear-algebra helpers on `Vec<Vec<T>>` matrices.
//!
//! Dimensions here are tiny (stencil sizes, simplex dimensions), so plain
//! nested vectors are used throughout.

use crate::Real;

pub type Matrix<T> = Vec<Vec<T>>;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn zeros<T: Real>(rows: usize, cols: usize) -> Matrix<T> {
    vec![vec![T::zero(); cols]; rows]
}

pub fn identity<T: Real>(n: usize) -> Matrix<T> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn transpose<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    if a.is_empty() {
        return Vec::new();
    }
    let (r, c) = (a.len(), a[0].len());
    let mut t = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn matmul<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (r, k) = (a.len(), b.len());
    let c = if k == 0 { 0 } else { b[0].len() };
    let mut out = zeros(r, c);
    for i in 0..r {
        for l in 0..k {
            let ail = a[i][l];
            if ail == T::zero() {
                continue;
            }
            for j in 0..c {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub fn matvec<T: Real>(a: &Matrix<T>, x: &[T]) -> Vec<T> {
    a.iter().map(|row| dot(row, x)).collect()
}

/// Orthonormal basis (as the columns of an `n × (n−1)` matrix) of the
/// hyperplane orthogonal to `(1,…,1)`.
///
/// Built from the Householder reflection that maps `e₁` onto `(1,…,1)/√n`;
/// the reflection's remaining columns span the complement.
pub fn simplex_tangent_basis<T: Real>(n: usize) -> Matrix<T> {
    assert!(n >= 2, "tangent basis needs n >= 2");
    let u = T::one() / T::from_usize_lossy(n).sqrt();
    let mut v = vec![-u; n];
    v[0] += T::one();
    let vv = dot(&v, &v);
    let mut reflection = identity::<T>(n);
    for i in 0..n {
        for j in 0..n {
            reflection[i][j] -= T::lit(2.0) * v[i] * v[j] / vv;
        }
    }
    reflection
        .into_iter()
        .map(|row| row[1..].to_vec())
        .collect()
}

/// `Bᵀ H B`.
pub fn congruence<T: Real>(basis: &Matrix<T>, h: &Matrix<T>) -> Matrix<T> {
    matmul(&transpose(basis), &matmul(h, basis))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &Matrix<T>) -> Vec<T> {
    let n = a.len();
    let mut m = a.clone();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let diag: T = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= eps * eps * (diag + off) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q] == T::zero() {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (T::lit(2.0) * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    eig
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<T: Real>(a: &Matrix<T>) -> T {
    let n = a.len();
    let mut m = a.clone();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .abs()
                    .partial_cmp(&m[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    det
}

/// Gram matrix `Gᵢₖ = vᵢ·vₖ`.
pub fn gram<T: Real>(vectors: &[Vec<T>]) -> Matrix<T> {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
        .collect()
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_to_simplex<T: Real>(y: &[T]) -> Vec<T> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumulative = T::zero();
    let mut theta = T::zero();
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - T::one()) / T::from_usize_lossy(k + 1);
        if u - t > T::zero() {
            theta = t;
        }
    }
    y.iter().map(|&v| (v - theta).max(T::zero())).collect()
}

/// Angle between two vectors in radians, clamped against rounding.
pub fn angle_between<T: Real>(a: &[T], b: &[T]) -> T {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.max(-T::one()).min(T::one()).acos()
}
