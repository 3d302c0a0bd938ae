//! Small dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type C2 = Matrix2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    let n = entries.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &e) in entries.iter().enumerate() {
        m[(i, i)] = e;
    }
    m
}

pub fn real_diag(entries: &[f64]) -> CMatrix {
    diag(&entries.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
}

/// Kronecker product `a ⊗ b`, with `a` on the more significant index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn to_dynamic(m: &C2) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, col| m[(r, col)])
}

pub fn to_c2(m: &CMatrix) -> C2 {
    assert_eq!(m.shape(), (2, 2));
    C2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

pub fn c2_max_abs_diff(a: &C2, b: &C2) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Global phase `φ` (|φ| = 1) aligning `b` with `a`, taken from `tr(b^† a)`.
pub fn aligning_phase(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let t: Complex64 = b.iter().zip(a.iter()).map(|(y, x)| y.conj() * x).sum();
    if t.norm() < 1e-300 {
        ONE
    } else {
        t / t.norm()
    }
}

/// `min_φ ‖a - φ b‖_max`, with `φ` fixed by the phase of `tr(b^† a)`.
pub fn projective_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let phi = aligning_phase(a, b);
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - phi * y).norm()))
}

pub fn projective_distance2(a: &C2, b: &C2) -> f64 {
    projective_distance(&to_dynamic(a), &to_dynamic(b))
}

/// Matrix exponential (Padé scaling and squaring, via nalgebra).
pub fn expm(m: &CMatrix) -> CMatrix {
    m.clone().exp()
}

/// Pauli matrices and the 2×2 identity.
pub fn pauli_x() -> C2 {
    C2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> C2 {
    C2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> C2 {
    C2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn eye2() -> C2 {
    C2::identity()
}

/// Inverse of a 2×2 matrix; `None` when singular.
pub fn inverse2(m: &C2) -> Option<C2> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.norm() < 1e-300 {
        return None;
    }
    Some(C2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

pub fn det2(m: &C2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}
