//! SU(1,1) tooling: the three rotation classes, the irrational rotation
//! `P = T·τ`, axis decomposition and first-order splitting.
//!
//! Axes are stored by their real components `(n_x, n_y, n_z)` of
//! `K = i n_x σ_x + i n_y σ_y + n_z σ_z`, and rotations are `exp(iθK)`.
//! `K² = s·I` with `s = -n_x² - n_y² + n_z²`.

use std::f64::consts::{FRAC_PI_8, SQRT_2};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::linalg::{self, c, C2};

const NORMALIZED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisVector {
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationKind {
    /// `s = +1`, elliptic
    Space,
    /// `s = 0`, parabolic
    Lightlike,
    /// `s = -1`, hyperbolic
    Pseudo,
}

impl AxisVector {
    pub fn new(nx: f64, ny: f64, nz: f64) -> Self {
        Self { nx, ny, nz }
    }

    pub fn discriminant(&self) -> f64 {
        -self.nx * self.nx - self.ny * self.ny + self.nz * self.nz
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.nx, self.ny, self.nz)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Class of a normalized axis (`s` within 1e-9 of -1, 0 or 1).
    pub fn kind(&self) -> Result<RotationKind> {
        let s = self.discriminant();
        if (s - 1.0).abs() <= NORMALIZED_TOL {
            Ok(RotationKind::Space)
        } else if s.abs() <= NORMALIZED_TOL {
            Ok(RotationKind::Lightlike)
        } else if (s + 1.0).abs() <= NORMALIZED_TOL {
            Ok(RotationKind::Pseudo)
        } else {
            Err(Error::InvalidArgument(format!(
                "axis not normalized: -nx^2 - ny^2 + nz^2 = {s}"
            )))
        }
    }

    /// `K = i n_x σ_x + i n_y σ_y + n_z σ_z`
    pub fn generator(&self) -> C2 {
        C2::new(
            c(self.nz, 0.0),
            c(self.ny, self.nx),
            c(-self.ny, self.nx),
            c(-self.nz, 0.0),
        )
    }

    /// Reads the axis back from a generator of the form above.
    pub fn from_generator(k: &C2) -> Self {
        let (k01, k10) = (k[(0, 1)], k[(1, 0)]);
        Self {
            nx: ((k01 + k10) / c(0.0, 2.0)).re,
            ny: ((k01 - k10) / 2.0).re,
            nz: k[(0, 0)].re,
        }
    }
}

/// Closed form of `exp(iθK)` for a normalized axis.
pub fn su11_classify(theta: f64, axis: &AxisVector) -> Result<(RotationKind, C2)> {
    let kind = axis.kind()?;
    let k = axis.generator();
    let i = linalg::I;
    let m = match kind {
        RotationKind::Space => linalg::eye2() * c(theta.cos(), 0.0) + k * (i * theta.sin()),
        RotationKind::Lightlike => linalg::eye2() + k * (i * theta),
        RotationKind::Pseudo => linalg::eye2() * c(theta.cosh(), 0.0) + k * (i * theta.sinh()),
    };
    Ok((kind, m))
}

/// `exp(iαK)` for an axis of any length.
pub fn exp_axis(alpha: f64, axis: &AxisVector) -> C2 {
    let s = axis.discriminant();
    let k = axis.generator();
    let i = linalg::I;
    if s.abs() < 1e-300 {
        return linalg::eye2() + k * (i * alpha);
    }
    let r = s.abs().sqrt();
    if s > 0.0 {
        linalg::eye2() * c((alpha * r).cos(), 0.0) + k * (i * ((alpha * r).sin() / r))
    } else {
        linalg::eye2() * c((alpha * r).cosh(), 0.0) + k * (i * ((alpha * r).sinh() / r))
    }
}

/// `P = T·τ` written as `e^{iφ}·exp(iθ₀K)` with a space-like axis.
#[derive(Debug, Clone, Copy)]
pub struct WordRotation {
    pub theta0: f64,
    pub axis: AxisVector,
    /// Global phase `φ` split off so the remainder has unit determinant.
    pub phase: f64,
    pub matrix: C2,
    /// Max-norm gap between `P` and the rebuilt `e^{iφ}exp(iθ₀K)`.
    pub reconstruction_error: f64,
}

pub fn rotation_angle_of_word() -> WordRotation {
    let p = linalg::to_c2(&(Gate::T.matrix() * Gate::Tau.matrix()));
    let det = linalg::det2(&p);
    let phase = det.arg() / 2.0;
    let unit = p * linalg::cis(-phase);
    let cos0 = (unit.trace() / 2.0).re;
    let theta0 = cos0.clamp(-1.0, 1.0).acos();
    let k = (unit - linalg::eye2() * c(cos0, 0.0)) / (linalg::I * theta0.sin());
    let axis = AxisVector::from_generator(&k);
    let rebuilt = su11_classify(theta0, &axis).expect("space-like axis").1 * linalg::cis(phase);
    WordRotation {
        theta0,
        axis,
        phase,
        matrix: p,
        reconstruction_error: linalg::c2_max_abs_diff(&rebuilt, &p),
    }
}

/// `arccos(√2 sin(π/8))`
pub fn theta0() -> f64 {
    (SQRT_2 * FRAC_PI_8.sin()).acos()
}

/// Axis of `U exp(iθK) U⁻¹`, i.e. of `U K U⁻¹`.
pub fn conjugate_axis(u: &C2, axis: &AxisVector) -> AxisVector {
    let inv = linalg::inverse2(u).expect("invertible conjugator");
    AxisVector::from_generator(&(u * axis.generator() * inv))
}

/// `n₁` from `P` and its images `n₂ = T n₁ T†`, `n₃ = T² n₁ T²†`.
pub fn conjugated_axes() -> [AxisVector; 3] {
    let n1 = rotation_angle_of_word().axis;
    let t = linalg::to_c2(&Gate::T.matrix());
    let n2 = conjugate_axis(&t, &n1);
    let n3 = conjugate_axis(&(t * t), &n1);
    [n1, n2, n3]
}

/// Solves `θ n = α₁n₁ + α₂n₂ + α₃n₃`.
pub fn axis_decompose(theta: f64, n: &AxisVector, basis: &[AxisVector; 3]) -> Result<[f64; 3]> {
    let m = Matrix3::from_columns(&[
        basis[0].to_vector(),
        basis[1].to_vector(),
        basis[2].to_vector(),
    ]);
    let rhs = n.to_vector() * theta;
    let sol = m
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|x| x.is_finite()))
        .ok_or_else(|| Error::InvalidArgument("axis basis is singular".into()))?;
    let residual = (m * sol - rhs).amax();
    if residual > 1e-10 * rhs.amax().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "axis basis is numerically singular (residual {residual:e})"
        )));
    }
    Ok([sol[0], sol[1], sol[2]])
}

/// Condition number of the basis matrix (2-norm).
pub fn basis_condition(basis: &[AxisVector; 3]) -> f64 {
    let m = Matrix3::from_columns(&[
        basis[0].to_vector(),
        basis[1].to_vector(),
        basis[2].to_vector(),
    ]);
    let sv = m.singular_values();
    sv.max() / sv.min()
}

/// `(e^{i(α₁/ℓ)K₁} e^{i(α₂/ℓ)K₂} e^{i(α₃/ℓ)K₃})^ℓ`
pub fn trotter_word(alphas: [f64; 3], basis: &[AxisVector; 3], ell: usize) -> Result<C2> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ell must be at least 1".into()));
    }
    let l = ell as f64;
    let step = exp_axis(alphas[0] / l, &basis[0])
        * exp_axis(alphas[1] / l, &basis[1])
        * exp_axis(alphas[2] / l, &basis[2]);
    let mut out = linalg::eye2();
    for _ in 0..ell {
        out *= step;
    }
    Ok(out)
}

/// Hermitian `H₀ = χ σ_y`, which satisfies `exp(i η₁,₁ H₀) = BOOST(χ)`.
pub fn boost_generator(chi: f64) -> C2 {
    linalg::pauli_y() * c(chi, 0.0)
}

/// Target block of the three-reflection product `P'` used to reach
/// controlled rotations from controlled-Z:
/// `Z · (Z cosh α + iσ_y sinh α) · (Z cosh β + iσ_x sinh β)`.
pub fn p_prime_block(alpha: f64, beta: f64) -> C2 {
    let z = linalg::pauli_z();
    let i = linalg::I;
    let ra = z * c(alpha.cosh(), 0.0) + linalg::pauli_y() * (i * alpha.sinh());
    let rb = z * c(beta.cosh(), 0.0) + linalg::pauli_x() * (i * beta.sinh());
    z * ra * rb
}

/// Default `α = asinh(1/2)`, `β = asinh(3/4)`: `sinh α cosh β < 1` holds.
pub fn p_prime_default() -> (f64, f64) {
    (0.5f64.asinh(), 0.75f64.asinh())
}
