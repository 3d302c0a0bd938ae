//! Two-level factorization of metric isometries and lowering of two-level
//! matrices to multi-controlled single-bit gates.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::circuit::{iso_tolerance, Circuit};
use crate::error::{Error, Result};
use crate::gates::{isometry_residual, LocalMetric};
use crate::linalg::{self, c, CMatrix, C2, ONE, ZERO};
use crate::register::{BitKind, RegisterLayout};
use crate::synthesis::gadgets::{Emitter, Lowering};

/// `b_{i,j}(V)`: identity except on basis vectors `i < j`, where it acts as `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelFactor {
    pub i: usize,
    pub j: usize,
    pub v: C2,
    /// `(η_ii, η_jj)`
    pub metric_pair: (i8, i8),
}

impl TwoLevelFactor {
    /// Orders the pair, conjugating `v` by `X` when `a > b`.
    pub fn new(a: usize, b: usize, v: C2, metric: &LocalMetric) -> Result<Self> {
        let s = metric.signs();
        if a == b || a >= s.len() || b >= s.len() {
            return Err(Error::InvalidArgument(format!("bad index pair ({a}, {b})")));
        }
        let (i, j, v) = if a < b {
            (a, b, v)
        } else {
            let x = linalg::pauli_x();
            (b, a, x * v * x)
        };
        Ok(Self { i, j, v, metric_pair: (s[i], s[j]) })
    }

    pub fn pair_metric(&self) -> LocalMetric {
        LocalMetric::from_signs(vec![self.metric_pair.0, self.metric_pair.1]).expect("signs are ±1")
    }

    pub fn is_isometric(&self) -> bool {
        let m = linalg::to_dynamic(&self.v);
        isometry_residual(&m, &self.pair_metric()).is_ok_and(|r| r <= iso_tolerance(&m))
    }

    pub fn embed(&self, dim: usize) -> CMatrix {
        let mut m = linalg::identity(dim);
        let idx = [self.i, self.j];
        for (r, &a) in idx.iter().enumerate() {
            for (col, &b) in idx.iter().enumerate() {
                m[(a, b)] = self.v[(r, col)];
            }
        }
        m
    }
}

/// Product `F₁ F₂ ⋯` of embedded factors.
pub fn product(factors: &[TwoLevelFactor], dim: usize) -> CMatrix {
    factors.iter().fold(linalg::identity(dim), |acc, f| acc * f.embed(dim))
}

fn rows_apply(w: &mut CMatrix, p: usize, q: usize, f: &C2) {
    for col in 0..w.ncols() {
        let (a, b) = (w[(p, col)], w[(q, col)]);
        w[(p, col)] = f[(0, 0)] * a + f[(0, 1)] * b;
        w[(q, col)] = f[(1, 0)] * a + f[(1, 1)] * b;
    }
}

/// Row operation on `(p, q)`; the second row gets a phase making `w[q][q]`
/// real positive.
fn eliminate(w: &mut CMatrix, p: usize, q: usize, mut f: C2) {
    let x = f[(1, 0)] * w[(p, q)] + f[(1, 1)] * w[(q, q)];
    if x.norm() > 1e-300 {
        let ph = x.conj() / x.norm();
        f[(1, 0)] *= ph;
        f[(1, 1)] *= ph;
    }
    rows_apply(w, p, q, &f);
}

/// Factors `A = b(V₁) b(V₂) ⋯` with every `b(V_k)` an isometry of `metric`.
///
/// Column by column, same-sign entries are cleared with Givens rotations and
/// the last opposite-sign entry with a U(1,1) element normalized by
/// `|a|² - |b|² = 1`.
pub fn two_level_factorize(a: &CMatrix, metric: &LocalMetric) -> Result<Vec<TwoLevelFactor>> {
    let d = metric.dim();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.nrows() });
    }
    let residual = isometry_residual(a, metric)?;
    if residual > iso_tolerance(a) {
        return Err(Error::NotIsometric { residual });
    }
    let s = metric.signs();
    let tiny = 1e-15 * linalg::max_abs(a).max(1.0);
    let mut w = a.clone();
    let mut factors = Vec::new();
    let mut record = |p: usize, q: usize, f: &C2| -> Result<()> {
        let g = if s[p] == s[q] { f.adjoint() } else {
            linalg::inverse2(f).ok_or_else(|| Error::NumericGuard("singular row operation".into()))?
        };
        factors.push(TwoLevelFactor::new(p, q, g, metric)?);
        Ok(())
    };
    let mut remaining: Vec<usize> = (0..d).collect();
    while remaining.len() > 2 {
        let p = *remaining.iter().find(|&&k| s[k] == 1).unwrap_or(&remaining[0]);
        let mut touched = false;
        for &q in remaining.iter().filter(|&&q| q != p && s[q] == s[p]) {
            let (x, y) = (w[(p, p)], w[(q, p)]);
            if y.norm() <= tiny {
                continue;
            }
            let r = x.norm().hypot(y.norm());
            let f = C2::new(x.conj() / r, y.conj() / r, -y / r, x / r);
            let before = w.clone();
            eliminate(&mut w, p, q, f);
            let f = recover(&before, &w, p, q);
            record(p, q, &f)?;
            touched = true;
        }
        let opp: Vec<usize> = remaining.iter().copied().filter(|&q| s[q] != s[p]).collect();
        if let Some(&q0) = opp.iter().find(|&&q| w[(q, p)].norm() > tiny) {
            for &q in opp.iter().filter(|&&q| q != q0) {
                let (x, y) = (w[(q0, p)], w[(q, p)]);
                if y.norm() <= tiny {
                    continue;
                }
                let r = x.norm().hypot(y.norm());
                let f = C2::new(x.conj() / r, y.conj() / r, -y / r, x / r);
                let before = w.clone();
                eliminate(&mut w, q0, q, f);
                let f = recover(&before, &w, q0, q);
                record(q0, q, &f)?;
            }
            let (x, y) = (w[(p, p)], w[(q0, p)]);
            let n2 = x.norm_sqr() - y.norm_sqr();
            if n2 <= 0.0 {
                return Err(Error::PivotBreakdown { pivot: x.norm(), other: y.norm() });
            }
            let n = n2.sqrt();
            let f = C2::new(x.conj() / n, -y.conj() / n, -y / n, x / n);
            let before = w.clone();
            eliminate(&mut w, p, q0, f);
            let f = recover(&before, &w, p, q0);
            record(p, q0, &f)?;
            touched = true;
        }
        let diag = w[(p, p)];
        if !touched && (diag - ONE).norm() > tiny {
            let q = *remaining.iter().find(|&&q| q != p).expect("more than two left");
            let f = C2::new(diag.conj() / diag.norm_sqr(), ZERO, ZERO, ONE);
            rows_apply(&mut w, p, q, &f);
            record(p, q, &f)?;
        }
        remaining.retain(|&k| k != p);
    }
    match remaining[..] {
        [p, q] => {
            let block = C2::new(w[(p, p)], w[(p, q)], w[(q, p)], w[(q, q)]);
            if linalg::c2_max_abs_diff(&block, &linalg::eye2()) > tiny {
                factors.push(TwoLevelFactor::new(p, q, block, metric)?);
            }
        }
        [p] => {
            if (w[(p, p)] - ONE).norm() > tiny {
                return Err(Error::InvalidArgument("a 1×1 phase has no two-level form".into()));
            }
        }
        _ => {}
    }
    Ok(factors)
}

/// The 2×2 row operation actually applied (including the chosen phase).
fn recover(before: &CMatrix, after: &CMatrix, p: usize, q: usize) -> C2 {
    // rows p, q restricted to columns p, q: after = F · before
    let b = C2::new(before[(p, p)], before[(p, q)], before[(q, p)], before[(q, q)]);
    let a = C2::new(after[(p, p)], after[(p, q)], after[(q, p)], after[(q, q)]);
    match linalg::inverse2(&b) {
        Some(inv) if linalg::det2(&b).norm() > 1e-8 => a * inv,
        _ => recover_wide(before, after, p, q),
    }
}

/// Least-squares fallback over all columns when the 2×2 minor is singular.
fn recover_wide(before: &CMatrix, after: &CMatrix, p: usize, q: usize) -> C2 {
    let n = before.ncols();
    let b = CMatrix::from_fn(2, n, |r, col| before[(if r == 0 { p } else { q }, col)]);
    let a = CMatrix::from_fn(2, n, |r, col| after[(if r == 0 { p } else { q }, col)]);
    let bbh = &b * b.adjoint();
    let f = &a * b.adjoint() * bbh.try_inverse().expect("rows of an invertible matrix");
    linalg::to_c2(&f)
}

/// The three subspace metrics over `(i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricCase {
    /// `diag(1, 1, 1)`
    Euclidean,
    /// `diag(-1, 1, 1)`
    FirstFlipped,
    /// `diag(1, 1, -1)`
    LastFlipped,
}

impl MetricCase {
    pub const ALL: [MetricCase; 3] = [MetricCase::Euclidean, MetricCase::FirstFlipped, MetricCase::LastFlipped];

    pub fn signs(self) -> [i8; 3] {
        match self {
            MetricCase::Euclidean => [1, 1, 1],
            MetricCase::FirstFlipped => [-1, 1, 1],
            MetricCase::LastFlipped => [1, 1, -1],
        }
    }
}

pub type C3 = Matrix3<Complex64>;

/// Left side `b_{i,j}` and the right-side factors of the displayed identity,
/// all on the subspace `(i, j, k)`. For `LastFlipped` the factors are
/// isometries only when `|ζ|² + |γ|² = 1`.
pub fn metric_case_factors(case: MetricCase, zeta: Complex64, gamma: Complex64) -> (C3, Vec<C3>) {
    let z = ZERO;
    let one = ONE;
    let swap = C3::new(one, z, z, z, z, one, z, one, z);
    match case {
        MetricCase::Euclidean => {
            let lhs = C3::new(zeta, gamma, z, -gamma.conj(), zeta.conj(), z, z, z, one);
            let mid = C3::new(zeta, z, gamma, z, one, z, -gamma.conj(), z, zeta.conj());
            (lhs, vec![swap, mid, swap])
        }
        MetricCase::FirstFlipped => {
            let lhs = C3::new(zeta, gamma, z, gamma.conj(), zeta.conj(), z, z, z, one);
            let mid = C3::new(zeta, z, gamma, z, one, z, gamma.conj(), z, zeta.conj());
            (lhs, vec![swap, mid, swap])
        }
        MetricCase::LastFlipped => {
            let lhs = C3::new(zeta, gamma, z, -gamma.conj(), zeta.conj(), z, z, z, one);
            let r = c((1.0 + gamma.norm_sqr()).sqrt(), 0.0);
            let s2 = c(std::f64::consts::SQRT_2, 0.0);
            let m1 = C3::new(
                r / zeta.conj(), z, -s2 * gamma / zeta.conj(),
                z, one, z,
                -s2 * gamma.conj() / zeta, z, r / zeta,
            );
            let m2 = C3::new(one, z, z, z, s2, -one, z, -one, s2);
            let m3 = C3::new(r, z, gamma, z, one, z, gamma.conj(), z, r);
            let m4 = C3::new(
                one, z, z,
                z, s2 / zeta, r / zeta.conj(),
                z, r / zeta, s2 / zeta.conj(),
            );
            (lhs, vec![m1, m2, m3, m4])
        }
    }
}

fn block(m: &C3, a: usize, b: usize) -> C2 {
    C2::new(m[(a, a)], m[(a, b)], m[(b, a)], m[(b, b)])
}

/// Circuit of multi-controlled single-bit gates realizing the embedded factor.
pub fn two_level_to_circuit(f: &TwoLevelFactor, layout: &RegisterLayout) -> Result<Circuit> {
    let mut e = Emitter::with_lowering(layout.clone(), Lowering::MultiControlled);
    lower_factor(&mut e, f.i, f.j, &f.v)?;
    e.finish()
}

/// Appends `b_{a,b}(v)` (indices in either order) to the emitter.
pub fn lower_factor(e: &mut Emitter, a: usize, b: usize, v: &C2) -> Result<()> {
    let layout = e.layout().clone();
    let dim = layout.dimension();
    if a >= dim || b >= dim {
        return Err(Error::DimensionMismatch { expected: dim, got: a.max(b) + 1 });
    }
    if a == b {
        return Err(Error::InvalidArgument("two-level factor needs distinct indices".into()));
    }
    let (i, j, v) = if a < b { (a, b, *v) } else {
        let x = linalg::pauli_x();
        (b, a, x * v * x)
    };
    let scale = v.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    if v[(0, 1)].norm() <= 1e-15 * scale && v[(1, 0)].norm() <= 1e-15 * scale {
        phase_on_state(e, i, v[(0, 0)])?;
        return phase_on_state(e, j, v[(1, 1)]);
    }
    let n = layout.num_bits();
    let (bi, bj) = (layout.decode(i), layout.decode(j));
    let diff: Vec<usize> = (0..n).filter(|&p| bi[p] != bj[p]).collect();
    let x = linalg::pauli_x();
    if let [p] = diff[..] {
        let controls: Vec<(usize, u8)> = (0..n).filter(|&q| q != p).map(|q| (q, bi[q])).collect();
        let u = if bi[p] == 0 { v } else { x * v * x };
        return e.lambda_polarity(&u, &controls, p);
    }
    if let Some(&p) = diff.iter().find(|&&p| layout.kind(p) == BitKind::Qubit) {
        // η_k = η_j: swap j and k, then b_{i,k}(V)
        let k = j ^ layout.position_mask(p);
        lower_factor(e, j, k, &x)?;
        lower_factor(e, i, k, &v)?;
        return lower_factor(e, j, k, &x);
    }
    let k = i ^ layout.position_mask(diff[0]);
    let (si, sj) = (layout.metric_sign(i)?, layout.metric_sign(j)?);
    if si != sj {
        lower_factor(e, j, k, &x)?;
        lower_factor(e, i, k, &v)?;
        return lower_factor(e, j, k, &x);
    }
    // η_i = η_j = -η_k: v = diag(1, det v) · s with s ∈ SU(2)
    let det = linalg::det2(&v);
    let s = C2::new(ONE, ZERO, ZERO, ONE / det) * v;
    lower_special_unitary(e, i, j, k, &s)?;
    phase_on_state(e, j, det)
}

fn lower_special_unitary(e: &mut Emitter, i: usize, j: usize, k: usize, s: &C2) -> Result<()> {
    let (zeta, gamma) = (s[(0, 0)], s[(0, 1)]);
    if zeta.norm() < 1e-6 {
        // the identity divides by ζ: go through a square root instead
        let t = (s.trace() + c(2.0, 0.0)).sqrt();
        let w = (s + linalg::eye2()) / t;
        lower_special_unitary(e, i, j, k, &w)?;
        return lower_special_unitary(e, i, j, k, &w);
    }
    let (_, factors) = metric_case_factors(MetricCase::LastFlipped, zeta, gamma);
    let pairs = [(0, 2), (1, 2), (0, 2), (1, 2)];
    let idx = [i, j, k];
    // rightmost factor acts first
    for (m, (a, b)) in factors.iter().zip(pairs).rev() {
        lower_factor(e, idx[a], idx[b], &block(m, a, b))?;
    }
    Ok(())
}

/// `|s) ↦ z |s)`, other basis states unchanged.
fn phase_on_state(e: &mut Emitter, s: usize, z: Complex64) -> Result<()> {
    if (z - ONE).norm() <= 1e-15 {
        return Ok(());
    }
    let layout = e.layout().clone();
    let n = layout.num_bits();
    let bits = layout.decode(s);
    let t = n - 1;
    let u = if bits[t] == 0 { C2::new(z, ZERO, ZERO, ONE) } else { C2::new(ONE, ZERO, ZERO, z) };
    let controls: Vec<(usize, u8)> = (0..t).map(|q| (q, bits[q])).collect();
    e.lambda_polarity(&u, &controls, t)
}
