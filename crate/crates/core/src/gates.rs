//! Builtin gates, local metrics and the isometry check `G^† η G = η`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, c, cis, CMatrix, ONE, ZERO};
use crate::register::{BitKind, RegisterLayout};
use crate::EPS_ISO;

/// Builtin gates of the `.lqc` language.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    /// π/8 gate including its global phase: `diag(1, e^{-iπ/4})`.
    T,
    /// `√2 σ_z + i σ_x`, the hybit generator.
    Tau,
    X,
    Y,
    Z,
    /// `diag(1, i)`
    Sz,
    /// `diag(1, -i)`
    Szd,
    /// `[[cosh χ, sinh χ], [sinh χ, cosh χ]]`
    Boost(f64),
    /// `diag(1, e^{iφ})`
    Phase(f64),
    /// Controlled-Z on two bits, `diag(1, 1, 1, -1)`.
    Cz,
}

impl Gate {
    pub const NAMES: [&'static str; 11] = [
        "H", "T", "TAU", "X", "Y", "Z", "SZ", "SZD", "BOOST", "PHASE", "CZ",
    ];

    /// Looks a builtin up by name (case-insensitive).
    pub fn from_name(name: &str, param: Option<f64>) -> Result<Gate> {
        let upper = name.to_ascii_uppercase();
        let need = |p: Option<f64>| p.ok_or_else(|| Error::MissingParameter(upper.clone()));
        Ok(match upper.as_str() {
            "H" => Gate::H,
            "T" => Gate::T,
            "TAU" => Gate::Tau,
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "SZ" => Gate::Sz,
            "SZD" => Gate::Szd,
            "CZ" => Gate::Cz,
            "BOOST" => Gate::Boost(need(param)?),
            "PHASE" => Gate::Phase(need(param)?),
            _ => return Err(Error::UnknownGate(name.to_string())),
        })
    }

    pub fn is_builtin_name(name: &str) -> bool {
        let upper = name.to_ascii_uppercase();
        Self::NAMES.contains(&upper.as_str())
    }

    pub fn takes_parameter(name: &str) -> bool {
        matches!(name.to_ascii_uppercase().as_str(), "BOOST" | "PHASE")
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H => "H",
            Gate::T => "T",
            Gate::Tau => "TAU",
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::Sz => "SZ",
            Gate::Szd => "SZD",
            Gate::Boost(_) => "BOOST",
            Gate::Phase(_) => "PHASE",
            Gate::Cz => "CZ",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match self {
            Gate::Boost(p) | Gate::Phase(p) => Some(*p),
            _ => None,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::Cz => 2,
            _ => 1,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let z = ZERO;
        let o = ONE;
        let m = |a, b, cc, d| CMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
        match *self {
            Gate::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                m(h, h, h, -h)
            }
            Gate::T => m(o, z, z, cis(-FRAC_PI_4)),
            Gate::Tau => m(c(SQRT_2, 0.0), linalg::I, linalg::I, c(-SQRT_2, 0.0)),
            Gate::X => m(z, o, o, z),
            Gate::Y => m(z, -linalg::I, linalg::I, z),
            Gate::Z => m(o, z, z, -o),
            Gate::Sz => m(o, z, z, linalg::I),
            Gate::Szd => m(o, z, z, -linalg::I),
            Gate::Boost(chi) => {
                let (ch, sh) = (c(chi.cosh(), 0.0), c(chi.sinh(), 0.0));
                m(ch, sh, sh, ch)
            }
            Gate::Phase(phi) => m(o, z, z, cis(phi)),
            Gate::Cz => linalg::real_diag(&[1.0, 1.0, 1.0, -1.0]),
        }
    }

    pub fn gate_matrix(&self) -> GateMatrix {
        GateMatrix {
            matrix: self.matrix(),
            arity: self.arity(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.param() {
            Some(p) => write!(f, "{} {}", self.name(), p),
            None => f.write_str(self.name()),
        }
    }
}

/// Builtin lookup by name with an optional parameter.
pub fn builtin(name: &str, param: Option<f64>) -> Result<GateMatrix> {
    Gate::from_name(name, param).map(|g| g.gate_matrix())
}

/// Square complex matrix acting on `arity` bits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    matrix: CMatrix,
    arity: usize,
}

impl GateMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (r, cols) = matrix.shape();
        if r != cols || !r.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "gate matrix must be square with power-of-two dimension, got {r}x{cols}"
            )));
        }
        Ok(Self {
            arity: r.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn identity(arity: usize) -> Self {
        Self {
            matrix: linalg::identity(1 << arity),
            arity,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Diagonal metric of a group of bits (entries ±1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalMetric(Vec<i8>);

impl LocalMetric {
    /// Tensor product of per-bit metrics, first kind most significant.
    pub fn from_kinds(kinds: &[BitKind]) -> Self {
        let n = kinds.len();
        let signs = (0..1usize << n)
            .map(|j| {
                kinds
                    .iter()
                    .enumerate()
                    .fold(1i8, |s, (p, k)| s * k.sign((j >> (n - 1 - p)) & 1))
            })
            .collect();
        Self(signs)
    }

    /// `η_{m,n}`: `m` entries +1 followed by `n` entries -1.
    pub fn signature(m: usize, n: usize) -> Self {
        let mut v = vec![1i8; m];
        v.extend(std::iter::repeat_n(-1i8, n));
        Self(v)
    }

    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidArgument(
                "metric entries must be +1 or -1".into(),
            ));
        }
        Ok(Self(signs))
    }

    pub fn of_layout(layout: &RegisterLayout) -> Self {
        Self(layout.metric_diagonal())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_matrix(&self) -> CMatrix {
        linalg::real_diag(&self.0.iter().map(|&s| s as f64).collect::<Vec<_>>())
    }
}

/// Metric of the listed register positions, tensored in the listed order.
pub fn local_metric(layout: &RegisterLayout, bits: &[usize]) -> Result<LocalMetric> {
    let mut seen = vec![false; layout.num_bits()];
    let mut kinds = Vec::with_capacity(bits.len());
    for &b in bits {
        if b >= layout.num_bits() {
            return Err(Error::BitOutOfRange(b));
        }
        if std::mem::replace(&mut seen[b], true) {
            return Err(Error::DuplicateBit(b));
        }
        kinds.push(layout.kind(b));
    }
    Ok(LocalMetric::from_kinds(&kinds))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryReport {
    pub is_isometry: bool,
    /// `‖G^† η G - η‖_max`
    pub residual: f64,
}

/// Residual of `G^† η G - η` in max-norm.
pub fn isometry_residual(g: &CMatrix, eta: &LocalMetric) -> Result<f64> {
    let d = eta.dim();
    if g.nrows() != d || g.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: g.nrows(),
        });
    }
    let s = eta.signs();
    let mut worst = 0.0_f64;
    for r in 0..d {
        for col in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += g[(k, r)].conj() * g[(k, col)] * s[k] as f64;
            }
            if r == col {
                acc -= s[r] as f64;
            }
            worst = worst.max(acc.norm());
        }
    }
    Ok(worst)
}

pub fn is_isometry(g: &CMatrix, eta: &LocalMetric) -> Result<IsometryReport> {
    let residual = isometry_residual(g, eta)?;
    Ok(IsometryReport {
        is_isometry: residual <= EPS_ISO,
        residual,
    })
}

/// `Λ_k(G)`: identity except on the all-ones control pattern.
pub fn controlled(g: &GateMatrix, k: usize) -> GateMatrix {
    controlled_on(g, &vec![1u8; k])
}

/// Controlled gate whose controls fire on the given values (0 or 1).
pub fn controlled_on(g: &GateMatrix, values: &[u8]) -> GateMatrix {
    let k = values.len();
    let block = g.dim();
    let dim = block << k;
    let fire = values.iter().fold(0usize, |acc, &v| (acc << 1) | v as usize);
    let mut m = linalg::identity(dim);
    let off = fire * block;
    m.view_mut((off, off), (block, block)).copy_from(g.matrix());
    GateMatrix {
        matrix: m,
        arity: g.arity + k,
    }
}

/// Random element of `U(m, n)` as `exp(-i η_{m,n} H)` for a random
/// Hermitian `H`. Deterministic per seed.
pub fn random_lorentz(m: usize, n: usize, seed: u64) -> Result<CMatrix> {
    let d = m + n;
    if d == 0 {
        return Err(Error::InvalidArgument("m + n must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = 0.7 / (d as f64).sqrt();
    let mut h = CMatrix::zeros(d, d);
    for r in 0..d {
        let v: f64 = StandardNormal.sample(&mut rng);
        h[(r, r)] = c(v * scale, 0.0);
        for col in r + 1..d {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let z = c(re, im) * scale;
            h[(r, col)] = z;
            h[(col, r)] = z.conj();
        }
    }
    let eta = LocalMetric::signature(m, n).to_matrix();
    let generator = (eta * h).map(|z| z * c(0.0, -1.0));
    Ok(linalg::expm(&generator))
}

/// Random element of the isometry group of an arbitrary diagonal metric.
pub fn random_isometry(metric: &LocalMetric, seed: u64) -> Result<CMatrix> {
    let signs = metric.signs();
    let pos: Vec<usize> = (0..signs.len()).filter(|&i| signs[i] > 0).collect();
    let neg: Vec<usize> = (0..signs.len()).filter(|&i| signs[i] < 0).collect();
    let base = random_lorentz(pos.len(), neg.len(), seed)?;
    // permute η_{m,n} ordering back onto the metric's positions
    let order: Vec<usize> = pos.iter().chain(neg.iter()).copied().collect();
    let d = signs.len();
    let mut out = CMatrix::zeros(d, d);
    for (a, &ra) in order.iter().enumerate() {
        for (b, &cb) in order.iter().enumerate() {
            out[(ra, cb)] = base[(a, b)];
        }
    }
    Ok(out)
}

/// Rotation angle helper used in tests and docs: `T` raised to `k`.
pub fn t_power(k: u32) -> CMatrix {
    linalg::diag(&[ONE, cis(-FRAC_PI_4 * k as f64)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn qubit() -> LocalMetric {
        LocalMetric::from_kinds(&[BitKind::Qubit])
    }
    fn hybit() -> LocalMetric {
        LocalMetric::from_kinds(&[BitKind::Hybit])
    }

    #[test]
    fn builtin_examples() {
        let tau = builtin("TAU", None).unwrap();
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[c(SQRT_2, 0.0), linalg::I, linalg::I, c(-SQRT_2, 0.0)],
        );
        assert_eq!(tau.matrix(), &expect);
        assert!(max_abs_diff(builtin("boost", Some(0.0)).unwrap().matrix(), &linalg::identity(2)) == 0.0);
        assert_eq!(
            builtin("CZ", None).unwrap().matrix(),
            &linalg::real_diag(&[1.0, 1.0, 1.0, -1.0])
        );
        assert!(matches!(builtin("FOO", None), Err(Error::UnknownGate(_))));
        assert!(matches!(builtin("BOOST", None), Err(Error::MissingParameter(_))));
    }

    #[test]
    fn t_gate_keeps_global_phase() {
        let t = Gate::T.matrix();
        assert!((t[(0, 0)] - ONE).norm() < 1e-15);
        assert!((t[(1, 1)] - cis(-FRAC_PI_4)).norm() < 1e-15);
        assert!(max_abs_diff(&t, &t_power(1)) < 1e-15);
    }

    #[test]
    fn local_metric_examples() {
        let l = RegisterLayout::new(1, 1);
        assert_eq!(local_metric(&l, &[0]).unwrap().signs(), &[1, 1]);
        assert_eq!(local_metric(&l, &[0, 1]).unwrap().signs(), &[1, -1, 1, -1]);
        assert_eq!(local_metric(&l, &[1, 0]).unwrap().signs(), &[1, 1, -1, -1]);
        assert!(matches!(local_metric(&l, &[0, 0]), Err(Error::DuplicateBit(0))));
        assert!(matches!(local_metric(&l, &[2]), Err(Error::BitOutOfRange(2))));
    }

    #[test]
    fn isometry_examples() {
        assert!(is_isometry(&Gate::Tau.matrix(), &hybit()).unwrap().is_isometry);
        let cnot = controlled(&Gate::X.gate_matrix(), 1);
        let qh = LocalMetric::from_kinds(&[BitKind::Qubit, BitKind::Hybit]);
        let rep = is_isometry(cnot.matrix(), &qh).unwrap();
        assert!(!rep.is_isometry);
        assert!(rep.residual >= 1.0);
        let rep = is_isometry(&linalg::identity(4), &qh).unwrap();
        assert!(rep.is_isometry && rep.residual == 0.0);
        assert!(is_isometry(&linalg::identity(2), &qh).is_err());
    }

    #[test]
    fn builtins_are_isometries_of_their_natural_metrics() {
        for g in [Gate::H, Gate::T, Gate::X, Gate::Y, Gate::Z, Gate::Sz, Gate::Szd] {
            assert!(is_isometry(&g.matrix(), &qubit()).unwrap().residual < 1e-15, "{g}");
        }
        for g in [Gate::T, Gate::Tau, Gate::Z, Gate::Boost(0.8), Gate::Phase(0.3), Gate::Sz] {
            assert!(is_isometry(&g.matrix(), &hybit()).unwrap().residual < 1e-13, "{g}");
        }
        for kinds in [
            [BitKind::Qubit, BitKind::Qubit],
            [BitKind::Qubit, BitKind::Hybit],
            [BitKind::Hybit, BitKind::Qubit],
            [BitKind::Hybit, BitKind::Hybit],
        ] {
            let eta = LocalMetric::from_kinds(&kinds);
            assert_eq!(is_isometry(&Gate::Cz.matrix(), &eta).unwrap().residual, 0.0);
        }
    }

    #[test]
    fn x_fails_exactly_on_hybit_targets() {
        for control in [BitKind::Qubit, BitKind::Hybit] {
            for target in [BitKind::Qubit, BitKind::Hybit] {
                let eta = LocalMetric::from_kinds(&[control, target]);
                let cx = controlled(&Gate::X.gate_matrix(), 1);
                let ok = is_isometry(cx.matrix(), &eta).unwrap().is_isometry;
                assert_eq!(ok, target == BitKind::Qubit);
            }
        }
    }

    #[test]
    fn controlled_examples() {
        let cz = controlled(&Gate::Z.gate_matrix(), 1);
        assert_eq!(cz.matrix(), &Gate::Cz.matrix());
        let ccz = controlled(&Gate::Z.gate_matrix(), 2);
        let mut d = vec![1.0; 8];
        d[7] = -1.0;
        assert_eq!(ccz.matrix(), &linalg::real_diag(&d));
        assert_eq!(ccz.arity(), 3);
        let ci = controlled(&GateMatrix::identity(1), 3);
        assert_eq!(ci.matrix(), &linalg::identity(16));
    }

    #[test]
    fn controlled_preserves_isometry_for_all_control_kinds() {
        let target_gates = [
            (BitKind::Hybit, Gate::Boost(0.6)),
            (BitKind::Hybit, Gate::Tau),
            (BitKind::Qubit, Gate::H),
        ];
        for (tk, g) in target_gates {
            for k in 1..=3usize {
                for pattern in 0..1usize << k {
                    let mut kinds: Vec<BitKind> = (0..k)
                        .map(|i| if pattern >> i & 1 == 1 { BitKind::Hybit } else { BitKind::Qubit })
                        .collect();
                    kinds.push(tk);
                    let eta = LocalMetric::from_kinds(&kinds);
                    let cg = controlled(&g.gate_matrix(), k);
                    assert!(is_isometry(cg.matrix(), &eta).unwrap().residual < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_lorentz_examples() {
        let u = random_lorentz(2, 0, 3).unwrap();
        assert!(is_isometry(&u, &LocalMetric::signature(2, 0)).unwrap().residual < 1e-12);
        let v = random_lorentz(1, 1, 9).unwrap();
        assert!(is_isometry(&v, &LocalMetric::signature(1, 1)).unwrap().residual <= 1e-12);
        assert_eq!(random_lorentz(2, 2, 5).unwrap(), random_lorentz(2, 2, 5).unwrap());
        assert_ne!(random_lorentz(2, 2, 5).unwrap(), random_lorentz(2, 2, 6).unwrap());
    }

    #[test]
    fn isometries_have_unit_determinant_magnitude() {
        for seed in 0..10 {
            let g = random_lorentz(2, 2, seed).unwrap();
            let det = g.determinant();
            assert!((det.norm() - 1.0).abs() < 1e-10);
        }
    }
}
