//! Exact multi-controlled gates from controlled-Z and single-bit gates.
//!
//! A single-bit gate is split into a phase and a product of reflections
//! `V Z V⁻¹` (two for a qubit target, at most five for a hybit target), so
//! `Λ_m(U)` reduces to `Λ_m(Z)` conjugated by single-bit gates plus a
//! controlled phase. `Λ_m(Z)` is built from `Λ_{m-1}` gates through the
//! parity gadget `W(V₀)`, which applies `V₀` when two chosen controls differ.

use num_complex::Complex64;

use crate::circuit::{Circuit, GateSpec};
use crate::error::{Error, Result};
use crate::gates::{Gate, GateMatrix};
use crate::linalg::{self, c, cis, C2, ONE, ZERO};
use crate::register::{BitKind, RegisterLayout};

const SNAP: f64 = 1e-14;

/// `e^{iα}` and the conjugators `V_i` with `U = e^{iα} ∏ V_i Z V_i⁻¹`.
#[derive(Debug, Clone)]
pub struct Reflections {
    pub phase: f64,
    pub conjugators: Vec<C2>,
}

impl Reflections {
    pub fn product(&self) -> C2 {
        let z = linalg::pauli_z();
        self.conjugators.iter().fold(linalg::eye2() * cis(self.phase), |acc, v| {
            acc * v * z * linalg::inverse2(v).expect("invertible conjugator")
        })
    }
}

fn is_identity(m: &C2, tol: f64) -> bool {
    linalg::c2_max_abs_diff(m, &linalg::eye2()) <= tol
}

/// `V` with `V σ_z V† = n·σ` for a real unit vector `n`.
fn unit_conjugator(n: [f64; 3]) -> C2 {
    let beta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let (cb, sb) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    C2::new(c(cb, 0.0), -cis(-phi) * sb, cis(phi) * sb, c(cb, 0.0))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn qubit_reflections(u: &C2) -> Reflections {
    let alpha = linalg::det2(u).arg() / 2.0;
    let s = u * cis(-alpha);
    let cos_t = (s.trace() / 2.0).re.clamp(-1.0, 1.0);
    let k = (s - linalg::eye2() * c(cos_t, 0.0)) / linalg::I;
    // k = sin θ (m·σ)
    let m = [k[(1, 0)].re, k[(1, 0)].im, k[(0, 0)].re];
    let sin_t = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if sin_t < 1e-15 {
        // s = ±I
        let phase = if cos_t < 0.0 { alpha + std::f64::consts::PI } else { alpha };
        return Reflections { phase, conjugators: vec![] };
    }
    let theta = sin_t.atan2(cos_t);
    let m = normalized(m);
    let helper = if m[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let n1 = normalized(cross(m, helper));
    let mx = cross(m, n1);
    let n2 = [
        theta.cos() * n1[0] + theta.sin() * mx[0],
        theta.cos() * n1[1] + theta.sin() * mx[1],
        theta.cos() * n1[2] + theta.sin() * mx[2],
    ];
    Reflections {
        phase: alpha,
        conjugators: vec![unit_conjugator(n1), unit_conjugator(n2)],
    }
}

/// Square root of a positive Hermitian 2×2 matrix with unit determinant.
fn sqrt_positive(p: &C2) -> C2 {
    let t = (p.trace().re + 2.0).sqrt();
    (p + linalg::eye2()) / c(t, 0.0)
}

/// `C = (1/√2)[[1, i], [i, 1]]` maps SU(1,1) onto SL(2,R) by `M ↦ C M C†`.
fn cayley() -> C2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    C2::new(c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0))
}

/// Writes `diag(e^{iθ}, e^{-iθ})`, `|θ| ≤ π/4`, as a product of three pure
/// boosts (positive Hermitian elements of SU(1,1)).
fn rotation_as_boosts(theta: f64) -> [C2; 3] {
    let (ct, st) = (theta.cos(), theta.sin());
    // real image of the rotation
    let rot = nalgebra::Matrix2::new(ct, st, -st, ct);
    let r = (2.0 / ct).acosh();
    let h1 = nalgebra::Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp());
    let h2 = h1.try_inverse().expect("diagonal") * rot;
    // h2 has trace 4: eigenvalues 2 ± √3, real eigenvectors
    let tr = h2.trace();
    let lam = (tr + (tr * tr - 4.0).sqrt()) / 2.0;
    let eigvec = |l: f64| {
        // (h2 - l I) v = 0
        let (a, b) = (h2[(0, 0)] - l, h2[(0, 1)]);
        if b.abs() > a.abs() {
            nalgebra::Vector2::new(1.0, -a / b)
        } else {
            nalgebra::Vector2::new(-b / a, 1.0)
        }
    };
    let mut p = nalgebra::Matrix2::from_columns(&[eigvec(lam), eigvec(1.0 / lam)]);
    let det = p.determinant();
    p /= det.abs().sqrt();
    let half = nalgebra::Matrix2::new(lam.sqrt(), 0.0, 0.0, 1.0 / lam.sqrt());
    let p_inv = p.try_inverse().expect("distinct eigenvalues");
    let s3 = p * half * p.transpose();
    let s4 = p_inv.transpose() * half * p_inv;
    let cay = cayley();
    let back = |m: nalgebra::Matrix2<f64>| {
        let mc = m.map(|x| c(x, 0.0));
        cay.adjoint() * mc * cay
    };
    [back(h1), back(s3), back(s4)]
}

fn hybit_reflections(u: &C2) -> Result<Reflections> {
    let alpha0 = linalg::det2(u).arg() / 2.0;
    let g = u * cis(-alpha0);
    // polar split g = B · diag(e^{iθ}, e^{-iθ})
    let b = sqrt_positive(&(g * g.adjoint()));
    let rot = linalg::inverse2(&b).ok_or_else(|| Error::NumericGuard("singular boost".into()))? * g;
    let theta = rot[(0, 0)].arg();
    let quarter = (theta / std::f64::consts::FRAC_PI_2).round();
    let reduced = theta - quarter * std::f64::consts::FRAC_PI_2;
    // diag(e^{iθ}, e^{-iθ}) = i^q Z^q diag(e^{iθ'}, e^{-iθ'})
    let q = quarter as i64;
    let mut boosts: Vec<C2> = vec![b];
    let odd = q.rem_euclid(2) == 1;
    if reduced.abs() > 1e-15 {
        let [h1, s3, s4] = rotation_as_boosts(reduced);
        if odd {
            // move Z to the right: Z H = H⁻¹ Z
            for h in [h1, s3, s4] {
                boosts.push(linalg::inverse2(&h).expect("boost"));
            }
        } else {
            boosts.extend([h1, s3, s4]);
        }
    }
    boosts.retain(|m| !is_identity(m, 1e-15));
    // ∏ boosts = P₁ P₂⁻¹ P₃ P₄⁻¹ … with reflections P_i Z
    let mut conjugators = Vec::new();
    for (idx, bst) in boosts.iter().enumerate() {
        let p = if idx % 2 == 0 { *bst } else { linalg::inverse2(bst).expect("boost") };
        conjugators.push(sqrt_positive(&p));
    }
    // an odd number of reflections leaves a trailing Z
    let need_z = odd != (boosts.len() % 2 == 1);
    if need_z {
        conjugators.push(linalg::eye2());
    }
    let phase = alpha0 + quarter * std::f64::consts::FRAC_PI_2;
    Ok(Reflections { phase, conjugators })
}

/// Splits `U` into a phase and reflections conjugate to `Z` within the
/// isometry group of the target kind.
pub fn reflection_decomposition(u: &C2, kind: BitKind) -> Result<Reflections> {
    match kind {
        BitKind::Qubit => Ok(qubit_reflections(u)),
        BitKind::Hybit => hybit_reflections(u),
    }
}

#[derive(Debug, Clone)]
enum Op {
    Single { m: C2, target: usize, controls: Vec<usize> },
    Cz { a: usize, b: usize },
}

/// How far controlled gates are broken down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lowering {
    /// Keep `Λ_m(U)` as one multi-controlled instruction.
    MultiControlled,
    /// Expand `m ≥ 2` controls into `Λ₁` gates and single-bit gates.
    SingleControl,
    /// Expand everything down to `CZ` and single-bit gates.
    ControlledZ,
}

/// Collects gates on a layout, merging adjacent uncontrolled single-bit gates.
#[derive(Debug, Clone)]
pub struct Emitter {
    layout: RegisterLayout,
    ops: Vec<Op>,
    lowering: Lowering,
    lower_single_controls: bool,
}

impl Emitter {
    pub fn new(layout: RegisterLayout) -> Self {
        Self::with_lowering(layout, Lowering::SingleControl)
    }

    pub fn with_lowering(layout: RegisterLayout, lowering: Lowering) -> Self {
        Self {
            layout,
            ops: Vec::new(),
            lowering,
            lower_single_controls: lowering == Lowering::ControlledZ,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    fn check_bits(&self, bits: &[usize]) -> Result<()> {
        let n = self.layout.num_bits();
        for (k, &b) in bits.iter().enumerate() {
            if b >= n {
                return Err(Error::BitOutOfRange(b));
            }
            if bits[..k].contains(&b) {
                return Err(Error::DuplicateBit(b));
            }
        }
        Ok(())
    }

    /// Uncontrolled single-bit gate.
    pub fn gate(&mut self, m: C2, target: usize) {
        if let Some(Op::Single { m: prev, target: t, controls }) = self.ops.last_mut() {
            if *t == target && controls.is_empty() {
                *prev = m * *prev;
                if is_identity(prev, SNAP) {
                    self.ops.pop();
                }
                return;
            }
        }
        if !is_identity(&m, SNAP) {
            self.ops.push(Op::Single { m, target, controls: vec![] });
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.ops.push(Op::Cz { a, b });
    }

    /// `Λ_m(U)` firing when every control is 1.
    pub fn lambda(&mut self, u: &C2, controls: &[usize], target: usize) -> Result<()> {
        self.check_bits(&[controls, &[target]].concat())?;
        self.lambda_inner(u, controls, target)
    }

    /// Controlled gate firing when each control equals its paired value.
    pub fn lambda_polarity(&mut self, u: &C2, controls: &[(usize, u8)], target: usize) -> Result<()> {
        let bits: Vec<usize> = controls.iter().map(|c| c.0).collect();
        self.check_bits(&[bits.as_slice(), &[target]].concat())?;
        let x = linalg::pauli_x();
        let flips: Vec<usize> = controls
            .iter()
            .filter(|(b, v)| *v == 0 && self.layout.kind(*b) == BitKind::Qubit)
            .map(|c| c.0)
            .collect();
        for &b in &flips {
            self.gate(x, b);
        }
        let ones: Vec<usize> = controls.iter().filter(|c| c.1 != 0).map(|c| c.0).collect();
        let hybit_zeros: Vec<usize> = controls
            .iter()
            .filter(|(b, v)| *v == 0 && self.layout.kind(*b) == BitKind::Hybit)
            .map(|c| c.0)
            .collect();
        let mut fixed = ones;
        fixed.extend(&flips);
        self.hybit_zero_controls(u, &fixed, &hybit_zeros, target)?;
        for &b in &flips {
            self.gate(x, b);
        }
        Ok(())
    }

    /// `Λ^{c̄, rest}(U) = Λ^{rest}(U) · Λ^{c, rest}(U⁻¹)`: no isometric NOT
    /// exists on a hybit, so a 0-control is traded for two 1-controlled gates.
    fn hybit_zero_controls(&mut self, u: &C2, ones: &[usize], zeros: &[usize], target: usize) -> Result<()> {
        let Some((&c0, rest)) = zeros.split_first() else {
            return self.lambda_inner(u, ones, target);
        };
        let inv = linalg::inverse2(u).ok_or_else(|| Error::NumericGuard("singular gate".into()))?;
        let with_c: Vec<usize> = ones.iter().copied().chain([c0]).collect();
        self.hybit_zero_controls(&inv, &with_c, rest, target)?;
        self.hybit_zero_controls(u, ones, rest, target)
    }

    fn lambda_inner(&mut self, u: &C2, controls: &[usize], target: usize) -> Result<()> {
        if is_identity(u, SNAP) {
            return Ok(());
        }
        if controls.is_empty() {
            self.gate(*u, target);
            return Ok(());
        }
        if self.lowering == Lowering::MultiControlled {
            if controls.len() == 1 && linalg::c2_max_abs_diff(u, &linalg::pauli_z()) <= SNAP {
                self.cz(controls[0], target);
            } else {
                self.ops.push(Op::Single { m: *u, target, controls: controls.to_vec() });
            }
            return Ok(());
        }
        if u[(0, 1)].norm() <= SNAP && u[(1, 0)].norm() <= SNAP {
            return self.lambda_diag(u[(0, 0)], u[(1, 1)], controls, target);
        }
        if controls.len() == 1 && !self.lower_single_controls {
            self.ops.push(Op::Single { m: *u, target, controls: controls.to_vec() });
            return Ok(());
        }
        let refl = reflection_decomposition(u, self.layout.kind(target))?;
        self.phase_on_controls(refl.phase, controls)?;
        self.reflections(&refl.conjugators, controls, target)
    }

    /// `e^{iφ}` applied when every control is 1.
    fn phase_on_controls(&mut self, phi: f64, controls: &[usize]) -> Result<()> {
        if phi.rem_euclid(std::f64::consts::TAU).abs() < 1e-15 {
            return Ok(());
        }
        let (&x, rest) = controls.split_first().expect("at least one control");
        self.lambda_diag(ONE, cis(phi), rest, x)
    }

    /// Time order for `U = ∏ V_i Z V_i⁻¹`: the last reflection acts first.
    fn reflections(&mut self, conjugators: &[C2], controls: &[usize], target: usize) -> Result<()> {
        for v in conjugators.iter().rev() {
            let inv = linalg::inverse2(v).expect("invertible conjugator");
            self.gate(inv, target);
            self.lambda_z(controls, target)?;
            self.gate(*v, target);
        }
        Ok(())
    }

    /// `Λ_m(diag(a, b))`. The pure-phase part is symmetric in all involved
    /// bits, so it is moved onto a qubit when one is available.
    fn lambda_diag(&mut self, a: Complex64, b: Complex64, controls: &[usize], target: usize) -> Result<()> {
        if controls.is_empty() {
            self.gate(C2::new(a, ZERO, ZERO, b), target);
            return Ok(());
        }
        if (a - ONE).norm() > SNAP {
            self.phase_on_controls(a.arg(), controls)?;
        }
        let rel = b / a;
        if (rel - ONE).norm() <= SNAP {
            return Ok(());
        }
        let u = C2::new(ONE, ZERO, ZERO, rel);
        if (rel + ONE).norm() <= SNAP && controls.len() == 1 {
            return self.lambda_z(controls, target);
        }
        if controls.len() == 1 && !self.lower_single_controls {
            self.ops.push(Op::Single { m: u, target, controls: controls.to_vec() });
            return Ok(());
        }
        let mut bits: Vec<usize> = controls.to_vec();
        bits.push(target);
        let t = if self.layout.kind(target) == BitKind::Qubit {
            target
        } else {
            *bits.iter().find(|&&p| self.layout.kind(p) == BitKind::Qubit).unwrap_or(&target)
        };
        let others: Vec<usize> = bits.into_iter().filter(|&p| p != t).collect();
        if (rel + ONE).norm() <= SNAP {
            return self.lambda_z(&others, t);
        }
        let refl = reflection_decomposition(&u, self.layout.kind(t))?;
        self.phase_on_controls(refl.phase, &others)?;
        self.reflections(&refl.conjugators, &others, t)
    }

    /// `Λ_m(Z)`.
    pub fn lambda_z(&mut self, controls: &[usize], target: usize) -> Result<()> {
        match controls {
            [] => {
                self.gate(linalg::pauli_z(), target);
                Ok(())
            }
            [a] => {
                self.cz(*a, target);
                Ok(())
            }
            _ if self.lowering == Lowering::MultiControlled => {
                self.ops.push(Op::Single { m: linalg::pauli_z(), target, controls: controls.to_vec() });
                Ok(())
            }
            [x, y, rest @ ..] => {
                let sz = linalg::to_c2(&Gate::Sz.matrix());
                let with_y: Vec<usize> = rest.iter().copied().chain([*y]).collect();
                let with_x: Vec<usize> = rest.iter().copied().chain([*x]).collect();
                self.lambda_inner(&sz, &with_y, target)?;
                self.lambda_inner(&sz, &with_x, target)?;
                let szd = linalg::to_c2(&Gate::Szd.matrix());
                self.parity_gadget(&szd, *x, *y, rest, target)
            }
        }
    }

    /// `W(V₀)`: applies `V₀` to the target when bits `x` and `y` differ and
    /// every bit of `rest` is 1.
    pub fn parity_gadget(&mut self, v0: &C2, x: usize, y: usize, rest: &[usize], target: usize) -> Result<()> {
        let refl = reflection_decomposition(v0, self.layout.kind(target))?;
        let with_y: Vec<usize> = rest.iter().copied().chain([y]).collect();
        let with_x: Vec<usize> = rest.iter().copied().chain([x]).collect();
        for v in refl.conjugators.iter().rev() {
            let inv = linalg::inverse2(v).expect("invertible conjugator");
            self.gate(inv, target);
            self.lambda_z(&with_y, target)?;
            self.lambda_z(&with_x, target)?;
            self.gate(*v, target);
        }
        // phase e^{iγ} on odd parity of (x, y)
        let g = refl.phase;
        if g.rem_euclid(std::f64::consts::TAU).abs() > 1e-15 {
            self.lambda_diag(ONE, cis(g), rest, x)?;
            self.lambda_diag(ONE, cis(g), rest, y)?;
            self.lambda_diag(ONE, cis(-2.0 * g), &with_x, y)?;
        }
        Ok(())
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    /// Builds the circuit, naming non-builtin matrices `u0`, `u1`, ….
    pub fn finish(self) -> Result<Circuit> {
        let mut circuit = Circuit::new(self.layout.clone());
        let mut customs: Vec<(String, C2)> = Vec::new();
        for op in self.ops {
            match op {
                Op::Cz { a, b } => circuit.push_at(Gate::Cz, &[a, b], &[])?,
                Op::Single { m, target, controls } => {
                    let spec = match match_builtin(&m) {
                        Some(g) => GateSpec::Builtin(g),
                        None => {
                            let name = match customs.iter().find(|(_, cm)| *cm == m) {
                                Some((n, _)) => n.clone(),
                                None => {
                                    let n = format!("u{}", customs.len());
                                    customs.push((n.clone(), m));
                                    n
                                }
                            };
                            GateSpec::custom(name, GateMatrix::new(linalg::to_dynamic(&m))?)
                        }
                    };
                    circuit.push_at(spec, &[target], &controls)?;
                }
            }
        }
        Ok(circuit)
    }
}

/// Builtin gate whose matrix equals `m` to 1e-14, if any.
pub fn match_builtin(m: &C2) -> Option<Gate> {
    let fixed = [Gate::Z, Gate::X, Gate::Y, Gate::H, Gate::T, Gate::Sz, Gate::Szd, Gate::Tau];
    let close = |g: &Gate| linalg::c2_max_abs_diff(&linalg::to_c2(&g.matrix()), m) <= SNAP;
    if let Some(g) = fixed.iter().find(|g| close(g)) {
        return Some(*g);
    }
    let phase = Gate::Phase(m[(1, 1)].arg());
    if close(&phase) {
        return Some(phase);
    }
    let boost = Gate::Boost(m[(0, 1)].re.asinh());
    close(&boost).then_some(boost)
}

/// `Λ_k(V)` with the given controls and target, in exact mode.
pub fn lambda_k(layout: &RegisterLayout, controls: &[usize], target: usize, v: &C2) -> Result<Circuit> {
    let mut e = Emitter::new(layout.clone());
    e.lambda(v, controls, target)?;
    e.finish()
}

/// `Λ₂(V σ_z V⁻¹)`: `V⁻¹`, the controlled-Z construction, then `V`.
pub fn lambda2_gadget(layout: &RegisterLayout, x: usize, y: usize, target: usize, v: &C2) -> Result<Circuit> {
    let mut e = Emitter::new(layout.clone());
    e.check_bits(&[x, y, target])?;
    let inv = linalg::inverse2(v).ok_or_else(|| Error::InvalidArgument("V is singular".into()))?;
    e.gate(inv, target);
    e.lambda_z(&[x, y], target)?;
    e.gate(*v, target);
    e.finish()
}

/// `W₃(V σ_z V⁻¹)`: `V⁻¹`, `Λ₁(Z)` from `y`, `Λ₁(Z)` from `x`, `V`.
pub fn w3_gadget(layout: &RegisterLayout, x: usize, y: usize, target: usize, v: &C2) -> Result<Circuit> {
    let mut e = Emitter::new(layout.clone());
    e.check_bits(&[x, y, target])?;
    let inv = linalg::inverse2(v).ok_or_else(|| Error::InvalidArgument("V is singular".into()))?;
    e.gate(inv, target);
    e.cz(y, target);
    e.cz(x, target);
    e.gate(*v, target);
    e.finish()
}
