//! End-to-end lowering of a register isometry to a circuit.

use std::fmt::Write as _;

use crate::circuit::{Circuit, GateSpec};
use crate::error::{Error, Result};
use crate::gates::{Gate, LocalMetric};
use crate::linalg::{self, CMatrix, C2};
use crate::register::{BitKind, RegisterLayout};
use crate::synthesis::gadgets::{Emitter, Lowering};
use crate::synthesis::two_level::{lower_factor, product, two_level_factorize};
use crate::synthesis::words::{generators, WordTable};
use crate::EPS_RECON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompileMode {
    /// Multi-controlled single-bit gates, exact to `EPS_RECON`.
    Exact,
    /// Only `CZ` and generator words; each substituted gate within `tol`.
    Approx { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    pub mode: CompileMode,
    /// Longest generator word tried per substituted gate.
    pub depth_max: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { mode: CompileMode::Exact, depth_max: 24 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: &'static str,
    pub gate_count: usize,
    /// Max-norm distance to the target (projective in the approximate stage).
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileReport {
    pub stages: Vec<StageReport>,
    /// Gates replaced by words in approximate mode.
    pub substituted: usize,
    /// `tol · substituted` in approximate mode.
    pub budget: Option<f64>,
}

impl CompileReport {
    pub fn total_error(&self) -> f64 {
        self.stages.last().map_or(0.0, |s| s.max_error)
    }

    /// Exact stages within `EPS_RECON`.
    pub fn exact_ok(&self) -> bool {
        self.stages
            .iter()
            .filter(|s| s.stage != "approximate")
            .all(|s| s.max_error <= EPS_RECON)
    }

    pub fn within_budget(&self) -> bool {
        match self.budget {
            Some(b) => self.total_error() <= b,
            None => self.exact_ok(),
        }
    }

    /// `stage TAB gate_count TAB max_error` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            let _ = writeln!(out, "{}\t{}\t{:.6e}", s.stage, s.gate_count, s.max_error);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub circuit: Circuit,
    pub report: CompileReport,
}

/// `A = I ⊗ … ⊗ U ⊗ … ⊗ I` on one position, if so.
pub fn single_bit_embedding(a: &CMatrix, layout: &RegisterLayout) -> Option<(usize, C2)> {
    let d = layout.dimension();
    let tol = 1e-14 * linalg::max_abs(a).max(1.0);
    'pos: for p in 0..layout.num_bits() {
        let mask = layout.position_mask(p);
        let u = C2::new(a[(0, 0)], a[(0, mask)], a[(mask, 0)], a[(mask, mask)]);
        let bit = |x: usize| usize::from(x & mask != 0);
        for r in 0..d {
            for col in 0..d {
                let expect = if r & !mask == col & !mask { u[(bit(r), bit(col))] } else { linalg::ZERO };
                if (a[(r, col)] - expect).norm() > tol {
                    continue 'pos;
                }
            }
        }
        return Some((p, u));
    }
    None
}

fn count_error(circuit: &Circuit, a: &CMatrix) -> Result<f64> {
    Ok(linalg::max_abs_diff(circuit.to_matrix()?.matrix(), a))
}

/// Factorize, lower each factor, and in approximate mode expand to `CZ` and
/// replace every single-bit gate by a generator word.
pub fn compile(a: &CMatrix, layout: &RegisterLayout, options: &CompileOptions) -> Result<Compiled> {
    let d = layout.dimension();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.nrows() });
    }
    let metric = LocalMetric::of_layout(layout);
    let mut stages = Vec::new();
    let mut e = Emitter::with_lowering(layout.clone(), Lowering::MultiControlled);
    if let Some((p, u)) = single_bit_embedding(a, layout) {
        let residual = crate::gates::isometry_residual(&linalg::to_dynamic(&u), &LocalMetric::from_kinds(&[layout.kind(p)]))?;
        if residual > crate::circuit::iso_tolerance(a) {
            return Err(Error::NotIsometric { residual });
        }
        e.gate(u, p);
        stages.push(StageReport { stage: "factorize", gate_count: 1, max_error: 0.0 });
    } else {
        let factors = two_level_factorize(a, &metric)?;
        stages.push(StageReport {
            stage: "factorize",
            gate_count: factors.len(),
            max_error: linalg::max_abs_diff(&product(&factors, d), a),
        });
        // A = F₁ F₂ ⋯: the last factor acts first
        for f in factors.iter().rev() {
            lower_factor(&mut e, f.i, f.j, &f.v)?;
        }
    }
    let lowered = e.finish()?;
    stages.push(StageReport { stage: "lower", gate_count: lowered.len(), max_error: count_error(&lowered, a)? });
    let CompileMode::Approx { tol } = options.mode else {
        return Ok(Compiled {
            circuit: lowered,
            report: CompileReport { stages, substituted: 0, budget: None },
        });
    };
    let expanded = expand_to_cz(&lowered)?;
    stages.push(StageReport { stage: "expand", gate_count: expanded.len(), max_error: count_error(&expanded, a)? });
    let (approx, substituted) = substitute_words(&expanded, tol, options.depth_max)?;
    let err = linalg::projective_distance(approx.to_matrix()?.matrix(), a);
    stages.push(StageReport { stage: "approximate", gate_count: approx.len(), max_error: err });
    Ok(Compiled {
        circuit: approx,
        report: CompileReport { stages, substituted, budget: Some(tol * substituted.max(1) as f64) },
    })
}

/// Re-emits a circuit with every controlled gate expanded to `CZ` and
/// single-bit gates.
pub fn expand_to_cz(circuit: &Circuit) -> Result<Circuit> {
    let layout = circuit.layout();
    let mut e = Emitter::with_lowering(layout.clone(), Lowering::ControlledZ);
    for instr in circuit.instructions() {
        let (targets, controls) = instr.positions(layout)?;
        match (instr.gate(), targets.as_slice()) {
            (GateSpec::Builtin(Gate::Cz), [x, y]) => {
                let mut all = controls.clone();
                all.push(*x);
                e.lambda_z(&all, *y)?;
            }
            (g, [t]) => e.lambda(&linalg::to_c2(&g.matrix()), &controls, *t)?,
            _ => {
                return Err(Error::InvalidInstruction(format!(
                    "cannot expand multi-target gate `{}`",
                    instr.gate().name()
                )))
            }
        }
    }
    e.finish()
}

fn is_generator(g: &GateSpec, kind: BitKind) -> bool {
    matches!(g, GateSpec::Builtin(b) if generators(kind).contains(b))
}

/// Replaces each uncontrolled single-bit gate that is not already a
/// generator by its best word. Returns the circuit and the replacement count.
pub fn substitute_words(circuit: &Circuit, tol: f64, depth_max: usize) -> Result<(Circuit, usize)> {
    let layout = circuit.layout();
    let mut tables: [Option<WordTable>; 2] = [None, None];
    let mut out = Circuit::new(layout.clone());
    let mut substituted = 0;
    for instr in circuit.instructions() {
        let (targets, controls) = instr.positions(layout)?;
        let single = controls.is_empty() && targets.len() == 1;
        let kind = layout.kind(targets[0]);
        if !single || is_generator(instr.gate(), kind) {
            out.push(instr.clone())?;
            continue;
        }
        let slot = usize::from(kind == BitKind::Hybit);
        let table = tables[slot].get_or_insert_with(|| WordTable::build(kind, depth_max));
        let word = table.best(&linalg::to_c2(&instr.gate().matrix()), tol);
        substituted += 1;
        // the last gate of the product acts first
        for g in word.gates.iter().rev() {
            out.push_at(*g, &targets, &[])?;
        }
    }
    Ok((out, substituted))
}
