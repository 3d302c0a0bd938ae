//! Circuit IR and the `.lqc` text format.
//!
//! `qN` names the N-th qubit and `hN` the N-th hybit in register order. An
//! instruction applies its gate to the targets when every control is 1.

mod parse;
mod serialize;

use std::borrow::Cow;
use std::fmt;

use crate::error::{Error, Result};
use crate::gates::{isometry_residual, local_metric, Gate, GateMatrix};
use crate::linalg::{self, CMatrix};
use crate::register::{BitKind, RegisterLayout};
use crate::EPS_ISO;

pub use parse::parse;
pub use serialize::serialize;

/// Registers above this many bits are refused by [`Circuit::to_matrix`].
pub const MAX_MATRIX_BITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRef {
    pub kind: BitKind,
    pub index: usize,
}

impl BitRef {
    pub fn q(index: usize) -> Self {
        Self { kind: BitKind::Qubit, index }
    }

    pub fn h(index: usize) -> Self {
        Self { kind: BitKind::Hybit, index }
    }

    /// Register position of this bit, if the layout has it.
    pub fn position(&self, layout: &RegisterLayout) -> Option<usize> {
        layout
            .bits()
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == self.kind)
            .nth(self.index)
            .map(|(p, _)| p)
    }

    /// The reference naming register position `pos`.
    pub fn at(layout: &RegisterLayout, pos: usize) -> Self {
        let kind = layout.kind(pos);
        let index = layout.bits()[..pos].iter().filter(|k| **k == kind).count();
        Self { kind, index }
    }
}

impl fmt::Display for BitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Builtin(Gate),
    Custom { name: String, matrix: GateMatrix },
}

impl GateSpec {
    pub fn custom(name: impl Into<String>, matrix: GateMatrix) -> Self {
        GateSpec::Custom {
            name: name.into(),
            matrix,
        }
    }

    pub fn matrix(&self) -> Cow<'_, CMatrix> {
        match self {
            GateSpec::Builtin(g) => Cow::Owned(g.matrix()),
            GateSpec::Custom { matrix, .. } => Cow::Borrowed(matrix.matrix()),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateSpec::Builtin(g) => g.arity(),
            GateSpec::Custom { matrix, .. } => matrix.arity(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            GateSpec::Builtin(g) => g.name(),
            GateSpec::Custom { name, .. } => name,
        }
    }
}

impl From<Gate> for GateSpec {
    fn from(g: Gate) -> Self {
        GateSpec::Builtin(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    gate: GateSpec,
    targets: Vec<BitRef>,
    controls: Vec<BitRef>,
}

impl Instruction {
    pub fn new(gate: impl Into<GateSpec>, targets: Vec<BitRef>, controls: Vec<BitRef>) -> Result<Self> {
        let gate = gate.into();
        if gate.arity() != targets.len() {
            return Err(Error::InvalidInstruction(format!(
                "{} acts on {} bit(s), {} target(s) given",
                gate.name(),
                gate.arity(),
                targets.len()
            )));
        }
        let mut all: Vec<BitRef> = targets.iter().chain(&controls).copied().collect();
        all.sort();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstruction(format!("bit {} used twice", w[0])));
        }
        Ok(Self {
            gate,
            targets,
            controls,
        })
    }

    pub fn gate(&self) -> &GateSpec {
        &self.gate
    }

    pub fn targets(&self) -> &[BitRef] {
        &self.targets
    }

    pub fn controls(&self) -> &[BitRef] {
        &self.controls
    }

    /// Target and control register positions.
    pub fn positions(&self, layout: &RegisterLayout) -> Result<(Vec<usize>, Vec<usize>)> {
        let resolve = |refs: &[BitRef]| {
            refs.iter()
                .map(|r| {
                    r.position(layout).ok_or_else(|| {
                        Error::InvalidInstruction(format!("bit {r} not in register {layout}"))
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok((resolve(&self.targets)?, resolve(&self.controls)?))
    }

    /// Isometry residual of the gate against the targets' local metric.
    /// The residual of a controlled gate equals that of its target block.
    pub fn check_isometry(&self, layout: &RegisterLayout) -> Result<()> {
        let (targets, _) = self.positions(layout)?;
        let eta = local_metric(layout, &targets)?;
        let m = self.gate.matrix();
        let residual = isometry_residual(&m, &eta)?;
        if residual > iso_tolerance(&m) {
            return Err(Error::NotIsometric { residual });
        }
        Ok(())
    }
}

/// `EPS_ISO` scaled by the squared entry magnitude, so large boosts are judged
/// relative to their own rounding error.
pub fn iso_tolerance(m: &CMatrix) -> f64 {
    EPS_ISO * linalg::max_abs(m).powi(2).max(1.0)
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.controls.is_empty() {
            f.write_str("CTRL")?;
            for c in &self.controls {
                write!(f, " {c}")?;
            }
            f.write_str(" : ")?;
        }
        f.write_str(self.gate.name())?;
        if let GateSpec::Builtin(g) = &self.gate {
            if let Some(p) = g.param() {
                write!(f, " {}", crate::matrix_io::format_f64(p))?;
            }
        }
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: RegisterLayout,
    instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(layout: RegisterLayout) -> Self {
        Self {
            layout,
            instructions: Vec::new(),
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Appends after checking bit ranges, custom-name consistency and isometry.
    pub fn push(&mut self, instr: Instruction) -> Result<()> {
        instr.positions(&self.layout)?;
        if let GateSpec::Custom { name, matrix } = &instr.gate {
            if Gate::is_builtin_name(name) {
                return Err(Error::InvalidInstruction(format!(
                    "custom gate `{name}` shadows a builtin"
                )));
            }
            if let Some(prev) = self.custom_gate(name) {
                if prev != matrix {
                    return Err(Error::InvalidInstruction(format!(
                        "custom gate `{name}` defined twice with different matrices"
                    )));
                }
            }
        }
        instr.check_isometry(&self.layout)?;
        self.instructions.push(instr);
        Ok(())
    }

    /// Builds and pushes an instruction from register positions.
    pub fn push_at(&mut self, gate: impl Into<GateSpec>, targets: &[usize], controls: &[usize]) -> Result<()> {
        let n = self.layout.num_bits();
        if let Some(&p) = targets.iter().chain(controls).find(|&&p| p >= n) {
            return Err(Error::BitOutOfRange(p));
        }
        let refs = |ps: &[usize]| ps.iter().map(|&p| BitRef::at(&self.layout, p)).collect();
        let instr = Instruction::new(gate, refs(targets), refs(controls))?;
        self.push(instr)
    }

    /// Appends every instruction of `other`, which must share this layout.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.layout != self.layout {
            return Err(Error::InvalidArgument(format!(
                "cannot append circuit on {} to circuit on {}",
                other.layout, self.layout
            )));
        }
        for instr in &other.instructions {
            self.push(instr.clone())?;
        }
        Ok(())
    }

    pub fn custom_gate(&self, name: &str) -> Option<&GateMatrix> {
        self.instructions.iter().find_map(|i| match &i.gate {
            GateSpec::Custom { name: n, matrix } if n == name => Some(matrix),
            _ => None,
        })
    }

    /// Distinct custom gates in first-use order.
    pub fn custom_gates(&self) -> Vec<(&str, &GateMatrix)> {
        let mut out: Vec<(&str, &GateMatrix)> = Vec::new();
        for i in &self.instructions {
            if let GateSpec::Custom { name, matrix } = &i.gate {
                if !out.iter().any(|(n, _)| n == name) {
                    out.push((name, matrix));
                }
            }
        }
        out
    }

    /// Dense matrix of the whole circuit; the first instruction is the
    /// rightmost factor.
    pub fn to_matrix(&self) -> Result<GateMatrix> {
        let n = self.layout.num_bits();
        if n > MAX_MATRIX_BITS {
            return Err(Error::TooLarge(n));
        }
        let d = self.layout.dimension();
        let mut m = linalg::identity(d);
        let plans = self
            .instructions
            .iter()
            .map(|i| crate::simulator::Kernel::new(&self.layout, i))
            .collect::<Result<Vec<_>>>()?;
        for mut col in m.column_iter_mut() {
            let amps = col.as_mut_slice();
            for plan in &plans {
                plan.apply_seq(amps);
            }
        }
        GateMatrix::new(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitref_positions_follow_layout_order() {
        let l = RegisterLayout::from_kinds_str("hqhq").unwrap();
        assert_eq!(BitRef::q(0).position(&l), Some(1));
        assert_eq!(BitRef::h(1).position(&l), Some(2));
        assert_eq!(BitRef::q(2).position(&l), None);
        for p in 0..4 {
            assert_eq!(BitRef::at(&l, p).position(&l), Some(p));
        }
    }

    #[test]
    fn instruction_validation() {
        assert!(Instruction::new(Gate::Z, vec![BitRef::q(0)], vec![BitRef::q(0)]).is_err());
        assert!(Instruction::new(Gate::Cz, vec![BitRef::q(0)], vec![]).is_err());
        let mut c = Circuit::new(RegisterLayout::new(1, 1));
        assert!(matches!(
            c.push_at(Gate::X, &[1], &[0]),
            Err(Error::NotIsometric { .. })
        ));
        assert!(c.push_at(Gate::Boost(0.5), &[1], &[0]).is_ok());
        assert!(c.push_at(Gate::Z, &[2], &[]).is_err());
    }

    #[test]
    fn large_boosts_are_accepted() {
        let mut c = Circuit::new(RegisterLayout::new(0, 1));
        c.push_at(Gate::Boost(12.0), &[0], &[]).unwrap();
    }

    #[test]
    fn to_matrix_examples() {
        let c = Circuit::new(RegisterLayout::new(2, 0));
        assert_eq!(c.to_matrix().unwrap().matrix(), &linalg::identity(4));
        let mut c = Circuit::new(RegisterLayout::new(2, 0));
        c.push_at(Gate::Cz, &[0, 1], &[]).unwrap();
        assert_eq!(c.to_matrix().unwrap().matrix(), &Gate::Cz.matrix());
        let big = Circuit::new(RegisterLayout::new(13, 0));
        assert!(matches!(big.to_matrix(), Err(Error::TooLarge(13))));
    }

    #[test]
    fn to_matrix_orders_first_instruction_rightmost() {
        let mut c = Circuit::new(RegisterLayout::new(1, 0));
        c.push_at(Gate::H, &[0], &[]).unwrap();
        c.push_at(Gate::T, &[0], &[]).unwrap();
        let expect = Gate::T.matrix() * Gate::H.matrix();
        assert!(linalg::max_abs_diff(c.to_matrix().unwrap().matrix(), &expect) < 1e-15);
    }
}
