use std::fmt::Write as _;

use super::Circuit;
use crate::matrix_io;

/// Canonical text: declarations, DEFGATE blocks in first-use order, then one
/// instruction per line.
pub fn serialize(c: &Circuit) -> String {
    let layout = c.layout();
    let mut out = String::new();
    if layout.is_canonical() {
        let (q, h) = (layout.num_qubits(), layout.num_hybits());
        if q > 0 || h == 0 {
            let _ = writeln!(out, "qubits {q}");
        }
        if h > 0 {
            let _ = writeln!(out, "hybits {h}");
        }
    } else {
        let _ = writeln!(out, "layout {layout}");
    }
    for (name, m) in c.custom_gates() {
        let _ = writeln!(out, "DEFGATE {name} {}", m.arity());
        out.push_str(&matrix_io::format_rows(m.matrix()));
    }
    for instr in c.instructions() {
        let _ = writeln!(out, "{instr}");
    }
    out
}
