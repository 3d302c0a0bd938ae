use std::collections::HashMap;

use super::{BitRef, Circuit, Diagnostic, GateSpec, Instruction};
use crate::error::{Error, Result};
use crate::gates::{Gate, GateMatrix};
use crate::matrix_io;
use crate::register::{BitKind, RegisterLayout};

/// Widest register the parser will declare; memory guards apply later.
const MAX_DECLARED_BITS: usize = 62;

const KEYWORDS: [&str; 5] = ["QUBITS", "HYBITS", "LAYOUT", "CTRL", "DEFGATE"];

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    col: usize,
    text: &'a str,
}

/// Splits on whitespace, with `:` always a token of its own.
fn tokenize(body: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in body.char_indices() {
        if ch.is_whitespace() || ch == ':' {
            if let Some(s) = start.take() {
                out.push(Token { col: s + 1, text: &body[s..i] });
            }
            if ch == ':' {
                out.push(Token { col: i + 1, text: ":" });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { col: s + 1, text: &body[s..] });
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Parser<'a> {
    lines: Vec<&'a str>,
    diags: Vec<Diagnostic>,
    qubits: Option<usize>,
    hybits: Option<usize>,
    kinds: Option<RegisterLayout>,
    circuit: Option<Circuit>,
    defs: HashMap<String, GateMatrix>,
}

type LineResult<T> = std::result::Result<T, (usize, String)>;

impl<'a> Parser<'a> {
    fn diag(&mut self, line: usize, column: usize, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            line,
            column,
            message: message.into(),
        });
    }

    fn circuit(&mut self) -> &mut Circuit {
        if self.circuit.is_none() {
            let layout = self.kinds.clone().unwrap_or_else(|| {
                RegisterLayout::new(self.qubits.unwrap_or(0), self.hybits.unwrap_or(0))
            });
            self.circuit = Some(Circuit::new(layout));
        }
        self.circuit.as_mut().expect("initialized above")
    }

    fn run(mut self) -> Result<Circuit> {
        let mut i = 0;
        while i < self.lines.len() {
            let line_no = i + 1;
            let toks = tokenize(strip_comment(self.lines[i]));
            i += 1;
            let Some(first) = toks.first() else { continue };
            let head = first.text.to_ascii_uppercase();
            let outcome = match head.as_str() {
                "QUBITS" | "HYBITS" | "LAYOUT" => self.declaration(&head, &toks),
                "DEFGATE" => match self.defgate(&toks, i) {
                    Ok(consumed) => {
                        i += consumed;
                        Ok(())
                    }
                    Err(e) => {
                        i = self.skip_matrix_rows(i);
                        Err(e)
                    }
                },
                _ => self.statement(&toks),
            };
            if let Err((col, msg)) = outcome {
                self.diag(line_no, col, msg);
            }
        }
        if !self.diags.is_empty() {
            return Err(Error::Parse(self.diags));
        }
        self.circuit();
        Ok(self.circuit.expect("initialized above"))
    }

    fn skip_matrix_rows(&self, mut i: usize) -> usize {
        while i < self.lines.len() {
            let body = strip_comment(self.lines[i]).trim_start();
            match body.chars().next() {
                Some(c) if c.is_ascii_alphabetic() || c == '_' => break,
                _ => i += 1,
            }
        }
        i
    }

    fn declaration(&mut self, head: &str, toks: &[Token]) -> LineResult<()> {
        let kw = toks[0];
        if self.circuit.is_some() {
            return Err((kw.col, "declarations must precede all statements".into()));
        }
        if toks.len() != 2 {
            return Err((kw.col, format!("`{}` takes exactly one argument", kw.text)));
        }
        let arg = toks[1];
        if head == "LAYOUT" {
            if self.kinds.is_some() || self.qubits.is_some() || self.hybits.is_some() {
                return Err((kw.col, "`layout` cannot be combined with other declarations".into()));
            }
            let layout = RegisterLayout::from_kinds_str(arg.text).map_err(|e| (arg.col, e.to_string()))?;
            if layout.num_bits() > MAX_DECLARED_BITS {
                return Err((arg.col, format!("at most {MAX_DECLARED_BITS} bits")));
            }
            self.kinds = Some(layout);
            return Ok(());
        }
        if self.kinds.is_some() {
            return Err((kw.col, "`layout` cannot be combined with other declarations".into()));
        }
        let count: usize = arg
            .text
            .parse()
            .map_err(|_| (arg.col, format!("expected a bit count, found `{}`", arg.text)))?;
        let (slot, other) = if head == "QUBITS" {
            (&mut self.qubits, self.hybits)
        } else {
            (&mut self.hybits, self.qubits)
        };
        if slot.is_some() {
            return Err((kw.col, format!("`{}` declared twice", kw.text)));
        }
        if count + other.unwrap_or(0) > MAX_DECLARED_BITS {
            return Err((arg.col, format!("at most {MAX_DECLARED_BITS} bits")));
        }
        *slot = Some(count);
        Ok(())
    }

    /// Returns the number of lines consumed after the DEFGATE line.
    fn defgate(&mut self, toks: &[Token], next: usize) -> LineResult<usize> {
        let kw = toks[0];
        self.circuit();
        if toks.len() != 3 {
            return Err((kw.col, "expected `DEFGATE name arity`".into()));
        }
        let (name, arity_tok) = (toks[1], toks[2]);
        if !is_ident(name.text) {
            return Err((name.col, format!("`{}` is not a valid gate name", name.text)));
        }
        let upper = name.text.to_ascii_uppercase();
        if Gate::is_builtin_name(name.text) || KEYWORDS.contains(&upper.as_str()) {
            return Err((name.col, format!("`{}` is reserved", name.text)));
        }
        if self.defs.contains_key(name.text) {
            return Err((name.col, format!("gate `{}` already defined", name.text)));
        }
        let arity: usize = arity_tok
            .text
            .parse()
            .ok()
            .filter(|a| (1..=MAX_DECLARED_BITS.min(10)).contains(a))
            .ok_or_else(|| (arity_tok.col, format!("bad arity `{}`", arity_tok.text)))?;
        let rows = self.lines[next..]
            .iter()
            .enumerate()
            .map(|(k, l)| (next + k + 1, *l));
        let (matrix, consumed) = matrix_io::parse_rows(rows, 1 << arity).map_err(|e| match e {
            Error::MatrixFormat { line, message } => (1, format!("line {line}: {message}")),
            other => (1, other.to_string()),
        })?;
        let gm = GateMatrix::new(matrix).map_err(|e| (kw.col, e.to_string()))?;
        self.defs.insert(name.text.to_string(), gm);
        Ok(consumed)
    }

    fn bitref(&self, tok: Token, allow_negated: bool) -> LineResult<(BitRef, bool)> {
        let (negated, body) = match tok.text.strip_prefix('!') {
            Some(rest) => (true, rest),
            None => (false, tok.text),
        };
        if negated && !allow_negated {
            return Err((tok.col, "`!` is only allowed on controls".into()));
        }
        let mut chars = body.chars();
        let kind = match chars.next().map(|c| c.to_ascii_lowercase()) {
            Some('q') => BitKind::Qubit,
            Some('h') => BitKind::Hybit,
            _ => return Err((tok.col, format!("expected a bit reference, found `{}`", tok.text))),
        };
        let index: usize = chars
            .as_str()
            .parse()
            .map_err(|_| (tok.col, format!("expected a bit reference, found `{}`", tok.text)))?;
        let r = BitRef { kind, index };
        if negated && kind == BitKind::Hybit {
            return Err((tok.col, format!("0-control on hybit {r}: hybits have no isometric NOT")));
        }
        let layout = self.circuit.as_ref().expect("statement after layout").layout();
        if r.position(layout).is_none() {
            return Err((tok.col, format!("bit {r} out of range")));
        }
        Ok((r, negated))
    }

    fn statement(&mut self, toks: &[Token]) -> LineResult<()> {
        self.circuit();
        let mut rest = toks;
        let mut controls = Vec::new();
        let mut zero_controls = Vec::new();
        if toks[0].text.eq_ignore_ascii_case("CTRL") {
            let colon = toks
                .iter()
                .position(|t| t.text == ":")
                .ok_or((toks[0].col, "CTRL needs `:` before the gate".to_string()))?;
            if colon == 1 {
                return Err((toks[0].col, "CTRL needs at least one control".into()));
            }
            for &t in &toks[1..colon] {
                let (r, negated) = self.bitref(t, true)?;
                controls.push(r);
                if negated {
                    zero_controls.push(r);
                }
            }
            rest = &toks[colon + 1..];
            if rest.is_empty() {
                return Err((toks[colon].col, "missing gate after `:`".into()));
            }
        } else if let Some(t) = toks.iter().find(|t| t.text == ":") {
            return Err((t.col, "unexpected `:`".into()));
        }

        let name = rest[0];
        let mut args = &rest[1..];
        let gate = if Gate::is_builtin_name(name.text) {
            let param = if Gate::takes_parameter(name.text) {
                let p = args
                    .first()
                    .ok_or((name.col, format!("gate `{}` requires a parameter", name.text)))?;
                let v: f64 = p
                    .text
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or((p.col, format!("expected a number, found `{}`", p.text)))?;
                args = &args[1..];
                Some(v)
            } else {
                None
            };
            GateSpec::Builtin(Gate::from_name(name.text, param).map_err(|e| (name.col, e.to_string()))?)
        } else if let Some(m) = self.defs.get(name.text) {
            GateSpec::custom(name.text, m.clone())
        } else {
            return Err((name.col, format!("unknown gate `{}`", name.text)));
        };
        if args.is_empty() {
            return Err((name.col, format!("gate `{}` has no targets", name.text)));
        }
        let targets = args
            .iter()
            .map(|&t| self.bitref(t, false).map(|(r, _)| r))
            .collect::<LineResult<Vec<_>>>()?;
        let instr = Instruction::new(gate, targets, controls).map_err(|e| (name.col, e.to_string()))?;
        // validate the real instruction before emitting any X conjugation
        let layout = self.circuit().layout().clone();
        instr.check_isometry(&layout).map_err(|e| (name.col, e.to_string()))?;
        let circuit = self.circuit();
        let flip = |c: &mut Circuit, r: &BitRef| {
            c.push(Instruction::new(Gate::X, vec![*r], vec![]).expect("single target"))
        };
        for r in &zero_controls {
            flip(circuit, r).map_err(|e| (name.col, e.to_string()))?;
        }
        circuit.push(instr).map_err(|e| (name.col, e.to_string()))?;
        for r in &zero_controls {
            flip(circuit, r).map_err(|e| (name.col, e.to_string()))?;
        }
        Ok(())
    }
}

/// Parses `.lqc` source, collecting every diagnostic rather than stopping at
/// the first one.
pub fn parse(text: &str) -> Result<Circuit> {
    Parser {
        lines: text.lines().collect(),
        diags: Vec::new(),
        qubits: None,
        hybits: None,
        kinds: None,
        circuit: None,
        defs: HashMap::new(),
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn diags(text: &str) -> Vec<Diagnostic> {
        match parse(text) {
            Err(Error::Parse(d)) => d,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn controlled_z_on_hybit() {
        let c = parse("qubits 1\nhybits 1\nCTRL q0 : Z h0\n").unwrap();
        assert_eq!(c.len(), 1);
        let i = &c.instructions()[0];
        assert_eq!(i.controls(), &[BitRef::q(0)]);
        assert_eq!(i.targets(), &[BitRef::h(0)]);
        assert_eq!(c.to_matrix().unwrap().matrix(), &Gate::Cz.matrix());
    }

    #[test]
    fn simple_and_case_insensitive() {
        let c = parse("QUBITS 1\nh Q0 # hadamard\n").unwrap();
        assert_eq!(c.instructions()[0].gate(), &GateSpec::Builtin(Gate::H));
        let c = parse("qubits 1\nhybits 1\nctrl q0: boost 0.5 h0\n").unwrap();
        assert_eq!(c.instructions()[0].gate(), &GateSpec::Builtin(Gate::Boost(0.5)));
    }

    #[test]
    fn out_of_range_bit() {
        let d = diags("qubits 1\nZ q1\n");
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].line, d[0].column), (2, 3));
        assert!(d[0].message.contains("out of range"));
    }

    #[test]
    fn collects_multiple_diagnostics() {
        let d = diags("qubits 2\nFOO q0\nH q0 q0\nCTRL q0 : X q0\nBOOST q1\nH q0\n");
        let lines: Vec<usize> = d.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![2, 3, 4, 5]);
    }

    #[test]
    fn rejects_hybit_zero_control_and_non_isometric_gates() {
        let d = diags("qubits 1\nhybits 1\nCTRL !h0 : Z q0\nCTRL q0 : X h0\n");
        assert_eq!(d.len(), 2);
        assert!(d[0].message.contains("0-control"));
        assert!(d[1].message.contains("isometry"));
    }

    #[test]
    fn zero_control_desugars_to_x_conjugation() {
        let c = parse("qubits 2\nCTRL !q0 : X q1\n").unwrap();
        assert_eq!(c.len(), 3);
        // fires on q0 = 0: swaps |00> and |01>
        let mut expect = linalg::CMatrix::zeros(4, 4);
        for (col, row) in [1, 0, 2, 3].into_iter().enumerate() {
            expect[(row, col)] = linalg::ONE;
        }
        assert_eq!(c.to_matrix().unwrap().matrix(), &expect);
    }

    #[test]
    fn declarations_after_statements_are_errors() {
        let d = diags("qubits 1\nH q0\nhybits 1\n");
        assert_eq!(d[0].line, 3);
        let d = diags("qubits 1\nqubits 2\n");
        assert_eq!(d[0].line, 2);
    }

    #[test]
    fn defgate_checks_metric_at_each_use() {
        let src = "qubits 1\nhybits 1\nDEFGATE flip 1\n0 1\n1 0\nflip q0\nflip h0\n";
        let d = diags(src);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].line, 7);
        let ok = parse("qubits 1\nDEFGATE flip 1\n0,0 1,0\n1,0 0,0\nflip q0\n").unwrap();
        assert_eq!(ok.custom_gates().len(), 1);
    }

    #[test]
    fn defgate_errors_recover_past_rows() {
        let d = diags("qubits 1\nDEFGATE g 1\n1 0 0\n0 1\nH q0\nH q5\n");
        let lines: Vec<usize> = d.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![2, 6]);
    }

    #[test]
    fn layout_extension() {
        let c = parse("layout hq\nCTRL h0 : H q0\n").unwrap();
        assert_eq!(c.layout(), &RegisterLayout::from_kinds_str("hq").unwrap());
        assert!(parse("layout hq\nqubits 1\n").is_err());
    }
}
