//! Plain-text matrix files.
//!
//! First line is either `dim m n` (metric `η_{m,n}`) or `dim kinds` where
//! `kinds` spells the bit kinds, e.g. `4 qh` for a qubit followed by a hybit.
//! Then `dim` rows of `dim` entries `re,im` separated by whitespace. A bare
//! real entry is read with zero imaginary part. `#` starts a comment.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::LocalMetric;
use crate::linalg::CMatrix;
use crate::register::RegisterLayout;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Signature { m: usize, n: usize },
    Kinds(RegisterLayout),
}

impl MetricSpec {
    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Signature { m, n } => m + n,
            MetricSpec::Kinds(layout) => layout.dimension(),
        }
    }

    pub fn metric(&self) -> LocalMetric {
        match self {
            MetricSpec::Signature { m, n } => LocalMetric::signature(*m, *n),
            MetricSpec::Kinds(layout) => LocalMetric::of_layout(layout),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub metric: MetricSpec,
    pub matrix: CMatrix,
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::MatrixFormat {
        line,
        message: message.into(),
    }
}

/// Parses one `re,im` (or bare `re`) entry.
pub fn parse_entry(token: &str) -> Option<Complex64> {
    let (re, im) = match token.split_once(',') {
        Some((re, im)) => (re.trim(), im.trim()),
        None => (token.trim(), "0"),
    };
    Some(Complex64::new(re.parse().ok()?, im.parse().ok()?))
}

/// Reads `dim` matrix rows from numbered lines, skipping blanks and comments.
/// Returns the matrix and how many lines were consumed.
pub fn parse_rows<'a, I>(lines: I, dim: usize) -> Result<(CMatrix, usize)>
where
    I: IntoIterator<Item = (usize, &'a str)>,
{
    let mut m = CMatrix::zeros(dim, dim);
    let mut row = 0;
    let mut consumed = 0;
    let mut last_line = 0;
    if dim == 0 {
        return Ok((m, 0));
    }
    for (line_no, raw) in lines {
        consumed += 1;
        last_line = line_no;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.len() != dim {
            return Err(format_err(
                line_no,
                format!("expected {dim} entries, found {}", tokens.len()),
            ));
        }
        for (col, tok) in tokens.iter().enumerate() {
            m[(row, col)] = parse_entry(tok)
                .ok_or_else(|| format_err(line_no, format!("bad entry `{tok}`")))?;
        }
        row += 1;
        if row == dim {
            break;
        }
    }
    if row < dim {
        return Err(format_err(
            last_line + 1,
            format!("expected {dim} rows, found {row}"),
        ));
    }
    Ok((m, consumed))
}

fn parse_header(line_no: usize, body: &str) -> Result<MetricSpec> {
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let dim: usize = tokens
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| format_err(line_no, "header must start with the dimension"))?;
    let spec = match tokens.len() {
        3 => {
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| format_err(line_no, format!("bad signature count `{t}`")))
            };
            MetricSpec::Signature {
                m: parse(tokens[1])?,
                n: parse(tokens[2])?,
            }
        }
        2 => MetricSpec::Kinds(
            RegisterLayout::from_kinds_str(tokens[1])
                .map_err(|e| format_err(line_no, e.to_string()))?,
        ),
        _ => {
            return Err(format_err(
                line_no,
                "header must be `dim m n` or `dim kinds`",
            ))
        }
    };
    if spec.dim() != dim || dim == 0 {
        return Err(format_err(
            line_no,
            format!("metric has dimension {}, header says {dim}", spec.dim()),
        ));
    }
    Ok(spec)
}

pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_line, header) = loop {
        match lines.next() {
            Some((_, raw)) if strip_comment(raw).is_empty() => continue,
            Some((no, raw)) => break (no, strip_comment(raw)),
            None => return Err(format_err(1, "empty matrix file")),
        }
    };
    let metric = parse_header(header_line, header)?;
    let (matrix, _) = parse_rows(&mut lines, metric.dim())?;
    if let Some((no, _)) = lines.find(|(_, l)| !strip_comment(l).is_empty()) {
        return Err(format_err(no, "trailing content after matrix rows"));
    }
    Ok(MatrixFile { metric, matrix })
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

pub fn format_rows(m: &CMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| {
                let z = m[(r, c)];
                format!("{},{}", format_f64(z.re), format_f64(z.im))
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn format_matrix(file: &MatrixFile) -> String {
    let header = match &file.metric {
        MetricSpec::Signature { m, n } => format!("{} {m} {n}", m + n),
        MetricSpec::Kinds(layout) => format!("{} {}", layout.dimension(), layout),
    };
    format!("{header}\n{}", format_rows(&file.matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::Gate;

    #[test]
    fn parses_signature_header() {
        let text = "# tau\n2 1 1\n1.4142135623730951,0 0,1\n0,1 -1.4142135623730951,0\n";
        let f = parse_matrix(text).unwrap();
        assert_eq!(f.metric, MetricSpec::Signature { m: 1, n: 1 });
        assert_eq!(f.matrix, Gate::Tau.matrix());
    }

    #[test]
    fn parses_kinds_header_and_bare_reals() {
        let f = parse_matrix("4 qh\n1 0 0 0\n0 1 0 0\n0 0 0 1\n0 0 1 0\n").unwrap();
        assert_eq!(f.metric.metric().signs(), &[1, -1, 1, -1]);
        assert_eq!(f.matrix[(2, 3)].re, 1.0);
    }

    #[test]
    fn round_trips() {
        let f = MatrixFile {
            metric: MetricSpec::Kinds(RegisterLayout::new(0, 1)),
            matrix: Gate::Boost(0.3).matrix(),
        };
        assert_eq!(parse_matrix(&format_matrix(&f)).unwrap(), f);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_matrix("2 1 1\n1,0 0,0\n0,0 x\n").unwrap_err();
        assert!(matches!(err, Error::MatrixFormat { line: 3, .. }), "{err}");
        let err = parse_matrix("3 1 1\n").unwrap_err();
        assert!(matches!(err, Error::MatrixFormat { line: 1, .. }));
        let err = parse_matrix("2 2 0\n1 0\n").unwrap_err();
        assert!(matches!(err, Error::MatrixFormat { line: 3, .. }), "{err}");
        assert!(parse_matrix("2 2 0\n1 0\n0 1\n1 1\n").is_err());
    }
}
