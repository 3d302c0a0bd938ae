use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use lqc_core::circuit::{self, iso_tolerance, Circuit};
use lqc_core::gates::{isometry_residual, LocalMetric};
use lqc_core::linalg::{self, CMatrix};
use lqc_core::matrix_io::{self, MatrixFile, MetricSpec};
use lqc_core::search::{self, SearchSpec};
use lqc_core::simulator;
use lqc_core::synthesis::{self, CompileMode, CompileOptions};
use lqc_core::{BitKind, Error, RegisterLayout, StateVector};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Core { path: String, source: Error },
    #[error("{0}")]
    Plain(Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) => 1,
            CliError::Core { source, .. } | CliError::Plain(source) => match source {
                Error::ZeroObservableMass => 2,
                Error::NotIsometric { .. } | Error::PivotBreakdown { .. } | Error::PowerNotFound { .. } => 3,
                Error::NumericGuard(_) | Error::TooLarge(_) => 4,
                _ => 1,
            },
        }
    }
}

fn core_err(path: impl AsRef<Path>) -> impl FnOnce(Error) -> CliError {
    let path = path.as_ref().display().to_string();
    move |source| CliError::Core { path, source }
}

fn plain(source: Error) -> CliError {
    CliError::Plain(source)
}

#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    circuit::parse(&read(path)?).map_err(core_err(path))
}

/// Summary of a simulation; the distribution goes to standard output.
#[derive(Debug)]
pub struct RunReport {
    pub circuit: PathBuf,
    pub instructions: usize,
    pub wall_time: Duration,
    pub observable_mass: f64,
}

pub fn run(path: &Path, init: Option<&str>) -> Result<Output, CliError> {
    let start = Instant::now();
    let circ = load_circuit(path)?;
    let layout = circ.layout().clone();
    simulator::check_size(&layout).map_err(core_err(path))?;
    let initial = match init {
        None => StateVector::zero(layout.clone()),
        Some(bits) => {
            let values = bits
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(CliError::Usage(format!("--init `{bits}` is not a bitstring"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != layout.num_bits() {
                return Err(CliError::Usage(format!(
                    "--init has {} bits, the circuit declares {}",
                    values.len(),
                    layout.num_bits()
                )));
            }
            StateVector::basis_state(layout.clone(), &values).map_err(plain)?
        }
    };
    let state = simulator::run(&circ, initial).map_err(core_err(path))?;
    let dist = simulator::observe(&state).map_err(core_err(path))?;
    let report = RunReport {
        circuit: path.to_path_buf(),
        instructions: circ.len(),
        wall_time: start.elapsed(),
        observable_mass: dist.observable_mass(),
    };
    let mut stderr = String::new();
    if let Some(w) = &dist.warning {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let _ = writeln!(
        stderr,
        "# {}: {} instructions, {:.3} ms, observable mass {:.16e}",
        report.circuit.display(),
        report.instructions,
        report.wall_time.as_secs_f64() * 1e3,
        report.observable_mass
    );
    Ok(Output { stdout: simulator::format_distribution(&dist), stderr, code: 0 })
}

pub fn sample(path: &Path, shots: usize, seed: u64) -> Result<Output, CliError> {
    let circ = load_circuit(path)?;
    simulator::check_size(circ.layout()).map_err(core_err(path))?;
    let state = simulator::run(&circ, StateVector::zero(circ.layout().clone())).map_err(core_err(path))?;
    let dist = simulator::observe(&state).map_err(core_err(path))?;
    let drawn = simulator::sample_distribution(&dist, shots, seed);
    let mut stdout = String::new();
    for (bits, count) in simulator::count_shots(&dist, &drawn) {
        let _ = writeln!(stdout, "{bits}\t{count}");
    }
    Ok(Output { stdout, ..Default::default() })
}

fn looks_like_matrix(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with(|c: char| c.is_ascii_digit()))
}

pub fn verify(path: &Path, metric: Option<(usize, usize)>) -> Result<Output, CliError> {
    let text = read(path)?;
    let (matrix, eta) = if looks_like_matrix(&text) {
        let file = matrix_io::parse_matrix(&text).map_err(core_err(path))?;
        let eta = match metric {
            Some((m, n)) => LocalMetric::signature(m, n),
            None => file.metric.metric(),
        };
        (file.matrix, eta)
    } else {
        let circ = circuit::parse(&text).map_err(core_err(path))?;
        let eta = match metric {
            Some((m, n)) => LocalMetric::signature(m, n),
            None => LocalMetric::of_layout(circ.layout()),
        };
        (circ.to_matrix().map_err(core_err(path))?.into_matrix(), eta)
    };
    let residual = isometry_residual(&matrix, &eta).map_err(core_err(path))?;
    let tol = iso_tolerance(&matrix);
    let pass = residual <= tol;
    let stdout = format!(
        "residual\t{residual:.16e}\ntolerance\t{tol:.16e}\n{}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(Output { stdout, stderr: String::new(), code: if pass { 0 } else { 3 } })
}

/// Reorders a matrix given over `η_{m,n}` onto the layout's metric.
fn to_layout_order(file: MatrixFile, layout: &RegisterLayout) -> Result<CMatrix, CliError> {
    let target = layout.metric_diagonal();
    if file.matrix.nrows() != target.len() {
        return Err(CliError::Usage(format!(
            "matrix has dimension {}, layout needs {}",
            file.matrix.nrows(),
            target.len()
        )));
    }
    match file.metric {
        MetricSpec::Kinds(ref l) if l.metric_diagonal() == target => Ok(file.matrix),
        MetricSpec::Signature { m, n } => {
            let pos: Vec<usize> = (0..target.len()).filter(|&i| target[i] > 0).collect();
            let neg: Vec<usize> = (0..target.len()).filter(|&i| target[i] < 0).collect();
            if pos.len() != m || neg.len() != n {
                return Err(CliError::Usage(format!(
                    "metric η_({m},{n}) does not match the layout's {} positive and {} negative entries",
                    pos.len(),
                    neg.len()
                )));
            }
            let order: Vec<usize> = pos.into_iter().chain(neg).collect();
            let d = order.len();
            let mut out = CMatrix::zeros(d, d);
            for (a, &ra) in order.iter().enumerate() {
                for (b, &cb) in order.iter().enumerate() {
                    out[(ra, cb)] = file.matrix[(a, b)];
                }
            }
            Ok(out)
        }
        MetricSpec::Kinds(_) => Err(CliError::Usage("matrix header kinds differ from --qubits/--hybits".into())),
    }
}

pub fn synth(path: &Path, qubits: usize, hybits: usize, approx: Option<f64>) -> Result<Output, CliError> {
    let file = matrix_io::parse_matrix(&read(path)?).map_err(core_err(path))?;
    let layout = RegisterLayout::new(qubits, hybits);
    if layout.num_bits() > lqc_core::circuit::MAX_MATRIX_BITS {
        return Err(plain(Error::TooLarge(layout.num_bits())));
    }
    let a = to_layout_order(file, &layout)?;
    let mode = match approx {
        Some(tol) if tol > 0.0 => CompileMode::Approx { tol },
        Some(tol) => return Err(CliError::Usage(format!("--approx needs a positive tolerance, got {tol}"))),
        None => CompileMode::Exact,
    };
    let out = synthesis::compile(&a, &layout, &CompileOptions { mode, ..Default::default() }).map_err(core_err(path))?;
    let resim = out.circuit.to_matrix().map_err(plain)?;
    let recon = match mode {
        CompileMode::Exact => linalg::max_abs_diff(resim.matrix(), &a),
        CompileMode::Approx { .. } => linalg::projective_distance(resim.matrix(), &a),
    };
    let mut stdout = circuit::serialize(&out.circuit);
    stdout.push_str("# stage\tgate_count\tmax_error\n");
    for line in out.report.to_text().lines() {
        let _ = writeln!(stdout, "# {line}");
    }
    let _ = writeln!(stdout, "# reconstruction_error\t{recon:.16e}");
    let mut stderr = String::new();
    let mut code = 0;
    match mode {
        CompileMode::Exact if !out.report.exact_ok() || recon > lqc_core::EPS_RECON => {
            let _ = writeln!(stderr, "error: reconstruction error {recon:.3e} exceeds {:e}", lqc_core::EPS_RECON);
            code = 3;
        }
        CompileMode::Approx { .. } if !out.report.within_budget() => {
            let _ = writeln!(
                stderr,
                "warning: total error {:.3e} exceeds the budget {:.3e}",
                out.report.total_error(),
                out.report.budget.unwrap_or(0.0)
            );
        }
        _ => {}
    }
    Ok(Output { stdout, stderr, code })
}

pub fn search(n: usize, x: &str, chi: f64, k: Option<u32>, pmin: Option<f64>) -> Result<Output, CliError> {
    if x.len() != n {
        return Err(CliError::Usage(format!("--x has {} bits, --n is {n}", x.len())));
    }
    let mut spec = SearchSpec::new(x, chi, 0).map_err(plain)?;
    simulator::check_size(&spec.layout()).map_err(plain)?;
    let items = spec.search_space();
    spec.k = match k {
        Some(k) => k,
        None => search::choose_k(items, chi, pmin.unwrap_or(0.99)).map_err(plain)?,
    };
    let result = search::run_search(&spec).map_err(plain)?;
    let predicted = search::predicted_success(items, chi, spec.k);
    let simulated = result.success();
    let mut stdout = String::new();
    let _ = writeln!(stdout, "n\t{n}");
    let _ = writeln!(stdout, "x\t{}", spec.target_string());
    let _ = writeln!(stdout, "chi\t{}", matrix_io::format_f64(chi));
    let _ = writeln!(stdout, "k\t{}", spec.k);
    let _ = writeln!(stdout, "predicted\t{predicted:.16e}");
    let _ = writeln!(stdout, "simulated\t{simulated:.16e}");
    let _ = writeln!(stdout, "difference\t{:.16e}", (simulated - predicted).abs());
    Ok(Output { stdout, ..Default::default() })
}

pub fn approx(path: &Path, kind: BitKind, tol: f64, depth: usize) -> Result<Output, CliError> {
    let file = matrix_io::parse_matrix(&read(path)?).map_err(core_err(path))?;
    if file.matrix.shape() != (2, 2) {
        return Err(CliError::Usage(format!("{}: expected a 2×2 matrix", path.display())));
    }
    let target = linalg::to_c2(&file.matrix);
    let eta = LocalMetric::from_kinds(&[kind]);
    let residual = isometry_residual(&file.matrix, &eta).map_err(plain)?;
    if residual > iso_tolerance(&file.matrix) {
        return Err(plain(Error::NotIsometric { residual }));
    }
    let w = synthesis::word_search(&target, kind, tol, depth);
    let mut stdout = String::new();
    let names = if w.gates.is_empty() { "-".to_string() } else { w.names() };
    let _ = writeln!(stdout, "word\t{names}");
    let _ = writeln!(stdout, "length\t{}", w.gates.len());
    let _ = writeln!(stdout, "error\t{:.16e}", w.error);
    let _ = writeln!(stdout, "within_tol\t{}", w.within_tol);
    let stderr = if w.within_tol {
        String::new()
    } else {
        format!("warning: best word misses tolerance {tol:e}\n")
    };
    Ok(Output { stdout, stderr, code: 0 })
}
