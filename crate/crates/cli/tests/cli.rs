use std::path::{Path, PathBuf};
use std::process::Command;

use lqc_core::gates::{random_isometry, Gate, LocalMetric};
use lqc_core::matrix_io::{format_matrix, MatrixFile, MetricSpec};
use lqc_core::search::predicted_success;
use lqc_core::{linalg, BitKind, RegisterLayout};
use tempfile::TempDir;

struct Run {
    stdout: String,
    stderr: String,
    code: i32,
}

fn lqc(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_lqc")).args(args).output().unwrap();
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `key TAB value` report lines.
fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
        .unwrap_or_else(|| panic!("no `{key}` in\n{out}"))
        .to_string()
}

fn num(out: &str, key: &str) -> f64 {
    field(out, key).parse().unwrap()
}

fn distribution(out: &str) -> Vec<(String, f64)> {
    out.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (b, p) = l.split_once('\t').unwrap();
            (b.to_string(), p.parse().unwrap())
        })
        .collect()
}

fn matrix_file(dir: &TempDir, name: &str, metric: MetricSpec, m: linalg::CMatrix) -> PathBuf {
    write(dir, name, &format_matrix(&MatrixFile { metric, matrix: m }))
}

#[test]
fn run_empty_circuit_gives_one_certain_outcome() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "empty.lqc", "qubits 2\n");
    let r = lqc(&["run", s(&f)]);
    assert_eq!(r.code, 0);
    let d = distribution(&r.stdout);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].0, "00");
    assert_eq!(d[0].1, 1.0);
}

#[test]
fn run_malformed_file_names_the_line() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.lqc", "qubits 1\nH q0\nFOO q0\n");
    let r = lqc(&["run", s(&f)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);
}

#[test]
fn run_search_circuit_peaks_at_target() {
    // two search qubits, oracle qubit, one hybit; target x = 10, two rounds of Q
    let oracle = "X q1\nCTRL q0 q1 : X q2\nX q1\n";
    let q = format!("{oracle}CTRL q2 : BOOST 1.0 h0\n{oracle}");
    let text = format!("qubits 3\nhybits 1\nH q0\nH q1\n{q}{q}");
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "search.lqc", &text);
    let r = lqc(&["run", s(&f)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let d = distribution(&r.stdout);
    let (mode, p) = d.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(mode, "100");
    assert!((p - predicted_success(4, 1.0, 2)).abs() < 1e-12);
}

#[test]
fn run_reports_zero_observable_mass() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "z.lqc", "qubits 1\nhybits 1\n");
    let r = lqc(&["run", s(&f), "--init", "01"]);
    assert_eq!(r.code, 2, "{}", r.stderr);

    // |00) -> |11) on two hybits preserves diag(1,-1,-1,1) and leaves nothing observable
    let flip = "hybits 2\nDEFGATE FLIP 2\n0 0 0 1\n0 1 0 0\n0 0 1 0\n1 0 0 0\nFLIP h0 h1\n";
    let f = write(&dir, "flip.lqc", flip);
    assert_eq!(lqc(&["run", s(&f)]).code, 2);
    assert_eq!(lqc(&["sample", s(&f), "--shots", "5", "--seed", "1"]).code, 2);
}

#[test]
fn sample_edge_cases_and_determinism() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.lqc", "qubits 1\nH q0\n");
    let r = lqc(&["sample", s(&f), "--shots", "0", "--seed", "3"]);
    assert_eq!(r.code, 0);
    assert!(distribution(&r.stdout).is_empty());

    let a = lqc(&["sample", s(&f), "--shots", "1000", "--seed", "42"]);
    let b = lqc(&["sample", s(&f), "--shots", "1000", "--seed", "42"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sample_uniform_qubit_within_five_sigma() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "h.lqc", "qubits 1\nH q0\n");
    let shots = 100_000.0;
    let r = lqc(&["sample", s(&f), "--shots", "100000", "--seed", "7"]);
    let sigma = (shots * 0.25f64).sqrt();
    let counts = distribution(&r.stdout);
    assert_eq!(counts.len(), 2);
    for (_, n) in counts {
        assert!((n - shots / 2.0).abs() <= 5.0 * sigma, "count {n}");
    }
}

#[test]
fn verify_examples() {
    let dir = TempDir::new().unwrap();
    let tau = matrix_file(&dir, "tau.txt", MetricSpec::Signature { m: 1, n: 1 }, Gate::Tau.matrix());
    let r = lqc(&["verify", s(&tau)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.lines().last(), Some("PASS"));

    let cnot = "4 qh\n1 0 0 0\n0 1 0 0\n0 0 0 1\n0 0 1 0\n";
    let r = lqc(&["verify", s(&write(&dir, "cnot.txt", cnot))]);
    assert_eq!(r.code, 3);
    assert_eq!(r.stdout.lines().last(), Some("FAIL"));
    assert!(num(&r.stdout, "residual") >= 1.0);

    let id = matrix_file(&dir, "id.txt", MetricSpec::Signature { m: 2, n: 2 }, linalg::identity(4));
    let r = lqc(&["verify", s(&id)]);
    assert_eq!(r.code, 0);
    assert_eq!(num(&r.stdout, "residual"), 0.0);

    let r = lqc(&["verify", s(&write(&dir, "junk.txt", "2 1 1\n1 0\n"))]);
    assert_eq!(r.code, 1);
}

#[test]
fn verify_accepts_circuits_and_metric_override() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "c.lqc", "qubits 1\nhybits 1\nH q0\nCTRL q0 : TAU h0\n");
    assert_eq!(lqc(&["verify", s(&f)]).code, 0);
    let f = write(&dir, "x.txt", "2 2 0\n0 1\n1 0\n");
    assert_eq!(lqc(&["verify", s(&f)]).code, 0);
    assert_eq!(lqc(&["verify", s(&f), "--metric", "1", "1"]).code, 3);
}

fn synth_circuit(out: &str) -> lqc_core::circuit::Circuit {
    lqc_core::circuit::parse(out).unwrap()
}

fn reconstruction_error(out: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix("# reconstruction_error"))
        .map(|r| r.trim().trim_start_matches('=').trim().parse().unwrap())
        .unwrap_or_else(|| panic!("no reconstruction error in\n{out}"))
}

#[test]
fn synth_controlled_z_is_one_instruction() {
    let dir = TempDir::new().unwrap();
    let cz = matrix_file(&dir, "cz.txt", MetricSpec::Signature { m: 4, n: 0 }, Gate::Cz.matrix());
    let r = lqc(&["synth", s(&cz), "--qubits", "2", "--hybits", "0", "--exact"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(synth_circuit(&r.stdout).len(), 1);
}

#[test]
fn synth_random_lorentz_transformation_exact() {
    let dir = TempDir::new().unwrap();
    let layout = RegisterLayout::from_bits(vec![BitKind::Qubit, BitKind::Hybit]);
    let a = random_isometry(&LocalMetric::of_layout(&layout), 5).unwrap();
    let f = matrix_file(&dir, "u22.txt", MetricSpec::Kinds(layout), a.clone());
    let r = lqc(&["synth", s(&f), "--qubits", "1", "--hybits", "1", "--exact"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(reconstruction_error(&r.stdout) <= 1e-6);
    let circ = synth_circuit(&r.stdout);
    assert!(linalg::max_abs_diff(circ.to_matrix().unwrap().matrix(), &a) <= 1e-6);
}

#[test]
fn synth_approximate_hadamard_stays_within_tolerance() {
    let dir = TempDir::new().unwrap();
    let hi = linalg::kron(&Gate::H.matrix(), &linalg::identity(2));
    let f = matrix_file(&dir, "hi.txt", MetricSpec::Signature { m: 4, n: 0 }, hi.clone());
    let r = lqc(&["synth", s(&f), "--qubits", "2", "--hybits", "0", "--approx", "0.05"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(reconstruction_error(&r.stdout) <= 0.05);
    let circ = synth_circuit(&r.stdout);
    assert!(linalg::projective_distance(circ.to_matrix().unwrap().matrix(), &hi) <= 0.05);
}

#[test]
fn synth_rejects_non_isometric_input() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.txt", "2 1 1\n1 1\n0 1\n");
    let r = lqc(&["synth", s(&f), "--qubits", "0", "--hybits", "1", "--exact"]);
    assert_eq!(r.code, 3);
}

#[test]
fn synth_mode_flags_are_exclusive() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "i.txt", "2 2 0\n1 0\n0 1\n");
    let r = lqc(&["synth", s(&f), "--qubits", "1", "--hybits", "0", "--exact", "--approx", "0.1"]);
    assert_eq!(r.code, 1);
}

#[test]
fn search_reaches_target_probability() {
    let r = lqc(&["search", "--n", "10", "--x", "1100101011", "--chi", "0.5", "--pmin", "0.99"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(num(&r.stdout, "simulated") >= 0.99);
    assert!(num(&r.stdout, "difference").abs() <= 1e-9);
    assert_eq!(field(&r.stdout, "k"), "13");
}

#[test]
fn search_examples() {
    let r = lqc(&["search", "--n", "3", "--x", "010", "--chi", "0.5", "--k", "0"]);
    assert!((num(&r.stdout, "simulated") - 0.125).abs() < 1e-15);

    let r = lqc(&["search", "--n", "2", "--x", "11", "--chi", "1", "--k", "2"]);
    let c2 = 2f64.cosh().powi(2);
    let expect = (c2 / 4.0) / (1.0 - 0.25 + c2 / 4.0);
    assert!((num(&r.stdout, "predicted") - expect).abs() < 1e-12);

    let r = lqc(&["search", "--n", "3", "--x", "101", "--chi", "10", "--k", "31"]);
    assert_eq!(r.code, 4);
    assert!(!r.stderr.contains("lqc: lqc:"));
}

#[test]
fn approx_examples() {
    let dir = TempDir::new().unwrap();
    let t = matrix_file(&dir, "t.txt", MetricSpec::Signature { m: 2, n: 0 }, Gate::T.matrix());
    let r = lqc(&["approx", s(&t), "--kind", "qubit", "--tol", "1e-9", "--depth", "4"]);
    assert_eq!(field(&r.stdout, "word"), "T");
    assert_eq!(num(&r.stdout, "error"), 0.0);

    let t_tau = Gate::T.matrix() * Gate::Tau.matrix();
    let f = matrix_file(&dir, "ttau.txt", MetricSpec::Signature { m: 1, n: 1 }, t_tau);
    let r = lqc(&["approx", s(&f), "--kind", "hybit", "--tol", "1e-9", "--depth", "4"]);
    assert_eq!(field(&r.stdout, "length"), "2");
    assert!(num(&r.stdout, "error") < 1e-12);

    let rot = linalg::diag(&[linalg::cis(0.3), linalg::cis(-0.3)]);
    let f = matrix_file(&dir, "rot.txt", MetricSpec::Signature { m: 2, n: 0 }, rot);
    let r = lqc(&["approx", s(&f), "--kind", "qubit", "--tol", "0.05", "--depth", "20"]);
    assert_eq!(r.code, 0);
    let ok = field(&r.stdout, "within_tol") == "true";
    assert!(ok == (num(&r.stdout, "error") < 0.05));

    assert_eq!(lqc(&["approx", "/nonexistent", "--kind", "qubit", "--tol", "0.1", "--depth", "3"]).code, 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(lqc(&["frobnicate"]).code, 1);
    assert_eq!(lqc(&["search", "--n", "3"]).code, 1);
    assert_eq!(lqc(&["--help"]).code, 0);
}

#[test]
fn output_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "c.lqc", "qubits 2\nhybits 1\nH q0\nCTRL q0 : BOOST 0.3 h0\nCTRL h0 : X q1\n");
    let a = lqc(&["run", s(&f)]);
    let b = lqc(&["run", s(&f)]);
    assert_eq!(a.stdout, b.stdout);
}
