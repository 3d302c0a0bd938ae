use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "lqc", version, about = "Lorentz quantum computer simulator and gate synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a circuit and print the postselected outcome distribution.
    Run {
        file: PathBuf,
        /// Initial basis state, one 0/1 per bit in layout order.
        #[arg(long)]
        init: Option<String>,
    },
    /// Draw measurement shots from the postselected distribution.
    Sample {
        file: PathBuf,
        #[arg(long)]
        shots: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Check a matrix or circuit against its metric.
    Verify {
        file: PathBuf,
        /// Override the metric with η_{m,n}.
        #[arg(long, num_args = 2, value_names = ["M", "N"])]
        metric: Option<Vec<usize>>,
    },
    /// Compile a matrix file into a circuit.
    #[command(group(ArgGroup::new("mode").args(["exact", "approx"])))]
    Synth {
        file: PathBuf,
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        hybits: usize,
        #[arg(long)]
        exact: bool,
        /// Approximate single-bit gates by generator words within TOL each.
        #[arg(long, value_name = "TOL")]
        approx: Option<f64>,
    },
    /// Run the search algorithm and compare with the closed form.
    #[command(group(ArgGroup::new("iterations").args(["k", "pmin"])))]
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        x: String,
        #[arg(long)]
        chi: f64,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        pmin: Option<f64>,
    },
    /// Approximate a 2×2 gate by a generator word.
    Approx {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        tol: f64,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Qubit,
    Hybit,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LQC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("LQC_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<commands::Output, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { file, init } => commands::run(&file, init.as_deref()),
        Command::Sample { file, shots, seed } => commands::sample(&file, shots, seed),
        Command::Verify { file, metric } => commands::verify(&file, metric.map(|v| (v[0], v[1]))),
        Command::Synth { file, qubits, hybits, approx, .. } => commands::synth(&file, qubits, hybits, approx),
        Command::Search { n, x, chi, k, pmin } => commands::search(n, &x, chi, k, pmin),
        Command::Approx { file, kind, tol, depth } => {
            let kind = match kind {
                Kind::Qubit => lqc_core::BitKind::Qubit,
                Kind::Hybit => lqc_core::BitKind::Hybit,
            };
            commands::approx(&file, kind, tol, depth)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("lqc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
