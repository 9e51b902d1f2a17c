use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use periodalg::exactreal::parse_real;
use periodalg::runner::{run_file, run_source, selfcheck, Report, RunOptions};
use periodalg::scenario::ScenarioError;

#[derive(Parser)]
#[command(name = "periodalg", version, about = "Exact period analysis on finitely generated subgroups of the reals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Append wall-clock timings to the report.
        #[arg(long)]
        timing: bool,
    },
    /// Run the bundled scenarios and the invariant quick-suite.
    Selfcheck {
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
    /// Continued fraction of an exact real.
    Cfrac {
        x: String,
        #[command(flatten)]
        common: Common,
    },
    /// Integers m, n with |m*T1 + n*T2 - target| < eps.
    Dirichlet {
        t1: String,
        t2: String,
        target: String,
        #[command(flatten)]
        common: Common,
    },
    /// Integers q, p_i with |q*T - p_i*T_i - delta| < eps for all i.
    Kronecker {
        t: String,
        delta: String,
        #[arg(required = true)]
        periods: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Upper bound on the star discrepancy of {i*alpha mod 1 : i < N}.
    Discrepancy {
        alpha: String,
        n: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
    /// Counterexample box bound and witness search bound.
    #[arg(long, value_name = "N")]
    bound: Option<u64>,
    /// Continued-fraction depth.
    #[arg(long, value_name = "D")]
    depth: Option<usize>,
    /// Default approximation tolerance, e.g. 1/1000.
    #[arg(long, value_name = "RATIONAL")]
    eps: Option<String>,
}

impl Common {
    fn options(&self, timing: bool) -> Result<RunOptions, String> {
        let eps = match &self.eps {
            None => None,
            Some(s) => {
                let x = parse_real(s).map_err(|e| format!("--eps: {e}"))?;
                if !x.is_rational() {
                    return Err("--eps must be rational".into());
                }
                Some(x)
            }
        };
        Ok(RunOptions { bound: self.bound, depth: self.depth, eps, timing, cancel: None })
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn write_json(path: &Path, json: &str) -> Result<(), String> {
    if path == Path::new("-") {
        emit(&format!("{json}\n"));
        Ok(())
    } else {
        std::fs::write(path, json.to_string() + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}

fn finish(result: Result<Report, ScenarioError>, json: Option<&Path>) -> ExitCode {
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match json {
        Some(p) if p == Path::new("-") => emit(&format!("{}\n", report.to_json())),
        Some(p) => {
            emit(&report.render_text());
            if let Err(e) = write_json(p, &report.to_json()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        None => emit(&report.render_text()),
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn single(analysis: String, common: &Common) -> ExitCode {
    let opts = match common.options(false) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    finish(run_source(&format!("scenario \"cli\";\nanalyze {analysis};"), &opts), common.json.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, common, timing } => match common.options(timing) {
            Ok(opts) => finish(run_file(&file, &opts), common.json.as_deref()),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Selfcheck { json } => {
            let report = selfcheck();
            match json.as_deref() {
                Some(p) if p == Path::new("-") => emit(&format!("{}\n", report.to_json())),
                Some(p) => {
                    emit(&report.render_text());
                    if let Err(e) = write_json(p, &report.to_json()) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
                None => emit(&report.render_text()),
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Cfrac { x, common } => {
            let depth = common.depth.map(|d| format!(", {d}")).unwrap_or_default();
            single(format!("cfrac({x}{depth})"), &common)
        }
        Command::Dirichlet { t1, t2, target, common } => single(format!("dirichlet({t1}, {t2}, {target})"), &common),
        Command::Kronecker { t, delta, periods, common } => {
            single(format!("kronecker({t}, [{}], {delta})", periods.join(", ")), &common)
        }
        Command::Discrepancy { alpha, n, common } => single(format!("discrepancy({alpha}, {n})"), &common),
    }
}
