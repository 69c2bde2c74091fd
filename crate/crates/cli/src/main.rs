use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use pqk_cli::scenario::{Overrides, Scenario};
use pqk_cli::{exit_code, render, run, suites, RunError, EXIT_PASS};

/// Run a verification scenario and write a JSON report.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
struct Args {
    /// Scenario file (JSON).
    #[arg(long, required_unless_present = "list_suites")]
    scenario: Option<PathBuf>,
    /// Where to write the report; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Finite-difference step, overriding the scenario.
    #[arg(long)]
    fd_step: Option<f64>,
    /// Multiply every suite tolerance by this factor.
    #[arg(long)]
    tol_scale: Option<f64>,
    /// Seed for sampled points, overriding the scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the registered suites and exit.
    #[arg(long)]
    list_suites: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_suites {
        for s in suites::SUITES {
            println!("{:<20} {:<8e} {}", s.name, s.default_tolerance, s.summary);
        }
        return ExitCode::from(EXIT_PASS);
    }
    let path = args.scenario.clone().expect("clap enforces --scenario");
    match execute(&path, &args.report, args.overrides()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(e.exit_code())
        }
    }
}

impl Args {
    fn overrides(&self) -> Overrides {
        Overrides { fd_step: self.fd_step, tol_scale: self.tol_scale, seed: self.seed }
    }
}

fn execute(path: &Path, out: &Option<PathBuf>, overrides: Overrides) -> Result<u8, RunError> {
    if let Some(k) = overrides.tol_scale {
        if !(k.is_finite() && k > 0.0) {
            return Err(RunError::Input(format!("--tol-scale must be positive, got {k}")));
        }
    }
    let mut scenario = Scenario::load(path)?;
    scenario.apply(&overrides);
    let report = run(&scenario)?;
    let text = render(&report);
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| RunError::Input(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    for s in &report.suites {
        let max = s.max.map_or("n/a".to_string(), |m| format!("{m:.3e}"));
        eprintln!("{} {:<20} max {max} tol {:.1e}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.tolerance);
    }
    if report.classification.exclusivity_violation {
        eprintln!("FAIL exclusivity: Kahler and para-quaternionic verdicts both hold with nonzero nu");
    }
    Ok(exit_code(&report))
}
