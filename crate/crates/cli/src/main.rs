//! Batch runner for the boundary integral drivers. Each subcommand reads a JSON
//! config (or its bundled example), runs one experiment and writes a JSON report
//! plus CSV tables.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

mod config;
mod experiments;

use config::ExperimentConfig;
use experiments::Artifacts;

#[derive(Parser, Debug)]
#[command(name = "spinbie", version, about = "Clifford boundary integral experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON). Without it the bundled example config is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; artifacts go to <out>/<experiment>/.
    #[arg(long, global = true, env = "SPINBIE_OUT", default_value = "spinbie-out")]
    out: PathBuf,
    /// Cap on dense linear algebra worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
    /// Print the bundled example config and exit.
    #[arg(long, global = true)]
    print_example: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    Dirichlet2d,
    Dirichlet2dClassical,
    MaxwellPec,
    DiracGeneric,
    Transmission,
    MellinSweep,
    CornerSweep,
    ResonanceSweep,
    CalderonCheck,
    OperatorDump,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Dirichlet2d => "dirichlet2d",
            Command::Dirichlet2dClassical => "dirichlet2d-classical",
            Command::MaxwellPec => "maxwell-pec",
            Command::DiracGeneric => "dirac-generic",
            Command::Transmission => "transmission",
            Command::MellinSweep => "mellin-sweep",
            Command::CornerSweep => "corner-sweep",
            Command::ResonanceSweep => "resonance-sweep",
            Command::CalderonCheck => "calderon-check",
            Command::OperatorDump => "operator-dump",
        }
    }

    fn example(self) -> &'static str {
        match self {
            Command::Dirichlet2d => include_str!("../configs/dirichlet2d.json"),
            Command::Dirichlet2dClassical => include_str!("../configs/dirichlet2d-classical.json"),
            Command::MaxwellPec => include_str!("../configs/maxwell-pec.json"),
            Command::DiracGeneric => include_str!("../configs/dirac-generic.json"),
            Command::Transmission => include_str!("../configs/transmission.json"),
            Command::MellinSweep => include_str!("../configs/mellin-sweep.json"),
            Command::CornerSweep => include_str!("../configs/corner-sweep.json"),
            Command::ResonanceSweep => include_str!("../configs/resonance-sweep.json"),
            Command::CalderonCheck => include_str!("../configs/calderon-check.json"),
            Command::OperatorDump => include_str!("../configs/operator-dump.json"),
        }
    }
}

const CONFIG_ERROR: u8 = 1;
const NUMERICAL_FAILURE: u8 = 2;

fn write_artifacts(dir: &Path, report: &serde_json::Value, artifacts: Option<&Artifacts>) -> Result<Vec<String>, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let mut files = Vec::new();
    if let Some(a) = artifacts {
        for t in &a.tables {
            let name = format!("{}.csv", t.name);
            let path = dir.join(&name);
            let mut w = csv::Writer::from_path(&path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            w.write_record(&t.header).map_err(|e| e.to_string())?;
            for row in &t.rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())?;
            files.push(name);
        }
    }
    let mut report = report.clone();
    report["tables"] = json!(files);
    let path = dir.join("report.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    std::fs::write(&path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    files.push("report.json".into());
    Ok(files)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_example {
        print!("{}", cli.command.example());
        return ExitCode::SUCCESS;
    }
    match cli.threads {
        Some(0) | None => {}
        Some(1) => faer::set_global_parallelism(faer::Par::Seq),
        Some(n) => faer::set_global_parallelism(faer::Par::rayon(n)),
    }

    let (source, text) = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => (p.display().to_string(), t),
            Err(e) => {
                eprintln!("config error: cannot read {}: {e}", p.display());
                return ExitCode::from(CONFIG_ERROR);
            }
        },
        None => ("<bundled example>".to_string(), cli.command.example().to_string()),
    };
    let cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {source}: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if cfg.name() != cli.command.name() {
        eprintln!(
            "config error: {source} describes a {} experiment, not {}",
            cfg.name(),
            cli.command.name()
        );
        return ExitCode::from(CONFIG_ERROR);
    }

    let dir = cli.out.join(cli.command.name());
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("config error: cannot create output directory {}: {e}", dir.display());
        return ExitCode::from(CONFIG_ERROR);
    }
    if cli.verbose {
        eprintln!("running {} from {source} into {}", cfg.name(), dir.display());
    }
    let t0 = Instant::now();
    let outcome = experiments::run(&cfg, &dir);
    let seconds = t0.elapsed().as_secs_f64();
    let mut report = json!({
        "experiment": cfg.name(),
        "config_source": source,
        "config": config_echo(&cfg),
        "versions": { "spinbie": spinbie::VERSION, "cli": env!("CARGO_PKG_VERSION") },
        "timings": { "total_seconds": seconds },
    });
    let (artifacts, code) = match outcome {
        Ok(a) => {
            report["status"] = json!("ok");
            report["results"] = a.results.clone();
            (Some(a), ExitCode::SUCCESS)
        }
        Err(e) => match failure_code(&e) {
            NUMERICAL_FAILURE => {
                report["status"] = json!("numerical_failure");
                report["error"] = json!(e.to_string());
                eprintln!("numerical failure: {e}");
                (None, ExitCode::from(NUMERICAL_FAILURE))
            }
            c => {
                eprintln!("error: {e}");
                return ExitCode::from(c);
            }
        },
    };
    match write_artifacts(&dir, &report, artifacts.as_ref()) {
        Ok(files) => {
            if cli.verbose {
                eprintln!("wrote {} in {seconds:.2}s", files.join(", "));
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}

/// Exit code for a failed run. Only numerical failures still get a report.
fn failure_code(e: &spinbie::Error) -> u8 {
    match e {
        spinbie::Error::Singular { .. } => NUMERICAL_FAILURE,
        _ => CONFIG_ERROR,
    }
}

fn config_echo(cfg: &ExperimentConfig) -> serde_json::Value {
    serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_maps_to_numerical_failure() {
        let e = spinbie::Error::Singular { sigma_min: 0.0, sigma_max: 1.0 };
        assert_eq!(failure_code(&e), NUMERICAL_FAILURE);
        assert_eq!(failure_code(&spinbie::Error::Invalid("x".into())), CONFIG_ERROR);
    }

    #[test]
    fn failed_run_still_writes_report() {
        let tmp = tempfile::tempdir().unwrap();
        let report = json!({"status": "numerical_failure"});
        let files = write_artifacts(tmp.path(), &report, None).unwrap();
        assert_eq!(files, vec!["report.json".to_string()]);
        let back: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(back["status"], "numerical_failure");
        assert_eq!(back["tables"], json!([]));
    }
}
