use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gva_cli::{dump_artifact, explain, load, run_scenario, Overrides};
use gva_core::exec::Exec;

#[derive(Parser)]
#[command(name = "gva", version, about = "Exact verification of generalized vertex algebra identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Verify(Common),
    /// Write a stable text dump of the basis, closure or fields.
    Dump {
        #[command(flatten)]
        common: Common,
        /// One of: basis, closure, fields.
        what: String,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Describe what a check id verifies.
    Explain { id: String },
}

#[derive(Args)]
struct Common {
    #[arg(long, env = "GVA_SCENARIO")]
    scenario: PathBuf,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, env = "GVA_JOBS")]
    jobs: Option<usize>,
    /// Half-width of the Z-relation and Jacobi windows.
    #[arg(long, env = "GVA_WINDOW")]
    window: Option<i64>,
    #[arg(long, env = "GVA_CUTOFF")]
    cutoff: Option<i64>,
    /// Level as "p/q".
    #[arg(long, env = "GVA_LEVEL")]
    level: Option<String>,
    #[arg(long, env = "GVA_SEED")]
    seed: Option<u64>,
    /// Left end of the interval [b, b+2) holding the lifts of (g,h).
    #[arg(long, env = "GVA_LIFT_BASE", allow_hyphen_values = true)]
    lift_base: Option<String>,
    /// Report path, overriding the scenario's.
    #[arg(long, env = "GVA_REPORT")]
    report: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            window: self.window,
            cutoff: self.cutoff,
            level: self.level.clone(),
            seed: self.seed,
            lift_base: self.lift_base.clone(),
            report: self.report.clone(),
        }
    }

    fn exec(&self) -> Result<Exec, String> {
        match self.jobs {
            Some(0) => Err("--jobs must be at least 1".into()),
            Some(1) => Ok(Exec::Sequential),
            Some(n) => {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
                Ok(Exec::Parallel)
            }
            None => Ok(Exec::Parallel),
        }
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("{msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify(common) => {
            let exec = match common.exec() {
                Ok(e) => e,
                Err(e) => return config_error(e),
            };
            let r = match load(&common.scenario, &common.overrides()) {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            let outcome = match run_scenario(&r, exec) {
                Ok(o) => o,
                Err(e) => return config_error(e),
            };
            for e in &outcome.entries {
                eprintln!("{}", e.report.summary_line());
            }
            match &r.report {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, outcome.full_text()) {
                        return config_error(format!("{}: {e}", path.display()));
                    }
                }
                None => print!("{}", outcome.full_text()),
            }
            let failed = outcome.entries.iter().filter(|e| !e.report.passed).count();
            eprintln!("{} checks, {failed} failed", outcome.entries.len());
            ExitCode::from(outcome.code as u8)
        }
        Command::Dump { common, what, out } => {
            let exec = match common.exec() {
                Ok(e) => e,
                Err(e) => return config_error(e),
            };
            let text = match load(&common.scenario, &common.overrides()).and_then(|r| dump_artifact(&r, &what, exec)) {
                Ok(t) => t,
                Err(e) => return config_error(e),
            };
            match out {
                Some(p) => match std::fs::write(&p, text) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => config_error(format!("{}: {e}", p.display())),
                },
                None => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
            }
        }
        Command::Explain { id } => match explain::explain(&id) {
            Some(d) => {
                println!("{id}: {d}");
                ExitCode::SUCCESS
            }
            None => {
                let known: Vec<_> = explain::known_ids().collect();
                config_error(format!("unknown check id {id:?}; known: {}", known.join(", ")))
            }
        },
    }
}
