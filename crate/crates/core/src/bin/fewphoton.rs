use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fewphoton::scenario::{has_errors, load_config, oracle_check, run_scenario, validate_config};

#[derive(Parser)]
#[command(name = "fewphoton", version, about = "Few-photon emission and scattering scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "FEWPHOTON_THREADS")]
    threads: Option<usize>,
    /// Multiplies every grid spacing.
    #[arg(long, global = true, default_value_t = 1.0)]
    grid_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV files plus a manifest.
    Run { config: PathBuf },
    /// Check a config and print diagnostics.
    Validate { config: PathBuf },
    /// Compare the engine with the discretized-bath oracle.
    OracleCheck { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> fewphoton::Result<ExitCode> {
    match &cli.command {
        Command::Validate { config } => {
            let text = std::fs::read_to_string(config)?;
            let raw: serde_json::Value = serde_json::from_str(&text)?;
            let diags = validate_config(&raw);
            for d in &diags {
                println!("{d}");
            }
            if has_errors(&diags) {
                return Ok(ExitCode::FAILURE);
            }
            println!("ok");
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config } => {
            let (raw, cfg) = load_config(config)?;
            for d in validate_config(&raw) {
                eprintln!("{d}");
            }
            let out = cfg.output.as_ref().map(|o| cli.out.join(o)).unwrap_or_else(|| cli.out.clone());
            let report = run_scenario(&cfg, &out, cli.grid_scale)?;
            for f in &report.files {
                println!("{}", report.out_dir.join(f).display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck { config } => {
            let (_, cfg) = load_config(config)?;
            let rows = oracle_check(&cfg, &cli.out, cli.grid_scale)?;
            let mut ok = true;
            for r in &rows {
                ok &= r.pass;
                println!(
                    "{} {:<40} engine {:+.6e}{:+.6e}i oracle {:+.6e}{:+.6e}i err {:.2e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.quantity,
                    r.engine.re,
                    r.engine.im,
                    r.oracle.re,
                    r.oracle.im,
                    r.abs_error
                );
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
