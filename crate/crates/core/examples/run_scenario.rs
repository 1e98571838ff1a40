//! Runs one of the shipped JSON scenarios without the command-line front end.
//!
//! cargo run --release --example run_scenario -- configs/tls_emission_area.json out/

use std::path::PathBuf;

use fewphoton::scenario::{load_config, run_scenario, validate_config};

fn main() -> fewphoton::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "configs/tls_emission_area.json".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let (raw, cfg) = load_config(&config)?;
    for d in validate_config(&raw) {
        println!("{d}");
    }
    let report = run_scenario(&cfg, &out, 1.0)?;
    for f in report.files {
        println!("wrote {}", out.join(f).display());
    }
    Ok(())
}
