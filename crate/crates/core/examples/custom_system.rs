//! Any few-level system can be described in JSON. This one is a driven
//! three-level ladder with two decay channels.
//!
//! cargo run --release --example custom_system

use fewphoton::emission::emission_series;
use fewphoton::system::{system_from_json, system_to_json};

const LADDER: &str = r#"{
  "dim": 3,
  "labels": ["g", "e", "f"],
  "h_static": [[0,0],[0,0],[0,0], [0,0],[0.5,0],[0,0], [0,0],[0,0],[1,0]],
  "drives": [{
    "matrix": [[0,0],[1,0],[0,0], [1,0],[0,0],[1,0], [0,0],[1,0],[0,0]],
    "envelope": {"kind": "rectangular", "omega0": 2.0, "t_start": 0.0, "t_end": 1.0}
  }],
  "channels": [
    {"rate": 1.0, "operator": [[0,0],[1,0],[0,0], [0,0],[0,0],[0,0], [0,0],[0,0],[0,0]]},
    {"rate": 0.5, "operator": [[0,0],[0,0],[0,0], [0,0],[0,0],[1,0], [0,0],[0,0],[0,0]]}
  ]
}"#;

fn main() -> fewphoton::Result<()> {
    let spec = system_from_json(LADDER)?;
    println!("labels {:?}, {} channels, driven: {}", spec.basis_labels(), spec.n_channels(), spec.is_driven());
    let taus: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    println!("{:>5} {:>9} {:>9} {:>9} {:>9}", "tau", "P0", "P1", "P2", "deficit");
    for p in emission_series(&spec, 0, &taus, 2)? {
        let n = |k: usize| (0..3).map(|s| p.get(k, s)).sum::<f64>();
        println!("{:>5.1} {:>9.5} {:>9.5} {:>9.5} {:>9.2e}", p.tau, n(0), n(1), n(2), p.closure_deficit());
    }
    println!("\nround trip:\n{}", system_to_json(&spec)?);
    Ok(())
}
