//! A photon in waveguide 1 is absorbed by a lambda system in `g1` and
//! re-emitted into waveguide 2, leaving the system in `g2`.
//!
//! cargo run --release --example lambda_subtraction [out_dir]

use fewphoton::scenario::{lambda_subtraction_run, lambda_with_channels, ResolvedChannel, ResolvedPacket};

fn main() -> fewphoton::Result<()> {
    let channels = [
        ResolvedChannel { rate: 0.5, decay_to: Some("g1".into()) },
        ResolvedChannel { rate: 0.5, decay_to: Some("g2".into()) },
    ];
    let spec = lambda_with_channels(0.0, 0.0, 0.0, 0.0, &channels)?;
    let packet = ResolvedPacket { delta0: 0.0, width: 2.0, center: -8.0 };
    let snaps = lambda_subtraction_run(&spec, &packet, 20.0, 11, 0.04)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "tau", "P_e", "P_in_g1", "P_out_g2");
    for s in &snaps {
        println!("{:>6.1} {:>10.6} {:>10.6} {:>10.6}", s.tau, s.p_excited, s.p_in_g1, s.p_out_g2);
    }
    if let Some(dir) = std::env::args().nth(1) {
        let last = snaps.last().expect("snapshots");
        last.state.write_csv(std::path::Path::new(&dir))?;
        println!("final state written to {dir}");
    }
    Ok(())
}
