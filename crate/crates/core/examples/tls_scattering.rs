//! Single-photon transmission through a two-level system between two
//! waveguides, with and without a coherent pulse overlapping the photon.
//!
//! cargo run --release --example tls_scattering

use fewphoton::scattering::{plane_wave_response, transmit_wavepacket, GaussianPacket, ScatterGrid};
use fewphoton::system::make_tls;

fn main() -> fewphoton::Result<()> {
    let rates = [0.5, 0.5];
    let undriven = make_tls(0.0, 0.0, 0.0, &rates)?;
    let driven = make_tls(0.0, 5.0, 4.0, &rates)?;

    println!("monochromatic transmission |t|^2 into waveguide 2");
    for k in -4..=4 {
        let d = 0.5 * k as f64;
        let t = plane_wave_response(&undriven, 0, 0, 0, 1, d)?;
        println!("  delta = {d:+.1}: {:.6}", t.norm_sqr());
    }

    println!("\nGaussian packet (width 2) transmission");
    println!("{:>8} {:>12} {:>12}", "delta0", "undriven", "driven");
    for k in -8..=8 {
        let d = k as f64;
        let packet = GaussianPacket::new(d, 2.0, 0.0, 0)?;
        let tu = transmit_wavepacket(&undriven, &packet, 0, 1, ScatterGrid::default())?;
        let td = transmit_wavepacket(&driven, &packet, 0, 1, ScatterGrid::default())?;
        println!("{d:>8.1} {:>12.6} {:>12.6}", tu.transmission, td.transmission);
    }
    Ok(())
}
