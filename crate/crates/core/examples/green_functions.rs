//! Effective evolution and system Green's functions.
//!
//! cargo run --release --example green_functions

use fewphoton::evolution::{u_eff, DirectEvolver, EvolutionCache};
use fewphoton::green::{green, GreenQuery, Insertion, Window};
use fewphoton::system::make_tls;

fn main() -> fewphoton::Result<()> {
    let spec = make_tls(0.0, 0.0, 0.0, &[1.0])?;
    println!("undriven decay |<e|U_eff(tau)|e>|^2 against exp(-tau)");
    for tau in [0.5, 1.0, 2.0, 5.0] {
        let u = u_eff(&spec, 0.0, tau)?;
        println!("  tau = {tau}: {:.12} vs {:.12}", u[(1, 1)].norm_sqr(), (-tau as f64).exp());
    }

    let driven = make_tls(0.3, 4.0, 1.5, &[1.0])?;
    let ev = DirectEvolver(&driven);
    let cache = EvolutionCache::new(&driven, (0..=40).map(|k| 0.1 * k as f64))?;
    println!("\n<g| U(4,0) T[L(t2) L(t1)] |g> for a driven system");
    for (t1, t2) in [(0.5, 1.0), (1.0, 2.0), (0.2, 3.5)] {
        let q = GreenQuery {
            annihilations: vec![Insertion::new(t2, 0), Insertion::new(t1, 0)],
            creations: vec![],
            bra: 0,
            ket: 0,
            window: Window::Finite { lower: 0.0, upper: 4.0 },
        };
        let direct = green(&ev, &q)?.amplitude;
        let cached = green(&cache, &q)?.amplitude;
        println!("  t = ({t1}, {t2}): {direct:.8}  (cached {cached:.8})");
    }
    Ok(())
}
