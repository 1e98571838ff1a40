use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{build_spec, initial_index, resolve, ScenarioConfig};
use crate::bath::{oracle_emission_probabilities, oracle_green, richardson, LatticeBath};
use crate::emission::emission_series;
use crate::error::{Error, Result};
use crate::evolution::DirectEvolver;
use crate::green::{green, GreenQuery, Insertion, Window};
use crate::wavepacket::fmt12;

/// Coarsest lattice spacing; Richardson uses it, its half and its quarter.
pub const ORACLE_DX: f64 = 0.08;
const ORACLE_DX_MIN: f64 = 0.005;
pub const GREEN_REL_TOL: f64 = 3e-2;
pub const PROBABILITY_ABS_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub quantity: String,
    pub engine: C64,
    pub oracle: C64,
    pub abs_error: f64,
    pub pass: bool,
}

fn on_lattice(t: f64, h: f64) -> f64 {
    (t / h).round() * h
}

/// Largest `ORACLE_DX / 2^k` putting every drive breakpoint on a bin
/// boundary, or `None` if even the finest spacing misses one.
pub fn oracle_spacing(breakpoints: &[f64]) -> Option<f64> {
    let mut h = ORACLE_DX;
    while h >= ORACLE_DX_MIN {
        if breakpoints.iter().all(|&t| ((t / h).round() * h - t).abs() < 1e-9) {
            return Some(h);
        }
        h /= 2.0;
    }
    None
}

/// Compares engine Green's functions and emission probabilities against the
/// discretized-bath oracle and writes `oracle_check.csv`.
pub fn oracle_check(cfg: &ScenarioConfig, out_dir: &Path, grid_scale: f64) -> Result<Vec<OracleRow>> {
    let r = resolve(cfg, grid_scale)?;
    let spec = build_spec(&r, r.omega0, r.t_pulse)?;
    let sigma0 = initial_index(&spec, &r)?;
    let bps = spec.breakpoints();
    let h0 = oracle_spacing(&bps).ok_or_else(|| {
        Error::InvalidParameter(format!("drive breakpoints {bps:?} do not fit a lattice of spacing >= {ORACLE_DX_MIN}"))
    })?;
    let pulse_end = spec.drive_support().map_or(0.0, |s| s.1);
    let tau = on_lattice((pulse_end + 1.0).clamp(0.8, 2.4), h0);
    let on_lattice = |t: f64| on_lattice(t, h0);
    let ev = DirectEvolver(&spec);
    let mut rows = vec![];

    let mut queries: Vec<(String, GreenQuery)> = vec![];
    let base = |ann: Vec<Insertion>, bra: usize| GreenQuery {
        annihilations: ann,
        creations: vec![],
        bra,
        ket: sigma0,
        window: Window::Finite { lower: 0.0, upper: tau },
    };
    let labels = spec.basis_labels();
    queries.push((format!("G[{}<-{}]", labels[sigma0], labels[sigma0]), base(vec![], sigma0)));
    let t1 = on_lattice(tau / 2.0);
    for ch in 0..spec.n_channels().min(2) {
        for bra in 0..spec.dim() {
            queries.push((format!("G[{}<-{}; L{ch}({t1})]", labels[bra], labels[sigma0]), base(vec![Insertion::new(t1, ch)], bra)));
        }
    }
    let (ta, tb) = (on_lattice(0.75 * tau), on_lattice(0.25 * tau));
    for bra in 0..spec.dim() {
        queries.push((
            format!("G[{}<-{}; L0({ta}) L0({tb})]", labels[bra], labels[sigma0]),
            base(vec![Insertion::new(ta, 0), Insertion::new(tb, 0)], bra),
        ));
    }
    for (name, q) in queries {
        let engine = green(&ev, &q)?.amplitude;
        let oracle = richardson(h0, |h| {
            let lat = LatticeBath::covering(&spec, h, 0.0, tau, 1, 0)?;
            oracle_green(&lat, &q)
        })?;
        let abs_error = (engine - oracle).norm();
        let pass = abs_error <= GREEN_REL_TOL * oracle.norm() + 1e-4;
        rows.push(OracleRow { quantity: name, engine, oracle, abs_error, pass });
    }

    let n_max = r.n_max.min(2);
    let engine = emission_series(&spec, sigma0, &[tau], n_max)?.remove(0);
    let maps: Vec<BTreeMap<(usize, usize), f64>> = [h0, h0 / 2.0, h0 / 4.0]
        .iter()
        .map(|&h| {
            let lat = LatticeBath::covering(&spec, h, 0.0, tau, 1, n_max)?;
            oracle_emission_probabilities(&lat, sigma0, tau)
        })
        .collect::<Result<_>>()?;
    for n in 0..=n_max {
        for s in 0..spec.dim() {
            let get = |m: &BTreeMap<(usize, usize), f64>| m.get(&(n, s)).copied().unwrap_or(0.0);
            let (f1, f2, f4) = (get(&maps[0]), get(&maps[1]), get(&maps[2]));
            let oracle = (4.0 * (2.0 * f4 - f2) - (2.0 * f2 - f1)) / 3.0;
            let e = engine.get(n, s);
            let abs_error = (e - oracle).abs();
            rows.push(OracleRow {
                quantity: format!("P{n}_{}({tau})", labels[s]),
                engine: C64::new(e, 0.0),
                oracle: C64::new(oracle, 0.0),
                abs_error,
                pass: abs_error <= PROBABILITY_ABS_TOL,
            });
        }
    }

    std::fs::create_dir_all(out_dir)?;
    let mut s = String::from("quantity,engine_re,engine_im,oracle_re,oracle_im,abs_error,pass\n");
    for row in &rows {
        let _ = writeln!(
            s,
            "\"{}\",{},{},{},{},{},{}",
            row.quantity,
            fmt12(row.engine.re),
            fmt12(row.engine.im),
            fmt12(row.oracle.re),
            fmt12(row.oracle.im),
            fmt12(row.abs_error),
            u8::from(row.pass)
        );
    }
    std::fs::write(out_dir.join("oracle_check.csv"), s)?;
    Ok(rows)
}
