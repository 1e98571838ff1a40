//! Acceptance criteria. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::{extrema, Table};
use fewphoton::bath::{oracle_green, richardson, LatticeBath};
use fewphoton::emission::emission_asymptotic;
use fewphoton::evolution::DirectEvolver;
use fewphoton::green::{green, GreenQuery, Insertion, Window};
use fewphoton::propagator::apply_propagator;
use fewphoton::scattering::{plane_wave_response, transmit_wavepacket, GaussianPacket, ScatterGrid};
use fewphoton::scenario::{run_scenario, spacetime_emission, ScenarioConfig};
use fewphoton::system::{make_lambda, make_tls, SystemSpec};
use fewphoton::wavepacket::{Grid, WavepacketState};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenario(json: serde_json::Value) -> (tempfile::TempDir, ScenarioConfig) {
    let dir = tempfile::tempdir().unwrap();
    let cfg: ScenarioConfig = serde_json::from_value(json).unwrap();
    run_scenario(&cfg, dir.path(), 1.0).unwrap();
    (dir, cfg)
}

fn lorentzian() -> Outcome {
    let (g1, g2) = (0.5, 0.5);
    let spec = make_tls(0.0, 0.0, 0.0, &[g1, g2]).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..101 {
        let d = -5.0 + 0.1 * k as f64;
        let t = plane_wave_response(&spec, 0, 0, 0, 1, d).unwrap();
        let exact = g1 * g2 / (d * d + ((g1 + g2) / 2.0).powi(2));
        worst = worst.max((t.norm_sqr() - exact).abs());
    }
    check(worst < 1e-6, format!("max error {worst:.2e}"))
}

fn exponential_decay() -> Outcome {
    let spec = make_tls(0.0, 0.0, 0.0, &[1.0]).unwrap();
    let ev = DirectEvolver(&spec);
    let mut worst: f64 = 0.0;
    for k in 0..=100 {
        let tau = 0.1 * k as f64;
        let q = GreenQuery {
            annihilations: vec![],
            creations: vec![],
            bra: 1,
            ket: 1,
            window: Window::Finite { lower: 0.0, upper: tau },
        };
        let p = green(&ev, &q).unwrap().amplitude.norm_sqr();
        worst = worst.max((p - (-tau).exp()).abs());
    }
    check(worst < 1e-9, format!("max error {worst:.2e}"))
}

fn lambda_closure() -> Outcome {
    let (dir, _) = scenario(serde_json::json!({
        "kind": "lambda-emission",
        "params": {"omega0": 5.0, "t_pulse": 2.0, "channels": [{"rate": 1.0, "decay_to": "g2"}]},
        "grid": {"tau_max": 10.0, "tau_points": 201}
    }));
    let t = Table::read(&dir.path().join("time_series.csv"));
    let (a, b, c) = (t.column("P0g1"), t.column("P0e"), t.column("P1g2"));
    let worst = (0..a.len()).map(|i| (a[i] + b[i] + c[i] - 1.0).abs()).fold(0.0, f64::max);
    let spec = make_lambda(0.0, 0.0, 5.0, 2.0, 0.0, 1.0).unwrap();
    let inf = emission_asymptotic(&spec, 0, 1).unwrap();
    let inf_err = (inf.get(0, 0) + inf.get(1, 1) - 1.0).abs();
    check(
        worst < 1e-3 && inf_err < 1e-3,
        format!("max |sum - 1| over {} times {worst:.2e}, at infinity {inf_err:.2e}", a.len()),
    )
}

fn rabi_structure() -> Outcome {
    let (dir, _) = scenario(serde_json::json!({
        "kind": "tls-emission",
        "params": {"t_pulse": 0.2, "channels": [{"rate": 1.0}]},
        "sweep": {"variable": "area", "start": 0.0, "stop": 4.0 * PI, "points": 81},
        "grid": {"tau_max": 1.0, "tau_points": 2}
    }));
    let t = Table::read(&dir.path().join("area_sweep.csv"));
    let (area, p1) = (t.column("area"), t.column("P1g"));
    let step = area[1] - area[0];
    let (max, min) = extrema(&p1);
    let near = |idx: &[usize], target: f64| idx.iter().any(|&i| (area[i] - target).abs() <= step + 1e-12);
    let at = |idx: &[usize]| idx.iter().map(|&i| format!("{:.3}", area[i] / PI)).collect::<Vec<_>>().join(" ");
    check(
        near(&max, PI) && near(&max, 3.0 * PI) && near(&min, 0.0) && near(&min, 2.0 * PI),
        format!("maxima at [{}] pi, minima at [{}] pi", at(&max), at(&min)),
    )
}

fn light_cone() -> Outcome {
    let spec = make_tls(0.0, 5.0, 2.0, &[1.0]).unwrap();
    let rows = spacetime_emission(&spec, 0, 6.0, 0.05).unwrap();
    let map_worst = rows.iter().filter(|r| r[1] > r[0]).map(|r| r[3]).fold(0.0, f64::max);
    let map_inside = rows.iter().filter(|r| r[1] < r[0]).map(|r| r[3]).fold(0.0, f64::max);

    // propagated amplitudes: interaction-picture x > 0 is outside the cone
    let tau = 3.0;
    let grid = Grid::spanning(-tau, 2.0, 0.02).unwrap();
    let out = apply_propagator(&spec, &WavepacketState::vacuum(grid, 0), 0.0, tau, 2).unwrap();
    let mut prop_worst: f64 = 0.0;
    for (key, amps) in &out.sectors {
        let m = key.photons();
        for (flat, a) in amps.iter().enumerate() {
            let mut rest = flat;
            let mut outside = false;
            for _ in 0..m {
                outside |= grid.point(rest % grid.n) > 1e-12;
                rest /= grid.n;
            }
            if outside {
                prop_worst = prop_worst.max(a.norm_sqr());
            }
        }
    }
    check(
        map_worst < 1e-12 && prop_worst < 1e-12 && map_inside > 1e-3,
        format!("max |amp|^2 outside: map {map_worst:.1e}, propagated {prop_worst:.1e} (inside peak {map_inside:.3})"),
    )
}

fn random_spec(rng: &mut StdRng, class: usize) -> (SystemSpec, &'static str) {
    let t_pulse = 0.08 * rng.gen_range(3..=15) as f64;
    let omega = rng.gen_range(1.0..5.0);
    let d = rng.gen_range(-1.0..1.0);
    match class {
        0 => (make_tls(d, 0.0, 0.0, &[rng.gen_range(0.5..1.5)]).unwrap(), "tls undriven"),
        1 => (make_tls(d, omega, t_pulse, &[0.5, 0.5]).unwrap(), "tls driven"),
        2 => (make_lambda(d, 0.5 * d, 0.0, 0.0, 0.5, 0.5).unwrap(), "lambda undriven"),
        _ => (make_lambda(d, 0.0, omega, t_pulse, rng.gen_range(0.0..0.6), 1.0).unwrap(), "lambda driven"),
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20240611);
    let (mut n, mut worst, mut fails) = (0, 0.0f64, vec![]);
    for class in 0..4 {
        let mut accepted = 0;
        while accepted < 6 {
            let (spec, label) = random_spec(&mut rng, class);
            let steps = rng.gen_range(8..=25);
            let upper = 0.08 * steps as f64;
            let mut ins = vec![];
            for _ in 0..rng.gen_range(1..=2) {
                let time = 0.08 * rng.gen_range(0..=steps) as f64;
                ins.push((Insertion::new(time, rng.gen_range(0..spec.n_channels())), rng.gen_bool(0.5)));
            }
            let q = GreenQuery {
                annihilations: ins.iter().filter(|i| i.1).map(|i| i.0).collect(),
                creations: ins.iter().filter(|i| !i.1).map(|i| i.0).collect(),
                bra: rng.gen_range(0..spec.dim()),
                ket: rng.gen_range(0..spec.dim()),
                window: Window::Finite { lower: 0.0, upper },
            };
            let engine = green(&DirectEvolver(&spec), &q).unwrap().amplitude;
            // relative agreement is only meaningful away from exact zeros
            if engine.norm() < 1e-2 {
                continue;
            }
            let oracle = richardson(0.08, |h| {
                let lat = LatticeBath::covering(&spec, h, 0.0, upper, 1, 0)?;
                oracle_green(&lat, &q)
            })
            .unwrap();
            let rel = (engine - oracle).norm() / oracle.norm();
            worst = worst.max(rel);
            if rel > 0.03 {
                fails.push(format!("{label} {q:?}: rel {rel:.3e}"));
            }
            accepted += 1;
            n += 1;
        }
    }
    check(fails.is_empty() && n >= 20, format!("{n} queries, worst relative error {worst:.2e} {}", fails.join("; ")))
}

fn driven_transmission() -> Outcome {
    let packet = GaussianPacket::new(0.0, 2.0, 0.0, 0).unwrap();
    let t = |spec: &SystemSpec| transmit_wavepacket(spec, &packet, 0, 1, ScatterGrid::default()).unwrap().transmission;
    let driven = t(&make_tls(0.0, 5.0, 4.0, &[0.5, 0.5]).unwrap());
    let undriven = t(&make_tls(0.0, 0.0, 0.0, &[0.5, 0.5]).unwrap());
    let (dir, _) = scenario(serde_json::json!({
        "kind": "tls-scattering",
        "params": {"omega0": 5.0, "channels": [{"rate": 0.5}, {"rate": 0.5}], "packet": {"delta0": 0.0, "width": 2.0}},
        "sweep": {"variable": "t_pulse", "start": 0.0, "stop": 4.0, "points": 41}
    }));
    let tr = Table::read(&dir.path().join("tp_sweep.csv")).column("transmission_driven");
    let (max, min) = extrema(&tr);
    let interior = max.iter().chain(&min).filter(|&&i| i > 0 && i + 1 < tr.len()).count();
    check(
        driven < undriven && interior >= 2,
        format!("T driven {driven:.4} vs undriven {undriven:.4}; {interior} interior extrema over T_P in [0, 4]"),
    )
}

fn truncation_control() -> Outcome {
    let spec = make_tls(0.0, 1.0, 0.2, &[1.0]).unwrap();
    let d2 = emission_asymptotic(&spec, 0, 2).unwrap().closure_deficit();
    let d3 = emission_asymptotic(&spec, 0, 3).unwrap().closure_deficit();
    check(d3 > 0.0 && d2 / d3 >= 5.0, format!("deficit {d2:.3e} -> {d3:.3e}, ratio {:.1}", d2 / d3))
}

fn composition() -> Outcome {
    let spec = make_tls(0.0, 5.0, 2.0, &[1.0]).unwrap();
    let tau = 2.4;
    let grid = Grid::spanning(-tau, 0.0, 0.02).unwrap();
    let vac = WavepacketState::vacuum(grid, 0);
    let direct = apply_propagator(&spec, &vac, 0.0, tau, 2).unwrap();
    let half = apply_propagator(&spec, &vac, 0.0, tau / 2.0, 2).unwrap();
    let split = apply_propagator(&spec, &half, tau / 2.0, tau, 2).unwrap();
    let (a, b) = (direct.sector_norms(), split.sector_norms());
    let mut worst: f64 = 0.0;
    for key in a.keys().chain(b.keys()) {
        let d = (a.get(key).copied().unwrap_or(0.0) - b.get(key).copied().unwrap_or(0.0)).abs();
        worst = worst.max(d);
    }
    check(worst < 1e-3, format!("{} sectors, max norm difference {worst:.2e}", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 9] = [
        ("lorentzian transmission", lorentzian, Some(Duration::from_secs(1))),
        ("exponential decay", exponential_decay, None),
        ("lambda closure", lambda_closure, Some(Duration::from_secs(30))),
        ("rabi structure", rabi_structure, Some(Duration::from_secs(120))),
        ("light cone", light_cone, None),
        ("oracle equivalence", oracle_equivalence, Some(Duration::from_secs(600))),
        ("driven transmission suppression", driven_transmission, None),
        ("truncation control", truncation_control, None),
        ("propagator composition", composition, None),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let res = match (res, limit) {
            (Ok(d), Some(l)) if elapsed > l => Err(format!("{d}; took {elapsed:.2?} > {l:?}")),
            (r, _) => r,
        };
        match res {
            Ok(d) => println!("PASS {name}: {d} [{elapsed:.2?}]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
