//! JSON-configured experiments: emission and scattering runs, parameter
//! sweeps, CSV output.

mod config;
mod oracle;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    has_errors, sweep_variables, validate_config, ChannelParam, Diagnostic, GridParams, Level, PacketParam, Params,
    ScenarioConfig, ScenarioKind, Sweep,
};
pub use oracle::{oracle_check, oracle_spacing, OracleRow, GREEN_REL_TOL, ORACLE_DX, PROBABILITY_ABS_TOL};

use crate::emission::{emission_asymptotic, emission_series, EmissionProbabilities};
use crate::error::{Error, Result};
use crate::evolution::EvolutionCache;
use crate::green::{chain_vector, ChainOp, OpKind};
use crate::linalg::{basis, c, ket_bra, CMatrix};
use crate::propagator::apply_propagator;
use crate::scattering::{scattering_element_with, transmit_wavepacket, GaussianPacket, ScatterGrid, ScatterQuery};
use crate::system::{build_system, classify_states, make_tls, DriveTerm, PulseEnvelope, SystemSpec};
use crate::wavepacket::{fmt12, to_schrodinger, Grid, SectorKey, WavepacketState};
use num_complex::Complex64 as C64;

/// Every parameter of a run after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub kind: ScenarioKind,
    pub delta_a: f64,
    pub delta_e: f64,
    pub delta_12: f64,
    pub omega0: f64,
    pub t_pulse: f64,
    pub channels: Vec<ResolvedChannel>,
    pub packet: Option<ResolvedPacket>,
    pub initial_state: String,
    pub sweep: Option<Sweep>,
    pub dx: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    pub n_max: usize,
    pub grid_scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<crate::system::SystemDescription>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedChannel {
    pub rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_to: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedPacket {
    pub delta0: f64,
    pub width: f64,
    pub center: f64,
}

fn channels_or(p: &Params, default: &[(f64, Option<&str>)]) -> Vec<ResolvedChannel> {
    match &p.channels {
        Some(chs) => chs
            .iter()
            .map(|ch| ResolvedChannel { rate: ch.rate.unwrap_or(0.0), decay_to: ch.decay_to.clone() })
            .collect(),
        None => default.iter().map(|&(rate, to)| ResolvedChannel { rate, decay_to: to.map(String::from) }).collect(),
    }
}

/// Validates `cfg` and fills in every default.
pub fn resolve(cfg: &ScenarioConfig, grid_scale: f64) -> Result<Resolved> {
    let raw = serde_json::to_value(cfg)?;
    let diags = validate_config(&raw);
    if has_errors(&diags) {
        let msg: Vec<String> = diags.iter().filter(|d| d.level == Level::Error).map(|d| d.to_string()).collect();
        return Err(Error::ConfigInvalid(msg.join("; ")));
    }
    if !(grid_scale > 0.0) || !grid_scale.is_finite() {
        return Err(Error::ConfigInvalid(format!("grid scale {grid_scale} must be > 0")));
    }
    let p = &cfg.params;
    let g = &cfg.grid;
    let kind = cfg.kind;
    let (omega0, t_pulse) = match kind {
        ScenarioKind::TlsEmission | ScenarioKind::LambdaEmission => (p.omega0.unwrap_or(5.0), p.t_pulse.unwrap_or(2.0)),
        ScenarioKind::TlsScattering => (p.omega0.unwrap_or(5.0), p.t_pulse.unwrap_or(4.0)),
        ScenarioKind::LambdaSubtraction => (p.omega0.unwrap_or(0.0), p.t_pulse.unwrap_or(0.0)),
        ScenarioKind::Custom => (0.0, 0.0),
    };
    let channels = match kind {
        ScenarioKind::TlsEmission => channels_or(p, &[(1.0, None)]),
        ScenarioKind::TlsScattering => channels_or(p, &[(0.5, None), (0.5, None)]),
        ScenarioKind::LambdaEmission => channels_or(p, &[(1.0, Some("g2"))]),
        ScenarioKind::LambdaSubtraction => channels_or(p, &[(0.5, Some("g1")), (0.5, Some("g2"))]),
        ScenarioKind::Custom => vec![],
    };
    let packet = match kind {
        ScenarioKind::TlsScattering | ScenarioKind::LambdaSubtraction => {
            let d = p.packet.clone().unwrap_or(PacketParam { delta0: None, width: None, center: None });
            let center = if kind == ScenarioKind::LambdaSubtraction { -8.0 } else { 0.0 };
            Some(ResolvedPacket {
                delta0: d.delta0.unwrap_or(0.0),
                width: d.width.unwrap_or(2.0),
                center: d.center.unwrap_or(center),
            })
        }
        _ => None,
    };
    let initial_state = p.initial_state.clone().unwrap_or_else(|| match kind {
        ScenarioKind::TlsEmission | ScenarioKind::TlsScattering => "g".into(),
        ScenarioKind::LambdaEmission | ScenarioKind::LambdaSubtraction => "g1".into(),
        ScenarioKind::Custom => p.system.as_ref().and_then(|s| s.labels.first().cloned()).unwrap_or_default(),
    });
    let sweep = cfg.sweep.clone().or_else(|| match kind {
        ScenarioKind::TlsScattering => Some(Sweep { variable: "delta0".into(), start: -8.0, stop: 8.0, points: 161 }),
        _ => None,
    });
    let (dx, tau_max, tau_points, n_max) = match kind {
        ScenarioKind::TlsEmission | ScenarioKind::LambdaEmission => (0.05, t_pulse + 8.0, 201, 2),
        ScenarioKind::TlsScattering => (0.01, 0.0, 0, 1),
        ScenarioKind::LambdaSubtraction => (0.04, 20.0, 41, 1),
        ScenarioKind::Custom => (0.05, 10.0, 101, 2),
    };
    let lambda_n_max = if matches!(kind, ScenarioKind::LambdaEmission) { 1 } else { n_max };
    Ok(Resolved {
        kind,
        delta_a: p.delta_a.unwrap_or(0.0),
        delta_e: p.delta_e.unwrap_or(0.0),
        delta_12: p.delta_12.unwrap_or(0.0),
        omega0,
        t_pulse,
        channels,
        packet,
        initial_state,
        sweep,
        dx: g.dx.unwrap_or(dx) * grid_scale,
        tau_max: g.tau_max.unwrap_or(tau_max),
        tau_points: g.tau_points.unwrap_or(tau_points),
        n_max: g.n_max.unwrap_or(lambda_n_max),
        grid_scale,
        system: p.system.clone(),
    })
}

/// Lambda system with channels in configuration order.
pub fn lambda_with_channels(delta_e: f64, delta_12: f64, omega0: f64, t_pulse: f64, channels: &[ResolvedChannel]) -> Result<SystemSpec> {
    let mut h = CMatrix::zeros(3, 3);
    h[(0, 0)] = c(delta_12, 0.0);
    h[(2, 2)] = c(delta_e, 0.0);
    let s1 = ket_bra(3, 0, 2);
    let drives = if omega0 != 0.0 && t_pulse > 0.0 {
        vec![DriveTerm { matrix: &s1 + s1.adjoint(), envelope: PulseEnvelope::rectangular(omega0, 0.0, t_pulse) }]
    } else {
        vec![]
    };
    let ops = channels
        .iter()
        .map(|ch| {
            let g = if ch.decay_to.as_deref() == Some("g1") { 0 } else { 1 };
            ket_bra(3, g, 2) * c(ch.rate.sqrt(), 0.0)
        })
        .collect();
    SystemSpec::new(vec!["g1".into(), "g2".into(), "e".into()], h, drives, ops)
}

/// System for the resolved scenario, with pulse parameters overridable for
/// sweeps.
pub fn build_spec(r: &Resolved, omega0: f64, t_pulse: f64) -> Result<SystemSpec> {
    let rates: Vec<f64> = r.channels.iter().map(|c| c.rate).collect();
    match r.kind {
        ScenarioKind::TlsEmission | ScenarioKind::TlsScattering => make_tls(r.delta_a, omega0, t_pulse, &rates),
        ScenarioKind::LambdaEmission | ScenarioKind::LambdaSubtraction => {
            lambda_with_channels(r.delta_e, r.delta_12, omega0, t_pulse, &r.channels)
        }
        ScenarioKind::Custom => build_system(r.system.as_ref().ok_or_else(|| Error::ConfigInvalid("missing system".into()))?),
    }
}

fn initial_index(spec: &SystemSpec, r: &Resolved) -> Result<usize> {
    spec.label_index(&r.initial_state)
        .ok_or_else(|| Error::ConfigInvalid(format!("unknown initial state '{}'", r.initial_state)))
}

/// Pulse area `2 Omega_0 T_P` (a pi area fully inverts an undamped system).
pub fn pulse_area(omega0: f64, t_pulse: f64) -> f64 {
    2.0 * omega0 * t_pulse
}

/// Header row plus fixed-format data rows.
pub fn csv_text(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt12(v)).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<f64>], files: &mut Vec<String>) -> Result<()> {
    std::fs::write(dir.join(name), csv_text(header, rows))?;
    files.push(name.to_string());
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    engine: &'static str,
    version: &'static str,
    resolved: &'a Resolved,
    files: &'a [String],
}

/// Runs the scenario and writes its CSV files plus `manifest.json` into
/// `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path, grid_scale: f64) -> Result<RunReport> {
    let r = resolve(cfg, grid_scale)?;
    std::fs::create_dir_all(out_dir)?;
    let mut files = vec![];
    let ctx = |e: Error| match e {
        Error::ConfigInvalid(_) | Error::Io(_) => e,
        other => Error::InvalidParameter(format!("{:?} scenario: {other}", r.kind)),
    };
    match r.kind {
        ScenarioKind::TlsEmission | ScenarioKind::LambdaEmission | ScenarioKind::Custom => {
            run_emission(&r, out_dir, &mut files).map_err(ctx)?
        }
        ScenarioKind::TlsScattering => run_tls_scattering(&r, out_dir, &mut files).map_err(ctx)?,
        ScenarioKind::LambdaSubtraction => run_lambda_subtraction(&r, out_dir, &mut files).map_err(ctx)?,
    }
    let manifest = Manifest { engine: "fewphoton", version: env!("CARGO_PKG_VERSION"), resolved: &r, files: &files };
    std::fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    files.push("manifest.json".into());
    Ok(RunReport { out_dir: out_dir.to_path_buf(), files })
}

/// Probability columns written by emission scenarios.
fn emission_columns(r: &Resolved, spec: &SystemSpec) -> Vec<(String, usize, usize)> {
    match r.kind {
        ScenarioKind::TlsEmission => vec![("P0g".into(), 0, 0), ("P1g".into(), 1, 0), ("P0e".into(), 0, 1), ("P1e".into(), 1, 1)],
        ScenarioKind::LambdaEmission => vec![("P0g1".into(), 0, 0), ("P1g2".into(), 1, 1), ("P0e".into(), 0, 2)],
        _ => (0..=r.n_max)
            .flat_map(|n| spec.basis_labels().iter().enumerate().map(move |(s, l)| (format!("P{n}_{l}"), n, s)))
            .collect(),
    }
}

fn emission_row(lead: f64, p: &EmissionProbabilities, cols: &[(String, usize, usize)]) -> Vec<f64> {
    let mut row = vec![lead];
    row.extend(cols.iter().map(|(_, n, s)| p.get(*n, *s)));
    row.push(p.closure_deficit());
    row
}

fn run_emission(r: &Resolved, dir: &Path, files: &mut Vec<String>) -> Result<()> {
    let spec = build_spec(r, r.omega0, r.t_pulse)?;
    let sigma0 = initial_index(&spec, r)?;
    let cols = emission_columns(r, &spec);
    let mut header: Vec<&str> = vec!["tau"];
    header.extend(cols.iter().map(|c| c.0.as_str()));
    header.push("closure_deficit");

    if let Some(sw) = &r.sweep {
        let rows: Vec<Vec<f64>> = sw
            .values()
            .par_iter()
            .map(|&area| {
                let omega = if r.t_pulse > 0.0 { area / (2.0 * r.t_pulse) } else { 0.0 };
                let spec = build_spec(r, omega, r.t_pulse)?;
                Ok(emission_row(area, &emission_asymptotic(&spec, sigma0, r.n_max)?, &cols))
            })
            .collect::<Result<_>>()?;
        let mut h = header.clone();
        h[0] = "area";
        write_csv(dir, "area_sweep.csv", &h, &rows, files)?;
    }

    let taus: Vec<f64> = (0..r.tau_points).map(|k| r.tau_max * k as f64 / (r.tau_points - 1) as f64).collect();
    let series = emission_series(&spec, sigma0, &taus, r.n_max)?;
    let rows: Vec<Vec<f64>> = series.iter().map(|p| emission_row(p.tau, p, &cols)).collect();
    write_csv(dir, "time_series.csv", &header, &rows, files)?;

    let rows = spacetime_emission(&spec, sigma0, r.tau_max, r.dx)?;
    write_csv(dir, "spacetime.csv", &["tau", "x", "channel", "abs2"], &rows, files)?;
    Ok(())
}

/// `sum_sigma |<x, mu; sigma| U(tau, 0) |vac; sigma0>|^2` on a square
/// (tau, x) grid in the Schrödinger picture, `0 <= x <= tau_max`.
pub fn spacetime_emission(spec: &SystemSpec, sigma0: usize, tau_max: f64, dx: f64) -> Result<Vec<Vec<f64>>> {
    let n = (tau_max / dx).round().max(1.0) as usize;
    let h = tau_max / n as f64;
    let mesh: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let cache = EvolutionCache::new(spec, mesh.iter().copied())?;
    let mesh = cache.mesh().to_vec();
    let on_mesh: Vec<usize> = (0..=n).map(|k| cache.index_of(k as f64 * h).expect("mesh time")).collect();
    let blocks: Vec<Vec<Vec<f64>>> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let tau = mesh[on_mesh[k]];
            let mut rows = vec![];
            for ch in 0..spec.n_channels() {
                for j in 0..=n {
                    // photon at x = j h left the system at t = tau - x
                    let abs2 = if j < k {
                        let t = mesh[on_mesh[k - j]];
                        let op = ChainOp { time: t, kind: OpKind::Annihilation, channel: ch };
                        let v = chain_vector(&cache, basis(spec.dim(), sigma0), &[op], 0.0, tau)?;
                        v.norm_squared()
                    } else {
                        0.0
                    };
                    rows.push(vec![k as f64 * h, j as f64 * h, ch as f64, abs2]);
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

fn scatter_channels(spec: &SystemSpec) -> (usize, usize) {
    (0, if spec.n_channels() > 1 { 1 } else { 0 })
}

fn total_rate(r: &Resolved) -> f64 {
    let g: f64 = r.channels.iter().map(|c| c.rate).sum();
    if g > 0.0 {
        g
    } else {
        1.0
    }
}

fn run_tls_scattering(r: &Resolved, dir: &Path, files: &mut Vec<String>) -> Result<()> {
    let pk = r.packet.expect("scattering packet");
    let driven = build_spec(r, r.omega0, r.t_pulse)?;
    let undriven = build_spec(r, 0.0, 0.0)?;
    let g0 = initial_index(&driven, r)?;
    let (cin, cout) = scatter_channels(&driven);
    let sampling = ScatterGrid { dx: r.dx, ..ScatterGrid::default() };
    let gamma = total_rate(r);
    let transmit = |spec: &SystemSpec, delta0: f64| -> Result<f64> {
        let packet = GaussianPacket::new(delta0, pk.width, pk.center, cin)?;
        Ok(transmit_wavepacket(spec, &packet, g0, cout, sampling)?.transmission)
    };
    let sw = r.sweep.clone().expect("scattering sweep");
    match sw.variable.as_str() {
        "delta0" => {
            let rows: Vec<Vec<f64>> = sw
                .values()
                .par_iter()
                .map(|&d| Ok(vec![d / gamma, transmit(&driven, d)?, transmit(&undriven, d)?]))
                .collect::<Result<_>>()?;
            write_csv(dir, "spectrum.csv", &["delta0_over_gamma", "transmission_driven", "transmission_undriven"], &rows, files)?;
        }
        _ => {
            let t_und = transmit(&undriven, pk.delta0)?;
            let rows: Vec<Vec<f64>> = sw
                .values()
                .par_iter()
                .map(|&tp| {
                    let spec = build_spec(r, r.omega0, tp)?;
                    Ok(vec![tp * gamma, transmit(&spec, pk.delta0)?, t_und])
                })
                .collect::<Result<_>>()?;
            write_csv(dir, "tp_sweep.csv", &["t_pulse_times_gamma", "transmission_driven", "transmission_undriven"], &rows, files)?;
        }
    }
    let rows = scattering_kernel_map(&driven, &undriven, g0, cin, cout, r.t_pulse, 81)?;
    write_csv(dir, "kernel.csv", &["x1", "x2", "abs_driven", "abs_undriven"], &rows, files)?;
    Ok(())
}

/// `|Sigma({x2, out}, {x1, in})|` (smooth part) on a square grid over
/// `[-T_P - 2, 2]`.
pub fn scattering_kernel_map(
    driven: &SystemSpec,
    undriven: &SystemSpec,
    g0: usize,
    cin: usize,
    cout: usize,
    t_pulse: f64,
    points: usize,
) -> Result<Vec<Vec<f64>>> {
    let (lo, hi) = (-t_pulse - 2.0, 2.0);
    let xs: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    let mut times: Vec<f64> = xs.iter().map(|x| -x).collect();
    times.extend([0.0, t_pulse]);
    let maps: Vec<Vec<f64>> = [driven, undriven]
        .iter()
        .map(|spec| {
            let cls = classify_states(spec)?;
            let cache = EvolutionCache::new(spec, times.iter().copied())?;
            (0..points * points)
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = (idx / points, idx % points);
                    let q = ScatterQuery {
                        out: vec![crate::propagator::Coordinate::new(xs[j], cout)],
                        inp: vec![crate::propagator::Coordinate::new(xs[i], cin)],
                        g_m: g0,
                        g_n: g0,
                    };
                    Ok(scattering_element_with(&cache, &cls, &q)?.smooth_value.norm())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..points * points)
        .map(|idx| vec![xs[idx / points], xs[idx % points], maps[0][idx], maps[1][idx]])
        .collect())
}

/// Snapshot of the lambda photon-subtraction experiment at one time.
#[derive(Debug, Clone)]
pub struct SubtractionSnapshot {
    pub tau: f64,
    pub p_excited: f64,
    /// Photon still in the input waveguide, system in `g1`.
    pub p_in_g1: f64,
    /// Photon moved to the output waveguide, system in `g2`.
    pub p_out_g2: f64,
    /// Schrödinger-picture state.
    pub state: WavepacketState,
}

/// Propagates a Gaussian photon in waveguide 0 onto a lambda system in `g1`
/// and samples the state at `tau_points` times in `[0, tau_max]`.
pub fn lambda_subtraction_run(spec: &SystemSpec, packet: &ResolvedPacket, tau_max: f64, tau_points: usize, dx: f64) -> Result<Vec<SubtractionSnapshot>> {
    let step = tau_max / (tau_points - 1) as f64;
    let per = (step / dx).round().max(1.0) as usize;
    let dx = step / per as f64;
    let right = packet.center + 8.0 * packet.width;
    let left = (packet.center - 8.0 * packet.width).min(-tau_max);
    let n_left = (-left / dx).ceil() as usize;
    let n_right = (right.max(0.0) / dx).ceil() as usize;
    let grid = Grid::new(-(n_left as f64) * dx, dx, n_left + n_right + 1)?;
    let f = |x: f64| crate::wavepacket::gaussian(x, packet.center, packet.width, packet.delta0);
    let g1 = spec.label_index("g1").unwrap_or(0);
    let input = WavepacketState::single_photon(grid, g1, 0, f);
    let e = spec.label_index("e").unwrap_or(spec.dim() - 1);
    let g2 = spec.label_index("g2").unwrap_or(1);
    let out_ch = if spec.n_channels() > 1 { 1 } else { 0 };
    (0..tau_points)
        .map(|k| {
            // times taken from grid points so window edges sit on the grid
            let tau = 0.0 - grid.point(n_left - k * per);
            let state = if k == 0 { input.clone() } else { apply_propagator(spec, &input, 0.0, tau, 1)? };
            let split = n_left - k * per;
            let get = |key: SectorKey| match state.sectors.get(&key) {
                Some(a) if key.photons() == 1 => split_norm(a, grid.dx, split),
                Some(a) => a[0].norm_sqr(),
                None => 0.0,
            };
            Ok(SubtractionSnapshot {
                tau,
                p_excited: get(SectorKey::new(e, vec![])),
                p_in_g1: get(SectorKey::new(g1, vec![0])),
                p_out_g2: get(SectorKey::new(g2, vec![out_ch])),
                state: to_schrodinger(&state, tau),
            })
        })
        .collect()
}

/// Trapezoid `int |psi|^2` for a single-photon amplitude that may jump at
/// index `split`: the part left of `split` uses the extrapolated left limit.
fn split_norm(a: &[C64], dx: f64, split: usize) -> f64 {
    let trap = |v: &[f64]| {
        if v.len() < 2 {
            return 0.0;
        }
        dx * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
    };
    let abs2: Vec<f64> = a.iter().map(|z| z.norm_sqr()).collect();
    if split < 2 {
        return trap(&abs2);
    }
    let mut left = abs2[..=split].to_vec();
    left[split] = (a[split - 1] * 2.0 - a[split - 2]).norm_sqr();
    trap(&left) + trap(&abs2[split..])
}

fn run_lambda_subtraction(r: &Resolved, dir: &Path, files: &mut Vec<String>) -> Result<()> {
    let spec = build_spec(r, r.omega0, r.t_pulse)?;
    let pk = r.packet.expect("subtraction packet");
    let snaps = lambda_subtraction_run(&spec, &pk, r.tau_max, r.tau_points, r.dx)?;
    let rows: Vec<Vec<f64>> = snaps.iter().map(|s| vec![s.tau, s.p_excited, s.p_in_g1, s.p_out_g2]).collect();
    write_csv(dir, "probabilities.csv", &["tau", "P_e", "P_in_g1", "P_out_g2"], &rows, files)?;
    let mut rows = vec![];
    for s in &snaps {
        let g = s.state.grid;
        for ch in 0..spec.n_channels() {
            for j in 0..g.n {
                let abs2: f64 = s
                    .state
                    .sectors
                    .iter()
                    .filter(|(k, _)| k.channels == [ch])
                    .map(|(_, a)| a[j].norm_sqr())
                    .sum();
                rows.push(vec![s.tau, g.point(j), ch as f64, abs2]);
            }
        }
    }
    write_csv(dir, "spacetime.csv", &["tau", "x", "channel", "abs2"], &rows, files)?;
    Ok(())
}

/// Reads a config file.
pub fn load_config(path: &Path) -> Result<(serde_json::Value, ScenarioConfig)> {
    let text = std::fs::read_to_string(path)?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    let cfg = serde_json::from_value(raw.clone()).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    Ok((raw, cfg))
}
