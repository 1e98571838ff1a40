//! Interaction-picture propagator matrix elements between few-photon Fock
//! states, and their action on sampled wavepackets.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{h_eff, EvolutionCache, Evolver};
use crate::green::{chain_vector, time_order, Insertion, FLUSH_BELOW};
use crate::linalg::{basis, c, op_norm, CVector, C64};
use crate::pairing::{enumerate_pairings, PairingTerm};
use crate::system::SystemSpec;
use crate::wavepacket::{QUADRATURE_TOL, flat_index, unflatten_index, Grid, SectorKey, WavepacketState};

/// Default photon-number truncation.
pub const DEFAULT_N_MAX: usize = 2;

/// A photon coordinate: position `x` (time units) in waveguide `channel`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coordinate {
    pub x: f64,
    pub channel: usize,
}

impl Coordinate {
    pub fn new(x: f64, channel: usize) -> Self {
        Coordinate { x, channel }
    }
}

/// Interaction time at which the system talks to position `x`.
#[inline]
pub fn time_of(x: f64) -> f64 {
    -x
}

/// Whether a photon at `x` can interact during `(tau_minus, tau_plus]`.
#[inline]
pub fn in_window(x: f64, tau_minus: f64, tau_plus: f64) -> bool {
    let t = time_of(x);
    t > tau_minus && t <= tau_plus
}

/// Term with `k >= 1` delta functions `delta(x'_o - x_i)`, one per pair, times
/// `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTerm {
    pub pairs: Vec<(usize, usize)>,
    pub weight: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorElement {
    pub delta_terms: Vec<DeltaTerm>,
    /// The pairing-free term.
    pub smooth_value: C64,
}

fn check_channels(evolver: &(impl Evolver + ?Sized), coords: &[Coordinate]) -> Result<()> {
    let n = evolver.spec().n_channels();
    for c in coords {
        if c.channel >= n {
            return Err(Error::ChannelOutOfRange { channel: c.channel, n_channels: n });
        }
        if !c.x.is_finite() {
            return Err(Error::InvalidParameter(format!("coordinate x = {}", c.x)));
        }
    }
    Ok(())
}

/// Value of one pairing term with every coordinate fixed; window indicators
/// are left to the caller.
fn term_value<E: Evolver + ?Sized>(
    evolver: &E,
    term: &PairingTerm,
    out: &[Coordinate],
    inp: &[Coordinate],
    ket: usize,
    tau_minus: f64,
    tau_plus: f64,
) -> Result<CVector> {
    let dim = evolver.spec().dim();
    let ann: Vec<Insertion> = term.unpaired_out.iter().map(|&o| Insertion::new(time_of(out[o].x), out[o].channel)).collect();
    let cre: Vec<Insertion> = term.unpaired_in.iter().map(|&i| Insertion::new(time_of(inp[i].x), inp[i].channel)).collect();
    let ops = time_order(&ann, &cre);
    let v = chain_vector(evolver, basis(dim, ket), &ops, tau_minus, tau_plus)?;
    Ok(v * term.coefficient)
}

/// `<x'_1..x'_M; sigma'| U_I(tau_plus, tau_minus) |x_1..x_N; sigma>` as a
/// smooth part plus symbolic delta-function terms.
pub fn propagator_element<E: Evolver + ?Sized>(
    evolver: &E,
    out: &[Coordinate],
    inp: &[Coordinate],
    bra: usize,
    ket: usize,
    tau_minus: f64,
    tau_plus: f64,
) -> Result<PropagatorElement> {
    let dim = evolver.spec().dim();
    for idx in [bra, ket] {
        if idx >= dim {
            return Err(Error::IndexOutOfRange { index: idx, dim });
        }
    }
    if !(tau_plus > tau_minus) {
        return Err(Error::ReversedInterval { t_from: tau_minus, t_to: tau_plus });
    }
    check_channels(evolver, out)?;
    check_channels(evolver, inp)?;
    let oc: Vec<usize> = out.iter().map(|c| c.channel).collect();
    let ic: Vec<usize> = inp.iter().map(|c| c.channel).collect();
    let mut element = PropagatorElement { delta_terms: vec![], smooth_value: C64::new(0.0, 0.0) };
    for term in enumerate_pairings(&oc, &ic) {
        let free = term.unpaired_out.iter().map(|&o| out[o].x).chain(term.unpaired_in.iter().map(|&i| inp[i].x));
        if free.clone().any(|x| !in_window(x, tau_minus, tau_plus)) {
            if term.k > 0 {
                element.delta_terms.push(DeltaTerm { pairs: term.pairs, weight: C64::new(0.0, 0.0) });
            }
            continue;
        }
        let mut w = term_value(evolver, &term, out, inp, ket, tau_minus, tau_plus)?[bra];
        if w.norm() < FLUSH_BELOW {
            w = C64::new(0.0, 0.0);
        }
        if term.k == 0 {
            element.smooth_value += w;
        } else {
            element.delta_terms.push(DeltaTerm { pairs: term.pairs, weight: w });
        }
    }
    Ok(element)
}

/// All sorted channel multisets of size `m` over `n` channels.
pub fn channel_multisets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, m: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            rec(n, m, c, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(n, m, 0, &mut vec![], &mut out);
    out
}

/// Applies `U_I(tau_plus, tau_minus)` to `state` keeping output sectors with
/// at most `n_max` photons. Delta terms copy input amplitudes through; the
/// remaining input coordinates are integrated with the trapezoid rule.
///
/// The grid must cover `[-tau_plus, -tau_minus)`.
pub fn apply_propagator(
    spec: &SystemSpec,
    state: &WavepacketState,
    tau_minus: f64,
    tau_plus: f64,
    n_max: usize,
) -> Result<WavepacketState> {
    if !(tau_plus > tau_minus) {
        return Err(Error::ReversedInterval { t_from: tau_minus, t_to: tau_plus });
    }
    let grid = state.grid;
    let slack = 1e-9 * (1.0 + tau_plus.abs().max(tau_minus.abs()));
    if grid.x_min > -tau_plus + slack || grid.x_max() < -tau_minus - grid.dx - slack {
        return Err(Error::GridCoverage(format!(
            "grid [{}, {}] does not cover [{}, {})",
            grid.x_min,
            grid.x_max(),
            -tau_plus,
            -tau_minus
        )));
    }
    if state.max_photons() > n_max {
        return Err(Error::TruncationOverflow(format!(
            "input carries {} photons, truncation is {n_max}",
            state.max_photons()
        )));
    }
    for key in state.sectors.keys() {
        if key.system >= spec.dim() {
            return Err(Error::IndexOutOfRange { index: key.system, dim: spec.dim() });
        }
        if let Some(&c) = key.channels.iter().find(|&&c| c >= spec.n_channels()) {
            return Err(Error::ChannelOutOfRange { channel: c, n_channels: spec.n_channels() });
        }
    }
    if state.sectors.keys().any(|k| k.photons() > 0) {
        check_kernel_resolution(spec, grid.dx, tau_minus, tau_plus)?;
    }

    // closed window: the kernel's one-sided limit at `-tau_minus` enters the
    // quadrature with an endpoint weight
    let window: Vec<usize> = (0..grid.n)
        .filter(|&k| {
            let t = time_of(grid.point(k));
            t >= tau_minus && t <= tau_plus
        })
        .collect();
    let cells = grid.n.checked_pow(n_max as u32).unwrap_or(usize::MAX);
    if cells > 1 << 28 {
        return Err(Error::TruncationOverflow(format!("{} output cells for {n_max} photons", cells)));
    }
    let mesh = window.iter().map(|&k| time_of(grid.point(k))).chain([tau_minus, tau_plus]);
    let cache = EvolutionCache::new(spec, mesh)?;
    let dim = spec.dim();

    let mut out = WavepacketState::empty(grid);
    for m in 0..=n_max {
        for chans_out in channel_multisets(spec.n_channels(), m) {
            let plans: Vec<(&SectorKey, &Vec<C64>, Vec<PairingTerm>)> = state
                .sectors
                .iter()
                .map(|(k, a)| (k, a, enumerate_pairings(&chans_out, &k.channels)))
                .collect();
            let n_cells = grid.n.pow(m as u32);
            let rows: Vec<CVector> = (0..n_cells)
                .into_par_iter()
                .map(|flat| {
                    let idx = unflatten_index(flat, grid.n, m);
                    let coords: Vec<Coordinate> =
                        idx.iter().zip(&chans_out).map(|(&k, &c)| Coordinate::new(grid.point(k), c)).collect();
                    let mut acc = CVector::zeros(dim);
                    for (key, amp, terms) in &plans {
                        let scale = 1.0 / key.multiplicity_factor();
                        for term in terms {
                            accumulate_term(&cache, grid, term, key, amp, &idx, &coords, &window, scale, tau_minus, tau_plus, &mut acc)?;
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
            for sigma in 0..dim {
                let amp: Vec<C64> = rows.iter().map(|v| v[sigma]).collect();
                if amp.iter().any(|z| z.norm() > 0.0) {
                    out.sectors.insert(SectorKey::new(sigma, chans_out.clone()), amp);
                }
            }
        }
    }
    Ok(out)
}

/// A-priori trapezoid error `(dx * Lambda)^2 / 12` for kernels oscillating at
/// the fastest effective-Hamiltonian rate `Lambda` inside the window.
fn check_kernel_resolution(spec: &SystemSpec, dx: f64, tau_minus: f64, tau_plus: f64) -> Result<()> {
    let mut probes = vec![tau_minus, tau_plus];
    probes.extend(spec.breakpoints().into_iter().filter(|&b| b > tau_minus && b < tau_plus));
    let mut mids: Vec<f64> = probes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    probes.append(&mut mids);
    let rate = probes.iter().map(|&t| op_norm(&h_eff(spec, t))).fold(0.0, f64::max);
    let estimate = (dx * rate).powi(2) / 12.0;
    if estimate > QUADRATURE_TOL {
        return Err(Error::GridTooCoarse { estimate, limit: QUADRATURE_TOL });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn accumulate_term(
    cache: &EvolutionCache,
    grid: Grid,
    term: &PairingTerm,
    key: &SectorKey,
    amp: &[C64],
    out_idx: &[usize],
    out_coords: &[Coordinate],
    window: &[usize],
    scale: f64,
    tau_minus: f64,
    tau_plus: f64,
    acc: &mut CVector,
) -> Result<()> {
    if term.unpaired_out.iter().any(|&o| !in_window(out_coords[o].x, tau_minus, tau_plus)) {
        return Ok(());
    }
    let mut in_idx = vec![0usize; key.photons()];
    for &(o, i) in &term.pairs {
        in_idx[i] = out_idx[o];
    }
    let mut inp: Vec<Coordinate> = key.channels.iter().map(|&c| Coordinate::new(0.0, c)).collect();
    let free = &term.unpaired_in;
    if !free.is_empty() && window.len() < 2 {
        return Ok(());
    }
    // an input sampled exactly at -tau_minus may belong to the far side of a
    // jump, so that endpoint uses the one-sided limit from inside the window
    let edge_ok = window.len() >= 3
        && window.last().is_some_and(|&k| (time_of(grid.point(k)) - tau_minus).abs() < 1e-9 * grid.dx.max(1.0));
    // odometer over window points for every unpaired input slot
    let mut pos = vec![0usize; free.len()];
    loop {
        let mut w = scale;
        let mut on_jump = vec![];
        for (s, &slot) in free.iter().enumerate() {
            let k = window[pos[s]];
            in_idx[slot] = k;
            inp[slot].x = grid.point(k);
            w *= if pos[s] == 0 || pos[s] + 1 == window.len() { 0.5 * grid.dx } else { grid.dx };
            if term.unpaired_out.iter().any(|&o| out_idx[o] == k) {
                on_jump.push(slot);
            }
        }
        let psi = if edge_ok {
            let edge: Vec<usize> = free.iter().zip(&pos).filter(|(_, &p)| p + 1 == window.len()).map(|(&s, _)| s).collect();
            edge_amplitude(amp, grid.n, &mut in_idx, &edge)
        } else {
            amp[flat_index(&in_idx, grid.n)]
        };
        if psi.norm() != 0.0 {
            let v = if on_jump.is_empty() {
                term_value(cache, term, out_coords, &inp, key.system, tau_minus, tau_plus)?
            } else {
                // the kernel jumps where an input meets an output coordinate:
                // average the limits from either side
                let eps = 1e-9 * grid.dx;
                let side = |shift: f64| {
                    let mut moved = inp.clone();
                    for &slot in &on_jump {
                        moved[slot].x += shift;
                    }
                    term_value(cache, term, out_coords, &moved, key.system, tau_minus, tau_plus)
                };
                (side(-eps)? + side(eps)?) * c(0.5, 0.0)
            };
            *acc += v * (psi * w);
        }
        let mut s = 0;
        while s < pos.len() {
            pos[s] += 1;
            if pos[s] < window.len() {
                break;
            }
            pos[s] = 0;
            s += 1;
        }
        if s == pos.len() {
            return Ok(());
        }
    }
}

/// Amplitude with each slot in `edge` replaced by the linear extrapolation
/// `2 psi(k - 1) - psi(k - 2)`.
fn edge_amplitude(amp: &[C64], n: usize, idx: &mut [usize], edge: &[usize]) -> C64 {
    let Some((&slot, rest)) = edge.split_first() else {
        return amp[flat_index(idx, n)];
    };
    let k = idx[slot];
    idx[slot] = k - 1;
    let near = edge_amplitude(amp, n, idx, rest);
    idx[slot] = k - 2;
    let far = edge_amplitude(amp, n, idx, rest);
    idx[slot] = k;
    near * 2.0 - far
}
