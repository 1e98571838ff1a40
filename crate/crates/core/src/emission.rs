//! Photon-counting statistics of emission from an initially empty waveguide.
//!
//! The n-photon conditional density matrices
//! `rho_n(t) = sum_histories |chain><chain|` obey
//! `d rho_n/dt = -i (H_eff rho_n - rho_n H_eff^dag) + sum_mu L_mu rho_{n-1} L_mu^dag`,
//! so the sector probabilities `P_{n,sigma}(t) = <sigma|rho_n(t)|sigma>` follow
//! from one block-triangular linear system, propagated with exact
//! exponentials wherever the drive is constant.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::evolution::{h_eff, Evolver, MAGNUS_TOL};
use crate::green::{chain_vector, pulse_end, ChainOp, OpKind};
use crate::linalg::{basis, c, expm, max_abs, CMatrix, CVector, C64};
use crate::system::{classify_states, SystemSpec};

/// Multiples of the slowest decay time used as "infinitely late".
pub const TAIL_DECAY_TIMES: f64 = 60.0;

/// `P[n][sigma]` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionProbabilities {
    pub tau: f64,
    pub probs: Vec<Vec<f64>>,
}

impl EmissionProbabilities {
    pub fn get(&self, n: usize, sigma: usize) -> f64 {
        self.probs.get(n).and_then(|r| r.get(sigma)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    /// Probability that went into sectors above the truncation.
    pub fn closure_deficit(&self) -> f64 {
        1.0 - self.total()
    }
}

/// Generator of the counting hierarchy truncated at `n_max` photons, acting
/// on `[vec rho_0, .., vec rho_n_max]` (column-major `vec`).
fn generator(spec: &SystemSpec, t: f64, n_max: usize) -> CMatrix {
    let d = spec.dim();
    let h = h_eff(spec, t);
    let id = CMatrix::identity(d, d);
    let drift = (id.kronecker(&h) - h.adjoint().transpose().kronecker(&id)) * c(0.0, -1.0);
    let jump = spec
        .channels()
        .iter()
        .fold(CMatrix::zeros(d * d, d * d), |acc, l| acc + l.map(|z| z.conj()).kronecker(l));
    let b = d * d;
    let mut g = CMatrix::zeros(b * (n_max + 1), b * (n_max + 1));
    for n in 0..=n_max {
        g.view_mut((n * b, n * b), (b, b)).copy_from(&drift);
        if n > 0 {
            g.view_mut((n * b, (n - 1) * b), (b, b)).copy_from(&jump);
        }
    }
    g
}

fn constant_on(spec: &SystemSpec, a: f64, b: f64) -> bool {
    spec.drive_terms().iter().all(|d| d.envelope.is_constant_on(a, b))
}

fn midpoint_product(spec: &SystemSpec, n_max: usize, a: f64, b: f64, steps: usize) -> CMatrix {
    let h = (b - a) / steps as f64;
    let mut u: Option<CMatrix> = None;
    for k in 0..steps {
        let e = expm(&(generator(spec, a + (k as f64 + 0.5) * h, n_max) * c(h, 0.0)));
        u = Some(match u {
            None => e,
            Some(u) => e * u,
        });
    }
    u.expect("at least one step")
}

/// Propagator of the hierarchy from `a` to `b`.
fn hierarchy_step(spec: &SystemSpec, n_max: usize, a: f64, b: f64) -> CMatrix {
    let size = spec.dim() * spec.dim() * (n_max + 1);
    let mut cuts = vec![a];
    cuts.extend(spec.breakpoints().into_iter().filter(|&t| t > a && t < b));
    cuts.push(b);
    let mut u = CMatrix::identity(size, size);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let piece = if constant_on(spec, lo, hi) {
            expm(&(generator(spec, 0.5 * (lo + hi), n_max) * c(hi - lo, 0.0)))
        } else {
            let support = spec.drive_support().map(|(s, e)| e - s).unwrap_or(hi - lo);
            let h0 = 0.01_f64.min(support / 100.0).max(1e-12);
            let mut n = ((hi - lo) / h0).ceil().max(1.0) as usize;
            let mut coarse = midpoint_product(spec, n_max, lo, hi, n);
            loop {
                let fine = midpoint_product(spec, n_max, lo, hi, 2 * n);
                let est = max_abs(&(&fine - &coarse)) / 3.0;
                n *= 2;
                if est < MAGNUS_TOL || n >= 1 << 20 {
                    break fine;
                }
                coarse = fine;
            }
        };
        u = piece * u;
    }
    u
}

fn read_out(state: &CVector, d: usize, n_max: usize, tau: f64) -> EmissionProbabilities {
    let probs = (0..=n_max)
        .map(|n| (0..d).map(|s| state[n * d * d + s * d + s].re).collect())
        .collect();
    EmissionProbabilities { tau, probs }
}

fn initial_state(spec: &SystemSpec, sigma0: usize, n_max: usize) -> Result<CVector> {
    let d = spec.dim();
    if sigma0 >= d {
        return Err(Error::IndexOutOfRange { index: sigma0, dim: d });
    }
    let mut v = CVector::zeros(d * d * (n_max + 1));
    v[sigma0 * d + sigma0] = C64::new(1.0, 0.0);
    Ok(v)
}

/// `P_{n,sigma}(tau)` for every `tau` in `taus` (any order, all `>= 0`),
/// starting from the system in `sigma0` and an empty waveguide at `t = 0`.
pub fn emission_series(spec: &SystemSpec, sigma0: usize, taus: &[f64], n_max: usize) -> Result<Vec<EmissionProbabilities>> {
    let d = spec.dim();
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
    if let Some(&first) = order.first() {
        if !(taus[first] >= 0.0) || taus.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!("emission times must be finite and >= 0, got {}", taus[first])));
        }
    }
    let mut state = initial_state(spec, sigma0, n_max)?;
    let mut t = 0.0;
    let mut out = vec![None; taus.len()];
    for k in order {
        if taus[k] > t {
            state = hierarchy_step(spec, n_max, t, taus[k]) * state;
            t = taus[k];
        }
        out[k] = Some(read_out(&state, d, n_max, taus[k]));
    }
    Ok(out.into_iter().map(|p| p.expect("every time visited")).collect())
}

/// Time after which every excitation has decayed: end of the drive plus
/// [`TAIL_DECAY_TIMES`] of the slowest excited-state decay.
pub fn asymptotic_time(spec: &SystemSpec) -> Result<f64> {
    let cls = classify_states(spec)?;
    let t_p = pulse_end(spec)?;
    let gamma = &spec.decay_operator();
    let exc = &cls.excited_indices;
    if exc.is_empty() {
        return Ok(t_p);
    }
    let block = DMatrix::from_fn(exc.len(), exc.len(), |i, j| gamma[(exc[i], exc[j])]);
    let slowest = block.map(|z| z.re).symmetric_eigenvalues().min();
    Ok(t_p + TAIL_DECAY_TIMES / slowest)
}

/// `P_{n,sigma}(infinity)`.
pub fn emission_asymptotic(spec: &SystemSpec, sigma0: usize, n_max: usize) -> Result<EmissionProbabilities> {
    let t_inf = asymptotic_time(spec)?;
    let mut p = emission_series(spec, sigma0, &[t_inf], n_max)?.remove(0);
    p.tau = f64::INFINITY;
    Ok(p)
}

/// Single-photon emission amplitude `<x, mu; sigma| U_I(tau, 0) |vac; sigma0>`
/// in the interaction picture; zero unless `0 < -x <= tau`.
pub fn single_photon_amplitude<E: Evolver + ?Sized>(
    evolver: &E,
    sigma0: usize,
    tau: f64,
    x: f64,
    channel: usize,
) -> Result<CVector> {
    let spec = evolver.spec();
    let t = crate::propagator::time_of(x);
    if !(t > 0.0 && t <= tau) {
        return Ok(CVector::zeros(spec.dim()));
    }
    if channel >= spec.n_channels() {
        return Err(Error::ChannelOutOfRange { channel, n_channels: spec.n_channels() });
    }
    let op = ChainOp { time: t, kind: OpKind::Annihilation, channel };
    let v = chain_vector(evolver, basis(spec.dim(), sigma0), &[op], 0.0, tau)?;
    Ok(v * c(0.0, -1.0))
}
