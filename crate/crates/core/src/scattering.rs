//! Scattering-matrix elements between ground states and their action on
//! single-photon wavepackets.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::evolution::{EvolutionCache, Evolver};
use crate::green::{green_scattering, pulse_end, Insertion, FLUSH_BELOW};
use crate::linalg::{c, CVector, C64};
use crate::pairing::enumerate_pairings;
use crate::propagator::{time_of, Coordinate, DeltaTerm, PropagatorElement};
use crate::system::{classify_states, StateClassification, SystemSpec};
use crate::wavepacket::{gaussian, Grid, QUADRATURE_TOL};

/// Tail appended after the drive so the re-emitted photon is fully captured,
/// in units of the slowest decay time.
pub const OUTPUT_TAIL_DECAY_TIMES: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterQuery {
    pub out: Vec<Coordinate>,
    pub inp: Vec<Coordinate>,
    pub g_m: usize,
    pub g_n: usize,
}

/// `Sigma_{g_m, g_n}(out; in)` as smooth part plus symbolic delta terms.
pub fn scattering_element<E: Evolver + ?Sized>(evolver: &E, query: &ScatterQuery) -> Result<PropagatorElement> {
    let spec = evolver.spec();
    let cls = classify_states(spec)?;
    scattering_element_with(evolver, &cls, query)
}

/// As [`scattering_element`] with a precomputed classification.
pub fn scattering_element_with<E: Evolver + ?Sized>(
    evolver: &E,
    cls: &StateClassification,
    query: &ScatterQuery,
) -> Result<PropagatorElement> {
    let spec = evolver.spec();
    for idx in [query.g_m, query.g_n] {
        if idx >= spec.dim() {
            return Err(Error::IndexOutOfRange { index: idx, dim: spec.dim() });
        }
        if !cls.is_ground(idx) {
            return Err(Error::NotGroundState(idx));
        }
    }
    for co in query.out.iter().chain(&query.inp) {
        if co.channel >= spec.n_channels() {
            return Err(Error::ChannelOutOfRange { channel: co.channel, n_channels: spec.n_channels() });
        }
    }
    let oc: Vec<usize> = query.out.iter().map(|c| c.channel).collect();
    let ic: Vec<usize> = query.inp.iter().map(|c| c.channel).collect();
    let mut element = PropagatorElement { delta_terms: vec![], smooth_value: C64::new(0.0, 0.0) };
    for term in enumerate_pairings(&oc, &ic) {
        let ann: Vec<Insertion> =
            term.unpaired_out.iter().map(|&o| Insertion::new(time_of(query.out[o].x), query.out[o].channel)).collect();
        let cre: Vec<Insertion> =
            term.unpaired_in.iter().map(|&i| Insertion::new(time_of(query.inp[i].x), query.inp[i].channel)).collect();
        let g = green_scattering(evolver, cls, &ann, &cre, query.g_m, query.g_n)?.amplitude;
        let mut w = term.coefficient * g;
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

/// Normalized Gaussian single-photon packet
/// `(pi w^2)^(-1/4) exp(-(x - x0)^2 / 2w^2 + i delta0 x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub delta0: f64,
    pub width: f64,
    pub center: f64,
    pub channel: usize,
}

impl GaussianPacket {
    pub fn new(delta0: f64, width: f64, center: f64, channel: usize) -> Result<Self> {
        if !(width > 0.0) || !delta0.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParameter(format!("packet width {width}, delta0 {delta0}, center {center}")));
        }
        Ok(GaussianPacket { delta0, width, center, channel })
    }

    pub fn amplitude(&self, x: f64) -> C64 {
        gaussian(x, self.center, self.width, self.delta0)
    }

    /// Support used for quadrature: `center +- half_widths * width`.
    pub fn support(&self, half_widths: f64) -> (f64, f64) {
        (self.center - half_widths * self.width, self.center + half_widths * self.width)
    }
}

/// Sampling choices for [`transmit_wavepacket`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterGrid {
    pub dx: f64,
    /// Packet support in units of its width.
    pub half_widths: f64,
}

impl Default for ScatterGrid {
    fn default() -> Self {
        ScatterGrid { dx: 0.01, half_widths: 8.0 }
    }
}

/// Single-photon output of a scattering experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterOutcome {
    /// Output grid shared by every entry of `amplitudes`.
    pub grid: Grid,
    /// `(g_m, channel, psi_out(x))` for every ground state and channel.
    pub amplitudes: Vec<(usize, usize, Vec<C64>)>,
    /// `int |psi_out|^2` on the requested output channel, summed over ground
    /// states.
    pub transmission: f64,
    /// Single-photon probability left in the input channel.
    pub reflection: f64,
    /// `1 - sum of every single-photon output probability`: weight carried
    /// off by zero- or multi-photon components.
    pub non_single_photon: f64,
}

fn slowest_decay(spec: &SystemSpec, cls: &StateClassification) -> f64 {
    let gamma = spec.decay_operator();
    let exc = &cls.excited_indices;
    if exc.is_empty() {
        return f64::INFINITY;
    }
    let block = DMatrix::from_fn(exc.len(), exc.len(), |i, j| gamma[(exc[i], exc[j])].re);
    block.symmetric_eigenvalues().min()
}

/// Applies the single-photon block of the scattering matrix to `packet`
/// incident on the system in ground state `g_n`:
/// `psi_out(x2) = int Sigma({x2, mu'}, {x1, mu}) psi_in(x1) dx1`.
///
/// The smooth kernel is contracted by sweeping the time mesh once, so the
/// cost is linear in the number of grid points.
pub fn transmit_wavepacket(
    spec: &SystemSpec,
    packet: &GaussianPacket,
    g_n: usize,
    out_channel: usize,
    sampling: ScatterGrid,
) -> Result<ScatterOutcome> {
    let cls = classify_states(spec)?;
    if g_n >= spec.dim() {
        return Err(Error::IndexOutOfRange { index: g_n, dim: spec.dim() });
    }
    if !cls.is_ground(g_n) {
        return Err(Error::NotGroundState(g_n));
    }
    for ch in [packet.channel, out_channel] {
        if ch >= spec.n_channels() {
            return Err(Error::ChannelOutOfRange { channel: ch, n_channels: spec.n_channels() });
        }
    }
    let dx = sampling.dx;
    if !(dx > 0.0) {
        return Err(Error::InvalidParameter(format!("dx = {dx}")));
    }
    // trapezoid error on the packet envelope
    let estimate = (dx / packet.width).powi(2) / 12.0;
    if estimate > QUADRATURE_TOL {
        return Err(Error::GridTooCoarse { estimate, limit: QUADRATURE_TOL });
    }
    let t_p = pulse_end(spec)?;
    let (x_lo_in, x_hi) = packet.support(sampling.half_widths);
    let n_in = ((x_hi - x_lo_in) / dx).ceil() as usize + 1;
    let x_hi = x_lo_in + (n_in - 1) as f64 * dx;
    let tail = t_p.max(0.0) + OUTPUT_TAIL_DECAY_TIMES / slowest_decay(spec, &cls).max(1e-12);
    let extra = ((tail + x_hi.max(0.0)) / dx).ceil() as usize;
    let grid = Grid::new(x_lo_in - extra as f64 * dx, dx, n_in + extra)?;
    let first_in = extra;

    let n = grid.n;
    let mut times: Vec<f64> = grid.points().map(time_of).collect();
    times.push(0.0);
    times.push(t_p);
    let cache = EvolutionCache::new(spec, times.iter().copied())?;
    let mesh = cache.mesh().to_vec();
    let dim = spec.dim();
    let l_in = spec.channels()[packet.channel].adjoint();
    let eps_n = cls.ground_energy(g_n).expect("ground");

    // b(t) = U(t, min(0,t)) |g_n> e^{-i eps_n min(0,t)}
    let mut b = Vec::with_capacity(mesh.len());
    let k0 = cache.index_of(0.0).expect("0 on mesh");
    let kp = cache.index_of(t_p).expect("T_P on mesh");
    let mut ket = CVector::zeros(dim);
    ket[g_n] = c(1.0, 0.0);
    for (k, &t) in mesh.iter().enumerate() {
        if k <= k0 {
            b.push(&ket * C64::from_polar(1.0, -eps_n * t));
        } else {
            let prev: &CVector = &b[k - 1];
            b.push(cache.segment(k - 1, k)? * prev);
        }
    }
    let x_of = |t: f64| -t;
    let in_weight = |x: f64| -> f64 {
        let j = ((x - grid.point(first_in)) / dx).round() as i64;
        if j < 0 || j >= n_in as i64 {
            0.0
        } else if j == 0 || j == n_in as i64 - 1 {
            0.5 * dx
        } else {
            dx
        }
    };
    let on_grid = |t: f64| {
        let j = (x_of(t) - grid.x_min) / dx;
        (j - j.round()).abs() < 1e-6
    };
    // forward sweep: acc(t) = sum_{t_j <= t} w_j U(t, t_j) L^dag b(t_j) psi(-t_j)
    let mut acc = CVector::zeros(dim);
    let mut kernel_in = Vec::with_capacity(mesh.len());
    for (k, &t) in mesh.iter().enumerate() {
        if k > 0 {
            acc = cache.segment(k - 1, k)? * acc;
        }
        let mut source = CVector::zeros(dim);
        if on_grid(t) {
            let w = in_weight(x_of(t));
            if w > 0.0 {
                source = &l_in * &b[k] * (packet.amplitude(x_of(t)) * w);
            }
        }
        acc += &source;
        // the kernel jumps at coincidence: the diagonal point gets half weight
        kernel_in.push(&acc - source * c(0.5, 0.0));
    }

    let mut amplitudes = vec![];
    let mut transmission = 0.0;
    let mut reflection = 0.0;
    let mut total = 0.0;
    for &g_m in &cls.ground_indices {
        let eps_m = cls.ground_energy(g_m).expect("ground");
        // r(t) = <g_m| U(T_P, t) for t < T_P
        let mut rows: Vec<Option<CVector>> = vec![None; mesh.len()];
        let mut r = CVector::zeros(dim);
        r[g_m] = c(1.0, 0.0);
        for k in (0..=kp).rev() {
            if k < kp {
                let seg = cache.segment(k, k + 1)?;
                r = seg.transpose() * r;
            }
            rows[k] = Some(r.clone());
        }
        let row_at = |k: usize| match &rows[k] {
            Some(r) => r.clone(),
            None => {
                let mut e = CVector::zeros(dim);
                e[g_m] = C64::from_polar(1.0, eps_m * (mesh[k] - t_p));
                e
            }
        };
        // backward sweep for inputs absorbed after the output photon left:
        // back(t) = sum_{t_j >= t} w_j psi(-t_j) <g_m| U(.., t_j) L^dag U(t_j, t)
        let l_in_t = l_in.transpose();
        let mut back = CVector::zeros(dim);
        let mut kernel_back = vec![CVector::zeros(dim); mesh.len()];
        for k in (0..mesh.len()).rev() {
            if k + 1 < mesh.len() {
                back = cache.segment(k, k + 1)?.transpose() * back;
            }
            let mut source = CVector::zeros(dim);
            if on_grid(mesh[k]) {
                let w = in_weight(x_of(mesh[k]));
                if w > 0.0 {
                    source = &l_in_t * row_at(k) * (packet.amplitude(x_of(mesh[k])) * w);
                }
            }
            back += &source;
            kernel_back[k] = &back - source * c(0.5, 0.0);
        }
        let persist = green_scattering(&cache, &cls, &[], &[], g_m, g_n)?.amplitude;
        for ch in 0..spec.n_channels() {
            let l_out = &spec.channels()[ch];
            let mut psi = vec![C64::new(0.0, 0.0); n];
            for (k, &t) in mesh.iter().enumerate() {
                if !on_grid(t) {
                    continue;
                }
                // (-i)^2 <g_m| .. L_out acc, plus the reversed ordering
                let forward = (l_out * &kernel_in[k]).dot(&row_at(k));
                let reversed = (l_out * &b[k]).dot(&kernel_back[k]);
                let j = ((x_of(t) - grid.x_min) / dx).round() as usize;
                let mut z = -(forward + reversed);
                if ch == packet.channel {
                    z += persist * packet.amplitude(grid.point(j));
                }
                psi[j] = z;
            }
            let p: f64 = psi.iter().enumerate().map(|(j, z)| grid.weight(j) * z.norm_sqr()).sum();
            total += p;
            if ch == out_channel {
                transmission += p;
            }
            if ch == packet.channel {
                reflection += p;
            }
            amplitudes.push((g_m, ch, psi));
        }
    }
    Ok(ScatterOutcome { grid, amplitudes, transmission, reflection, non_single_photon: 1.0 - total })
}

/// Monochromatic single-photon amplitude `t(delta)` from `(g_n, in_channel)`
/// to `(g_m, out_channel)` for an undriven system:
/// `delta_{mu'mu} delta_{mn} + i <g_m| L_out (H_eff - eps_n - delta)^{-1} L_in^dag |g_n>`.
pub fn plane_wave_response(
    spec: &SystemSpec,
    g_m: usize,
    g_n: usize,
    in_channel: usize,
    out_channel: usize,
    delta: f64,
) -> Result<C64> {
    if spec.is_driven() {
        return Err(Error::DrivenSpecUnsupported);
    }
    let cls = classify_states(spec)?;
    for g in [g_m, g_n] {
        if g >= spec.dim() {
            return Err(Error::IndexOutOfRange { index: g, dim: spec.dim() });
        }
        if !cls.is_ground(g) {
            return Err(Error::NotGroundState(g));
        }
    }
    for ch in [in_channel, out_channel] {
        if ch >= spec.n_channels() {
            return Err(Error::ChannelOutOfRange { channel: ch, n_channels: spec.n_channels() });
        }
    }
    let eps = cls.ground_energy(g_n).expect("ground");
    let exc = &cls.excited_indices;
    let heff = crate::evolution::h_eff(spec, 0.0);
    let m = exc.len();
    let mut t = if g_m == g_n && in_channel == out_channel { c(1.0, 0.0) } else { c(0.0, 0.0) };
    if m == 0 {
        return Ok(t);
    }
    let a = DMatrix::from_fn(m, m, |i, j| heff[(exc[i], exc[j])] - if i == j { c(eps + delta, 0.0) } else { c(0.0, 0.0) });
    let l_in = &spec.channels()[in_channel];
    let l_out = &spec.channels()[out_channel];
    let rhs = CVector::from_fn(m, |i, _| l_in[(g_n, exc[i])].conj());
    let sol = a.lu().solve(&rhs).ok_or_else(|| Error::InvalidParameter("singular resolvent".into()))?;
    let amp: C64 = (0..m).map(|i| l_out[(g_m, exc[i])] * sol[i]).sum();
    t += c(0.0, 1.0) * amp;
    Ok(t)
}
