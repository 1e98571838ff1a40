//! Brute-force discretized bath: the waveguide is cut into bins of width
//! `dx`, each bin holds a few bosonic modes, and the system talks to one bin
//! at a time through `(A L^dag + A^dag L) / sqrt(dx)`.
//!
//! Bins are visited once, in order of increasing time, so a photon left in a
//! past bin never interacts again. That makes two truncations exact: sectors
//! above `max_photons` never feed back into lower ones, and a final bath
//! vacuum projection only ever sees the zero-photon branch.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::green::{time_order, GreenQuery, OpKind, Window};
use crate::linalg::{c, expm, CMatrix, CVector, C64};
use crate::system::SystemSpec;

/// Upper bound on the number of stored amplitudes.
pub const DIMENSION_GUARD: u128 = 1 << 24;

/// Occupied bath modes: `(bin, channel, occupation)`, sorted.
pub type Occupation = Vec<(u32, u16, u8)>;

#[derive(Debug, Clone)]
pub struct LatticeBath {
    spec: SystemSpec,
    dx: f64,
    n_bins: usize,
    t_start: f64,
    cutoff: u8,
    max_photons: usize,
}

/// `S (c + 1)^(n_bins N_L)`, saturating.
pub fn nominal_dimension(system_dim: usize, n_bins: usize, n_channels: usize, cutoff: u8) -> u128 {
    let modes = (n_bins * n_channels) as u32;
    (cutoff as u128 + 1).checked_pow(modes).and_then(|p| p.checked_mul(system_dim as u128)).unwrap_or(u128::MAX)
}

/// Number of stored configurations with at most `max_photons` photons.
pub fn stored_dimension(system_dim: usize, n_bins: usize, n_channels: usize, cutoff: u8, max_photons: usize) -> u128 {
    // ways[p] = configurations of the modes seen so far holding p photons
    let modes = n_bins * n_channels;
    let mut ways = vec![0u128; max_photons + 1];
    ways[0] = 1;
    for _ in 0..modes {
        let mut next = vec![0u128; max_photons + 1];
        for (p, &w) in ways.iter().enumerate() {
            for occ in 0..=cutoff as usize {
                if p + occ <= max_photons {
                    next[p + occ] = next[p + occ].saturating_add(w);
                }
            }
        }
        ways = next;
    }
    ways.iter().fold(0u128, |a, &w| a.saturating_add(w)).saturating_mul(system_dim as u128)
}

/// Lattice with bins starting at `t = 0` and no photon-number truncation
/// beyond the per-bin cutoff.
pub fn build_lattice(spec: &SystemSpec, dx: f64, n_bins: usize, cutoff: u8) -> Result<LatticeBath> {
    let max_photons = n_bins * spec.n_channels() * cutoff as usize;
    LatticeBath::new(spec, dx, n_bins, 0.0, cutoff, max_photons)
}

impl LatticeBath {
    pub fn new(spec: &SystemSpec, dx: f64, n_bins: usize, t_start: f64, cutoff: u8, max_photons: usize) -> Result<Self> {
        if !(dx > 0.0) || !t_start.is_finite() {
            return Err(Error::InvalidParameter(format!("dx = {dx}, t_start = {t_start}")));
        }
        if !(1..=2).contains(&cutoff) {
            return Err(Error::InvalidParameter(format!("photon cutoff {cutoff} not in 1..=2")));
        }
        let dim = stored_dimension(spec.dim(), n_bins, spec.n_channels(), cutoff, max_photons);
        if dim > DIMENSION_GUARD {
            return Err(Error::DimensionGuardExceeded { dim, guard: DIMENSION_GUARD });
        }
        Ok(LatticeBath { spec: spec.clone(), dx, n_bins, t_start, cutoff, max_photons })
    }

    /// Lattice exactly covering `[t_from, t_to]`.
    pub fn covering(spec: &SystemSpec, dx: f64, t_from: f64, t_to: f64, cutoff: u8, max_photons: usize) -> Result<Self> {
        let n = (t_to - t_from) / dx;
        let n_bins = n.round();
        if (n - n_bins).abs() > 1e-6 || n_bins < 0.0 {
            return Err(Error::MisalignedInterval { t_from, t_to, dx });
        }
        Self::new(spec, dx, n_bins as usize, t_from, cutoff, max_photons)
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }
    pub fn t_start(&self) -> f64 {
        self.t_start
    }
    pub fn t_end(&self) -> f64 {
        self.t_start + self.n_bins as f64 * self.dx
    }

    pub fn nominal_dimension(&self) -> u128 {
        nominal_dimension(self.spec.dim(), self.n_bins, self.spec.n_channels(), self.cutoff)
    }

    pub fn stored_dimension(&self) -> u128 {
        stored_dimension(self.spec.dim(), self.n_bins, self.spec.n_channels(), self.cutoff, self.max_photons)
    }

    /// Waveguide position represented by bin `k`.
    pub fn bin_position(&self, k: usize) -> f64 {
        -(self.t_start + (k as f64 + 0.5) * self.dx)
    }

    /// Bin boundary index of time `t`, if `t` sits on one.
    pub fn boundary_index(&self, t: f64) -> Option<usize> {
        let j = (t - self.t_start) / self.dx;
        let r = j.round();
        ((j - r).abs() < 1e-6 && r >= 0.0 && r as usize <= self.n_bins).then_some(r as usize)
    }

    fn modes_dim(&self) -> usize {
        (self.cutoff as usize + 1).pow(self.spec.n_channels() as u32)
    }

    /// Exact bin-local evolution on `system (x) bin modes`, mode digits with
    /// channel 0 fastest.
    fn bin_unitary(&self, k: usize) -> CMatrix {
        let nb = self.modes_dim();
        let base = self.cutoff as usize + 1;
        let mid = self.t_start + (k as f64 + 0.5) * self.dx;
        let mut h = self.spec.h_sys(mid).kronecker(&CMatrix::identity(nb, nb));
        let g = 1.0 / self.dx.sqrt();
        for (mu, l) in self.spec.channels().iter().enumerate() {
            let stride = base.pow(mu as u32);
            let mut a = CMatrix::zeros(nb, nb);
            for b in 0..nb {
                let n = (b / stride) % base;
                if n > 0 {
                    a[(b - stride, b)] = c((n as f64).sqrt(), 0.0);
                }
            }
            h += (l.adjoint().kronecker(&a) + l.kronecker(&a.adjoint())) * c(g, 0.0);
        }
        expm(&(h * c(0.0, -self.dx)))
    }
}

/// Sparse composite state: `(system index, occupied modes) -> amplitude`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BathState {
    pub amplitudes: BTreeMap<(usize, Occupation), C64>,
}

impl BathState {
    /// Bath vacuum with the system in `sigma`.
    pub fn vacuum(sigma: usize) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert((sigma, vec![]), c(1.0, 0.0));
        BathState { amplitudes }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|z| z.norm_sqr()).sum()
    }

    pub fn amplitude(&self, sigma: usize, occ: &Occupation) -> C64 {
        self.amplitudes.get(&(sigma, occ.clone())).copied().unwrap_or(c(0.0, 0.0))
    }

    /// `P_{n, sigma}` keyed by `(n, sigma)`.
    pub fn probabilities(&self) -> BTreeMap<(usize, usize), f64> {
        let mut out = BTreeMap::new();
        for ((s, occ), z) in &self.amplitudes {
            let n: usize = occ.iter().map(|o| o.2 as usize).sum();
            *out.entry((n, *s)).or_insert(0.0) += z.norm_sqr();
        }
        out
    }

    /// Applies a system operator.
    pub fn apply_system(&self, op: &CMatrix) -> BathState {
        let mut out: BTreeMap<(usize, Occupation), C64> = BTreeMap::new();
        for ((s, occ), z) in &self.amplitudes {
            for r in 0..op.nrows() {
                let m = op[(r, *s)];
                if m != c(0.0, 0.0) {
                    *out.entry((r, occ.clone())).or_insert(c(0.0, 0.0)) += m * z;
                }
            }
        }
        out.retain(|_, z| *z != c(0.0, 0.0));
        BathState { amplitudes: out }
    }
}

fn photons(occ: &Occupation) -> usize {
    occ.iter().map(|o| o.2 as usize).sum()
}

/// Steps `state` through every bin between `t_from` and `t_to` (both on bin
/// boundaries).
pub fn oracle_evolve(lattice: &LatticeBath, state: &BathState, t_from: f64, t_to: f64) -> Result<BathState> {
    let (Some(i), Some(j)) = (lattice.boundary_index(t_from), lattice.boundary_index(t_to)) else {
        return Err(Error::MisalignedInterval { t_from, t_to, dx: lattice.dx });
    };
    if j < i {
        return Err(Error::ReversedInterval { t_from, t_to });
    }
    let d = lattice.spec.dim();
    let nb = lattice.modes_dim();
    let base = lattice.cutoff as usize + 1;
    let n_ch = lattice.spec.n_channels();
    let mut cur = state.clone();
    for k in i..j {
        let u = lattice.bin_unitary(k);
        // group by everything except this bin's occupation
        let mut groups: BTreeMap<Occupation, CVector> = BTreeMap::new();
        for ((s, occ), z) in &cur.amplitudes {
            let mut rest = Vec::with_capacity(occ.len());
            let mut local = 0usize;
            for &(bin, ch, n) in occ {
                if bin as usize == k {
                    local += n as usize * base.pow(ch as u32);
                } else {
                    rest.push((bin, ch, n));
                }
            }
            let v = groups.entry(rest).or_insert_with(|| CVector::zeros(d * nb));
            v[s * nb + local] += z;
        }
        let mut next = BTreeMap::new();
        for (rest, v) in groups {
            let w = &u * v;
            let rest_photons = photons(&rest);
            for (idx, z) in w.iter().enumerate() {
                if *z == c(0.0, 0.0) {
                    continue;
                }
                let (s, local) = (idx / nb, idx % nb);
                let mut occ = rest.clone();
                let mut added = 0;
                for ch in 0..n_ch {
                    let n = (local / base.pow(ch as u32)) % base;
                    if n > 0 {
                        occ.push((k as u32, ch as u16, n as u8));
                        added += n;
                    }
                }
                if rest_photons + added > lattice.max_photons {
                    continue;
                }
                occ.sort_unstable();
                next.insert((s, occ), *z);
            }
        }
        cur = BathState { amplitudes: next };
    }
    Ok(cur)
}

/// Discrete Green's function: the full composite evolution with system
/// operators inserted at bin boundaries, sandwiched between bath vacua.
pub fn oracle_green(lattice: &LatticeBath, query: &GreenQuery) -> Result<C64> {
    let Window::Finite { lower, upper } = query.window else {
        return Err(Error::InvalidParameter("the bath oracle needs a finite window".into()));
    };
    let spec = &lattice.spec;
    for idx in [query.bra, query.ket] {
        if idx >= spec.dim() {
            return Err(Error::IndexOutOfRange { index: idx, dim: spec.dim() });
        }
    }
    for ins in query.annihilations.iter().chain(&query.creations) {
        if ins.channel >= spec.n_channels() {
            return Err(Error::ChannelOutOfRange { channel: ins.channel, n_channels: spec.n_channels() });
        }
        if lattice.boundary_index(ins.time).is_none() {
            return Err(Error::MisalignedInsertion { time: ins.time, dx: lattice.dx });
        }
        if ins.time < lower || ins.time > upper {
            return Err(Error::TimeOutsideWindow { time: ins.time, lower, upper });
        }
    }
    // only the bath vacuum survives the final projection
    let vac_only = LatticeBath { max_photons: 0, ..lattice.clone() };
    let ops = time_order(&query.annihilations, &query.creations);
    let mut state = BathState::vacuum(query.ket);
    let mut t = lower;
    for op in ops.iter().rev() {
        state = oracle_evolve(&vac_only, &state, t, op.time)?;
        t = op.time;
        let l = &spec.channels()[op.channel];
        state = state.apply_system(&match op.kind {
            OpKind::Annihilation => l.clone(),
            OpKind::Creation => l.adjoint(),
        });
    }
    state = oracle_evolve(&vac_only, &state, t, upper)?;
    Ok(state.amplitude(query.bra, &vec![]))
}

/// `P_{n, sigma}(tau)` from the lattice, starting at `t_start` in `sigma0`.
pub fn oracle_emission_probabilities(lattice: &LatticeBath, sigma0: usize, tau: f64) -> Result<BTreeMap<(usize, usize), f64>> {
    if sigma0 >= lattice.spec.dim() {
        return Err(Error::IndexOutOfRange { index: sigma0, dim: lattice.spec.dim() });
    }
    let state = oracle_evolve(lattice, &BathState::vacuum(sigma0), lattice.t_start, tau)?;
    Ok(state.probabilities())
}

/// Two-level Richardson extrapolation for errors `a h + b h^2`:
/// evaluates `f` at `h`, `h/2`, `h/4`.
pub fn richardson<F>(h: f64, f: F) -> Result<C64>
where
    F: Fn(f64) -> Result<C64>,
{
    let (f1, f2, f4) = (f(h)?, f(h / 2.0)?, f(h / 4.0)?);
    let r_a = f2 * 2.0 - f1;
    let r_b = f4 * 2.0 - f2;
    Ok((r_b * 4.0 - r_a) / 3.0)
}
