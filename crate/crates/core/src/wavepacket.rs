//! Few-photon waveguide states sampled on uniform coordinate grids.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Relative quadrature error above which a state counts as unresolved.
pub const QUADRATURE_TOL: f64 = 1e-3;

/// Uniform grid `x_k = x_min + k dx`, `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0) || n < 2 || !x_min.is_finite() {
            return Err(Error::InvalidParameter(format!("grid x_min={x_min} dx={dx} n={n}")));
        }
        Ok(Grid { x_min, dx, n })
    }

    /// Grid from `x_min` to at least `x_max` (the last point may overshoot by
    /// less than `dx`).
    pub fn spanning(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        let n = ((x_max - x_min) / dx - 1e-9).ceil().max(1.0) as usize + 1;
        Grid::new(x_min, dx, n)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.point(self.n - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.point(k))
    }

    /// Trapezoid weight of point `k`.
    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.n {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// Same grid relabelled by `x -> x + shift`.
    pub fn shifted(&self, shift: f64) -> Grid {
        Grid { x_min: self.x_min + shift, ..*self }
    }
}

/// A sector: system state plus the sorted multiset of photon channels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorKey {
    pub system: usize,
    pub channels: Vec<usize>,
}

impl SectorKey {
    pub fn new(system: usize, mut channels: Vec<usize>) -> Self {
        channels.sort_unstable();
        SectorKey { system, channels }
    }

    pub fn photons(&self) -> usize {
        self.channels.len()
    }

    /// `prod_c m_c!` over channel multiplicities.
    pub fn multiplicity_factor(&self) -> f64 {
        let mut f = 1.0;
        let mut run = 1;
        for w in self.channels.windows(2) {
            if w[0] == w[1] {
                run += 1;
                f *= run as f64;
            } else {
                run = 1;
            }
        }
        f
    }
}

/// Waveguide-plus-system state: per sector, the amplitude
/// `<{x_1,c_1} .. {x_n,c_n}; sigma | psi>` on the full tensor grid
/// (first coordinate slowest). Amplitudes are symmetric under exchange of
/// equal-channel coordinates; the sector probability carries `1/prod m_c!`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketState {
    pub grid: Grid,
    pub sectors: BTreeMap<SectorKey, Vec<C64>>,
}

impl WavepacketState {
    pub fn empty(grid: Grid) -> Self {
        WavepacketState { grid, sectors: BTreeMap::new() }
    }

    /// Waveguide vacuum with the system in `system`.
    pub fn vacuum(grid: Grid, system: usize) -> Self {
        let mut s = Self::empty(grid);
        s.sectors.insert(SectorKey::new(system, vec![]), vec![C64::new(1.0, 0.0)]);
        s
    }

    /// One photon in `channel` with amplitude `f(x)`.
    pub fn single_photon(grid: Grid, system: usize, channel: usize, f: impl Fn(f64) -> C64) -> Self {
        let mut s = Self::empty(grid);
        s.sectors.insert(SectorKey::new(system, vec![channel]), grid.points().map(f).collect());
        s
    }

    /// Two photons with amplitude `f(x1, x2)` (`x1` on `channels[0]`);
    /// symmetrized when both channels coincide.
    pub fn two_photon(grid: Grid, system: usize, channels: [usize; 2], f: impl Fn(f64, f64) -> C64) -> Self {
        let n = grid.n;
        let (c0, c1) = (channels[0].min(channels[1]), channels[0].max(channels[1]));
        let swap = channels[0] > channels[1];
        let mut amp = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (grid.point(i), grid.point(j));
                amp[i * n + j] = if c0 == c1 {
                    (f(a, b) + f(b, a)) * 0.5
                } else if swap {
                    f(b, a)
                } else {
                    f(a, b)
                };
            }
        }
        let mut s = Self::empty(grid);
        s.sectors.insert(SectorKey::new(system, vec![c0, c1]), amp);
        s
    }

    pub fn max_photons(&self) -> usize {
        self.sectors.keys().map(|k| k.photons()).max().unwrap_or(0)
    }

    pub fn amplitude(&self, key: &SectorKey, idx: &[usize]) -> C64 {
        self.sectors
            .get(key)
            .map(|a| a[flat_index(idx, self.grid.n)])
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Adds another state on the same grid.
    pub fn add(&mut self, other: &WavepacketState) -> Result<()> {
        if other.grid != self.grid {
            return Err(Error::InvalidParameter("states live on different grids".into()));
        }
        for (k, v) in &other.sectors {
            let e = self.sectors.entry(k.clone()).or_insert_with(|| vec![C64::new(0.0, 0.0); v.len()]);
            for (a, b) in e.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(())
    }

    /// Trapezoid estimate of each sector probability.
    pub fn sector_norms(&self) -> BTreeMap<SectorKey, f64> {
        self.sectors
            .iter()
            .map(|(k, a)| (k.clone(), trapezoid_abs2(a, self.grid, k.photons(), 1) / k.multiplicity_factor()))
            .collect()
    }

    pub fn total_norm(&self) -> f64 {
        self.sector_norms().values().sum()
    }

    /// `|I_h - I_2h| / 3` summed over sectors.
    pub fn quadrature_error_estimate(&self) -> f64 {
        self.sectors
            .iter()
            .filter(|(k, _)| k.photons() > 0)
            .map(|(k, a)| {
                let fine = trapezoid_abs2(a, self.grid, k.photons(), 1);
                let coarse = trapezoid_abs2(a, self.grid, k.photons(), 2);
                (fine - coarse).abs() / 3.0 / k.multiplicity_factor()
            })
            .sum()
    }

    /// Errors when the grid does not resolve the state.
    pub fn check_resolution(&self) -> Result<()> {
        let norm = self.total_norm();
        let est = self.quadrature_error_estimate();
        let limit = QUADRATURE_TOL * norm.max(f64::MIN_POSITIVE);
        if est > limit {
            return Err(Error::GridTooCoarse { estimate: est, limit });
        }
        Ok(())
    }

    /// Writes one CSV per sector plus a JSON manifest into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = Manifest { grid: self.grid, sectors: vec![] };
        for (key, amp) in &self.sectors {
            let chans: Vec<String> = key.channels.iter().map(|c| c.to_string()).collect();
            let file = format!("sector_s{}_c{}.csv", key.system, if chans.is_empty() { "vac".into() } else { chans.join("-") });
            let mut out = String::new();
            let n = key.photons();
            let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            header.extend((1..=n).map(|i| format!("channel{i}")));
            header.push("re".into());
            header.push("im".into());
            writeln!(out, "{}", header.join(",")).unwrap();
            for (flat, z) in amp.iter().enumerate() {
                let idx = unflatten_index(flat, self.grid.n, n);
                let mut row: Vec<String> = idx.iter().map(|&k| fmt12(self.grid.point(k))).collect();
                row.extend(key.channels.iter().map(|c| c.to_string()));
                row.push(fmt12(z.re));
                row.push(fmt12(z.im));
                writeln!(out, "{}", row.join(",")).unwrap();
            }
            std::fs::write(dir.join(&file), out)?;
            manifest.sectors.push(ManifestEntry { system: key.system, channels: key.channels.clone(), file });
        }
        std::fs::write(dir.join("sectors.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    /// Reads a state written by [`WavepacketState::write_csv`].
    pub fn read_csv(dir: &Path) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join("sectors.json"))?)?;
        let mut state = WavepacketState::empty(manifest.grid);
        for entry in manifest.sectors {
            let text = std::fs::read_to_string(dir.join(&entry.file))?;
            let mut amp = vec![];
            for line in text.lines().skip(1) {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() < 2 {
                    return Err(Error::Parse(format!("{}: short row", entry.file)));
                }
                let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
                amp.push(C64::new(parse(cols[cols.len() - 2])?, parse(cols[cols.len() - 1])?));
            }
            state.sectors.insert(SectorKey::new(entry.system, entry.channels), amp);
        }
        Ok(state)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    grid: Grid,
    sectors: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    system: usize,
    channels: Vec<usize>,
    file: String,
}

/// Fixed 12-significant-digit formatting used by every CSV writer.
pub fn fmt12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    format!("{v:.11e}")
}

pub(crate) fn flat_index(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &k| acc * n + k)
}

pub(crate) fn unflatten_index(mut flat: usize, n: usize, dims: usize) -> Vec<usize> {
    let mut idx = vec![0; dims];
    for d in (0..dims).rev() {
        idx[d] = flat % n;
        flat /= n;
    }
    idx
}

/// Tensor trapezoid of `|a|^2` using every `stride`-th point.
fn trapezoid_abs2(a: &[C64], grid: Grid, dims: usize, stride: usize) -> f64 {
    if dims == 0 {
        return a.first().map(|z| z.norm_sqr()).unwrap_or(0.0);
    }
    let n = grid.n;
    let last = (n - 1) / stride * stride;
    let w = |k: usize| -> f64 {
        if k % stride != 0 || k > last {
            0.0
        } else if k == 0 || k == last {
            0.5 * grid.dx * stride as f64
        } else {
            grid.dx * stride as f64
        }
    };
    a.iter()
        .enumerate()
        .map(|(flat, z)| {
            let idx = unflatten_index(flat, n, dims);
            idx.iter().map(|&k| w(k)).product::<f64>() * z.norm_sqr()
        })
        .sum()
}

/// Photon-count/system-state probabilities `P_{n,sigma}` summed over
/// channel multisets.
pub fn probabilities(state: &WavepacketState) -> Result<BTreeMap<(usize, usize), f64>> {
    state.check_resolution()?;
    let mut out = BTreeMap::new();
    for (k, p) in state.sector_norms() {
        *out.entry((k.photons(), k.system)).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Interaction picture to Schrödinger picture at time `tau`: every
/// coordinate moves by `+tau` (grid relabelling only).
pub fn to_schrodinger(state: &WavepacketState, tau: f64) -> WavepacketState {
    WavepacketState { grid: state.grid.shifted(tau), sectors: state.sectors.clone() }
}

/// Normalized Gaussian `exp(-(x-x0)^2 / 2w^2 + i k (x - x0)) / (pi w^2)^(1/4)`.
pub fn gaussian(x: f64, x0: f64, width: f64, k: f64) -> C64 {
    let norm = (std::f64::consts::PI * width * width).powf(-0.25);
    let u = x - x0;
    C64::from_polar(norm * (-u * u / (2.0 * width * width)).exp(), k * x)
}
