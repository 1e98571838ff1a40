//! Evolution of the low-dimensional system under the effective
//! non-Hermitian Hamiltonian `H_eff(t) = H_sys(t) - (i/2) sum_mu L_mu^dag L_mu`.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, expm, max_abs, CMatrix, I, ONE};
use crate::system::SystemSpec;

/// Target local error of the midpoint (second-order Magnus) integrator.
pub const MAGNUS_TOL: f64 = 1e-10;
const MAGNUS_MAX_STEPS: usize = 1 << 22;

/// Static and driven parts of `H_eff`.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub static_part: CMatrix,
    spec: SystemSpec,
}

impl EffectiveHamiltonian {
    pub fn new(spec: &SystemSpec) -> Self {
        let static_part = spec.h_static() - spec.decay_operator() * c(0.0, 0.5);
        EffectiveHamiltonian { static_part, spec: spec.clone() }
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let mut h = self.static_part.clone();
        for d in self.spec.drive_terms() {
            let a = d.envelope.eval(t);
            if a != 0.0 {
                h += &d.matrix * c(a, 0.0);
            }
        }
        h
    }
}

pub fn h_eff(spec: &SystemSpec, t: f64) -> CMatrix {
    EffectiveHamiltonian::new(spec).at(t)
}

/// `exp[-(i H_sys^0 + 1/2 sum L^dag L) dt]`, the drive-free propagator.
pub fn u_eff0(spec: &SystemSpec, dt: f64) -> CMatrix {
    let gen = spec.h_static() * I + spec.decay_operator() * c(0.5, 0.0);
    expm(&(gen * c(-dt, 0.0)))
}

/// Something that can produce `U_eff(t_to <- t_from)`.
pub trait Evolver: Sync {
    fn spec(&self) -> &SystemSpec;
    fn propagate(&self, t_from: f64, t_to: f64) -> Result<CMatrix>;
}

/// Uncached evolution straight from the spec.
#[derive(Debug, Clone, Copy)]
pub struct DirectEvolver<'a>(pub &'a SystemSpec);

impl Evolver for DirectEvolver<'_> {
    fn spec(&self) -> &SystemSpec {
        self.0
    }
    fn propagate(&self, t_from: f64, t_to: f64) -> Result<CMatrix> {
        u_eff(self.0, t_from, t_to)
    }
}

/// Time-ordered exponential `U_eff(t_to <- t_from)`.
///
/// The interval is split at every envelope breakpoint; pieces where the
/// generator is constant get an exact matrix exponential, the rest are
/// integrated with midpoint steps refined by halving.
pub fn u_eff(spec: &SystemSpec, t_from: f64, t_to: f64) -> Result<CMatrix> {
    if !(t_to >= t_from) {
        return Err(Error::ReversedInterval { t_from, t_to });
    }
    let heff = EffectiveHamiltonian::new(spec);
    let dim = spec.dim();
    let mut u = CMatrix::identity(dim, dim);
    if t_to == t_from {
        return Ok(u);
    }
    let mut cuts = vec![t_from];
    cuts.extend(spec.breakpoints().into_iter().filter(|&b| b > t_from && b < t_to));
    cuts.push(t_to);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let piece = if constant_on(spec, a, b) {
            expm(&(heff.at(0.5 * (a + b)) * c(0.0, -(b - a))))
        } else {
            magnus_piece(&heff, spec, a, b)
        };
        u = piece * u;
    }
    Ok(u)
}

fn constant_on(spec: &SystemSpec, a: f64, b: f64) -> bool {
    spec.drive_terms().iter().all(|d| d.envelope.is_constant_on(a, b))
}

fn magnus_fixed(heff: &EffectiveHamiltonian, a: f64, b: f64, n: usize) -> CMatrix {
    let h = (b - a) / n as f64;
    let dim = heff.static_part.nrows();
    let mut u = CMatrix::identity(dim, dim);
    for k in 0..n {
        let mid = a + (k as f64 + 0.5) * h;
        u = expm(&(heff.at(mid) * c(0.0, -h))) * u;
    }
    u
}

fn magnus_piece(heff: &EffectiveHamiltonian, spec: &SystemSpec, a: f64, b: f64) -> CMatrix {
    let support = spec.drive_support().map(|(s, e)| e - s).unwrap_or(b - a);
    let h0 = 0.01_f64.min(support / 100.0).max(1e-12);
    let mut n = ((b - a) / h0).ceil().max(1.0) as usize;
    let mut coarse = magnus_fixed(heff, a, b, n);
    loop {
        let fine = magnus_fixed(heff, a, b, 2 * n);
        // second order: error(fine) ~ |fine - coarse| / 3
        let est = max_abs(&(&fine - &coarse)) / 3.0;
        n *= 2;
        if est < MAGNUS_TOL || n >= MAGNUS_MAX_STEPS {
            return fine;
        }
        coarse = fine;
    }
}

/// Precomputed step propagators on a sorted time mesh.
///
/// Segment `U(t_j <- t_i)` is assembled from per-step matrices using block
/// prefix/suffix products, so a query costs a handful of small matrix
/// products. Block-to-block products are filled in lazily.
#[derive(Debug)]
pub struct EvolutionCache {
    spec: SystemSpec,
    mesh: Vec<f64>,
    steps: Vec<CMatrix>,
    bounds: Vec<usize>,
    block_of: Vec<usize>,
    prefix: Vec<CMatrix>,
    suffix: Vec<CMatrix>,
    blocks: Vec<CMatrix>,
    between: RwLock<HashMap<(usize, usize), CMatrix>>,
}

#[derive(Debug, Serialize)]
struct SegmentDump {
    i: usize,
    j: usize,
    t_from: f64,
    t_to: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl EvolutionCache {
    /// Mesh made of `times` plus every envelope breakpoint inside their range.
    pub fn new(spec: &SystemSpec, times: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut mesh: Vec<f64> = times.into_iter().collect();
        if mesh.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mesh time".into()));
        }
        mesh.sort_by(|a, b| a.total_cmp(b));
        mesh.dedup();
        if let (Some(&lo), Some(&hi)) = (mesh.first(), mesh.last()) {
            mesh.extend(spec.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
            mesh.sort_by(|a, b| a.total_cmp(b));
            mesh.dedup();
        }
        let heff = EffectiveHamiltonian::new(spec);
        let bp = spec.breakpoints();
        // exact exponentials are shared between equal-length steps of the same
        // constant region
        let mut memo: HashMap<(u64, usize), CMatrix> = HashMap::new();
        let mut steps = Vec::with_capacity(mesh.len().saturating_sub(1));
        for w in mesh.windows(2) {
            let (a, b) = (w[0], w[1]);
            let step = if constant_on(spec, a, b) {
                let region = bp.partition_point(|&x| x <= 0.5 * (a + b));
                memo.entry(((b - a).to_bits(), region))
                    .or_insert_with(|| expm(&(heff.at(0.5 * (a + b)) * c(0.0, -(b - a)))))
                    .clone()
            } else {
                u_eff(spec, a, b)?
            };
            steps.push(step);
        }
        let n = mesh.len();
        let dim = spec.dim();
        let id = CMatrix::identity(dim, dim);
        let block = ((n as f64).sqrt().ceil() as usize).max(1);
        let mut bounds: Vec<usize> = (0..n).step_by(block).collect();
        if n > 0 && *bounds.last().unwrap() != n - 1 {
            bounds.push(n - 1);
        }
        let mut block_of = vec![0; n];
        let mut b = 0;
        for (k, slot) in block_of.iter_mut().enumerate() {
            while b + 1 < bounds.len() && bounds[b + 1] <= k {
                b += 1;
            }
            *slot = b;
        }
        let mut prefix = vec![id.clone(); n];
        for k in 1..n {
            if bounds[block_of[k]] != k {
                prefix[k] = &steps[k - 1] * &prefix[k - 1];
            }
        }
        let mut suffix = vec![id.clone(); n];
        for k in (0..n.saturating_sub(1)).rev() {
            let next = bounds.get(block_of[k] + 1).copied().unwrap_or(n - 1);
            suffix[k] = if k + 1 == next { steps[k].clone() } else { &suffix[k + 1] * &steps[k] };
        }
        let blocks = (0..bounds.len().saturating_sub(1)).map(|b| suffix[bounds[b]].clone()).collect();
        Ok(EvolutionCache {
            spec: spec.clone(),
            mesh,
            steps,
            bounds,
            block_of,
            prefix,
            suffix,
            blocks,
            between: RwLock::new(HashMap::new()),
        })
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    /// Mesh index of an exact mesh time.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = self.mesh.partition_point(|&x| x < t);
        (k < self.mesh.len() && self.mesh[k] == t).then_some(k)
    }

    /// `U(mesh[j] <- mesh[i])`, `i <= j`.
    pub fn segment(&self, i: usize, j: usize) -> Result<CMatrix> {
        if j < i {
            return Err(Error::ReversedInterval { t_from: self.mesh[i], t_to: self.mesh[j] });
        }
        let dim = self.spec.dim();
        let (bi, bj) = (self.block_of[i], self.block_of[j]);
        if bi == bj || j <= self.bounds[bi + 1] {
            let mut u = CMatrix::identity(dim, dim);
            for k in i..j {
                u = &self.steps[k] * u;
            }
            return Ok(u);
        }
        let w = self.between_blocks(bi + 1, bj);
        Ok(&self.prefix[j] * w * &self.suffix[i])
    }

    /// `U(bounds[b2] <- bounds[b1])`.
    fn between_blocks(&self, b1: usize, b2: usize) -> CMatrix {
        let dim = self.spec.dim();
        if b1 == b2 {
            return CMatrix::identity(dim, dim);
        }
        if let Some(m) = self.between.read().unwrap().get(&(b1, b2)) {
            return m.clone();
        }
        let mut u = CMatrix::identity(dim, dim);
        for b in b1..b2 {
            u = &self.blocks[b] * u;
        }
        self.between.write().unwrap().insert((b1, b2), u.clone());
        u
    }

    /// Number of lazily cached block products.
    pub fn cached_segments(&self) -> usize {
        self.between.read().unwrap().len()
    }

    /// Debug dump of every step matrix as JSON.
    pub fn dump_json(&self) -> Result<String> {
        let segs: Vec<SegmentDump> = self
            .steps
            .iter()
            .enumerate()
            .map(|(k, m)| SegmentDump {
                i: k,
                j: k + 1,
                t_from: self.mesh[k],
                t_to: self.mesh[k + 1],
                re: m.iter().map(|z| z.re).collect(),
                im: m.iter().map(|z| z.im).collect(),
            })
            .collect();
        Ok(serde_json::to_string(&segs)?)
    }
}

impl Evolver for EvolutionCache {
    fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    fn propagate(&self, t_from: f64, t_to: f64) -> Result<CMatrix> {
        if !(t_to >= t_from) {
            return Err(Error::ReversedInterval { t_from, t_to });
        }
        match (self.index_of(t_from), self.index_of(t_to)) {
            (Some(i), Some(j)) => self.segment(i, j),
            _ => u_eff(&self.spec, t_from, t_to),
        }
    }
}

#[allow(dead_code)]
pub(crate) fn identity(dim: usize) -> CMatrix {
    CMatrix::from_diagonal_element(dim, dim, ONE)
}
