//! Low-dimensional system description: static Hamiltonian, coherent drives
//! and the waveguide coupling operators.
//!
//! Units: rates in units of a reference decay rate, times in its inverse,
//! group velocity 1 (positions are measured in units of time).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_deviation, ket_bra, max_abs, CMatrix, ONE};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const ANNIHILATION_TOL: f64 = 1e-12;

/// Time dependence of one drive term.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseEnvelope {
    Zero,
    /// `omega0` on `[t_start, t_end]`, zero elsewhere.
    Rectangular { omega0: f64, t_start: f64, t_end: f64 },
    /// Linear interpolation between `(time, value)` samples, zero outside
    /// the sampled range.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl PulseEnvelope {
    pub fn rectangular(omega0: f64, t_start: f64, t_end: f64) -> Self {
        PulseEnvelope::Rectangular { omega0, t_start, t_end }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PulseEnvelope::Zero => 0.0,
            PulseEnvelope::Rectangular { omega0, t_start, t_end } => {
                if t >= *t_start && t <= *t_end {
                    *omega0
                } else {
                    0.0
                }
            }
            PulseEnvelope::Tabulated { samples } => {
                let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
                    return 0.0;
                };
                if t < first.0 || t > last.0 {
                    return 0.0;
                }
                let k = samples.partition_point(|s| s.0 <= t);
                if k == 0 {
                    return first.1;
                }
                if k >= samples.len() {
                    return last.1;
                }
                let (t0, v0) = samples[k - 1];
                let (t1, v1) = samples[k];
                if t1 == t0 {
                    return v1;
                }
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// `(t_start, t_end)`, or `None` for an identically vanishing envelope.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            PulseEnvelope::Zero => None,
            PulseEnvelope::Rectangular { omega0, t_start, t_end } => {
                if *omega0 == 0.0 || t_end <= t_start {
                    None
                } else {
                    Some((*t_start, *t_end))
                }
            }
            PulseEnvelope::Tabulated { samples } => {
                if samples.iter().all(|s| s.1 == 0.0) || samples.len() < 2 {
                    None
                } else {
                    Some((samples[0].0, samples[samples.len() - 1].0))
                }
            }
        }
    }

    /// Times where the envelope or its derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PulseEnvelope::Zero => vec![],
            PulseEnvelope::Rectangular { t_start, t_end, .. } => vec![*t_start, *t_end],
            PulseEnvelope::Tabulated { samples } => samples.iter().map(|s| s.0).collect(),
        }
    }

    /// True when the envelope is constant on the open interval `(a, b)`.
    pub fn is_constant_on(&self, a: f64, b: f64) -> bool {
        match self {
            PulseEnvelope::Zero => true,
            PulseEnvelope::Rectangular { t_start, t_end, .. } => {
                b <= *t_start || a >= *t_end || (a >= *t_start && b <= *t_end)
            }
            PulseEnvelope::Tabulated { samples } => {
                let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
                    return true;
                };
                if b <= first.0 || a >= last.0 {
                    return true;
                }
                // constant iff every sample touching (a, b) carries the same value
                let inside: Vec<f64> = samples
                    .windows(2)
                    .filter(|w| w[1].0 > a && w[0].0 < b)
                    .flat_map(|w| [w[0].1, w[1].1])
                    .collect();
                inside.windows(2).all(|w| w[0] == w[1]) && a >= first.0 && b <= last.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveTerm {
    pub matrix: CMatrix,
    pub envelope: PulseEnvelope,
}

/// Validated description of the low-dimensional system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    dim: usize,
    basis_labels: Vec<String>,
    h_static: CMatrix,
    drive_terms: Vec<DriveTerm>,
    channels: Vec<CMatrix>,
}

impl SystemSpec {
    pub fn new(
        basis_labels: Vec<String>,
        h_static: CMatrix,
        drive_terms: Vec<DriveTerm>,
        channels: Vec<CMatrix>,
    ) -> Result<Self> {
        let dim = basis_labels.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch("system dimension must be >= 1".into()));
        }
        let square = |m: &CMatrix| m.nrows() == dim && m.ncols() == dim;
        if !square(&h_static) {
            return Err(Error::DimensionMismatch(format!(
                "h_static is {}x{}, expected {dim}x{dim}",
                h_static.nrows(),
                h_static.ncols()
            )));
        }
        let dev = hermitian_deviation(&h_static);
        if dev > HERMITIAN_TOL {
            return Err(Error::NonHermitianHamiltonian { what: "h_static".into(), max_dev: dev });
        }
        for (i, d) in drive_terms.iter().enumerate() {
            if !square(&d.matrix) {
                return Err(Error::DimensionMismatch(format!("drive {i} matrix is not {dim}x{dim}")));
            }
            let dev = hermitian_deviation(&d.matrix);
            if dev > HERMITIAN_TOL {
                return Err(Error::NonHermitianHamiltonian { what: format!("drive {i}"), max_dev: dev });
            }
            if let PulseEnvelope::Tabulated { samples } = &d.envelope {
                if samples.windows(2).any(|w| w[1].0 < w[0].0) {
                    return Err(Error::InvalidParameter(format!("drive {i}: samples not sorted")));
                }
            }
        }
        if channels.is_empty() {
            return Err(Error::DimensionMismatch("at least one channel is required".into()));
        }
        for (i, l) in channels.iter().enumerate() {
            if !square(l) {
                return Err(Error::DimensionMismatch(format!("channel {i} operator is not {dim}x{dim}")));
            }
        }
        Ok(SystemSpec { dim, basis_labels, h_static, drive_terms, channels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }
    pub fn h_static(&self) -> &CMatrix {
        &self.h_static
    }
    pub fn drive_terms(&self) -> &[DriveTerm] {
        &self.drive_terms
    }
    pub fn channels(&self) -> &[CMatrix] {
        &self.channels
    }
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.basis_labels.iter().position(|l| l == label)
    }

    /// Copy of this spec with every drive removed.
    pub fn undriven(&self) -> SystemSpec {
        SystemSpec { drive_terms: vec![], ..self.clone() }
    }

    pub fn is_driven(&self) -> bool {
        self.drive_support().is_some()
    }

    /// Hull of all drive supports.
    pub fn drive_support(&self) -> Option<(f64, f64)> {
        self.drive_terms
            .iter()
            .filter(|d| max_abs(&d.matrix) > 0.0)
            .filter_map(|d| d.envelope.support())
            .fold(None, |acc, (a, b)| match acc {
                None => Some((a, b)),
                Some((x, y)) => Some((x.min(a), y.max(b))),
            })
    }

    /// Sorted, deduplicated envelope discontinuities.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut bp: Vec<f64> = self
            .drive_terms
            .iter()
            .filter(|d| d.envelope.support().is_some())
            .flat_map(|d| d.envelope.breakpoints())
            .collect();
        bp.sort_by(|a, b| a.total_cmp(b));
        bp.dedup();
        bp
    }

    /// `H_sys(t) = h_static + sum_i envelope_i(t) matrix_i`.
    pub fn h_sys(&self, t: f64) -> CMatrix {
        let mut h = self.h_static.clone();
        for d in &self.drive_terms {
            let a = d.envelope.eval(t);
            if a != 0.0 {
                h += &d.matrix * c(a, 0.0);
            }
        }
        h
    }

    /// `sum_mu L_mu^dagger L_mu`.
    pub fn decay_operator(&self) -> CMatrix {
        self.channels
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, l| acc + l.adjoint() * l)
    }

    /// Serializable description that `build_system` maps back to this spec.
    pub fn to_description(&self) -> SystemDescription {
        SystemDescription {
            dim: self.dim,
            labels: self.basis_labels.clone(),
            h_static: flatten(&self.h_static),
            drives: self
                .drive_terms
                .iter()
                .map(|d| DriveDescription {
                    matrix: flatten(&d.matrix),
                    envelope: EnvelopeDescription::from_envelope(&d.envelope),
                })
                .collect(),
            channels: self.channels.iter().map(|l| ChannelDescription::Matrix(flatten(l))).collect(),
        }
    }
}

/// Which basis states are ground states (annihilated by every coupling
/// operator) and which are excited.
#[derive(Debug, Clone, PartialEq)]
pub struct StateClassification {
    pub ground_indices: Vec<usize>,
    pub excited_indices: Vec<usize>,
    pub ground_energies: Vec<f64>,
    pub excited_energies: Vec<f64>,
}

impl StateClassification {
    pub fn is_ground(&self, i: usize) -> bool {
        self.ground_indices.contains(&i)
    }

    pub fn ground_energy(&self, i: usize) -> Option<f64> {
        self.ground_indices
            .iter()
            .position(|&g| g == i)
            .map(|k| self.ground_energies[k])
    }
}

pub fn classify_states(spec: &SystemSpec) -> Result<StateClassification> {
    let h = spec.h_static();
    let dim = spec.dim();
    let mut off = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                off = off.max(h[(i, j)].norm());
            }
        }
    }
    if off > HERMITIAN_TOL {
        return Err(Error::NonDiagonalStaticHamiltonian(off));
    }
    let (mut ground, mut excited) = (vec![], vec![]);
    for i in 0..dim {
        let annihilated = spec
            .channels()
            .iter()
            .all(|l| l.column(i).norm() < ANNIHILATION_TOL);
        if annihilated {
            ground.push(i);
        } else {
            excited.push(i);
        }
    }
    if ground.is_empty() {
        return Err(Error::AmbiguousState("no state is annihilated by every coupling operator".into()));
    }
    if !excited.is_empty() {
        // a dark combination of excited basis states would neither decay nor
        // count as a ground state
        let decay = spec.decay_operator();
        let block = CMatrix::from_fn(excited.len(), excited.len(), |a, b| decay[(excited[a], excited[b])]);
        let min_eig = block
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if min_eig < ANNIHILATION_TOL {
            return Err(Error::AmbiguousState(format!(
                "excited subspace contains a non-decaying combination (min eigenvalue {min_eig:.3e})"
            )));
        }
        for &g in &ground {
            for &e in &excited {
                if (h[(g, g)].re - h[(e, e)].re).abs() < HERMITIAN_TOL && decay[(g, e)].norm() > 0.0 {
                    return Err(Error::AmbiguousState(format!("state {g} overlaps excited state {e}")));
                }
            }
        }
    }
    Ok(StateClassification {
        ground_energies: ground.iter().map(|&i| h[(i, i)].re).collect(),
        excited_energies: excited.iter().map(|&i| h[(i, i)].re).collect(),
        ground_indices: ground,
        excited_indices: excited,
    })
}

/// Driven two-level system `delta_a s^dag s + Omega(t)(s + s^dag)` with one
/// waveguide per entry of `rates`, each coupled through `sqrt(rate) s`.
/// Basis: `g` = 0, `e` = 1.
pub fn make_tls(delta_a: f64, omega0: f64, t_pulse: f64, rates: &[f64]) -> Result<SystemSpec> {
    if let Some(&r) = rates.iter().find(|&&r| r < 0.0 || !r.is_finite()) {
        return Err(Error::NegativeRate(r));
    }
    if t_pulse < 0.0 || !t_pulse.is_finite() {
        return Err(Error::InvalidParameter(format!("pulse length {t_pulse} must be >= 0")));
    }
    let mut h = CMatrix::zeros(2, 2);
    h[(1, 1)] = c(delta_a, 0.0);
    let sigma = ket_bra(2, 0, 1);
    let drive = if omega0 != 0.0 && t_pulse > 0.0 {
        vec![DriveTerm {
            matrix: &sigma + sigma.adjoint(),
            envelope: PulseEnvelope::rectangular(omega0, 0.0, t_pulse),
        }]
    } else {
        vec![]
    };
    let channels = rates.iter().map(|&r| &sigma * c(r.sqrt(), 0.0)).collect();
    SystemSpec::new(vec!["g".into(), "e".into()], h, drive, channels)
}

/// Lambda system `delta_e |e><e| + delta_12 |g1><g1| + Omega(t)(s1 + s1^dag)`
/// with `s_i = |g_i><e|`. Basis: `g1` = 0, `g2` = 1, `e` = 2.
///
/// Channels are `sqrt(gamma1) s1` and `sqrt(gamma2) s2`, in that order; a
/// channel with zero rate is omitted, so `make_lambda(.., 0, gamma)` yields a
/// single waveguide coupled through `sqrt(gamma) s2`.
pub fn make_lambda(
    delta_e: f64,
    delta_12: f64,
    omega0: f64,
    t_pulse: f64,
    gamma1: f64,
    gamma2: f64,
) -> Result<SystemSpec> {
    for r in [gamma1, gamma2] {
        if r < 0.0 || !r.is_finite() {
            return Err(Error::NegativeRate(r));
        }
    }
    if t_pulse < 0.0 || !t_pulse.is_finite() {
        return Err(Error::InvalidParameter(format!("pulse length {t_pulse} must be >= 0")));
    }
    if gamma1 == 0.0 && gamma2 == 0.0 {
        return Err(Error::InvalidParameter("lambda system needs at least one nonzero rate".into()));
    }
    let mut h = CMatrix::zeros(3, 3);
    h[(0, 0)] = c(delta_12, 0.0);
    h[(2, 2)] = c(delta_e, 0.0);
    let s1 = ket_bra(3, 0, 2);
    let s2 = ket_bra(3, 1, 2);
    let drive = if omega0 != 0.0 && t_pulse > 0.0 {
        vec![DriveTerm {
            matrix: &s1 + s1.adjoint(),
            envelope: PulseEnvelope::rectangular(omega0, 0.0, t_pulse),
        }]
    } else {
        vec![]
    };
    let mut channels = vec![];
    if gamma1 > 0.0 {
        channels.push(&s1 * c(gamma1.sqrt(), 0.0));
    }
    if gamma2 > 0.0 {
        channels.push(&s2 * c(gamma2.sqrt(), 0.0));
    }
    SystemSpec::new(vec!["g1".into(), "g2".into(), "e".into()], h, drive, channels)
}

// ---------------------------------------------------------------------------
// JSON description

/// Row-major list of `[re, im]` pairs.
pub type FlatMatrix = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescription {
    pub dim: usize,
    pub labels: Vec<String>,
    pub h_static: FlatMatrix,
    #[serde(default)]
    pub drives: Vec<DriveDescription>,
    pub channels: Vec<ChannelDescription>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveDescription {
    pub matrix: FlatMatrix,
    pub envelope: EnvelopeDescription,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDescription {
    pub kind: String,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default)]
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<[f64; 2]>,
}

impl EnvelopeDescription {
    fn from_envelope(e: &PulseEnvelope) -> Self {
        match e {
            PulseEnvelope::Zero => EnvelopeDescription {
                kind: "zero".into(),
                omega0: 0.0,
                t_start: 0.0,
                t_end: 0.0,
                samples: vec![],
            },
            PulseEnvelope::Rectangular { omega0, t_start, t_end } => EnvelopeDescription {
                kind: "rectangular".into(),
                omega0: *omega0,
                t_start: *t_start,
                t_end: *t_end,
                samples: vec![],
            },
            PulseEnvelope::Tabulated { samples } => {
                let (t_start, t_end) = match (samples.first(), samples.last()) {
                    (Some(a), Some(b)) => (a.0, b.0),
                    _ => (0.0, 0.0),
                };
                EnvelopeDescription {
                    kind: "tabulated".into(),
                    omega0: 0.0,
                    t_start,
                    t_end,
                    samples: samples.iter().map(|&(t, v)| [t, v]).collect(),
                }
            }
        }
    }

    fn to_envelope(&self) -> Result<PulseEnvelope> {
        match self.kind.as_str() {
            "zero" => Ok(PulseEnvelope::Zero),
            "rectangular" => {
                if self.t_end < self.t_start {
                    return Err(Error::InvalidParameter("rectangular envelope has t_end < t_start".into()));
                }
                Ok(PulseEnvelope::rectangular(self.omega0, self.t_start, self.t_end))
            }
            "tabulated" => Ok(PulseEnvelope::Tabulated {
                samples: self.samples.iter().map(|s| (s[0], s[1])).collect(),
            }),
            other => Err(Error::InvalidParameter(format!("unknown envelope kind '{other}'"))),
        }
    }
}

/// Either a full coupling matrix, or a rate and a bare operator
/// (`L = sqrt(rate) * operator`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelDescription {
    Matrix(FlatMatrix),
    Rated { rate: f64, operator: FlatMatrix },
}

fn flatten(m: &CMatrix) -> FlatMatrix {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn unflatten(dim: usize, flat: &FlatMatrix, what: &str) -> Result<CMatrix> {
    if flat.len() != dim * dim {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} entries, expected {}",
            flat.len(),
            dim * dim
        )));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = flat[i * dim + j];
        c(re, im)
    }))
}

/// Parse and validate a system description.
pub fn build_system(desc: &SystemDescription) -> Result<SystemSpec> {
    let dim = desc.dim;
    if desc.labels.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for dimension {dim}",
            desc.labels.len()
        )));
    }
    let h = unflatten(dim, &desc.h_static, "h_static")?;
    let drives = desc
        .drives
        .iter()
        .enumerate()
        .map(|(i, d)| {
            Ok(DriveTerm {
                matrix: unflatten(dim, &d.matrix, &format!("drives[{i}].matrix"))?,
                envelope: d.envelope.to_envelope()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let channels = desc
        .channels
        .iter()
        .enumerate()
        .map(|(i, ch)| match ch {
            ChannelDescription::Matrix(m) => unflatten(dim, m, &format!("channels[{i}]")),
            ChannelDescription::Rated { rate, operator } => {
                if *rate < 0.0 {
                    return Err(Error::NegativeRate(*rate));
                }
                Ok(unflatten(dim, operator, &format!("channels[{i}].operator"))? * c(rate.sqrt(), 0.0))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SystemSpec::new(desc.labels.clone(), h, drives, channels)
}

pub fn system_from_json(text: &str) -> Result<SystemSpec> {
    build_system(&serde_json::from_str(text)?)
}

pub fn system_to_json(spec: &SystemSpec) -> Result<String> {
    Ok(serde_json::to_string_pretty(&spec.to_description())?)
}

#[allow(dead_code)]
fn identity(dim: usize) -> CMatrix {
    CMatrix::from_diagonal_element(dim, dim, ONE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tls_builder_matches_hamiltonian() {
        let spec = make_tls(0.3, 5.0, 2.0, &[1.0]).unwrap();
        assert_eq!(spec.dim(), 2);
        let h = spec.h_sys(1.0);
        assert_eq!(h[(0, 1)], c(5.0, 0.0));
        assert_eq!(h[(1, 0)], c(5.0, 0.0));
        assert_eq!(h[(1, 1)], c(0.3, 0.0));
        assert_eq!(spec.h_sys(2.5)[(0, 1)], c(0.0, 0.0));
        assert_eq!(spec.channels()[0][(0, 1)], c(1.0, 0.0));
        assert_eq!(spec.drive_support(), Some((0.0, 2.0)));
    }

    #[test]
    fn undriven_tls_has_no_drive() {
        let spec = make_tls(0.0, 0.0, 0.0, &[1.0]).unwrap();
        assert!(!spec.is_driven());
        assert!(spec.breakpoints().is_empty());
    }

    #[test]
    fn two_channel_tls() {
        let spec = make_tls(0.0, 5.0, 4.0, &[0.5, 0.5]).unwrap();
        assert_eq!(spec.n_channels(), 2);
        assert!((spec.channels()[1][(0, 1)].re - 0.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = ONE;
        let err = SystemSpec::new(vec!["a".into(), "b".into()], h, vec![], vec![ket_bra(2, 0, 1)]).unwrap_err();
        assert!(matches!(err, Error::NonHermitianHamiltonian { max_dev, .. } if (max_dev - 1.0).abs() < 1e-15));
    }

    #[test]
    fn negative_rate_rejected() {
        assert_eq!(make_tls(0.0, 1.0, 1.0, &[-1.0]).unwrap_err(), Error::NegativeRate(-1.0));
        assert!(matches!(make_lambda(0.0, 0.0, 0.0, 0.0, -0.5, 1.0), Err(Error::NegativeRate(_))));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = SystemSpec::new(vec!["a".into()], CMatrix::zeros(2, 2), vec![], vec![]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        let err = SystemSpec::new(vec!["a".into()], CMatrix::zeros(1, 1), vec![], vec![]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn lambda_classification() {
        let spec = make_lambda(0.0, 0.0, 0.0, 0.0, 0.5, 0.5).unwrap();
        let cls = classify_states(&spec).unwrap();
        assert_eq!(cls.ground_indices, vec![0, 1]);
        assert_eq!(cls.excited_indices, vec![2]);
        let emit = make_lambda(0.0, 0.0, 5.0, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(emit.n_channels(), 1);
        assert_eq!(emit.channels()[0][(1, 2)], ONE);
        assert_eq!(classify_states(&emit).unwrap().ground_indices, vec![0, 1]);
    }

    #[test]
    fn lambda_ground_split() {
        let spec = make_lambda(0.0, 0.7, 0.0, 0.0, 0.5, 0.5).unwrap();
        let cls = classify_states(&spec).unwrap();
        assert_eq!(cls.ground_energies, vec![0.7, 0.0]);
    }

    #[test]
    fn tls_classification() {
        let cls = classify_states(&make_tls(0.0, 0.0, 0.0, &[1.0]).unwrap()).unwrap();
        assert_eq!(cls.ground_indices, vec![0]);
        assert_eq!(cls.excited_indices, vec![1]);
    }

    #[test]
    fn identity_coupling_has_no_ground_state() {
        let spec = SystemSpec::new(
            vec!["a".into(), "b".into()],
            CMatrix::zeros(2, 2),
            vec![],
            vec![identity(2)],
        )
        .unwrap();
        assert!(matches!(classify_states(&spec), Err(Error::AmbiguousState(_))));
    }

    #[test]
    fn dark_excited_combination_is_ambiguous() {
        let mut l = CMatrix::zeros(3, 3);
        l[(0, 1)] = ONE;
        l[(0, 2)] = ONE;
        let spec = SystemSpec::new(vec!["g".into(), "e1".into(), "e2".into()], CMatrix::zeros(3, 3), vec![], vec![l])
            .unwrap();
        assert!(matches!(classify_states(&spec), Err(Error::AmbiguousState(_))));
    }

    #[test]
    fn non_diagonal_static_rejected() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = ONE;
        h[(1, 0)] = ONE;
        let spec = SystemSpec::new(vec!["g".into(), "e".into()], h, vec![], vec![ket_bra(2, 0, 1)]).unwrap();
        assert!(matches!(classify_states(&spec), Err(Error::NonDiagonalStaticHamiltonian(_))));
    }

    #[test]
    fn envelope_support() {
        let env = PulseEnvelope::rectangular(2.0, 0.0, 1.0);
        assert_eq!(env.eval(-1e-9), 0.0);
        assert_eq!(env.eval(1.0 + 1e-9), 0.0);
        assert_eq!(env.eval(0.5), 2.0);
        let tab = PulseEnvelope::Tabulated { samples: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)] };
        assert_eq!(tab.eval(0.5), 1.0);
        assert_eq!(tab.eval(1.5), 1.0);
        assert_eq!(tab.eval(2.5), 0.0);
        assert_eq!(tab.eval(-0.1), 0.0);
        assert!(!tab.is_constant_on(0.2, 0.4));
        assert!(tab.is_constant_on(2.0, 3.0));
        assert!(env.is_constant_on(0.2, 0.4));
        assert!(!env.is_constant_on(-0.2, 0.4));
    }

    #[test]
    fn json_rated_channel() {
        let text = r#"{
            "dim": 2, "labels": ["g", "e"],
            "h_static": [[0,0],[0,0],[0,0],[0.5,0]],
            "drives": [{"matrix": [[0,0],[1,0],[1,0],[0,0]],
                        "envelope": {"kind": "rectangular", "omega0": 2.0, "t_start": 0.0, "t_end": 1.0}}],
            "channels": [{"rate": 4.0, "operator": [[0,0],[1,0],[0,0],[0,0]]}]
        }"#;
        let spec = system_from_json(text).unwrap();
        assert_eq!(spec.channels()[0][(0, 1)], c(2.0, 0.0));
        assert_eq!(spec.h_sys(0.5)[(1, 0)], c(2.0, 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn builders_classify(d in -3.0f64..3.0, d2 in -3.0f64..3.0, om in 0.0f64..6.0, tp in 0.0f64..4.0,
                                 g1 in 0.0f64..2.0, g2 in 0.01f64..2.0) {
                let tls = classify_states(&make_tls(d, om, tp, &[g2]).unwrap()).unwrap();
                prop_assert_eq!(tls.ground_indices.len(), 1);
                let lam = classify_states(&make_lambda(d, d2, om, tp, g1, g2).unwrap()).unwrap();
                prop_assert_eq!(lam.ground_indices.len(), 2);
            }

            #[test]
            fn envelope_vanishes_off_support(a in -5.0f64..5.0, len in 0.0f64..5.0, om in -6.0f64..6.0,
                                             t in -20.0f64..20.0, vals in proptest::collection::vec(-3.0f64..3.0, 2..6)) {
                let rect = PulseEnvelope::rectangular(om, a, a + len);
                if t < a || t > a + len {
                    prop_assert_eq!(rect.eval(t), 0.0);
                }
                let samples: Vec<(f64, f64)> = vals.iter().enumerate().map(|(k, &v)| (a + k as f64 * 0.7, v)).collect();
                let last = samples.last().unwrap().0;
                let tab = PulseEnvelope::Tabulated { samples };
                if t < a || t > last {
                    prop_assert_eq!(tab.eval(t), 0.0);
                }
            }

            #[test]
            fn json_round_trip(d in -3.0f64..3.0, d2 in -3.0f64..3.0, om in 0.0f64..6.0, tp in 0.0f64..4.0,
                               g1 in 0.0f64..2.0, g2 in 0.01f64..2.0, lambda in any::<bool>()) {
                let spec = if lambda { make_lambda(d, d2, om, tp, g1, g2).unwrap() } else { make_tls(d, om, tp, &[g1, g2]).unwrap() };
                let back = system_from_json(&system_to_json(&spec).unwrap()).unwrap();
                prop_assert_eq!(back.basis_labels(), spec.basis_labels());
                prop_assert!(max_abs(&(back.h_static() - spec.h_static())) <= 1e-15);
                prop_assert_eq!(back.n_channels(), spec.n_channels());
                for (a, b) in back.channels().iter().zip(spec.channels()) {
                    prop_assert!(max_abs(&(a - b)) <= 1e-15);
                }
                for t in [-1.0, 0.0, 0.5 * tp, tp, tp + 1.0] {
                    prop_assert!(max_abs(&(back.h_sys(t) - spec.h_sys(t))) <= 1e-15);
                }
            }
        }
    }
}
