//! System Green's functions: vacuum-sandwiched, time-ordered products of
//! coupling operators, evaluated as a chain of effective propagators.

use crate::error::{Error, Result};
use crate::evolution::Evolver;
use crate::linalg::{basis, c, CMatrix, CVector, C64};
use crate::system::{classify_states, StateClassification, SystemSpec};

/// Amplitudes smaller than this are flushed to zero.
pub const FLUSH_BELOW: f64 = 1e-300;

/// One operator insertion at a given time on a given channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub time: f64,
    pub channel: usize,
}

impl Insertion {
    pub fn new(time: f64, channel: usize) -> Self {
        Insertion { time, channel }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Finite { lower: f64, upper: f64 },
    /// `(-inf, +inf)` with the asymptotic ground-state phases removed.
    Scattering,
}

/// `<sigma'| U(tau+,0) T[ prod L(t'_i) prod L^dag(t_j) ] U(0,tau-) |sigma>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenQuery {
    /// `L_mu` factors.
    pub annihilations: Vec<Insertion>,
    /// `L_mu^dag` factors.
    pub creations: Vec<Insertion>,
    pub bra: usize,
    pub ket: usize,
    pub window: Window,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub amplitude: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Annihilation,
    Creation,
}

/// One factor of a time-ordered chain.
#[derive(Debug, Clone, Copy)]
pub struct ChainOp {
    pub time: f64,
    pub kind: OpKind,
    pub channel: usize,
}

/// Sorts insertions latest-first. Equal times put annihilations to the left
/// of creations; ties of one kind keep their input order.
pub fn time_order(annihilations: &[Insertion], creations: &[Insertion]) -> Vec<ChainOp> {
    let mut ops: Vec<(ChainOp, usize)> = annihilations
        .iter()
        .enumerate()
        .map(|(k, i)| (ChainOp { time: i.time, kind: OpKind::Annihilation, channel: i.channel }, k))
        .chain(creations.iter().enumerate().map(|(k, i)| {
            (ChainOp { time: i.time, kind: OpKind::Creation, channel: i.channel }, annihilations.len() + k)
        }))
        .collect();
    ops.sort_by(|(a, ia), (b, ib)| {
        b.time
            .total_cmp(&a.time)
            .then_with(|| kind_rank(a.kind).cmp(&kind_rank(b.kind)))
            .then_with(|| ia.cmp(ib))
    });
    ops.into_iter().map(|(op, _)| op).collect()
}

fn kind_rank(k: OpKind) -> u8 {
    match k {
        OpKind::Annihilation => 0,
        OpKind::Creation => 1,
    }
}

fn operator(spec: &SystemSpec, op: &ChainOp) -> CMatrix {
    let l = &spec.channels()[op.channel];
    match op.kind {
        OpKind::Annihilation => l.clone(),
        OpKind::Creation => l.adjoint(),
    }
}

/// Propagates `ket` from `lower` to `upper`, applying the latest-first
/// ordered `ops` at their times. Returns the final system vector.
pub fn chain_vector<E: Evolver + ?Sized>(
    evolver: &E,
    ket: CVector,
    ops: &[ChainOp],
    lower: f64,
    upper: f64,
) -> Result<CVector> {
    let spec = evolver.spec();
    let mut v = ket;
    let mut t = lower;
    for op in ops.iter().rev() {
        if op.time > t {
            v = evolver.propagate(t, op.time)? * v;
            t = op.time;
        }
        v = operator(spec, op) * v;
        if v.iter().all(|z| z.norm() < FLUSH_BELOW) {
            return Ok(CVector::zeros(spec.dim()));
        }
    }
    if upper > t {
        v = evolver.propagate(t, upper)? * v;
    }
    Ok(v)
}

fn check_insertions(spec: &SystemSpec, q: &GreenQuery) -> Result<()> {
    let dim = spec.dim();
    for idx in [q.bra, q.ket] {
        if idx >= dim {
            return Err(Error::IndexOutOfRange { index: idx, dim });
        }
    }
    for ins in q.annihilations.iter().chain(&q.creations) {
        if ins.channel >= spec.n_channels() {
            return Err(Error::ChannelOutOfRange { channel: ins.channel, n_channels: spec.n_channels() });
        }
        if !ins.time.is_finite() {
            return Err(Error::InvalidParameter(format!("insertion time {}", ins.time)));
        }
    }
    Ok(())
}

fn flush(z: C64) -> C64 {
    if z.norm() < FLUSH_BELOW {
        C64::new(0.0, 0.0)
    } else {
        z
    }
}

/// Evaluates a Green's function by chaining effective propagators.
pub fn green<E: Evolver + ?Sized>(evolver: &E, query: &GreenQuery) -> Result<GreenValue> {
    let spec = evolver.spec();
    check_insertions(spec, query)?;
    match query.window {
        Window::Scattering => {
            let cls = classify_states(spec)?;
            green_scattering(evolver, &cls, &query.annihilations, &query.creations, query.bra, query.ket)
        }
        Window::Finite { lower, upper } => {
            if upper < lower {
                return Err(Error::ReversedInterval { t_from: lower, t_to: upper });
            }
            for ins in query.annihilations.iter().chain(&query.creations) {
                if ins.time < lower || ins.time > upper {
                    return Err(Error::TimeOutsideWindow { time: ins.time, lower, upper });
                }
            }
            let ops = time_order(&query.annihilations, &query.creations);
            let v = chain_vector(evolver, basis(spec.dim(), query.ket), &ops, lower, upper)?;
            Ok(GreenValue { amplitude: flush(v[query.bra]) })
        }
    }
}

/// End of the drive window `T_P`; errors if a drive acts before `t = 0`.
pub fn pulse_end(spec: &SystemSpec) -> Result<f64> {
    match spec.drive_support() {
        None => Ok(0.0),
        Some((start, end)) => {
            if start < 0.0 {
                return Err(Error::DriveNotConfined(format!("drive starts at {start} < 0")));
            }
            Ok(end)
        }
    }
}

/// Scattering-limit Green's function between ground states, with the
/// ground-state phases accumulated before `0` and after `T_P` dropped.
///
/// Insertions outside `[0, T_P]` are propagated with the drive-free
/// evolution; because ground states are eigenvectors of that evolution the
/// infinite window reduces to the finite window
/// `[min(0, t_min), max(T_P, t_max)]` times a known phase.
pub fn green_scattering<E: Evolver + ?Sized>(
    evolver: &E,
    cls: &StateClassification,
    annihilations: &[Insertion],
    creations: &[Insertion],
    g_m: usize,
    g_n: usize,
) -> Result<GreenValue> {
    let spec = evolver.spec();
    let (Some(eps_m), Some(eps_n)) = (cls.ground_energy(g_m), cls.ground_energy(g_n)) else {
        let bad = if cls.is_ground(g_m) { g_n } else { g_m };
        return Err(Error::NotGroundState(bad));
    };
    let t_p = pulse_end(spec)?;
    let times = annihilations.iter().chain(creations).map(|i| i.time);
    let upper = times.clone().fold(t_p, f64::max);
    let lower = times.fold(0.0, f64::min);
    let q = GreenQuery {
        annihilations: annihilations.to_vec(),
        creations: creations.to_vec(),
        bra: g_m,
        ket: g_n,
        window: Window::Finite { lower, upper },
    };
    let raw = green(evolver, &q)?.amplitude;
    let phase = (c(0.0, eps_m * (upper - t_p)) + c(0.0, -eps_n * lower)).exp();
    Ok(GreenValue { amplitude: flush(raw * phase) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{DirectEvolver, EvolutionCache};
    use crate::linalg::op_norm;
    use crate::system::{make_lambda, make_tls};

    fn finite(ann: &[(f64, usize)], cre: &[(f64, usize)], bra: usize, ket: usize, lo: f64, hi: f64) -> GreenQuery {
        GreenQuery {
            annihilations: ann.iter().map(|&(t, m)| Insertion::new(t, m)).collect(),
            creations: cre.iter().map(|&(t, m)| Insertion::new(t, m)).collect(),
            bra,
            ket,
            window: Window::Finite { lower: lo, upper: hi },
        }
    }

    #[test]
    fn undriven_tls_single_pair_closed_form() {
        let (gamma, delta) = (1.3, 0.4);
        let spec = make_tls(delta, 0.0, 0.0, &[gamma]).unwrap();
        let ev = DirectEvolver(&spec);
        let (t, tp) = (0.7, 2.1);
        let g = green(&ev, &finite(&[(tp, 0)], &[(t, 0)], 0, 0, -1.0, 5.0)).unwrap();
        let want = (C64::new(-gamma / 2.0, -delta) * (tp - t)).exp() * gamma;
        assert!((g.amplitude - want).norm() < 1e-13);
        // reversed order kills the chain
        let g = green(&ev, &finite(&[(t, 0)], &[(tp, 0)], 0, 0, -1.0, 5.0)).unwrap();
        assert_eq!(g.amplitude, C64::new(0.0, 0.0));
    }

    #[test]
    fn no_insertions_ground_is_one() {
        let spec = make_tls(0.4, 0.0, 0.0, &[1.0]).unwrap();
        let g = green(&DirectEvolver(&spec), &finite(&[], &[], 0, 0, -3.0, 8.0)).unwrap();
        assert!((g.amplitude - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn outside_window_errors() {
        let spec = make_tls(0.0, 0.0, 0.0, &[1.0]).unwrap();
        let err = green(&DirectEvolver(&spec), &finite(&[(6.0, 0)], &[], 0, 0, 0.0, 5.0)).unwrap_err();
        assert!(matches!(err, Error::TimeOutsideWindow { .. }));
        let err = green(&DirectEvolver(&spec), &finite(&[(1.0, 3)], &[], 0, 0, 0.0, 5.0)).unwrap_err();
        assert!(matches!(err, Error::ChannelOutOfRange { .. }));
    }

    #[test]
    fn equal_times_put_annihilation_left() {
        let ops = time_order(&[Insertion::new(1.0, 0)], &[Insertion::new(1.0, 0)]);
        assert_eq!(ops[0].kind, OpKind::Annihilation);
        assert_eq!(ops[1].kind, OpKind::Creation);
        // L L^dag |g> = gamma |g>
        let spec = make_tls(0.0, 0.0, 0.0, &[2.0]).unwrap();
        let g = green(&DirectEvolver(&spec), &finite(&[(1.0, 0)], &[(1.0, 0)], 0, 0, 0.0, 2.0)).unwrap();
        assert!((g.amplitude.re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn unequal_counts_vanish_for_undriven_tls() {
        let spec = make_tls(0.2, 0.0, 0.0, &[1.0]).unwrap();
        let ev = DirectEvolver(&spec);
        let g = green(&ev, &finite(&[(2.0, 0)], &[(0.5, 0), (1.0, 0)], 0, 0, 0.0, 3.0)).unwrap();
        assert_eq!(g.amplitude, C64::new(0.0, 0.0));
        let g = green(&ev, &finite(&[(2.0, 0)], &[], 0, 0, 0.0, 3.0)).unwrap();
        assert_eq!(g.amplitude, C64::new(0.0, 0.0));
    }

    #[test]
    fn scattering_form_matches_large_window() {
        let spec = make_tls(0.3, 0.0, 0.0, &[1.0]).unwrap();
        let ev = DirectEvolver(&spec);
        let cls = classify_states(&spec).unwrap();
        let s = green_scattering(&ev, &cls, &[Insertion::new(1.5, 0)], &[Insertion::new(-0.5, 0)], 0, 0).unwrap();
        let want = (C64::new(-0.5, -0.3) * 2.0).exp();
        assert!((s.amplitude - want).norm() < 1e-12);
        let big = green(&ev, &finite(&[(1.5, 0)], &[(-0.5, 0)], 0, 0, -40.0, 40.0)).unwrap();
        assert!((s.amplitude - big.amplitude).norm() < 1e-10);
        let empty = green_scattering(&ev, &cls, &[], &[], 0, 0).unwrap();
        assert!((empty.amplitude - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(green_scattering(&ev, &cls, &[], &[], 1, 0), Err(Error::NotGroundState(1))));
    }

    #[test]
    fn lambda_driven_emission_amplitude_window_limit() {
        let spec = make_lambda(0.2, 0.4, 5.0, 2.0, 0.0, 1.0).unwrap();
        let ev = DirectEvolver(&spec);
        let cls = classify_states(&spec).unwrap();
        let tp = 2.6;
        let s = green_scattering(&ev, &cls, &[Insertion::new(tp, 0)], &[], 1, 0).unwrap();
        assert!(s.amplitude.norm() > 1e-3);
        // finite window, then strip the ground phases by hand
        let upper = tp + 40.0;
        let raw = green(&ev, &finite(&[(tp, 0)], &[], 1, 0, 0.0, upper)).unwrap().amplitude;
        let eps_m = cls.ground_energy(1).unwrap();
        let stripped = raw * (C64::new(0.0, eps_m * (upper - 2.0))).exp();
        assert!((stripped - s.amplitude).norm() < 1e-8);
    }

    #[test]
    fn cached_and_direct_agree() {
        let spec = make_tls(0.1, 3.0, 1.0, &[1.0]).unwrap();
        let times: Vec<f64> = (0..=200).map(|k| -1.0 + 0.02 * k as f64).collect();
        let cache = EvolutionCache::new(&spec, times.clone()).unwrap();
        let q = finite(&[(times[150], 0), (times[120], 0)], &[(times[20], 0), (times[90], 0)], 0, 0, times[0], times[200]);
        let a = green(&cache, &q).unwrap().amplitude;
        let b = green(&DirectEvolver(&spec), &q).unwrap().amplitude;
        assert!((a - b).norm() < 1e-11);
    }

    #[test]
    fn operator_norm_bound() {
        let spec = make_tls(0.1, 3.0, 1.0, &[1.7]).unwrap();
        let bound = op_norm(&spec.channels()[0]).powi(3);
        let q = finite(&[(0.9, 0), (0.3, 0)], &[(0.5, 0)], 0, 0, 0.0, 2.0);
        let g = green(&DirectEvolver(&spec), &q).unwrap();
        assert!(g.amplitude.norm() <= bound + 1e-12);
    }

    mod props {
        use super::*;
        use crate::evolution::u_eff;
        use proptest::prelude::*;

        fn undriven(lambda: bool, d: f64, d2: f64) -> SystemSpec {
            if lambda {
                make_lambda(d, d2, 0.0, 0.0, 0.5, 0.7).unwrap()
            } else {
                make_tls(d, 0.0, 0.0, &[0.8]).unwrap()
            }
        }

        /// Plain product of evolutions and jump operators, latest on the left.
        fn brute_force(spec: &SystemSpec, q: &GreenQuery) -> C64 {
            let Window::Finite { lower, upper } = q.window else { unreachable!() };
            let mut ops: Vec<(f64, CMatrix)> = q.annihilations.iter().map(|i| (i.time, spec.channels()[i.channel].clone())).collect();
            ops.extend(q.creations.iter().map(|i| (i.time, spec.channels()[i.channel].adjoint())));
            ops.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut v = crate::linalg::basis(spec.dim(), q.ket);
            let mut t = lower;
            for (time, op) in ops {
                v = op * (u_eff(spec, t, time).unwrap() * v);
                t = time;
            }
            v = u_eff(spec, t, upper).unwrap() * v;
            v[q.bra]
        }

        fn insertions(times: &[f64], chans: &[usize], n_ch: usize) -> Vec<Insertion> {
            times.iter().zip(chans).map(|(&t, &c)| Insertion::new(t, c % n_ch)).collect()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn window_extension_only_adds_ground_phases(om in 0.5f64..5.0, tp in 0.2f64..2.0, g1 in 0.0f64..0.6,
                                                        d in -1.0f64..1.0, t in proptest::collection::vec(0.0f64..3.0, 1..3),
                                                        bra in 0usize..2, a in 0.0f64..5.0, b in 0.0f64..5.0) {
                let spec = make_lambda(d, 0.3 * d, om, tp, g1, 1.0).unwrap();
                let cls = classify_states(&spec).unwrap();
                let ann = insertions(&t, &[1, 1], spec.n_channels());
                let q = GreenQuery { annihilations: ann, creations: vec![], bra, ket: 0, window: Window::Finite { lower: 0.0, upper: 3.0 } };
                let big = GreenQuery { window: Window::Finite { lower: -a, upper: 3.0 + b }, ..q.clone() };
                let ev = DirectEvolver(&spec);
                let (g, gb) = (green(&ev, &q).unwrap().amplitude, green(&ev, &big).unwrap().amplitude);
                let phase = C64::new(0.0, -cls.ground_energy(bra).unwrap() * b - cls.ground_energy(0).unwrap() * a).exp();
                prop_assert!((gb - g * phase).norm() < 1e-9, "{gb} vs {}", g * phase);
            }

            #[test]
            fn undriven_time_translation(lambda in any::<bool>(), d in -2.0f64..2.0, shift in -5.0f64..5.0,
                                         ta in proptest::collection::vec(0.0f64..4.0, 0..3),
                                         tc in proptest::collection::vec(0.0f64..4.0, 0..3),
                                         ch in any::<[usize; 3]>(), bra in 0usize..3, ket in 0usize..3) {
                let spec = undriven(lambda, d, -0.5 * d);
                let n = spec.n_channels();
                let q = GreenQuery {
                    annihilations: insertions(&ta, &ch, n),
                    creations: insertions(&tc, &ch, n),
                    bra: bra % spec.dim(),
                    ket: ket % spec.dim(),
                    window: Window::Finite { lower: 0.0, upper: 4.0 },
                };
                let moved = |v: &[Insertion]| v.iter().map(|i| Insertion::new(i.time + shift, i.channel)).collect();
                let s = GreenQuery {
                    annihilations: moved(&q.annihilations),
                    creations: moved(&q.creations),
                    window: Window::Finite { lower: shift, upper: 4.0 + shift },
                    ..q.clone()
                };
                let ev = DirectEvolver(&spec);
                let (a, b) = (green(&ev, &q).unwrap().amplitude, green(&ev, &s).unwrap().amplitude);
                prop_assert!((a.norm() - b.norm()).abs() < 1e-10);
            }

            #[test]
            fn undriven_tls_excitation_selection(d in -2.0f64..2.0, na in 0usize..4, nc in 0usize..4,
                                                 t in proptest::collection::vec(0.0f64..3.0, 8)) {
                prop_assume!(na != nc);
                let spec = make_tls(d, 0.0, 0.0, &[1.0]).unwrap();
                let q = GreenQuery {
                    annihilations: t[..na].iter().map(|&x| Insertion::new(x, 0)).collect(),
                    creations: t[4..4 + nc].iter().map(|&x| Insertion::new(x, 0)).collect(),
                    bra: 0,
                    ket: 0,
                    window: Window::Finite { lower: 0.0, upper: 3.0 },
                };
                prop_assert_eq!(green(&DirectEvolver(&spec), &q).unwrap().amplitude, C64::new(0.0, 0.0));
            }

            #[test]
            fn reflection_conjugates_undriven(lambda in any::<bool>(), d in -2.0f64..2.0,
                                              ta in proptest::collection::vec(0.0f64..3.0, 0..3),
                                              tc in proptest::collection::vec(0.0f64..3.0, 0..3),
                                              ch in any::<[usize; 3]>(), bra in 0usize..3, ket in 0usize..3) {
                let spec = undriven(lambda, d, 0.7 * d);
                let n = spec.n_channels();
                let upper = 3.0;
                let q = GreenQuery {
                    annihilations: insertions(&ta, &ch, n),
                    creations: insertions(&tc, &ch, n),
                    bra: bra % spec.dim(),
                    ket: ket % spec.dim(),
                    window: Window::Finite { lower: 0.0, upper },
                };
                let reflect = |v: &[Insertion]| v.iter().map(|i| Insertion::new(upper - i.time, i.channel)).collect();
                let r = GreenQuery {
                    annihilations: reflect(&q.creations),
                    creations: reflect(&q.annihilations),
                    bra: q.ket,
                    ket: q.bra,
                    window: q.window,
                };
                let ev = DirectEvolver(&spec);
                let (a, b) = (green(&ev, &q).unwrap().amplitude, green(&ev, &r).unwrap().amplitude);
                prop_assert!((a - brute_force(&spec, &q)).norm() < 1e-12);
                // U_eff is complex symmetric, so reflection alone is a transpose
                prop_assert!((a - b).norm() < 1e-12, "{a} vs {b}");
                // conjugation also flips the sign of the Hermitian part
                let flipped = undriven(lambda, -d, -0.7 * d);
                let c = green(&DirectEvolver(&flipped), &r).unwrap().amplitude;
                prop_assert!((a.conj() - c).norm() < 1e-12, "{a} vs {c}");
            }
        }
    }
}
