use std::f64::consts::TAU;
use std::sync::Arc;

use mslz_core::calib::{
    biastee_highpass, biastee_predistort, iq_project, IqPoint, Waveform, WaveformUnit,
};
use mslz_core::hilbert::{ghz_to_angular, mhz_to_angular};
use mslz_core::protocol::lz_formula;
use mslz_core::{
    build_layout, excitation_number_operator, hamiltonian_at, mode_operator, prepare_state,
    qubit_operator, step_integrator, BasisLayout, Complex64, CouplingModel, CsrMatrix,
    InitialState, ModeOp, ModeSpec, QuantumState, QubitOp, SweepScenario, SystemSpec,
};
use proptest::prelude::*;

fn cutoffs() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 1..4)
}

fn small_spec() -> impl Strategy<Value = SystemSpec> {
    (
        prop::collection::vec((5.45f64..5.6, 0.0f64..30.0, 2usize..4), 1..4),
        any::<bool>(),
    )
        .prop_map(|(modes, full)| {
            let modes: Vec<ModeSpec> = modes
                .into_iter()
                .map(|(f, g, c)| ModeSpec::from_ghz(f, g, c).unwrap())
                .collect();
            let model = if full {
                CouplingModel::Full
            } else {
                CouplingModel::Rwa
            };
            SystemSpec::new(ghz_to_angular(5.3), ghz_to_angular(5.7), modes, model).unwrap()
        })
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn layout_index_round_trip(cut in cutoffs(), pick in 0.0f64..1.0) {
        let layout = BasisLayout::new(&cut);
        let i = ((layout.dimension() as f64 * pick) as usize).min(layout.dimension() - 1);
        let s = layout.state(i);
        prop_assert_eq!(layout.index(s.qubit, &s.occupations), Some(i));
        prop_assert_eq!(layout.qubit_level(i), s.qubit);
        for (k, &m) in s.occupations.iter().enumerate() {
            prop_assert_eq!(layout.occupation(i, k), m);
        }
    }

    #[test]
    fn canonical_commutator_below_the_top_level(cut in cutoffs(), mode_pick in 0usize..3) {
        let layout = BasisLayout::new(&cut);
        let mode = mode_pick % cut.len();
        let a = mode_operator(ModeOp::Lower, mode, &layout).unwrap();
        let ad = mode_operator(ModeOp::Raise, mode, &layout).unwrap();
        let c = a.commutator(&ad);
        for i in 0..layout.dimension() {
            for j in 0..layout.dimension() {
                if layout.occupation(i, mode) + 1 < cut[mode] && layout.occupation(j, mode) + 1 < cut[mode] {
                    // sqrt(n) sqrt(n) is n only to rounding
                    let expected = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((c.get(i, j) - expected).norm() <= 4.0 * f64::EPSILON * cut[mode] as f64);
                }
            }
        }
    }

    #[test]
    fn operators_on_different_factors_commute(cut in prop::collection::vec(1usize..4, 2..4)) {
        let layout = BasisLayout::new(&cut);
        let kinds = [ModeOp::Lower, ModeOp::Raise, ModeOp::Number];
        let qubit = [QubitOp::SigmaZ, QubitOp::SigmaX, QubitOp::SigmaPlus, QubitOp::SigmaMinus];
        for j in 0..cut.len() {
            for &kj in &kinds {
                let a = mode_operator(kj, j, &layout).unwrap();
                for &q in &qubit {
                    prop_assert_eq!(a.commutator(&qubit_operator(q, &layout)).max_abs(), 0.0);
                }
                for k in (0..cut.len()).filter(|&k| k != j) {
                    for &kk in &kinds {
                        let b = mode_operator(kk, k, &layout).unwrap();
                        prop_assert_eq!(a.commutator(&b).max_abs(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn elementary_operators_are_hermitian(cut in cutoffs()) {
        let layout = BasisLayout::new(&cut);
        for k in 0..cut.len() {
            prop_assert!(mode_operator(ModeOp::Number, k, &layout).unwrap().is_hermitian());
            let a = mode_operator(ModeOp::Lower, k, &layout).unwrap();
            let ad = mode_operator(ModeOp::Raise, k, &layout).unwrap();
            prop_assert_eq!(a.adjoint(), ad);
        }
        prop_assert!(qubit_operator(QubitOp::SigmaZ, &layout).is_hermitian());
        prop_assert!(qubit_operator(QubitOp::SigmaX, &layout).is_hermitian());
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian(spec in small_spec(), t_rise in 1.0f64..200.0, s in 0.0f64..=1.0) {
        let sc = SweepScenario::new(t_rise, InitialState::QubitExcited);
        let h = hamiltonian_at(s * t_rise, &spec, &sc).unwrap();
        prop_assert!(h.is_hermitian());
    }

    #[test]
    fn rotating_wave_hamiltonian_conserves_excitations(spec in small_spec(), s in 0.0f64..=1.0) {
        let spec = spec.with_coupling_model(CouplingModel::Rwa);
        let sc = SweepScenario::new(50.0, InitialState::QubitExcited);
        let h = hamiltonian_at(s * 50.0, &spec, &sc).unwrap();
        let n = excitation_number_operator(&build_layout(&spec).unwrap());
        prop_assert!(h.commutator(&n).max_abs() < 1e-12);
    }

    #[test]
    fn sweep_is_affine_and_exact_at_the_end(spec in small_spec(), t_rise in 0.5f64..500.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let sc = SweepScenario::new(t_rise, InitialState::QubitExcited);
        prop_assert_eq!(sc.omega_q(&spec, t_rise), spec.omega_f);
        prop_assert_eq!(sc.omega_q(&spec, 0.0), spec.omega_i);
        let (ta, tb) = (a * t_rise, b * t_rise);
        let mid = sc.omega_q(&spec, 0.5 * (ta + tb));
        let avg = 0.5 * (sc.omega_q(&spec, ta) + sc.omega_q(&spec, tb));
        prop_assert!((mid - avg).abs() <= 1e-12 * spec.omega_f);
    }

    #[test]
    fn prepared_states_are_normalized(spec in small_spec(), which in 0usize..4, re in -0.2f64..0.2, im in -0.2f64..0.2) {
        let init = match which {
            0 => InitialState::Ground,
            1 => InitialState::QubitExcited,
            2 => InitialState::ModeFock { mode: 0, n: 1 },
            // Small enough that cutoff 2 keeps the tail under the rejection threshold.
            _ => InitialState::ModeCoherent { mode: 0, amplitude: Complex64::new(re, im) * 0.1 },
        };
        let sc = SweepScenario::new(10.0, init);
        let layout = Arc::new(build_layout(&spec).unwrap());
        let state = prepare_state(&spec, &sc, &layout).unwrap();
        prop_assert!((state.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn random_hermitian_step_keeps_norm(seed in any::<u64>(), dim in 2usize..40) {
        let mut s = seed | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut trip = Vec::new();
        for i in 0..dim {
            trip.push((i, i, Complex64::new(next(), 0.0)));
            for j in (i + 1)..dim {
                let z = Complex64::new(next(), next());
                trip.push((i, j, z));
                trip.push((j, i, z.conj()));
            }
        }
        let h = CsrMatrix::from_triplets(dim, dim, trip);
        let layout = Arc::new(BasisLayout::new(&[dim / 2 + dim % 2]));
        let d = layout.dimension();
        let h = if d == dim { h } else {
            let mut t: Vec<_> = h.triplets().collect();
            t.push((d - 1, d - 1, Complex64::new(0.3, 0.0)));
            CsrMatrix::from_triplets(d, d, t)
        };
        let mut amps: Vec<Complex64> = (0..d).map(|_| Complex64::new(next(), next())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let mut state = QuantumState::new(amps, layout);
        step_integrator(&h, &mut state, 1e-3);
        prop_assert!((state.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn formula_is_monotone(g in prop::collection::vec(0.001f64..0.2, 1..5), v in 0.01f64..5.0, bump in 1.01f64..2.0, k in 0usize..4) {
        let p = lz_formula(&g, v);
        prop_assert!(lz_formula(&g, v * bump) > p);
        let mut g2 = g.clone();
        let k = k % g.len();
        g2[k] *= bump;
        prop_assert!(lz_formula(&g2, v) < p);
        prop_assert!(p > 0.0);
    }

    #[test]
    fn predistortion_is_linear(
        x in prop::collection::vec(-5.0f64..5.0, 2..200),
        ys in prop::collection::vec(-5.0f64..5.0, 200),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        tau in 10.0f64..2000.0,
    ) {
        let y = &ys[..x.len()];
        let w = |v: Vec<f64>| Waveform::new(0.5, v, WaveformUnit::Milliampere).unwrap();
        let combo: Vec<f64> = x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        let lhs = biastee_predistort(&w(combo), tau, 50.0).unwrap();
        let px = biastee_predistort(&w(x.clone()), tau, 50.0).unwrap();
        let py = biastee_predistort(&w(y.to_vec()), tau, 50.0).unwrap();
        let scale = px.values.iter().chain(&py.values).fold(0.0f64, |m, v| m.max(v.abs())) * (a.abs() + b.abs());
        for i in 0..x.len() {
            let rhs = a * px.values[i] + b * py.values[i];
            prop_assert!((lhs.values[i] - rhs).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn predistortion_undoes_the_bias_tee(tau in 100.0f64..2000.0, frac in 0.05f64..0.5, amp in 0.1f64..10.0, dt in 0.1f64..1.0) {
        let n = ((frac * tau) / dt).floor() as usize + 1;
        let tail = n / 2;
        let values: Vec<f64> = (0..n + tail).map(|k| if k < n { amp } else { 0.0 }).collect();
        let i = Waveform::new(dt, values.clone(), WaveformUnit::Milliampere).unwrap();
        let out = biastee_highpass(&biastee_predistort(&i, tau, 50.0).unwrap(), tau).unwrap();
        for (o, iv) in out.values.iter().zip(&values) {
            prop_assert!((o - 50.0 * iv).abs() <= 0.01 * 50.0 * amp);
        }
    }

    #[test]
    fn iq_projection_ignores_rigid_motions(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..20),
        g in (-3.0f64..3.0, -3.0f64..3.0),
        e in (-3.0f64..3.0, -3.0f64..3.0),
        angle in 0.0f64..TAU,
        shift in (-100.0f64..100.0, -100.0f64..100.0),
    ) {
        let zg = IqPoint::new(g.0, g.1);
        let ze = IqPoint::new(e.0, e.1);
        prop_assume!((ze - zg).norm() > 0.1);
        let z: Vec<IqPoint> = pts.iter().map(|&(a, b)| IqPoint::new(a, b)).collect();
        let rot = Complex64::from_polar(1.0, angle);
        let d = Complex64::new(shift.0, shift.1);
        let moved: Vec<IqPoint> = z.iter().map(|&p| p * rot + d).collect();
        let p0 = iq_project(&z, zg, ze).unwrap();
        let p1 = iq_project(&moved, zg * rot + d, ze * rot + d).unwrap();
        for (a, b) in p0.raw.iter().zip(&p1.raw) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}

#[test]
fn single_mode_hamiltonian_is_a_two_level_block() {
    let w = ghz_to_angular(5.5);
    let g = mhz_to_angular(10.0);
    let spec = SystemSpec::new(
        w - 1.0,
        w + 1.0,
        vec![ModeSpec::new(w, g, 2).unwrap()],
        CouplingModel::Rwa,
    )
    .unwrap();
    let sc = SweepScenario::new(10.0, InitialState::QubitExcited);
    let h = hamiltonian_at(5.0, &spec, &sc).unwrap();
    let layout = build_layout(&spec).unwrap();
    let e0 = layout.index(1, &[0]).unwrap();
    let g1 = layout.index(0, &[1]).unwrap();
    assert_eq!(h.get(e0, g1), Complex64::new(g, 0.0));
    assert_eq!(h.get(e0, e0), zero());
    assert_eq!(h.get(g1, g1), zero());
}
