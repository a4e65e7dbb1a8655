mod common;

use std::f64::consts::{LN_2, TAU};
use std::sync::Arc;

use common::oracle;
use mslz_core::hilbert::{ghz_to_angular, mhz_to_angular};
use mslz_core::protocol::{
    instantaneous_frequency, lz_formula, run_figure2, stueckelberg_frequency_check,
    StueckelbergOptions,
};
use mslz_core::{
    build_layout, evolve, evolve_on_grid, evolve_state, mode_operator, qubit_operator,
    step_integrator, Complex64, CouplingModel, EvolveOptions, InitialState, ModeOp, ModeSpec,
    Observable, QuantumState, QubitOp, Scheme, SweepHamiltonian, SweepScenario, SystemSpec,
};

fn single_mode(g_mhz: f64, span_couplings: f64, cutoff: usize) -> SystemSpec {
    let w = ghz_to_angular(5.5);
    let g = mhz_to_angular(g_mhz);
    SystemSpec::new(
        w - span_couplings * g,
        w + span_couplings * g,
        vec![ModeSpec::new(w, g, cutoff).unwrap()],
        CouplingModel::Rwa,
    )
    .unwrap()
}

/// Rise time giving `2π g² / v = delta` on a single-mode spec.
fn rise_time_for(spec: &SystemSpec, delta: f64) -> f64 {
    let g = spec.modes[0].coupling;
    let v = TAU * g * g / delta;
    (spec.omega_f - spec.omega_i) / v
}

fn final_qubit_population(spec: &SystemSpec, scenario: &SweepScenario) -> f64 {
    let sc = scenario.clone().with_samples(2);
    let tr = evolve(
        spec,
        &sc,
        &[Observable::QubitPopulation],
        &EvolveOptions::default(),
    )
    .unwrap();
    *tr.values[0].last().unwrap()
}

#[test]
fn two_state_crossing_matches_landau_zener() {
    let spec = single_mode(10.0, 200.0, 2);
    for delta in [LN_2, 1.0, 3.0] {
        let t_rise = rise_time_for(&spec, delta);
        let p = final_qubit_population(
            &spec,
            &SweepScenario::new(t_rise, InitialState::QubitExcited),
        );
        let expected = (-delta).exp();
        assert!(
            (p - expected).abs() <= 0.02,
            "δ = {delta}: {p} vs {expected}"
        );
    }
}

#[test]
fn fock_crossing_coupling_scales_with_sqrt_n() {
    for n in 1..=3usize {
        let spec = single_mode(10.0, 200.0, n + 1);
        let t_rise = rise_time_for(&spec, LN_2);
        let sc = SweepScenario::new(t_rise, InitialState::ModeFock { mode: 0, n });
        let p = final_qubit_population(&spec, &sc);
        let expected = 1.0 - (-(n as f64) * LN_2).exp();
        assert!((p - expected).abs() <= 0.02, "n = {n}: {p} vs {expected}");
    }
}

#[test]
fn vacuum_rabi_oscillation() {
    // resonant, frame at the common frequency: H = g (σ+ a + σ- a†)
    let layout = Arc::new(build_layout(&single_mode(14.6, 10.0, 4)).unwrap());
    let g = mhz_to_angular(14.6);
    let a = mode_operator(ModeOp::Lower, 0, &layout).unwrap();
    let x = qubit_operator(QubitOp::SigmaPlus, &layout).matmul(&a);
    let h = x
        .add_scaled(Complex64::new(1.0, 0.0), &x.adjoint())
        .scale(Complex64::new(g, 0.0));
    for n in [0usize, 1, 2] {
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        amps[layout.index(1, &[n]).unwrap()] = Complex64::new(1.0, 0.0);
        let mut state = QuantumState::new(amps, Arc::clone(&layout));
        let rate = g * ((n + 1) as f64).sqrt();
        for _ in 0..200 {
            step_integrator(&h, &mut state, 0.5);
            let expected = (rate * state.time).cos().powi(2);
            assert!(
                (state.qubit_population() - expected).abs() <= 1e-6,
                "n = {n}, t = {}",
                state.time
            );
        }
    }
}

#[test]
fn decoupled_qubit_stays_excited() {
    let w = ghz_to_angular(5.5);
    let spec = SystemSpec::new(
        w - 1.0,
        w + 1.0,
        vec![ModeSpec::new(w, 0.0, 2).unwrap()],
        CouplingModel::Rwa,
    )
    .unwrap();
    let tr = evolve(
        &spec,
        &SweepScenario::new(30.0, InitialState::QubitExcited),
        &[Observable::QubitPopulation],
        &EvolveOptions::default(),
    )
    .unwrap();
    assert!(tr.values[0].iter().all(|&p| (p - 1.0).abs() < 1e-12));
}

fn embed_one_excitation(layout: &mslz_core::BasisLayout, amps: &[Complex64]) -> Vec<Complex64> {
    let n = layout.n_modes();
    let mut full = vec![Complex64::new(0.0, 0.0); layout.dimension()];
    full[layout.index(1, &vec![0; n]).unwrap()] = amps[0];
    for k in 0..n {
        let mut occ = vec![0; n];
        occ[k] = 1;
        full[layout.index(0, &occ).unwrap()] = amps[k + 1];
    }
    full
}

#[test]
fn superposed_initial_state_matches_oracle() {
    let spec = SystemSpec::resonator_ensemble(2).unwrap();
    let layout = Arc::new(build_layout(&spec).unwrap());
    for (t_rise, seed) in [(12.0, 1u64), (35.0, 2)] {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut amps: Vec<Complex64> = (0..5).map(|_| Complex64::new(next(), next())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);

        let sc = SweepScenario::new(t_rise, InitialState::QubitExcited);
        let ham = SweepHamiltonian::new(&spec, &sc).unwrap();
        let state = QuantumState::new(embed_one_excitation(&layout, &amps), Arc::clone(&layout));
        let obs: Vec<Observable> = std::iter::once(Observable::QubitPopulation)
            .chain((0..4).map(Observable::ModeOccupation))
            .collect();
        let times = sc.sample_times();
        let tr = evolve_state(state, &ham, &times, &obs, &EvolveOptions::default()).unwrap();
        let reference = oracle::resonator_ensemble(t_rise).run(&amps, &times);
        for (i, psi) in reference.iter().enumerate() {
            for (k, series) in tr.values.iter().enumerate() {
                assert!(
                    (series[i] - psi[k].norm_sqr()).abs() <= 1e-6,
                    "t = {}, component {k}",
                    times[i]
                );
            }
        }
    }
}

/// Final state error against a fine Magnus reference, per fixed step.
fn state_errors(scheme: Scheme, steps: &[f64]) -> Vec<f64> {
    let spec = SystemSpec::resonator_ensemble(2).unwrap();
    let sc = SweepScenario::new(20.0, InitialState::QubitExcited).with_samples(2);
    let run = |opts: EvolveOptions| {
        evolve(&spec, &sc, &[], &opts)
            .unwrap()
            .final_state
            .amplitudes
    };
    let loose = EvolveOptions {
        min_steps: 1,
        step_safety: 1e3,
        ..EvolveOptions::default()
    };
    let reference = run(loose.with_scheme(Scheme::Magnus4).with_max_step(0.005));
    steps
        .iter()
        .map(|&h| {
            let psi = run(loose.with_scheme(scheme).with_max_step(h));
            psi.iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

#[test]
fn convergence_order_matches_scheme() {
    for (scheme, h) in [(Scheme::ExponentialMidpoint, 0.2), (Scheme::Magnus4, 0.4)] {
        let e = state_errors(scheme, &[h, h / 2.0]);
        let slope = (e[0] / e[1]).log2();
        let order = scheme.order() as f64;
        assert!(
            (slope - order).abs() <= 0.2 * order,
            "{scheme:?}: slope {slope}, errors {e:?}"
        );
    }
}

#[test]
fn rotating_wave_agrees_with_full_coupling() {
    // short near-resonant sweep, g t_rise well below one
    let w = ghz_to_angular(5.5);
    let g = mhz_to_angular(14.6);
    let modes = vec![ModeSpec::new(w, g, 3).unwrap()];
    let rwa = SystemSpec::new(w - 0.3, w + 0.3, modes, CouplingModel::Rwa).unwrap();
    let full = rwa.clone().with_coupling_model(CouplingModel::Full);
    let sc = SweepScenario::new(2.0, InitialState::QubitExcited);
    let opts = EvolveOptions::default();
    let a = evolve(&rwa, &sc, &[Observable::QubitPopulation], &opts).unwrap();
    let b = evolve(&full, &sc, &[Observable::QubitPopulation], &opts).unwrap();
    for (p, q) in a.values[0].iter().zip(&b.values[0]) {
        assert!((p - q).abs() <= 1e-2, "{p} vs {q}");
    }
    assert!(
        a.values[0].last().unwrap() < &0.999,
        "sweep should transfer some population"
    );
}

#[test]
fn excitation_bookkeeping() {
    let spec = SystemSpec::resonator_ensemble(4).unwrap();
    let obs: Vec<Observable> = [Observable::QubitPopulation, Observable::ExcitationNumber]
        .into_iter()
        .chain((0..4).map(Observable::ModeOccupation))
        .collect();
    let initial = [
        InitialState::QubitExcited,
        InitialState::ModeFock { mode: 2, n: 2 },
        InitialState::ModeCoherent {
            mode: 0,
            amplitude: Complex64::new(0.15, 0.1),
        },
    ];
    for init in initial {
        let tr = evolve(
            &spec,
            &SweepScenario::new(40.0, init),
            &obs,
            &EvolveOptions::default(),
        )
        .unwrap();
        let n0 = tr.values[1][0];
        assert!(tr.max_norm_drift <= 1e-8);
        for i in 0..tr.times.len() {
            let total: f64 = tr.values[0][i] + tr.values[2..].iter().map(|s| s[i]).sum::<f64>();
            assert!(
                (total - n0).abs() <= 1e-8,
                "{init:?} at t = {}",
                tr.times[i]
            );
            assert!((tr.values[1][i] - n0).abs() <= 1e-8);
        }
    }
}

#[test]
fn ensemble_limits_follow_formula() {
    let spec = SystemSpec::resonator_ensemble(2).unwrap();
    let fig = run_figure2(&spec, &[0.25, 300.0], &EvolveOptions::default()).unwrap();
    let c = &fig.curve;
    assert!((c.simulated[0] - c.formula[0]).abs() <= 0.02);
    assert!(c.simulated[0] > 0.95);
    assert!((c.simulated[1] - c.formula[1]).abs() <= 0.05);
    assert!(c.simulated[1] < 0.05);
}

#[test]
fn qubit_holds_until_the_ensemble() {
    let spec = SystemSpec::resonator_ensemble(2).unwrap();
    let g_max = spec.couplings().into_iter().fold(0.0, f64::max);
    let threshold = spec.modes[0].frequency - 5.0 * g_max;
    for t_rise in [5.0, 40.0, 150.0] {
        let fig = run_figure2(&spec, &[t_rise], &EvolveOptions::default()).unwrap();
        let row = &fig.map.rows[0];
        let mut checked = 0;
        for (&w, &p) in row.omega_q.iter().zip(&row.population) {
            if w < threshold {
                assert!((p - 1.0).abs() <= 1e-6, "t_rise = {t_rise}, ω = {w}: {p}");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
}

#[test]
fn pre_crossing_depletion_is_virtual_dressing() {
    // far from resonance the qubit only borrows Σ g²/Δ² from the modes;
    // the sudden start adds ringing of the same order
    let spec = SystemSpec::resonator_ensemble(2).unwrap();
    let g_max = spec.couplings().into_iter().fold(0.0, f64::max);
    let threshold = spec.modes[0].frequency - 5.0 * g_max;
    for t_rise in [5.0, 40.0, 150.0, 300.0] {
        let fig = run_figure2(&spec, &[t_rise], &EvolveOptions::default()).unwrap();
        let row = &fig.map.rows[0];
        for (&w, &p) in row.omega_q.iter().zip(&row.population) {
            if w < threshold {
                let admixture: f64 = spec
                    .modes
                    .iter()
                    .map(|m| (m.coupling / (m.frequency - w)).powi(2))
                    .sum();
                assert!(
                    1.0 - p <= 4.0 * admixture,
                    "t_rise = {t_rise}: {} vs {admixture}",
                    1.0 - p
                );
            }
        }
    }
}

#[test]
fn oscillations_diminish_after_the_crossings() {
    let spec = SystemSpec::resonator_ensemble(2).unwrap();
    let sc = SweepScenario::new(150.0, InitialState::QubitExcited).with_samples(1501);
    let tr = evolve(
        &spec,
        &sc,
        &[Observable::QubitPopulation],
        &EvolveOptions::default(),
    )
    .unwrap();
    let report = stueckelberg_frequency_check(
        &tr.times,
        &tr.values[0],
        &spec,
        &sc,
        &StueckelbergOptions::default(),
    )
    .unwrap();
    // peak-to-peak swing in consecutive 12 ns blocks after the crossings
    let swings: Vec<f64> = (0..3)
        .map(|b| {
            let (lo, hi) = (
                report.t_start + 12.0 * b as f64,
                report.t_start + 12.0 * (b + 1) as f64,
            );
            let seg: Vec<f64> = tr
                .times
                .iter()
                .zip(&tr.values[0])
                .filter(|(t, _)| **t >= lo && **t < hi)
                .map(|(_, p)| *p)
                .collect();
            seg.iter().copied().fold(f64::MIN, f64::max)
                - seg.iter().copied().fold(f64::MAX, f64::min)
        })
        .collect();
    assert!(swings.windows(2).all(|w| w[1] < w[0]), "{swings:?}");
}

#[test]
fn faster_sweep_doubles_late_oscillation_frequency() {
    // wide span so both runs keep ringing well after the ensemble
    let base = SystemSpec::resonator_ensemble(2).unwrap();
    let spec = SystemSpec {
        omega_f: base.omega_i + ghz_to_angular(1.2),
        ..base
    };
    let omega_ens = spec.ensemble_frequency();
    let elapsed = 40.0;
    let freq_after_crossing = |t_rise: f64| {
        let sc = SweepScenario::new(t_rise, InitialState::QubitExcited);
        let v = sc.velocity(&spec);
        let t_c = (omega_ens - spec.omega_i) / v;
        let times: Vec<f64> = (0..=150)
            .map(|k| t_c + elapsed - 7.5 + 0.1 * k as f64)
            .collect();
        let tr = evolve_on_grid(
            &spec,
            &sc,
            &times,
            &[Observable::QubitPopulation],
            &EvolveOptions::default(),
        )
        .unwrap();
        let est = instantaneous_frequency(&tr.times, &tr.values[0], 15.0, 15.0).unwrap();
        assert_eq!(est.len(), 1);
        est[0].1
    };
    let slow = freq_after_crossing(300.0);
    let fast = freq_after_crossing(150.0);
    let ratio = fast / slow;
    assert!(
        (ratio - 2.0).abs() <= 0.2,
        "{slow} GHz vs {fast} GHz, ratio {ratio}"
    );
}

#[test]
fn formula_matches_single_crossing_exponent() {
    let spec = single_mode(10.0, 200.0, 2);
    let t_rise = rise_time_for(&spec, 1.0);
    let v = SweepScenario::new(t_rise, InitialState::QubitExcited).velocity(&spec);
    assert!((lz_formula(&spec.couplings(), v) - (-1.0f64).exp()).abs() < 1e-12);
}
