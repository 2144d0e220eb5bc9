//! Closed forms against the brute-force propagators on cases with no
//! acceptance counterpart.

use std::sync::Arc;

use coupled_oscillators::coupling::CouplingSchedule;
use coupled_oscillators::driven::{fock_pair_coherent_amplitude, reduced_density_driven, DriveWaveform};
use coupled_oscillators::multimode::{multinomial_probabilities, ChainSystem, ThreeModeSystem};
use coupled_oscillators::oracle::{
    compare_chain, compare_three_mode, compare_two_mode_fock, enumerate_sector, propagate_sector, propagate_sector_with,
    propagate_truncated_driven, PropagationMethod, PropagationOptions, SectorStateVector, TruncatedState,
};
use coupled_oscillators::oracle::coherent_coefficients;
use coupled_oscillators::two_mode::{occupation_probabilities, reduced_density_fock};
use coupled_oscillators::{TwoModeSystem, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_chains_follow_multinomial_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..12 {
        let modes = rng.gen_range(2..=6);
        let n = rng.gen_range(1..=4);
        let couplings = (0..modes - 1).map(|_| CouplingSchedule::constant(rng.gen_range(-0.5..0.5))).collect();
        let chain = ChainSystem::new(1.0, couplings).unwrap();
        let source = rng.gen_range(0..modes);
        let times: Vec<f64> = vec![0.7, 3.1, 9.4];
        let r = compare_chain(n, &chain, source, &times, 1e-11).unwrap();
        assert!(r.max_abs_prob_diff < 1e-8, "modes {modes} n {n}: {}", r.max_abs_prob_diff);
    }
}

#[test]
fn star_with_time_dependent_but_proportional_couplings() {
    // fixed ratio g/g' keeps the normal modes fixed, so η = ∫G3 stays exact
    let sys = ThreeModeSystem::new(
        1.0,
        CouplingSchedule::exp_decay(0.3, 3.0).unwrap(),
        CouplingSchedule::exp_decay(-0.45, 3.0).unwrap(),
    )
    .unwrap();
    assert!(sys.has_constant_ratio(0.0, 8.0).unwrap());
    let r = compare_three_mode(2, &sys, &[1.0, 4.0, 8.0], 1e-11).unwrap();
    assert!(r.max_abs_prob_diff < 1e-8, "{}", r.max_abs_prob_diff);
}

#[test]
fn star_without_fixed_ratio_deviates() {
    let sys = ThreeModeSystem::new(1.0, CouplingSchedule::exp_decay(0.4, 2.0).unwrap(), CouplingSchedule::constant(0.3)).unwrap();
    assert!(!sys.has_constant_ratio(0.0, 8.0).unwrap());
    let r = compare_three_mode(1, &sys, &[2.0, 5.0, 8.0], 1e-11).unwrap();
    assert!(r.max_abs_prob_diff > 1e-4);
}

#[test]
fn star_collapses_to_two_modes() {
    let g = 0.35;
    let star = ThreeModeSystem::new(1.0, CouplingSchedule::constant(g), CouplingSchedule::constant(0.0)).unwrap();
    let pair = TwoModeSystem::resonant(1.0, CouplingSchedule::constant(g)).unwrap();
    for &t in &[0.4, 2.2, 5.9] {
        let d = multinomial_probabilities(3, &star, t, 1e-12).unwrap();
        let p = occupation_probabilities(3, &pair, t).unwrap();
        for (occ, prob) in &d.entries {
            if occ[2] > 0 {
                assert_eq!(*prob, 0.0);
            } else {
                assert!(f64::abs(prob - p[occ[1]]) < 1e-14);
            }
        }
    }
}

#[test]
fn eigen_and_rk4_paths_agree() {
    let chain = ChainSystem::new(
        1.0,
        vec![CouplingSchedule::constant(0.2), CouplingSchedule::constant(-0.35), CouplingSchedule::constant(0.1)],
    )
    .unwrap();
    let init = SectorStateVector::fock(&[2, 0, 1, 0]).unwrap();
    let tol = 1e-11;
    let e = propagate_sector_with(&init, &chain, 7.5, PropagationOptions::with_tol(tol).method(PropagationMethod::Eigen)).unwrap();
    let r = propagate_sector_with(&init, &chain, 7.5, PropagationOptions::with_tol(tol).method(PropagationMethod::Rk4)).unwrap();
    let diff = e.state.amplitudes.iter().zip(&r.state.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
    assert!(r.report.norm_drift < 10.0 * tol * r.report.steps as f64);
    assert!(r.report.steps > 0 && e.report.steps == 0);
}

#[test]
fn norm_is_conserved_under_time_dependent_coupling() {
    let sys = TwoModeSystem::new(1.0, 1.3, CouplingSchedule::exp_decay(0.4, 2.0).unwrap()).unwrap();
    let init = SectorStateVector::fock(&[3, 1]).unwrap();
    let tol = 1e-10;
    let out = propagate_sector(&init, &sys, 10.0, tol).unwrap();
    assert!(out.report.norm_drift < 10.0 * tol, "{}", out.report.norm_drift);
}

#[test]
fn tabulated_schedule_off_resonance_matches_when_flat() {
    // a flat table is a constant coupling in disguise: θ̇ = 0
    let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    let sys = TwoModeSystem::new(1.0, 1.6, CouplingSchedule::tabulated(times, vec![0.3; 11]).unwrap()).unwrap();
    let r = compare_two_mode_fock(3, &sys, &[1.5, 4.0, 9.5], 1e-11).unwrap();
    assert!(r.max_abs_prob_diff < 1e-8, "{}", r.max_abs_prob_diff);
    assert!(r.fidelity.unwrap() > 1.0 - 1e-8);
}

#[test]
fn switched_coupling_matches_on_resonance() {
    let sys = TwoModeSystem::resonant(1.0, CouplingSchedule::switch(0.3, 2.5).unwrap()).unwrap();
    let r = compare_two_mode_fock(4, &sys, &[1.0, 2.5, 6.0], 1e-11).unwrap();
    assert!(r.max_abs_prob_diff < 1e-8, "{}", r.max_abs_prob_diff);
}

#[test]
fn reduced_density_of_binomial_state() {
    let sys = TwoModeSystem::new(1.0, 1.2, CouplingSchedule::constant(0.25)).unwrap();
    let n = 3;
    let t = 4.3;
    let rho = reduced_density_fock(n, &sys, t).unwrap();
    let out = propagate_sector(&SectorStateVector::fock(&[n, 0]).unwrap(), &sys, t, 1e-11).unwrap();
    for p in 0..=n {
        let oracle = out.state.probability(&[p, n - p]).unwrap();
        assert!(f64::abs(rho.get(p, p).re - oracle) < 1e-9);
    }
}

/// `⟨α|_A⟨β|_B ψ⟩` from a truncated Fock-basis state, with
/// `|α⟩_A|β⟩_B = |cα + sβ⟩_a |cβ - sα⟩_b`.
fn normal_mode_coherent_projection(state: &TruncatedState<f64>, theta: f64, alpha: C64, beta: C64) -> C64 {
    let (s, c) = theta.sin_cos();
    let ca = coherent_coefficients(alpha * c + beta * s, state.cutoff);
    let cb = coherent_coefficients(beta * c - alpha * s, state.cutoff);
    let mut acc = C64::new(0.0, 0.0);
    for na in 0..=state.cutoff {
        for nb in 0..=state.cutoff {
            acc += ca[na].conj() * cb[nb].conj() * state.amplitude(na, nb);
        }
    }
    acc
}

#[test]
fn fock_pair_amplitudes_match_driven_oracle() {
    let (g0, t) = (0.3, 2.4);
    let sys = TwoModeSystem::resonant(1.0, CouplingSchedule::constant(g0)).unwrap();
    let drive = DriveWaveform::Harmonic { k0: C64::new(0.15, 0.05), nu: 0.8 };
    let cutoff = 24;
    for (n, m) in [(1, 0), (0, 2), (2, 1)] {
        let run = propagate_truncated_driven(&TruncatedState::fock(n, m, cutoff).unwrap(), &sys, &drive, t, 1e-11, 1e-12).unwrap();
        let theta = sys.frame_angle(t).unwrap();
        let probes = [(C64::new(0.3, -0.2), C64::new(0.1, 0.4)), (C64::new(-0.5, 0.1), C64::new(0.2, 0.0)), (C64::new(0.0, 0.6), C64::new(-0.3, -0.3))];
        let mut ratios = Vec::new();
        for (al, be) in probes {
            let analytic = fock_pair_coherent_amplitude(n, m, al, be, &sys, &drive, t, 1e-12).unwrap();
            let oracle = normal_mode_coherent_projection(&run.state, theta, al, be);
            assert!((analytic.norm() - oracle.norm()).abs() < 1e-7, "({n},{m}) {analytic} vs {oracle}");
            ratios.push(oracle / analytic);
        }
        // a single unimodular global phase separates the two
        for r in &ratios[1..] {
            assert!((r - ratios[0]).norm() < 1e-6, "({n},{m}) phase drift {r} vs {}", ratios[0]);
        }
    }
}

#[test]
fn fock_pair_amplitudes_off_resonance() {
    let sys = TwoModeSystem::new(1.0, 1.25, CouplingSchedule::constant(0.2)).unwrap();
    let drive = DriveWaveform::Constant { k0: C64::new(0.1, 0.0) };
    let t = 3.0;
    let run = propagate_truncated_driven(&TruncatedState::fock(1, 1, 20).unwrap(), &sys, &drive, t, 1e-11, 1e-12).unwrap();
    let theta = sys.frame_angle(t).unwrap();
    for (al, be) in [(C64::new(0.2, 0.1), C64::new(-0.4, 0.3)), (C64::new(0.7, 0.0), C64::new(0.0, 0.2))] {
        let analytic = fock_pair_coherent_amplitude(1, 1, al, be, &sys, &drive, t, 1e-12).unwrap();
        let oracle = normal_mode_coherent_projection(&run.state, theta, al, be);
        assert!((analytic.norm() - oracle.norm()).abs() < 1e-7, "{analytic} vs {oracle}");
    }
}

#[test]
fn driven_reduced_density_matches_oracle() {
    let sys = TwoModeSystem::resonant(1.0, CouplingSchedule::constant(0.2)).unwrap();
    let drive = DriveWaveform::Harmonic { k0: C64::new(0.3, 0.0), nu: 0.8 };
    let t = 3.5;
    let cutoff = 20;
    let run = propagate_truncated_driven(&TruncatedState::vacuum(cutoff).unwrap(), &sys, &drive, t, 1e-11, 1e-12).unwrap();
    let rho = reduced_density_driven(8, &sys, &drive, t, 1e-12).unwrap();
    for p in 0..8 {
        for q in 0..8 {
            let oracle: C64 = (0..=cutoff).map(|nb| run.state.amplitude(p, nb) * run.state.amplitude(q, nb).conj()).sum();
            assert!((rho.get(p, q) - oracle).norm() < 1e-8, "({p},{q})");
        }
    }
}

#[test]
fn sector_states_stay_in_sector() {
    let basis = Arc::new(enumerate_sector(3, 2).unwrap());
    let sys = ThreeModeSystem::new(1.0, CouplingSchedule::constant(0.2), CouplingSchedule::exp_decay(0.3, 1.0).unwrap()).unwrap();
    let init = SectorStateVector::fock_in(basis.clone(), &[1, 1, 0]).unwrap();
    let out = propagate_sector(&init, &sys, 3.0, 1e-10).unwrap();
    assert_eq!(*out.state.basis, *basis);
    assert!(f64::abs(out.state.norm() - 1.0) < 1e-9);
}
