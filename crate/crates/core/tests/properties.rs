//! Invariants over randomized parameters.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use coupled_oscillators::combinatorics::composition_count;
use coupled_oscillators::driven::{joint_distribution, reduced_density_driven};
use coupled_oscillators::multimode::{chain_decomposition, chain_multinomial_probabilities, multinomial_probabilities, three_mode_decomposition};
use coupled_oscillators::oracle::{apply_hamiltonian, enumerate_sector, fidelity, total_variation, SectorStateVector};
use coupled_oscillators::scalar::{cis, inner};
use coupled_oscillators::two_mode::{binomial_coefficients, occupation_probabilities, walk_weights};
use coupled_oscillators::{
    ChainSystemF64, CouplingScheduleF64, DriveWaveformF64, Matrix, ThreeModeSystemF64, TwoModeSystemF64, C64,
};
use proptest::prelude::*;

fn schedule() -> impl Strategy<Value = CouplingScheduleF64> {
    prop_oneof![
        (-1.0..1.0f64).prop_map(CouplingScheduleF64::constant),
        ((-1.0..1.0f64), (0.1..5.0f64)).prop_map(|(g, tau)| CouplingScheduleF64::switch(g, tau).unwrap()),
        ((-1.0..1.0f64), (0.1..5.0f64)).prop_map(|(g, tau)| CouplingScheduleF64::exp_decay(g, tau).unwrap()),
        prop::collection::vec(-1.0..1.0f64, 2..8).prop_map(|v| {
            let times = (0..v.len()).map(|k| 2.0 * k as f64).collect();
            CouplingScheduleF64::tabulated(times, v).unwrap()
        }),
    ]
}

fn system() -> impl Strategy<Value = TwoModeSystemF64> {
    (0.5..2.0f64, 0.0..1.0f64, schedule()).prop_map(|(w, d, s)| TwoModeSystemF64::new(w, w + d, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binomial_state_is_normalized(sys in system(), n in 0usize..9, frac in 0.0..1.0f64) {
        let t = frac * sys.schedule.horizon().min(10.0);
        let c = binomial_coefficients(n, &sys, t).unwrap();
        prop_assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
        let (q, p) = walk_weights(&sys, t).unwrap();
        prop_assert!((q + p - 1.0).abs() < 1e-12 && q >= -1e-15 && p >= -1e-15);
        let probs = occupation_probabilities(n, &sys, t).unwrap();
        for (a, b) in probs.iter().zip(c.probabilities()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_mode_geometry(sys in system(), frac in 0.0..1.0f64) {
        let t = frac * sys.schedule.horizon().min(10.0);
        let theta = sys.mixing_angle(t).unwrap();
        prop_assert!(theta.abs() <= FRAC_PI_4 + 1e-15);
        let (la, lb) = sys.eigenfrequencies(t).unwrap();
        prop_assert!(la <= lb);
        prop_assert!((la + lb - 2.0 * sys.mean_frequency()).abs() < 1e-12);
        let g = sys.schedule.eval(t).unwrap();
        prop_assert!(((lb - la).powi(2) - (4.0 * g * g + sys.detuning().powi(2))).abs() < 1e-10);
    }

    #[test]
    fn schedule_json_roundtrip(s in schedule()) {
        let text = serde_json::to_string(&s).unwrap();
        let back: CouplingScheduleF64 = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn accumulated_magnitude_is_monotone(s in schedule(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let h = s.horizon().min(10.0);
        let (t0, t1) = if a < b { (a * h, b * h) } else { (b * h, a * h) };
        prop_assert!(s.accumulated_magnitude(t1).unwrap() + 1e-12 >= s.accumulated_magnitude(t0).unwrap());
    }

    #[test]
    fn star_decomposition(g in -1.0..1.0f64, gp in -1.0..1.0f64, w in 0.5..3.0f64) {
        prop_assume!(g.hypot(gp) > 1e-6);
        let sys = ThreeModeSystemF64::new(w, CouplingScheduleF64::constant(g), CouplingScheduleF64::constant(gp)).unwrap();
        let dec = three_mode_decomposition(&sys, 0.0).unwrap();
        prop_assert!(dec.orthogonality_residual() < 1e-14);
        prop_assert!(dec.diagonalization_residual(&sys.coefficient_matrix(0.0).unwrap()).unwrap() < 1e-12);
        prop_assert!((dec.lambdas[0] + dec.lambdas[2] - 2.0 * w).abs() < 1e-14);
    }

    #[test]
    fn chain_decomposition_invariants(gs in prop::collection::vec(-1.0..1.0f64, 1..9), w in 0.5..3.0f64) {
        let sys = ChainSystemF64::new(w, gs.into_iter().map(CouplingScheduleF64::constant).collect()).unwrap();
        let dec = chain_decomposition(&sys, 0.0, 1e-12).unwrap();
        prop_assert!(dec.orthogonality_residual() < 1e-12);
        prop_assert!(dec.diagonalization_residual(&sys.coefficient_matrix(0.0).unwrap()).unwrap() < 1e-10);
        prop_assert!(dec.lambdas.windows(2).all(|p| p[0] <= p[1]));
        // bipartite chain: spectrum symmetric about ω0
        let n = dec.lambdas.len();
        for k in 0..n {
            prop_assert!((dec.lambdas[k] - w + dec.lambdas[n - 1 - k] - w).abs() < 1e-10);
        }
    }

    #[test]
    fn excitation_number_conserved(g in -1.0..1.0f64, gp in -1.0..1.0f64, n in 0usize..6, t in 0.0..20.0f64) {
        prop_assume!(g.hypot(gp) > 1e-6);
        let sys = ThreeModeSystemF64::new(1.0, CouplingScheduleF64::constant(g), CouplingScheduleF64::constant(gp)).unwrap();
        let d = multinomial_probabilities(n, &sys, t, 1e-12).unwrap();
        prop_assert!((d.total() - 1.0).abs() < 1e-12);
        prop_assert_eq!(d.entries.len() as u128, composition_count(3, n));
        let chain = ChainSystemF64::new(1.0, vec![CouplingScheduleF64::constant(g), CouplingScheduleF64::constant(gp)]).unwrap();
        let dc = chain_multinomial_probabilities(n, &chain, 1, t).unwrap();
        prop_assert!((dc.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sector_ranking_roundtrip(m in 1usize..7, n in 0usize..7) {
        let b = enumerate_sector(m, n).unwrap();
        prop_assert_eq!(b.len() as u128, composition_count(m, n));
        for (i, occ) in b.iter().enumerate() {
            let o: Vec<usize> = occ.iter().map(|&x| x as usize).collect();
            prop_assert_eq!(b.index_of(&o), Some(i));
        }
    }

    #[test]
    fn hamiltonian_is_hermitian(m in 2usize..5, n in 1usize..4, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let basis = Arc::new(enumerate_sector(m, n).unwrap());
        let mut gamma = Matrix::zeros(m, m);
        for j in 0..m {
            for k in j..m {
                let v: f64 = rng.gen_range(-1.0..1.0);
                gamma[(j, k)] = v;
                gamma[(k, j)] = v;
            }
        }
        let mut random = || {
            let a = (0..basis.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            SectorStateVector::new(basis.clone(), a).unwrap()
        };
        let (u, v) = (random(), random());
        let lhs = inner(&u.amplitudes, &apply_hamiltonian(&v, &gamma).unwrap().amplitudes);
        let rhs = inner(&v.amplitudes, &apply_hamiltonian(&u, &gamma).unwrap().amplitudes).conj();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(re in prop::collection::vec(-1.0..1.0f64, 4), im in prop::collection::vec(-1.0..1.0f64, 4), phi in 0.0..6.3f64) {
        let u: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let u: Vec<C64> = u.iter().map(|z| z / norm).collect();
        let v: Vec<C64> = u.iter().map(|z| z * cis(phi)).collect();
        prop_assert!((fidelity(&u, &v).unwrap() - 1.0).abs() < 1e-12);
        let f = fidelity(&u, &u.iter().rev().copied().collect::<Vec<_>>()).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
    }

    #[test]
    fn total_variation_bounds(p in prop::collection::vec(0.0..1.0f64, 1..10)) {
        let s: f64 = p.iter().sum();
        prop_assume!(s > 1e-3);
        let p: Vec<f64> = p.iter().map(|x| x / s).collect();
        let mut q = vec![0.0; p.len()];
        q[0] = 1.0;
        let tv = total_variation(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));
        prop_assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn driven_distributions_are_normalized(g in 0.05..0.5f64, kr in -0.3..0.3f64, ki in -0.3..0.3f64, nu in 0.5..1.5f64, t in 0.0..6.0f64) {
        let sys = TwoModeSystemF64::resonant(1.0, CouplingScheduleF64::constant(g)).unwrap();
        let drive = DriveWaveformF64::Harmonic { k0: C64::new(kr, ki), nu };
        let total: f64 = joint_distribution(40, &sys, &drive, t, 1e-12).unwrap().into_iter().flatten().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        let rho = reduced_density_driven(30, &sys, &drive, t, 1e-12).unwrap();
        prop_assert!(rho.hermiticity_residual() < 1e-14);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
    }
}
