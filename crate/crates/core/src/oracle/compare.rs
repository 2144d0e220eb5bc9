//! State distances and analytic-versus-oracle comparison reports.

use num_complex::Complex;
use serde::Serialize;

use super::propagate::{PropagationOptions, SectorPropagator};
use super::sector::{enumerate_sector, SectorStateVector};
use super::truncated::{propagate_truncated_unchecked, TruncatedState};
use crate::coupling::TwoModeSystem;
use crate::driven::{joint_distribution, vacuum_evolution, DriveWaveform};
use crate::error::{Error, Result};
use crate::multimode::{chain_multinomial_probabilities, chain_single_excitation_amplitudes, multinomial_probabilities, ChainSystem, OccupationDistribution, ThreeModeSystem};
use crate::scalar::{inner, Real};
use crate::two_mode::{binomial_coefficients, evolve_coherent};

use std::sync::Arc;

/// `|⟨u|v⟩|²`.
pub fn fidelity<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::Shape { expected: u.len(), found: v.len() });
    }
    Ok(inner(u, v).norm_sqr())
}

/// Fidelity of two sector states over the same basis.
pub fn sector_fidelity<T: Real>(u: &SectorStateVector<T>, v: &SectorStateVector<T>) -> Result<T> {
    if *u.basis != *v.basis {
        return Err(Error::Shape { expected: u.len(), found: v.len() });
    }
    fidelity(&u.amplitudes, &v.amplitudes)
}

/// `½ Σ |p - q|`.
pub fn total_variation<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::Shape { expected: p.len(), found: q.len() });
    }
    Ok(p.iter().zip(q).map(|(a, b)| (*a - *b).abs()).sum::<T>() / T::lit(2.0))
}

/// Deviation summary; serializes to JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub max_abs_prob_diff: f64,
    /// Smallest fidelity over the compared samples, when states are compared.
    pub fidelity: Option<f64>,
    pub tail_mass: f64,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_amplitude_diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_variation: Option<f64>,
    /// Largest `|Σp - 1|` of the oracle distributions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_sum_residual: Option<f64>,
}

impl ComparisonReport {
    fn empty() -> Self {
        Self {
            max_abs_prob_diff: 0.0,
            fidelity: None,
            tail_mass: 0.0,
            steps: 0,
            max_abs_amplitude_diff: None,
            total_variation: None,
            oracle_sum_residual: None,
        }
    }

    fn note_fidelity(&mut self, f: f64) {
        self.fidelity = Some(self.fidelity.map_or(f, |g| g.min(f)));
    }

    fn note_sum(&mut self, total: f64) {
        let r = (total - 1.0).abs();
        self.oracle_sum_residual = Some(self.oracle_sum_residual.map_or(r, |g| g.max(r)));
    }

    fn note_amplitude(&mut self, d: f64) {
        self.max_abs_amplitude_diff = Some(self.max_abs_amplitude_diff.map_or(d, |g| g.max(d)));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn sorted(times: &[impl Real]) -> bool {
    times.windows(2).all(|w| w[0] <= w[1])
}

/// Binomial state of `|n⟩_a|0⟩_b` against the two-mode sector oracle.
pub fn compare_two_mode_fock<T: Real>(n: usize, system: &TwoModeSystem<T>, times: &[T], tol: T) -> Result<ComparisonReport> {
    if !sorted(times) {
        return Err(Error::invalid("comparison times must be nondecreasing"));
    }
    let basis = Arc::new(enumerate_sector(2, n)?);
    let init = SectorStateVector::fock_in(basis.clone(), &[n, 0])?;
    let prop = SectorPropagator::new(system, basis.clone(), PropagationOptions::with_tol(tol))?;
    let traj = prop.trajectory(&init, times)?;
    let mut report = ComparisonReport::empty();
    report.steps = traj.report.steps;
    for (&t, state) in times.iter().zip(&traj.states) {
        let analytic = binomial_coefficients(n, system, t)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); basis.len()];
        for s in 0..=n {
            let i = basis.index_of(&[n - s, s]).expect("sector member");
            amps[i] = analytic.amplitude(s);
            let dp = (analytic.amplitude(s).norm_sqr() - state.amplitudes[i].norm_sqr()).abs();
            report.max_abs_prob_diff = report.max_abs_prob_diff.max(dp.to_f64_lossy());
            report.note_amplitude((analytic.amplitude(s) - state.amplitudes[i]).norm().to_f64_lossy());
        }
        report.note_fidelity(fidelity(&amps, &state.amplitudes)?.to_f64_lossy());
        report.note_sum(state.probabilities().into_iter().sum::<T>().to_f64_lossy());
    }
    Ok(report)
}

fn compare_distribution<T: Real>(report: &mut ComparisonReport, analytic: &OccupationDistribution<T>, state: &SectorStateVector<T>) -> Result<()> {
    if analytic.entries.len() != state.len() {
        return Err(Error::Shape { expected: state.len(), found: analytic.entries.len() });
    }
    for (occ, p) in &analytic.entries {
        let q = state.probability(occ).ok_or(Error::Shape { expected: state.basis.modes(), found: occ.len() })?;
        report.max_abs_prob_diff = report.max_abs_prob_diff.max((*p - q).abs().to_f64_lossy());
    }
    report.note_sum(state.probabilities().into_iter().sum::<T>().to_f64_lossy());
    Ok(())
}

/// Multinomial spreading of `|n00⟩` in the star against the sector oracle.
pub fn compare_three_mode<T: Real>(n: usize, system: &ThreeModeSystem<T>, times: &[T], tol: T) -> Result<ComparisonReport> {
    if !sorted(times) {
        return Err(Error::invalid("comparison times must be nondecreasing"));
    }
    let basis = Arc::new(enumerate_sector(3, n)?);
    let init = SectorStateVector::fock_in(basis.clone(), &[n, 0, 0])?;
    let traj = SectorPropagator::new(system, basis, PropagationOptions::with_tol(tol))?.trajectory(&init, times)?;
    let mut report = ComparisonReport::empty();
    report.steps = traj.report.steps;
    for (&t, state) in times.iter().zip(&traj.states) {
        let analytic = multinomial_probabilities(n, system, t, tol)?;
        compare_distribution(&mut report, &analytic, state)?;
    }
    Ok(report)
}

/// `n` quanta in mode `source` of a constant chain against the sector oracle.
///
/// For `n = 1` the complex amplitudes are compared as well.
pub fn compare_chain<T: Real>(n: usize, system: &ChainSystem<T>, source: usize, times: &[T], tol: T) -> Result<ComparisonReport> {
    if !sorted(times) {
        return Err(Error::invalid("comparison times must be nondecreasing"));
    }
    let m = system.modes();
    let basis = Arc::new(enumerate_sector(m, n)?);
    let mut start = vec![0; m];
    *start.get_mut(source).ok_or_else(|| Error::invalid("source mode outside chain"))? = n;
    let init = SectorStateVector::fock_in(basis.clone(), &start)?;
    let traj = SectorPropagator::new(system, basis, PropagationOptions::with_tol(tol))?.trajectory(&init, times)?;
    let mut report = ComparisonReport::empty();
    report.steps = traj.report.steps;
    for (&t, state) in times.iter().zip(&traj.states) {
        let analytic = chain_multinomial_probabilities(n, system, source, t)?;
        compare_distribution(&mut report, &analytic, state)?;
        if n == 1 {
            let amps = chain_single_excitation_amplitudes(system, source, t)?;
            let mut vec = vec![Complex::new(T::zero(), T::zero()); m];
            for (j, a) in amps.iter().enumerate() {
                let mut occ = vec![0; m];
                occ[j] = 1;
                let i = state.basis.index_of(&occ).expect("sector member");
                vec[i] = *a;
                report.note_amplitude((a - state.amplitudes[i]).norm().to_f64_lossy());
            }
            report.note_fidelity(fidelity(&vec, &state.amplitudes)?.to_f64_lossy());
        }
    }
    Ok(report)
}

fn truncated_report<T: Real>(
    expect: &TruncatedState<T>,
    oracle: &TruncatedState<T>,
    tail: f64,
    steps: usize,
) -> Result<ComparisonReport> {
    let mut report = ComparisonReport::empty();
    report.steps = steps;
    report.tail_mass = tail;
    let (p, q): (Vec<T>, Vec<T>) = expect.amplitudes.iter().zip(&oracle.amplitudes).map(|(a, b)| (a.norm_sqr(), b.norm_sqr())).unzip();
    report.max_abs_prob_diff = p.iter().zip(&q).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max).to_f64_lossy();
    report.note_fidelity(fidelity(&expect.amplitudes, &oracle.amplitudes)?.to_f64_lossy());
    report.note_sum(q.iter().copied().sum::<T>().to_f64_lossy());
    Ok(report)
}

fn check_budget(tail: f64, budget: Option<f64>) -> Result<()> {
    match budget {
        Some(b) if tail > b => Err(Error::TruncationInsufficient { tail, budget: b }),
        _ => Ok(()),
    }
}

/// Driven vacuum: product coherent state and Poisson table against the
/// truncated oracle. With `tail_budget` set, an overfull boundary layer is
/// an error.
pub fn compare_driven_vacuum<T: Real>(
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t: T,
    cutoff: usize,
    tol: T,
    tail_budget: Option<f64>,
) -> Result<ComparisonReport> {
    let run = propagate_truncated_unchecked(&TruncatedState::vacuum(cutoff)?, system, drive, t, tol)?;
    check_budget(run.report.tail_mass, tail_budget)?;
    let (aa, ab) = vacuum_evolution(system, drive, t, tol)?;
    let expect = TruncatedState::coherent_product(aa, ab, cutoff)?;
    let mut report = truncated_report(&expect, &run.state, run.report.tail_mass, run.report.steps)?;
    let poisson: Vec<T> = joint_distribution(cutoff, system, drive, t, tol)?.into_iter().flatten().collect();
    let observed: Vec<T> = run.state.joint_distribution().into_iter().flatten().collect();
    report.total_variation = Some(total_variation(&poisson, &observed)?.to_f64_lossy());
    Ok(report)
}

/// `|α⟩_a|0⟩_b` on resonance against the truncated oracle.
pub fn compare_coherent_transfer<T: Real>(
    alpha: Complex<T>,
    system: &TwoModeSystem<T>,
    t: T,
    cutoff: usize,
    tol: T,
    tail_budget: Option<f64>,
) -> Result<ComparisonReport> {
    let init = TruncatedState::coherent_product(alpha, Complex::new(T::zero(), T::zero()), cutoff)?;
    let run = propagate_truncated_unchecked(&init, system, &DriveWaveform::Zero, t, tol)?;
    check_budget(run.report.tail_mass, tail_budget)?;
    let (aa, ab) = evolve_coherent(alpha, system, t)?;
    let expect = TruncatedState::coherent_product(aa, ab, cutoff)?;
    truncated_report(&expect, &run.state, run.report.tail_mass, run.report.steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::CouplingSchedule;

    #[test]
    fn fidelity_basics() {
        let e0 = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let e1 = [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)];
        assert_eq!(fidelity(&e0, &e0).unwrap(), 1.0);
        assert_eq!(fidelity(&e0, &e1).unwrap(), 0.0);
        let u = [Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)];
        let ph = crate::scalar::cis(0.7);
        let v = [u[0] * ph, u[1] * ph];
        assert!(f64::abs(fidelity(&u, &v).unwrap() - 1.0) < 1e-15);
        assert!(fidelity(&u, &e0[..1]).is_err());
    }

    #[test]
    fn total_variation_basics() {
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!(total_variation(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn report_json_fields() {
        let sys = TwoModeSystem::resonant(1.0, CouplingSchedule::constant(0.3)).unwrap();
        let r = compare_two_mode_fock(2, &sys, &[0.5, 1.5], 1e-10).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["max_abs_prob_diff", "fidelity", "tail_mass", "steps"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(r.max_abs_prob_diff < 1e-10);
    }

    #[test]
    fn coherent_transfer_small_case() {
        let sys = TwoModeSystem::resonant(1.0, CouplingSchedule::constant(0.5)).unwrap();
        let r = compare_coherent_transfer(Complex::new(0.5, 0.0), &sys, 1.0, 12, 1e-11, Some(1e-6)).unwrap();
        assert!(r.fidelity.unwrap() > 1.0 - 1e-9);
    }
}
