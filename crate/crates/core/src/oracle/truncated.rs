//! Driven two-mode dynamics on the box `n_a, n_b <= N_c`.

use num_complex::Complex;
use serde::Serialize;

use super::propagate::rk4_richardson;
use crate::combinatorics::factorial;
use crate::coupling::TwoModeSystem;
use crate::driven::DriveWaveform;
use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Real};

/// Amplitudes `ψ(n_a, n_b)` on the truncated product basis, row-major in `n_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedState<T> {
    pub cutoff: usize,
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Real> TruncatedState<T> {
    fn dim(cutoff: usize) -> usize {
        cutoff + 1
    }

    pub fn zeros(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::invalid("cutoff must be at least 1"));
        }
        let d = Self::dim(cutoff);
        Ok(Self { cutoff, amplitudes: vec![Complex::new(T::zero(), T::zero()); d * d] })
    }

    pub fn fock(n_a: usize, n_b: usize, cutoff: usize) -> Result<Self> {
        if n_a > cutoff || n_b > cutoff {
            return Err(Error::invalid("Fock state outside the truncated basis"));
        }
        let mut s = Self::zeros(cutoff)?;
        let i = s.index(n_a, n_b);
        s.amplitudes[i] = Complex::new(T::one(), T::zero());
        Ok(s)
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        Self::fock(0, 0, cutoff)
    }

    /// Projection of `|α⟩_a |β⟩_b` onto the box (not renormalized).
    pub fn coherent_product(alpha: Complex<T>, beta: Complex<T>, cutoff: usize) -> Result<Self> {
        let mut s = Self::zeros(cutoff)?;
        let ca = coherent_coefficients(alpha, cutoff);
        let cb = coherent_coefficients(beta, cutoff);
        for (na, a) in ca.iter().enumerate() {
            for (nb, b) in cb.iter().enumerate() {
                let i = s.index(na, nb);
                s.amplitudes[i] = a * b;
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * Self::dim(self.cutoff) + n_b
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> Complex<T> {
        self.amplitudes[self.index(n_a, n_b)]
    }

    pub fn probability(&self, n_a: usize, n_b: usize) -> T {
        self.amplitude(n_a, n_b).norm_sqr()
    }

    pub fn norm(&self) -> T {
        norm_sqr(&self.amplitudes).sqrt()
    }

    /// `P[n_a][n_b]`.
    pub fn joint_distribution(&self) -> Vec<Vec<T>> {
        let d = Self::dim(self.cutoff);
        (0..d).map(|na| (0..d).map(|nb| self.probability(na, nb)).collect()).collect()
    }

    /// Probability with either mode at the cutoff.
    pub fn tail_mass(&self) -> T {
        boundary_mass(self.cutoff, &self.amplitudes)
    }

    pub fn mean_occupations(&self) -> (T, T) {
        let d = Self::dim(self.cutoff);
        let (mut ma, mut mb) = (T::zero(), T::zero());
        for na in 0..d {
            for nb in 0..d {
                let p = self.probability(na, nb);
                ma = ma + p * T::from_count(na);
                mb = mb + p * T::from_count(nb);
            }
        }
        (ma, mb)
    }

    /// CSV rows `n_a,n_b,re,im`.
    pub fn to_csv(&self) -> String {
        let d = Self::dim(self.cutoff);
        let mut out = String::from("n_a,n_b,re,im\n");
        for na in 0..d {
            for nb in 0..d {
                let a = self.amplitude(na, nb);
                out.push_str(&format!("{na},{nb},{:.17e},{:.17e}\n", a.re.to_f64_lossy(), a.im.to_f64_lossy()));
            }
        }
        out
    }
}

/// `e^{-|α|²/2} αⁿ/√n!` for `n <= cutoff`.
pub fn coherent_coefficients<T: Real>(alpha: Complex<T>, cutoff: usize) -> Vec<Complex<T>> {
    let g = (-alpha.norm_sqr() / T::lit(2.0)).exp();
    (0..=cutoff).map(|n| alpha.powu(n as u32) * (g / factorial::<T>(n).sqrt())).collect()
}

fn boundary_mass<T: Real>(cutoff: usize, amps: &[Complex<T>]) -> T {
    let d = cutoff + 1;
    let mut m = T::zero();
    for k in 0..d {
        m = m + amps[cutoff * d + k].norm_sqr();
        if k < cutoff {
            m = m + amps[k * d + cutoff].norm_sqr();
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationReport {
    pub cutoff: usize,
    pub steps: usize,
    pub rejected: usize,
    /// Largest boundary-layer mass seen over the run.
    pub tail_mass: f64,
    pub norm_drift: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPropagation<T> {
    pub state: TruncatedState<T>,
    pub report: TruncationReport,
}

/// Integrates `ω0 a†a + Ω b†b + g(a†b + ab†) + k b† + k̄ b` on the box.
///
/// Fails with [`Error::TruncationInsufficient`] when the boundary-layer mass
/// exceeds `tail_budget` at any accepted step.
pub fn propagate_truncated_driven<T: Real>(
    initial: &TruncatedState<T>,
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t_final: T,
    tol: T,
    tail_budget: T,
) -> Result<TruncatedPropagation<T>> {
    let run = propagate_truncated_unchecked(initial, system, drive, t_final, tol)?;
    if run.report.tail_mass > tail_budget.to_f64_lossy() {
        return Err(Error::TruncationInsufficient { tail: run.report.tail_mass, budget: tail_budget.to_f64_lossy() });
    }
    Ok(run)
}

/// As [`propagate_truncated_driven`] but only reports the tail mass.
pub fn propagate_truncated_unchecked<T: Real>(
    initial: &TruncatedState<T>,
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t_final: T,
    tol: T,
) -> Result<TruncatedPropagation<T>> {
    system.validate()?;
    drive.validate()?;
    if !(t_final >= T::zero()) || !(tol > T::zero()) {
        return Err(Error::invalid("need t_final >= 0 and tol > 0"));
    }
    let nc = initial.cutoff;
    let d = nc + 1;
    if initial.amplitudes.len() != d * d {
        return Err(Error::Shape { expected: d * d, found: initial.amplitudes.len() });
    }
    let norm0 = initial.norm();
    if !(norm0 > T::zero()) {
        return Err(Error::invalid("initial state has zero norm"));
    }
    let sq: Vec<T> = (0..=d).map(|n| T::from_count(n).sqrt()).collect();
    let shift = (system.omega0 + system.omega) * T::from_count(nc) / T::lit(2.0);
    let diag: Vec<T> = (0..d * d)
        .map(|i| system.omega0 * T::from_count(i / d) + system.omega * T::from_count(i % d) - shift)
        .collect();
    let mi = Complex::new(T::zero(), -T::one());

    let rhs = |t: T, x: &[Complex<T>], out: &mut [Complex<T>]| -> Result<()> {
        let g = system.schedule.eval(t)?;
        let k = drive.eval(t)?;
        let kc = k.conj();
        for na in 0..d {
            for nb in 0..d {
                let i = na * d + nb;
                let mut acc = x[i] * diag[i];
                // a† b from (na-1, nb+1)
                if na > 0 && nb < nc {
                    acc = acc + x[i - d + 1] * (g * sq[na] * sq[nb + 1]);
                }
                // a b† from (na+1, nb-1)
                if na < nc && nb > 0 {
                    acc = acc + x[i + d - 1] * (g * sq[na + 1] * sq[nb]);
                }
                if nb > 0 {
                    acc = acc + x[i - 1] * k * sq[nb];
                }
                if nb < nc {
                    acc = acc + x[i + 1] * kc * sq[nb + 1];
                }
                out[i] = acc * mi;
            }
        }
        Ok(())
    };

    let mut y = initial.amplitudes.clone();
    let mut tail = boundary_mass(nc, &y).to_f64_lossy();
    let mut drift = 0.0f64;
    let n = T::from_count(nc);
    let rate = (system.omega0 + system.omega) * n / T::lit(2.0)
        + system.schedule.peak() * n * T::lit(2.0)
        + drive.peak() * n.sqrt() * T::lit(2.0)
        + T::lit(1e-3);
    let mut bps = system.schedule.breakpoints(t_final);
    bps.extend(drive.breakpoints(t_final));
    let (steps, rejected, _, _) = rk4_richardson(&mut y, T::zero(), t_final, &bps, T::lit(0.1) / rate, tol, rhs, |_, x| {
        tail = tail.max(boundary_mass(nc, x).to_f64_lossy());
        drift = drift.max((norm_sqr(x).sqrt() / norm0 - T::one()).abs().to_f64_lossy());
        Ok(())
    })?;
    let phase = crate::scalar::cis(-shift * t_final);
    let amplitudes = y.into_iter().map(|a| a * phase).collect();
    Ok(TruncatedPropagation {
        state: TruncatedState { cutoff: nc, amplitudes },
        report: TruncationReport { cutoff: nc, steps, rejected, tail_mass: tail, norm_drift: drift },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::CouplingSchedule;

    #[test]
    fn undriven_vacuum_stays_put() {
        let sys = TwoModeSystem::resonant(1.0, CouplingSchedule::constant(0.2)).unwrap();
        let run = propagate_truncated_driven(&TruncatedState::vacuum(4).unwrap(), &sys, &DriveWaveform::Zero, 3.0, 1e-10, 1e-12).unwrap();
        assert!(f64::abs(run.state.probability(0, 0) - 1.0) < 1e-9, "{:?}", run.report);
        assert_eq!(run.report.tail_mass, 0.0);
    }

    #[test]
    fn single_quantum_swap() {
        let sys = TwoModeSystem::resonant(1.0, CouplingSchedule::constant(0.25)).unwrap();
        let t = 2.0;
        let run = propagate_truncated_driven(&TruncatedState::fock(1, 0, 3).unwrap(), &sys, &DriveWaveform::Zero, t, 1e-11, 1e-12).unwrap();
        assert!((run.state.probability(0, 1) - (0.25f64 * t).sin().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn uncoupled_constant_drive_displaces_b() {
        // dβ/dt = -iΩβ - ik0  =>  β(t) = k0 (e^{-iΩt} - 1)/Ω
        let (w, k0, t) = (1.0, 0.2, 1.7);
        let sys = TwoModeSystem::resonant(w, CouplingSchedule::constant(0.0)).unwrap();
        let drive = DriveWaveform::Constant { k0: Complex::new(k0, 0.0) };
        let run = propagate_truncated_driven(&TruncatedState::vacuum(14).unwrap(), &sys, &drive, t, 1e-11, 1e-10).unwrap();
        let beta = (crate::scalar::cis(-w * t) - 1.0) * (k0 / w);
        let expect = TruncatedState::coherent_product(Complex::new(0.0, 0.0), beta, 14).unwrap();
        let ov = crate::scalar::inner(&expect.amplitudes, &run.state.amplitudes).norm_sqr();
        assert!(f64::abs(ov - 1.0) < 1e-9);
    }

    #[test]
    fn budget_enforced() {
        let sys = TwoModeSystem::resonant(1.0, CouplingSchedule::constant(0.2)).unwrap();
        let drive = DriveWaveform::Constant { k0: Complex::new(1.0, 0.0) };
        let r = propagate_truncated_driven(&TruncatedState::vacuum(3).unwrap(), &sys, &drive, 3.0, 1e-9, 1e-6);
        assert!(matches!(r, Err(Error::TruncationInsufficient { .. })));
    }

    #[test]
    fn coherent_projection_and_csv() {
        let s = TruncatedState::coherent_product(Complex::new(0.5, 0.0), Complex::new(0.0, 0.3), 20).unwrap();
        assert!(f64::abs(s.norm() - 1.0) < 1e-14);
        let (ma, mb) = s.mean_occupations();
        assert!(f64::abs(ma - 0.25) < 1e-13 && f64::abs(mb - 0.09) < 1e-13);
        assert!(s.tail_mass() < 1e-20);
        assert_eq!(s.to_csv().lines().count(), 21 * 21 + 1);
        assert!(TruncatedState::<f64>::zeros(0).is_err());
    }
}
