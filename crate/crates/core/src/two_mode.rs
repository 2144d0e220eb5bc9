//! Closed-form evolution of the undriven two-mode system.
//!
//! An initial Fock state `|n⟩_a|0⟩_b` evolves into the binomial state
//! `Σ_s C_{n-s,s} |n-s⟩_a|s⟩_b`. All results follow from the single-quantum
//! map `a† → u a† + v b†` with
//! `u = cos²θ e^{-i f_A} + sin²θ e^{-i f_B}` and
//! `v = sinθ cosθ (e^{-i f_B} - e^{-i f_A})`.
//! These are exact when the frame angle is constant in time (resonance or a
//! constant coupling); otherwise see [`TwoModeSystem::theta_dot_bound`].

use num_complex::Complex;
use serde::Serialize;

use crate::combinatorics::binomial;
use crate::coupling::{CouplingSchedule, TwoModeSystem, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// Amplitudes `C_{n-s,s}(t)`, `s = 0..=n`, of the evolved binomial state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinomialStateCoefficients<T> {
    pub n: usize,
    pub coeffs: Vec<Complex<T>>,
    pub t: T,
}

impl<T: Real> BinomialStateCoefficients<T> {
    /// Amplitude of `|n-s⟩_a |s⟩_b`.
    pub fn amplitude(&self, s: usize) -> Complex<T> {
        self.coeffs[s]
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Density matrix of a single mode in its Fock basis (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensityMatrix<T> {
    pub dim: usize,
    pub entries: Vec<Complex<T>>,
}

impl<T: Real> ReducedDensityMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn get(&self, p: usize, q: usize) -> Complex<T> {
        self.entries[p * self.dim + q]
    }

    pub fn set(&mut self, p: usize, q: usize, z: Complex<T>) {
        self.entries[p * self.dim + q] = z;
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// `max |ρ[p][q] - conj(ρ[q][p])|`.
    pub fn hermiticity_residual(&self) -> T {
        let mut worst = T::zero();
        for p in 0..self.dim {
            for q in 0..self.dim {
                worst = worst.max((self.get(p, q) - self.get(q, p).conj()).norm());
            }
        }
        worst
    }

    /// `Tr(ρ n̂)`.
    pub fn mean_number(&self) -> T {
        (0..self.dim).map(|i| T::from_count(i) * self.get(i, i).re).sum()
    }

    /// Nested `[[ [re, im], ... ], ...]` JSON.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = (0..self.dim)
            .map(|p| {
                serde_json::Value::Array(
                    (0..self.dim)
                        .map(|q| {
                            let z = self.get(p, q);
                            serde_json::json!([z.re.to_f64_lossy(), z.im.to_f64_lossy()])
                        })
                        .collect(),
                )
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

/// Images `(u, v)` of `a†` under the evolution: `a† → u a† + v b†`.
pub fn single_quantum_map<T: Real>(system: &TwoModeSystem<T>, t: T) -> Result<(Complex<T>, Complex<T>)> {
    let theta = system.frame_angle(t)?;
    let phases = system.phase_integrals(t, T::lit(DEFAULT_TOL))?;
    let (s, c) = theta.sin_cos();
    let ea = cis(-phases.f_a);
    let eb = cis(-phases.f_b);
    let u = ea * (c * c) + eb * (s * s);
    let v = (eb - ea) * (s * c);
    Ok((u, v))
}

/// Binomial-state amplitudes for the initial state `|n⟩_a|0⟩_b`.
///
/// Equivalent to `e^{-i n f_A} cos^{2n}θ √C(n,s) (1 + tan²θ e^{iδf})^{n-s}
/// tan^sθ (e^{iδf} - 1)^s`, evaluated through the factored form `u^{n-s} v^s`
/// which stays finite for every angle.
pub fn binomial_coefficients<T: Real>(n: usize, system: &TwoModeSystem<T>, t: T) -> Result<BinomialStateCoefficients<T>> {
    let (u, v) = single_quantum_map(system, t)?;
    let coeffs = (0..=n)
        .map(|s| u.powu((n - s) as u32) * v.powu(s as u32) * binomial::<T>(n, s).sqrt())
        .collect();
    Ok(BinomialStateCoefficients { n, coeffs, t })
}

/// Left/right walk weights `(q, p)` with `p + q = 1`.
///
/// `q = (4g² cos²(δf/2) + Δ²)/(4g² + Δ²)`, `p = 4g² sin²(δf/2)/(4g² + Δ²)`;
/// on resonance `q = cos²(δf/2)`.
pub fn walk_weights<T: Real>(system: &TwoModeSystem<T>, t: T) -> Result<(T, T)> {
    let phases = system.phase_integrals(t, T::lit(DEFAULT_TOL))?;
    let half = phases.delta_f / T::lit(2.0);
    let (sin_h, cos_h) = half.sin_cos();
    if system.is_resonant() {
        return Ok((cos_h * cos_h, sin_h * sin_h));
    }
    let g = system.schedule.eval(t)?;
    let four_g2 = T::lit(4.0) * g * g;
    let d2 = system.detuning() * system.detuning();
    let denom = four_g2 + d2;
    let q = (four_g2 * cos_h * cos_h + d2) / denom;
    let p = four_g2 * sin_h * sin_h / denom;
    Ok((q, p))
}

/// `C(n,s) q^{n-s} p^s` for `s = 0..=n`.
pub fn occupation_probabilities<T: Real>(n: usize, system: &TwoModeSystem<T>, t: T) -> Result<Vec<T>> {
    let (q, p) = walk_weights(system, t)?;
    Ok((0..=n)
        .map(|s| binomial::<T>(n, s) * q.powi((n - s) as i32) * p.powi(s as i32))
        .collect())
}

/// Reduced density matrix of mode `a`; diagonal in the Fock basis.
pub fn reduced_density_fock<T: Real>(n: usize, system: &TwoModeSystem<T>, t: T) -> Result<ReducedDensityMatrix<T>> {
    let c = binomial_coefficients(n, system, t)?;
    let mut rho = ReducedDensityMatrix::zeros(n + 1);
    for (s, amp) in c.coeffs.iter().enumerate() {
        rho.set(n - s, n - s, Complex::new(amp.norm_sqr(), T::zero()));
    }
    Ok(rho)
}

/// `⟨H_a⟩` in units of `ħω0`: `n q(t)`.
pub fn mean_energy_fock<T: Real>(n: usize, system: &TwoModeSystem<T>, t: T) -> Result<T> {
    let (q, _) = walk_weights(system, t)?;
    Ok(T::from_count(n) * q)
}

fn require_resonance<T: Real>(system: &TwoModeSystem<T>, what: &str) -> Result<()> {
    if system.is_resonant() {
        Ok(())
    } else {
        Err(Error::unsupported(format!("{what} is only available on resonance (Δ = 0); use the oracle")))
    }
}

/// Coherent input `|α⟩_a|0⟩_b` stays a product coherent state
/// `|α u⟩_a |α v⟩_b`; on resonance `u = e^{-iω0t} cos G`, `v = -i e^{-iω0t} sin G`.
pub fn evolve_coherent<T: Real>(alpha: Complex<T>, system: &TwoModeSystem<T>, t: T) -> Result<(Complex<T>, Complex<T>)> {
    require_resonance(system, "coherent-state transfer")?;
    let (u, v) = single_quantum_map(system, t)?;
    Ok((alpha * u, alpha * v))
}

/// `|α|² cos²(G(t))` in units of `ħω0`.
pub fn mean_energy_coherent<T: Real>(alpha: Complex<T>, system: &TwoModeSystem<T>, t: T) -> Result<T> {
    require_resonance(system, "coherent-state energy")?;
    let g_int = system.schedule.accumulated_magnitude(t)?;
    let c = g_int.cos();
    Ok(alpha.norm_sqr() * c * c)
}

/// Time `π/(2|g0|)` of complete transfer for a constant resonant coupling.
pub fn transfer_time<T: Real>(system: &TwoModeSystem<T>) -> Result<T> {
    require_resonance(system, "transfer time")?;
    match system.schedule {
        CouplingSchedule::Constant { g0 } if g0 != T::zero() => Ok(T::FRAC_PI_2() / g0.abs()),
        CouplingSchedule::Constant { .. } => Err(Error::unsupported("transfer time undefined for g0 = 0")),
        _ => Err(Error::unsupported("transfer time requires a constant coupling")),
    }
}

/// Scaled energy `E(x) = cos²(G)` of the rectification scheme at `x = g0 t`
/// for `g(t) = g0 e^{-t/τ}` with the given product `g0 τ`.
pub fn rectified_energy<T: Real>(g0_tau: T, x: T) -> T {
    let g = g0_tau * (-(-x / g0_tau).exp_m1());
    let c = g.cos();
    c * c
}
