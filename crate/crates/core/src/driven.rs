//! Two modes with a classical source `k(t) b† + k̄(t) b` on the b-mode.
//!
//! Units with `ħ = 1`: `f1` are phases and `f2` have units of drive
//! amplitude times time. The purely imaginary `f0` exactly cancels the
//! normalization of the displaced vacuum, so states are emitted normalized.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, factorial, poisson_weight};
use crate::coupling::{interpolate, validate_table, CouplingSchedule, TwoModeSystem};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::scalar::{cis, imag_unit, Real};
use crate::two_mode::ReducedDensityMatrix;

/// Classical source `k(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriveWaveform<T> {
    Zero,
    /// `k(t) = k0`.
    Constant { k0: Complex<T> },
    /// `k(t) = k0 e^{-iνt}`.
    Harmonic { k0: Complex<T>, nu: T },
    /// Piecewise-linear complex samples.
    Tabulated { times: Vec<T>, values: Vec<Complex<T>> },
}

impl<T: Real> DriveWaveform<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Tabulated { times, values } => validate_table(times, values.len()),
            Self::Constant { k0 } | Self::Harmonic { k0, .. } if !(k0.re.is_finite() && k0.im.is_finite()) => {
                Err(Error::invalid("drive amplitude must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: T) -> Result<Complex<T>> {
        Ok(match self {
            Self::Zero => Complex::new(T::zero(), T::zero()),
            Self::Constant { k0 } => *k0,
            Self::Harmonic { k0, nu } => *k0 * cis(-*nu * t),
            Self::Tabulated { times, values } => interpolate(times, values, t)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero => true,
            Self::Constant { k0 } | Self::Harmonic { k0, .. } => k0.norm_sqr() == T::zero(),
            Self::Tabulated { values, .. } => values.iter().all(|v| v.norm_sqr() == T::zero()),
        }
    }

    /// Largest `|k|`.
    pub fn peak(&self) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::Constant { k0 } | Self::Harmonic { k0, .. } => k0.norm(),
            Self::Tabulated { values, .. } => values.iter().fold(T::zero(), |m, v| m.max(v.norm())),
        }
    }

    pub(crate) fn carrier(&self) -> T {
        match self {
            Self::Harmonic { nu, .. } => nu.abs(),
            _ => T::zero(),
        }
    }

    pub(crate) fn breakpoints(&self, t: T) -> Vec<T> {
        match self {
            Self::Tabulated { times, .. } => times.iter().copied().filter(|&x| x > T::zero() && x < t).collect(),
            _ => Vec::new(),
        }
    }

    /// Global phase rotation `k → e^{iφ} k`.
    pub fn rotated(&self, phi: T) -> Self {
        let r = cis(phi);
        match self {
            Self::Zero => Self::Zero,
            Self::Constant { k0 } => Self::Constant { k0: *k0 * r },
            Self::Harmonic { k0, nu } => Self::Harmonic { k0: *k0 * r, nu: *nu },
            Self::Tabulated { times, values } => {
                Self::Tabulated { times: times.clone(), values: values.iter().map(|v| *v * r).collect() }
            }
        }
    }
}

/// Factors of the normal-mode propagators at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriveFunctionals<T> {
    pub f1_a: T,
    pub f1_b: T,
    pub f2_a: Complex<T>,
    pub f2_b: Complex<T>,
    /// `μ_A = -i f2_A e^{-i f1_A}`.
    pub mu_a: Complex<T>,
    /// `μ_B = -i f2_B e^{-i f1_B}`.
    pub mu_b: Complex<T>,
    pub t: T,
}

/// `∫₀ᵗ e^{iwt'} dt'`, stable as `w → 0`.
fn exp_integral<T: Real>(w: T, t: T) -> Complex<T> {
    let x = w * t / T::lit(2.0);
    let sinc = if x.abs() < T::lit(1e-4) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    };
    cis(x) * (t * sinc)
}

/// `f1`, `f2` and the coherent parameters `μ` of both normal modes.
///
/// `f2_A = -∫ sinθ k e^{i f_A}`, `f2_B = +∫ cosθ k e^{i f_B}`. A constant
/// coupling with a zero, constant, or harmonic drive is evaluated in closed
/// form; everything else goes through adaptive quadrature.
pub fn drive_functionals<T: Real>(
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t: T,
    tol: T,
) -> Result<DriveFunctionals<T>> {
    let phases = system.phase_integrals(t, tol)?;
    let zero = Complex::new(T::zero(), T::zero());

    let (f2_a, f2_b) = if drive.is_zero() {
        (zero, zero)
    } else if let (CouplingSchedule::Constant { .. }, Some((k0, nu))) = (&system.schedule, closed_form_drive(drive)) {
        let (s, c) = system.frame_angle(T::zero())?.sin_cos();
        let (lam_a, lam_b) = system.eigenfrequencies(T::zero())?;
        (
            -(k0 * exp_integral(lam_a - nu, t)) * s,
            k0 * exp_integral(lam_b - nu, t) * c,
        )
    } else {
        let rate = system.mean_frequency() + system.schedule.peak() + system.detuning() + drive.carrier();
        let max_panel = if rate > T::zero() { Some(T::one() / rate) } else { None };
        let mut bps = system.schedule.breakpoints(t);
        bps.extend(drive.breakpoints(t));
        let a = integrate(
            |x| {
                let s = system.frame_angle(x)?.sin();
                let f = system.phase_integrals(x, tol)?.f_a;
                Ok(-(drive.eval(x)? * cis(f)) * s)
            },
            T::zero(),
            t,
            &bps,
            max_panel,
            tol,
        )?;
        let b = integrate(
            |x| {
                let c = system.frame_angle(x)?.cos();
                let f = system.phase_integrals(x, tol)?.f_b;
                Ok(drive.eval(x)? * cis(f) * c)
            },
            T::zero(),
            t,
            &bps,
            max_panel,
            tol,
        )?;
        (a, b)
    };

    let mi = -imag_unit::<T>();
    Ok(DriveFunctionals {
        f1_a: phases.f_a,
        f1_b: phases.f_b,
        f2_a,
        f2_b,
        mu_a: mi * f2_a * cis(-phases.f_a),
        mu_b: mi * f2_b * cis(-phases.f_b),
        t,
    })
}

fn closed_form_drive<T: Real>(drive: &DriveWaveform<T>) -> Option<(Complex<T>, T)> {
    match drive {
        DriveWaveform::Constant { k0 } => Some((*k0, T::zero())),
        DriveWaveform::Harmonic { k0, nu } => Some((*k0, *nu)),
        _ => None,
    }
}

/// Coherent amplitudes `(α_a, α_b)` of the product state grown from vacuum:
/// `α_a = μ_A cosθ + μ_B sinθ`, `α_b = μ_B cosθ - μ_A sinθ`.
pub fn vacuum_evolution<T: Real>(
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t: T,
    tol: T,
) -> Result<(Complex<T>, Complex<T>)> {
    let fun = drive_functionals(system, drive, t, tol)?;
    let (s, c) = system.frame_angle(t)?.sin_cos();
    Ok((fun.mu_a * c + fun.mu_b * s, fun.mu_b * c - fun.mu_a * s))
}

/// `P(n, m)`: product of Poisson weights with means `|α_a|²`, `|α_b|²`.
pub fn joint_occupation_probability<T: Real>(
    n: usize,
    m: usize,
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t: T,
    tol: T,
) -> Result<T> {
    let (aa, ab) = vacuum_evolution(system, drive, t, tol)?;
    Ok(poisson_weight(aa.norm_sqr(), n) * poisson_weight(ab.norm_sqr(), m))
}

/// Joint distribution table `P[n][m]` for `n, m <= cutoff`.
pub fn joint_distribution<T: Real>(
    cutoff: usize,
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t: T,
    tol: T,
) -> Result<Vec<Vec<T>>> {
    let (aa, ab) = vacuum_evolution(system, drive, t, tol)?;
    let pa: Vec<T> = (0..=cutoff).map(|n| poisson_weight(aa.norm_sqr(), n)).collect();
    let pb: Vec<T> = (0..=cutoff).map(|m| poisson_weight(ab.norm_sqr(), m)).collect();
    Ok(pa.iter().map(|&x| pb.iter().map(|&y| x * y).collect()).collect())
}

fn coherent_dm_entry<T: Real>(alpha: Complex<T>, p: usize, q: usize) -> Complex<T> {
    let norm = (-alpha.norm_sqr()).exp() / (factorial::<T>(p) * factorial::<T>(q)).sqrt();
    alpha.powu(p as u32) * alpha.conj().powu(q as u32) * norm
}

/// `ρ_a[p][q] = e^{-|α_a|²} α_a^p ᾱ_a^q / √(p! q!)`.
pub fn reduced_dm_element<T: Real>(
    p: usize,
    q: usize,
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t: T,
    tol: T,
) -> Result<Complex<T>> {
    let (aa, _) = vacuum_evolution(system, drive, t, tol)?;
    Ok(coherent_dm_entry(aa, p, q))
}

/// The a-mode density matrix truncated to `dim` Fock levels.
pub fn reduced_density_driven<T: Real>(
    dim: usize,
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t: T,
    tol: T,
) -> Result<ReducedDensityMatrix<T>> {
    let (aa, _) = vacuum_evolution(system, drive, t, tol)?;
    let mut rho = ReducedDensityMatrix::zeros(dim);
    for p in 0..dim {
        for q in 0..dim {
            rho.set(p, q, coherent_dm_entry(aa, p, q));
        }
    }
    Ok(rho)
}

/// `⟨α|μ⟩ = exp(-|α|²/2 - |μ|²/2 + ᾱ μ)`.
pub fn coherent_overlap<T: Real>(alpha: Complex<T>, mu: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    (alpha.conj() * mu - alpha.norm_sqr() * half - mu.norm_sqr() * half).exp()
}

/// `⟨α|_A ⟨β|_B φ(t)⟩` for the initial state `|n⟩_a|m⟩_b`, projected on
/// coherent states of the normal modes `A`, `B`.
///
/// Double sum over the binomial expansion of `(cA† + sB†)^n (-sA† + cB†)^m`
/// with each `A† → e^{-i f1_A} ᾱ - i f̄2_A` and `B† → e^{-i f1_B} β̄ - i f̄2_B`,
/// times the vacuum amplitude `⟨α|μ_A⟩⟨β|μ_B⟩`. The global dynamical phase
/// that accompanies a nonzero drive is not included.
#[allow(clippy::too_many_arguments)]
pub fn fock_pair_coherent_amplitude<T: Real>(
    n: usize,
    m: usize,
    alpha: Complex<T>,
    beta: Complex<T>,
    system: &TwoModeSystem<T>,
    drive: &DriveWaveform<T>,
    t: T,
    tol: T,
) -> Result<Complex<T>> {
    let fun = drive_functionals(system, drive, t, tol)?;
    let (s, c) = system.frame_angle(t)?.sin_cos();
    let i = imag_unit::<T>();
    let x = cis(-fun.f1_a) * alpha.conj() - i * fun.f2_a.conj();
    let y = cis(-fun.f1_b) * beta.conj() - i * fun.f2_b.conj();

    let mut sum = Complex::new(T::zero(), T::zero());
    for p in 0..=n {
        for q in 0..=m {
            let sign = if (m - q).is_multiple_of(2) { T::one() } else { -T::one() };
            let weight = binomial::<T>(n, p)
                * binomial::<T>(m, q)
                * sign
                * c.powi((n - p + q) as i32)
                * s.powi((m - q + p) as i32);
            sum = sum + x.powu((n + m - p - q) as u32) * y.powu((p + q) as u32) * weight;
        }
    }
    let norm = (factorial::<T>(n) * factorial::<T>(m)).sqrt();
    let vacuum = coherent_overlap(alpha, fun.mu_a) * coherent_overlap(beta, fun.mu_b);
    Ok(sum * vacuum / norm)
}
