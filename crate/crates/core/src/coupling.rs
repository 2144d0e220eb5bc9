//! Time-dependent couplings and the two-mode normal-mode transformation:
//! eigenfrequencies, mixing angle, and accumulated phase integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_real;
use crate::scalar::Real;

/// Default relative tolerance for quadrature-backed integrals.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Coupling strength `g(t)` between two modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingSchedule<T> {
    /// `g(t) = g0`.
    Constant { g0: T },
    /// `g(t) = g0` for `t <= tau`, then 0.
    Switch { g0: T, tau: T },
    /// `g(t) = g0 e^{-t/tau}`.
    ExpDecay { g0: T, tau: T },
    /// Piecewise-linear interpolation through `(times[i], values[i])`.
    Tabulated { times: Vec<T>, values: Vec<T> },
}

impl<T: Real> CouplingSchedule<T> {
    pub fn constant(g0: T) -> Self {
        Self::Constant { g0 }
    }

    pub fn switch(g0: T, tau: T) -> Result<Self> {
        let s = Self::Switch { g0, tau };
        s.validate()?;
        Ok(s)
    }

    pub fn exp_decay(g0: T, tau: T) -> Result<Self> {
        let s = Self::ExpDecay { g0, tau };
        s.validate()?;
        Ok(s)
    }

    pub fn tabulated(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        let s = Self::Tabulated { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: T, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be finite")))
            }
        };
        match self {
            Self::Constant { g0 } => finite(*g0, "g0"),
            Self::Switch { g0, tau } | Self::ExpDecay { g0, tau } => {
                finite(*g0, "g0")?;
                if !(*tau > T::zero()) || !tau.is_finite() {
                    return Err(Error::invalid("tau must be positive and finite"));
                }
                Ok(())
            }
            Self::Tabulated { times, values } => validate_table(times, values.len()),
        }
    }

    /// `g(t)`.
    pub fn eval(&self, t: T) -> Result<T> {
        if t < T::zero() {
            return Err(Error::Range { t: t.to_f64_lossy(), lo: 0.0, hi: f64::INFINITY });
        }
        Ok(match self {
            Self::Constant { g0 } => *g0,
            Self::Switch { g0, tau } => {
                if t <= *tau {
                    *g0
                } else {
                    T::zero()
                }
            }
            Self::ExpDecay { g0, tau } => *g0 * (-t / *tau).exp(),
            Self::Tabulated { times, values } => interpolate(times, values, t)?,
        })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant { .. })
    }

    /// True when `g(t) = 0` for every admissible `t`.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            Self::Constant { g0 } | Self::Switch { g0, .. } | Self::ExpDecay { g0, .. } => *g0 == T::zero(),
            Self::Tabulated { values, .. } => values.iter().all(|v| *v == T::zero()),
        }
    }

    /// Sign of the coupling, taken from `g0` or the first nonzero sample.
    pub fn polarity(&self) -> T {
        let reference = match self {
            Self::Constant { g0 } | Self::Switch { g0, .. } | Self::ExpDecay { g0, .. } => *g0,
            Self::Tabulated { values, .. } => values.iter().copied().find(|v| *v != T::zero()).unwrap_or(T::zero()),
        };
        if reference < T::zero() {
            -T::one()
        } else {
            T::one()
        }
    }

    /// True when a tabulated coupling crosses zero with a sign change.
    pub fn changes_sign(&self) -> bool {
        match self {
            Self::Tabulated { values, .. } => {
                values.iter().any(|v| *v > T::zero()) && values.iter().any(|v| *v < T::zero())
            }
            _ => false,
        }
    }

    /// Points in `(0, t)` where `g` has a kink or jump.
    pub fn breakpoints(&self, t: T) -> Vec<T> {
        match self {
            Self::Switch { tau, .. } if *tau < t => vec![*tau],
            Self::Tabulated { times, .. } => times.iter().copied().filter(|&x| x > T::zero() && x < t).collect(),
            _ => Vec::new(),
        }
    }

    /// Upper end of the admissible time range.
    pub fn horizon(&self) -> T {
        match self {
            Self::Tabulated { times, .. } => *times.last().expect("validated table"),
            _ => T::infinity(),
        }
    }

    /// Largest `|g|` the schedule ever attains.
    pub fn peak(&self) -> T {
        match self {
            Self::Constant { g0 } | Self::Switch { g0, .. } | Self::ExpDecay { g0, .. } => g0.abs(),
            Self::Tabulated { values, .. } => values.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        }
    }

    /// `G(t) = ∫₀ᵗ |g(t')| dt'`, exact for every variant.
    pub fn accumulated_magnitude(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        Ok(match self {
            Self::Constant { g0 } => g0.abs() * t,
            Self::Switch { g0, tau } => g0.abs() * t.min(*tau),
            Self::ExpDecay { g0, tau } => g0.abs() * *tau * (-(-t / *tau).exp_m1()),
            Self::Tabulated { times, values } => {
                let mut acc = T::zero();
                for i in 0..times.len() - 1 {
                    let (t0, t1) = (times[i], times[i + 1]);
                    if t0 >= t {
                        break;
                    }
                    let end = t1.min(t);
                    let (y0, y1) = (values[i], interpolate(times, values, end)?);
                    acc = acc + abs_linear_integral(y0, y1, end - t0);
                }
                acc
            }
        })
    }

    /// `∫₀ᵗ √(g² + c²) dt'` for a constant `c ≥ 0`.
    ///
    /// Closed form for the analytic variants, adaptive Simpson per tabulated
    /// segment otherwise.
    pub fn root_integral(&self, c: T, t: T, tol: T) -> Result<T> {
        self.check_time(t)?;
        let c = c.abs();
        Ok(match self {
            Self::Constant { g0 } => g0.hypot(c) * t,
            Self::Switch { g0, tau } => {
                let on = t.min(*tau);
                g0.hypot(c) * on + c * (t - on)
            }
            Self::ExpDecay { g0, tau } => {
                let u0 = g0.abs();
                if c == T::zero() {
                    u0 * *tau * (-(-t / *tau).exp_m1())
                } else if u0 == T::zero() {
                    c * t
                } else {
                    // substitution u = |g0| e^{-t/τ}: ∫√(u²+c²)/u du in closed form
                    let ut = u0 * (-t / *tau).exp();
                    let s0 = u0.hypot(c);
                    let st = ut.hypot(c);
                    *tau * (s0 - st) - c * *tau * ((c + s0) / (c + st)).ln() + c * t
                }
            }
            Self::Tabulated { times, .. } => {
                let mut acc = T::zero();
                for i in 0..times.len() - 1 {
                    let t0 = times[i];
                    if t0 >= t {
                        break;
                    }
                    let end = times[i + 1].min(t);
                    acc = acc
                        + integrate_real(|x| Ok(self.eval(x)?.hypot(c)), t0, end, &[], None, tol)?;
                }
                acc
            }
        })
    }

    fn check_time(&self, t: T) -> Result<()> {
        let hi = self.horizon();
        if t < T::zero() || t > hi {
            let lo = match self {
                Self::Tabulated { times, .. } => times[0].to_f64_lossy(),
                _ => 0.0,
            };
            return Err(Error::Range { t: t.to_f64_lossy(), lo, hi: hi.to_f64_lossy() });
        }
        if let Self::Tabulated { times, .. } = self {
            if times[0] > T::zero() {
                return Err(Error::Range {
                    t: 0.0,
                    lo: times[0].to_f64_lossy(),
                    hi: hi.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn validate_table<T: Real>(times: &[T], n_values: usize) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::invalid("tabulated schedule needs at least 2 samples"));
    }
    if times.len() != n_values {
        return Err(Error::Shape { expected: times.len(), found: n_values });
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("tabulated times must be finite"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("tabulated times must be strictly ascending"));
    }
    Ok(())
}

/// Linear interpolation in a validated table, erroring outside its range.
pub(crate) fn interpolate<T, V>(times: &[T], values: &[V], t: T) -> Result<V>
where
    T: Real,
    V: Copy + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V>,
{
    let (lo, hi) = (times[0], times[times.len() - 1]);
    if t < lo || t > hi {
        return Err(Error::Range { t: t.to_f64_lossy(), lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
    }
    let j = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
    let (t0, t1) = (times[j - 1], times[j]);
    let w = (t - t0) / (t1 - t0);
    Ok(values[j - 1] * (T::one() - w) + values[j] * w)
}

/// `∫|y|` over a segment of width `w` on which `y` runs linearly from `y0` to `y1`.
fn abs_linear_integral<T: Real>(y0: T, y1: T, w: T) -> T {
    let two = T::lit(2.0);
    if (y0 >= T::zero()) == (y1 >= T::zero()) || y0 == T::zero() || y1 == T::zero() {
        w * (y0.abs() + y1.abs()) / two
    } else {
        w * (y0 * y0 + y1 * y1) / (two * (y0.abs() + y1.abs()))
    }
}

/// Two coupled modes `ω0 a†a + Ω b†b + g(t)(a b† + a† b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoModeSystem<T> {
    pub omega0: T,
    #[serde(alias = "Omega")]
    pub omega: T,
    pub schedule: CouplingSchedule<T>,
}

/// Accumulated phases of the two normal modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseIntegrals<T> {
    /// `f_A = ∫ λ_A`.
    pub f_a: T,
    /// `f_B = ∫ λ_B`.
    pub f_b: T,
    /// `f_A - f_B`.
    pub delta_f: T,
    /// `G = ∫ |g|`.
    pub coupling_integral: T,
    /// Accumulated coupling magnitude; for two modes this equals `G`.
    pub eta: T,
}

impl<T: Real> TwoModeSystem<T> {
    pub fn new(omega0: T, omega: T, schedule: CouplingSchedule<T>) -> Result<Self> {
        let s = Self { omega0, omega, schedule };
        s.validate()?;
        Ok(s)
    }

    /// Equal frequencies.
    pub fn resonant(omega0: T, schedule: CouplingSchedule<T>) -> Result<Self> {
        Self::new(omega0, omega0, schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > T::zero()) || !(self.omega > T::zero()) {
            return Err(Error::invalid("mode frequencies must be positive"));
        }
        if self.omega < self.omega0 {
            return Err(Error::invalid("detuning Omega - omega0 must be non-negative; relabel the modes"));
        }
        self.schedule.validate()
    }

    /// `Δ = Ω - ω0`.
    pub fn detuning(&self) -> T {
        self.omega - self.omega0
    }

    /// `ω̄ = (Ω + ω0) / 2`.
    pub fn mean_frequency(&self) -> T {
        (self.omega + self.omega0) / T::lit(2.0)
    }

    pub fn is_resonant(&self) -> bool {
        self.omega == self.omega0
    }

    /// `(λ_A, λ_B) = ω̄ ∓ √(g² + Δ²/4)`.
    pub fn eigenfrequencies(&self, t: T) -> Result<(T, T)> {
        let g = self.schedule.eval(t)?;
        let half_split = g.hypot(self.detuning() / T::lit(2.0));
        let mean = self.mean_frequency();
        Ok((mean - half_split, mean + half_split))
    }

    /// `θ(t) = ½ atan2(2 g(t), Δ)`.
    pub fn mixing_angle(&self, t: T) -> Result<T> {
        let g = self.schedule.eval(t)?;
        Ok((T::lit(2.0) * g).atan2(self.detuning()) / T::lit(2.0))
    }

    /// Rotation angle used to build evolved states.
    ///
    /// Off resonance this is [`mixing_angle`](Self::mixing_angle). On
    /// resonance the bare modes are degenerate whenever `g = 0`, so the angle
    /// is pinned to `±π/4` (sign of the schedule) for all times.
    pub fn frame_angle(&self, t: T) -> Result<T> {
        if self.is_resonant() {
            Ok(self.schedule.polarity() * T::FRAC_PI_4())
        } else {
            self.mixing_angle(t)
        }
    }

    /// Phase integrals `f_A`, `f_B`, `δf`, `G` at time `t`.
    pub fn phase_integrals(&self, t: T, tol: T) -> Result<PhaseIntegrals<T>> {
        if !(tol > T::zero()) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        let root = self.schedule.root_integral(self.detuning() / T::lit(2.0), t, tol)?;
        let mean = self.mean_frequency() * t;
        let f_a = mean - root;
        let f_b = mean + root;
        let g_int = self.schedule.accumulated_magnitude(t)?;
        Ok(PhaseIntegrals { f_a, f_b, delta_f: f_a - f_b, coupling_integral: g_int, eta: g_int })
    }

    /// Finite-difference estimate of `max |dθ/dt|` on `[t0, t1]`.
    ///
    /// Zero exactly when the frame angle cannot move: resonance or a constant
    /// schedule.
    pub fn theta_dot_bound(&self, t0: T, t1: T) -> Result<T> {
        if !(t1 > t0) || t0 < T::zero() {
            return Err(Error::invalid("theta_dot_bound needs t1 > t0 >= 0"));
        }
        if self.is_resonant() || self.schedule.is_constant() {
            return Ok(T::zero());
        }
        const SAMPLES: usize = 2048;
        let h = (t1 - t0) / T::from_count(SAMPLES);
        let mut prev = self.frame_angle(t0)?;
        let mut worst = T::zero();
        for k in 1..=SAMPLES {
            let t = if k == SAMPLES { t1 } else { t0 + h * T::from_count(k) };
            let cur = self.frame_angle(t)?;
            worst = worst.max((cur - prev).abs() / h);
            prev = cur;
        }
        Ok(worst)
    }
}

/// Free-function form of [`CouplingSchedule::eval`].
pub fn eval_coupling<T: Real>(schedule: &CouplingSchedule<T>, t: T) -> Result<T> {
    schedule.eval(t)
}
