//! Time stepping: classical RK4 with Richardson step control, and an exact
//! eigen-exponential path for time-independent networks.

use std::sync::Arc;

use num_complex::Complex;
use serde::Serialize;

use super::sector::{check_gamma, HoppingTable, SectorBasis, SectorStateVector};
use super::BosonicNetwork;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix, SymmetricEigen};
use crate::scalar::{cis, norm_sqr, Real};

/// Largest sector diagonalized densely by [`PropagationMethod::Auto`].
pub const EIGEN_PATH_LIMIT: usize = 1200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMethod {
    /// Eigen path for time-independent networks of modest size, RK4 otherwise.
    Auto,
    Rk4,
    Eigen,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions<T> {
    /// Local error target per accepted step.
    pub tol: T,
    pub method: PropagationMethod,
    pub initial_step: Option<T>,
}

impl<T: Real> PropagationOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, method: PropagationMethod::Auto, initial_step: None }
    }

    pub fn method(mut self, method: PropagationMethod) -> Self {
        self.method = method;
        self
    }
}

/// Bookkeeping of one propagation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropagationReport {
    pub method: PropagationMethod,
    pub steps: usize,
    pub rejected: usize,
    pub smallest_step: f64,
    /// `max |‖ψ‖/‖ψ0‖ - 1|` over accepted steps; reported, not corrected.
    pub norm_drift: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorPropagation<T> {
    pub state: SectorStateVector<T>,
    pub report: PropagationReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorTrajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<SectorStateVector<T>>,
    pub report: PropagationReport,
}

struct Stats<T> {
    steps: usize,
    rejected: usize,
    smallest: T,
    step: T,
}

/// Adaptive RK4 on `[t0, t1]`, landing on every breakpoint.
///
/// Each step is taken once with `h` and twice with `h/2`; the difference
/// over 15 estimates the local error of the halved result, and the
/// extrapolated value `y2 + (y2 - y1)/15` is kept. `rhs` receives times
/// clamped into the open segment so one-sided limits are used at jumps.
#[allow(clippy::too_many_arguments)]
pub(crate) fn rk4_richardson<T, F, O>(
    y: &mut [Complex<T>],
    t0: T,
    t1: T,
    breakpoints: &[T],
    h0: T,
    tol: T,
    mut rhs: F,
    mut observe: O,
) -> Result<(usize, usize, T, T)>
where
    T: Real,
    F: FnMut(T, &[Complex<T>], &mut [Complex<T>]) -> Result<()>,
    O: FnMut(T, &[Complex<T>]) -> Result<()>,
{
    let mut nodes: Vec<T> = breakpoints.iter().copied().filter(|&b| b > t0 && b < t1).collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    nodes.dedup();
    nodes.push(t1);

    let n = y.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut buf = Rk4Buffers::new(n, zero);
    let mut stats = Stats { steps: 0, rejected: 0, smallest: T::infinity(), step: h0 };
    let mut a = t0;
    for &b in &nodes {
        if !(b > a) {
            continue;
        }
        let nudge = (T::lit(4.0) * T::epsilon() * a.abs().max(b.abs())).min((b - a) / T::lit(4.0));
        let (lo, hi) = (a + nudge, b - nudge);
        let mut clamped = |s: T, x: &[Complex<T>], out: &mut [Complex<T>]| rhs(s.max(lo).min(hi), x, out);
        let mut t = a;
        while t < b {
            let mut h = stats.step.min(b - t);
            let last = h >= b - t;
            let h_min = T::lit(16.0) * T::epsilon() * t.abs().max(T::one());
            if h < h_min && !last {
                return Err(Error::Stiffness { t: t.to_f64_lossy(), h: h.to_f64_lossy() });
            }
            clamped(t, y, &mut buf.k1)?;
            let err = buf.trial(&mut clamped, t, h, y)?;
            if err <= tol {
                let end = if last { b } else { t + h };
                for i in 0..n {
                    let d = buf.half[i] - buf.full[i];
                    y[i] = buf.half[i] + d / T::lit(15.0);
                }
                stats.steps += 1;
                stats.smallest = stats.smallest.min(h);
                t = end;
                observe(t, y)?;
                let grow = if err > T::zero() { T::lit(0.9) * (tol / err).powf(T::lit(0.2)) } else { T::lit(4.0) };
                if !last {
                    stats.step = h * grow.min(T::lit(4.0)).max(T::lit(0.2));
                }
            } else {
                stats.rejected += 1;
                let shrink = if err.is_finite() { T::lit(0.9) * (tol / err).powf(T::lit(0.2)) } else { T::lit(0.1) };
                h = h * shrink.max(T::lit(0.1)).min(T::lit(0.5));
                if h < h_min {
                    return Err(Error::Stiffness { t: t.to_f64_lossy(), h: h.to_f64_lossy() });
                }
                stats.step = h;
            }
        }
        a = b;
    }
    Ok((stats.steps, stats.rejected, stats.smallest, stats.step))
}

struct Rk4Buffers<T> {
    k1: Vec<Complex<T>>,
    k2: Vec<Complex<T>>,
    k3: Vec<Complex<T>>,
    k4: Vec<Complex<T>>,
    tmp: Vec<Complex<T>>,
    mid: Vec<Complex<T>>,
    full: Vec<Complex<T>>,
    half: Vec<Complex<T>>,
    k1_mid: Vec<Complex<T>>,
}

impl<T: Real> Rk4Buffers<T> {
    fn new(n: usize, zero: Complex<T>) -> Self {
        let v = || vec![zero; n];
        Self { k1: v(), k2: v(), k3: v(), k4: v(), tmp: v(), mid: v(), full: v(), half: v(), k1_mid: v() }
    }

    /// Fills `full` (one step of `h`) and `half` (two of `h/2`); returns
    /// the Richardson error estimate. Expects `k1 = f(t, y)`.
    fn trial<F>(&mut self, f: &mut F, t: T, h: T, y: &[Complex<T>]) -> Result<T>
    where
        F: FnMut(T, &[Complex<T>], &mut [Complex<T>]) -> Result<()>,
    {
        let k1 = std::mem::take(&mut self.k1);
        let mut full = std::mem::take(&mut self.full);
        self.step(f, t, h, y, &k1, &mut full)?;
        let hh = h / T::lit(2.0);
        let mut mid = std::mem::take(&mut self.mid);
        self.step(f, t, hh, y, &k1, &mut mid)?;
        let mut k1_mid = std::mem::take(&mut self.k1_mid);
        f(t + hh, &mid, &mut k1_mid)?;
        let mut half = std::mem::take(&mut self.half);
        self.step(f, t + hh, hh, &mid, &k1_mid, &mut half)?;
        let err = full.iter().zip(&half).map(|(a, b)| (a - b).norm_sqr()).sum::<T>().sqrt() / T::lit(15.0);
        self.k1 = k1;
        self.full = full;
        self.mid = mid;
        self.k1_mid = k1_mid;
        self.half = half;
        Ok(err)
    }

    fn step<F>(&mut self, f: &mut F, t: T, h: T, y: &[Complex<T>], k1: &[Complex<T>], out: &mut [Complex<T>]) -> Result<()>
    where
        F: FnMut(T, &[Complex<T>], &mut [Complex<T>]) -> Result<()>,
    {
        let two = T::lit(2.0);
        let hh = h / two;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + k1[i] * hh;
        }
        f(t + hh, &self.tmp, &mut self.k2)?;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + self.k2[i] * hh;
        }
        f(t + hh, &self.tmp, &mut self.k3)?;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + self.k3[i] * h;
        }
        f(t + h, &self.tmp, &mut self.k4)?;
        let sixth = h / T::lit(6.0);
        for i in 0..y.len() {
            out[i] = y[i] + (k1[i] + (self.k2[i] + self.k3[i]) * two + self.k4[i]) * sixth;
        }
        Ok(())
    }
}

/// Reusable propagator for one network on one sector.
pub struct SectorPropagator<'a, T: Real, N: BosonicNetwork<T> + ?Sized> {
    network: &'a N,
    basis: Arc<SectorBasis>,
    table: HoppingTable<T>,
    options: PropagationOptions<T>,
    shift: T,
    eigen: Option<SymmetricEigen<T>>,
    rate: T,
}

impl<'a, T: Real, N: BosonicNetwork<T> + ?Sized> SectorPropagator<'a, T, N> {
    pub fn new(network: &'a N, basis: Arc<SectorBasis>, options: PropagationOptions<T>) -> Result<Self> {
        if !(options.tol > T::zero()) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if basis.modes() != network.mode_count() {
            return Err(Error::Shape { expected: network.mode_count(), found: basis.modes() });
        }
        let gamma0 = network.coefficient_matrix(T::zero())?;
        check_gamma(&gamma0, basis.modes())?;
        let table = HoppingTable::build(&basis, &network.coupled_pairs());
        let raw = table.diagonal(&gamma0, T::zero());
        let (lo, hi) = raw.iter().fold((T::infinity(), T::neg_infinity()), |(l, h), &d| (l.min(d), h.max(d)));
        let shift = (lo + hi) / T::lit(2.0);

        let use_eigen = match options.method {
            PropagationMethod::Eigen => {
                if !network.is_time_independent() {
                    return Err(Error::unsupported("eigen propagation needs a time-independent network"));
                }
                true
            }
            PropagationMethod::Rk4 => false,
            PropagationMethod::Auto => network.is_time_independent() && basis.len() <= EIGEN_PATH_LIMIT,
        };
        let eigen = if use_eigen {
            let diag = table.diagonal(&gamma0, shift);
            Some(symmetric_eigen(&table.dense(&diag, &table.couplings(&gamma0)))?)
        } else {
            None
        };
        // crude bound on the spectral radius of the shifted sector Hamiltonian
        let spread = (hi - lo) / T::lit(2.0);
        let quanta = T::from_count(basis.quanta().max(1));
        let hop = network
            .coupled_pairs()
            .iter()
            .map(|&(j, k)| gamma0[(j, k)].abs())
            .fold(T::zero(), |a, b| a + b);
        let rate = spread + quanta * (hop + T::lit(1e-3)) * T::lit(2.0);
        Ok(Self { network, basis, table, options, shift, eigen, rate })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    fn method(&self) -> PropagationMethod {
        if self.eigen.is_some() {
            PropagationMethod::Eigen
        } else {
            PropagationMethod::Rk4
        }
    }

    fn check_initial(&self, initial: &SectorStateVector<T>) -> Result<()> {
        if *initial.basis != *self.basis {
            return Err(Error::Shape { expected: self.basis.len(), found: initial.basis.len() });
        }
        Ok(())
    }

    /// State at `t_final`, starting from `initial` at `t = 0`.
    pub fn evolve(&self, initial: &SectorStateVector<T>, t_final: T) -> Result<SectorPropagation<T>> {
        let traj = self.trajectory(initial, &[t_final])?;
        Ok(SectorPropagation { state: traj.states.into_iter().next().expect("one sample"), report: traj.report })
    }

    /// States at each of the nondecreasing `times`.
    pub fn trajectory(&self, initial: &SectorStateVector<T>, times: &[T]) -> Result<SectorTrajectory<T>> {
        self.check_initial(initial)?;
        if times.iter().any(|&t| !(t >= T::zero())) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("sample times must be non-negative and nondecreasing"));
        }
        let norm0 = initial.norm();
        if !(norm0 > T::zero()) {
            return Err(Error::invalid("initial state has zero norm"));
        }
        let mut report = PropagationReport {
            method: self.method(),
            steps: 0,
            rejected: 0,
            smallest_step: f64::INFINITY,
            norm_drift: 0.0,
        };
        let mut states = Vec::with_capacity(times.len());
        let drift = |v: &[Complex<T>]| (norm_sqr(v).sqrt() / norm0 - T::one()).abs().to_f64_lossy();

        if let Some(eig) = &self.eigen {
            let v = &eig.vectors;
            let n = v.rows();
            let coeffs: Vec<Complex<T>> = (0..n)
                .map(|k| (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + initial.amplitudes[i] * v[(i, k)]))
                .collect();
            for &t in times {
                let rot: Vec<Complex<T>> = coeffs.iter().zip(&eig.values).map(|(c, &l)| c * cis(-l * t)).collect();
                let global = cis(-self.shift * t);
                let amps: Vec<Complex<T>> = (0..n)
                    .map(|i| rot.iter().enumerate().fold(Complex::new(T::zero(), T::zero()), |acc, (k, r)| acc + r * v[(i, k)]) * global)
                    .collect();
                report.norm_drift = report.norm_drift.max(drift(&amps));
                states.push(SectorStateVector { basis: self.basis.clone(), amplitudes: amps });
            }
            return Ok(SectorTrajectory { times: times.to_vec(), states, report });
        }

        let mut y = initial.amplitudes.clone();
        let mut t = T::zero();
        let mut h = self.options.initial_step.unwrap_or(T::lit(0.1) / self.rate);
        let mi = Complex::new(T::zero(), -T::one());
        let fixed = if self.network.is_time_independent() {
            let gamma = self.network.coefficient_matrix(T::zero())?;
            Some((self.table.diagonal(&gamma, self.shift), self.table.couplings(&gamma)))
        } else {
            None
        };
        for &target in times {
            if target > t {
                let bps = self.network.breakpoints(target);
                let (steps, rejected, smallest, next) = rk4_richardson(
                    &mut y,
                    t,
                    target,
                    &bps,
                    h,
                    self.options.tol,
                    |s, x, out| {
                        if let Some((diag, coupling)) = &fixed {
                            self.table.apply_into(diag, coupling, mi, x, out);
                        } else {
                            let gamma = self.network.coefficient_matrix(s)?;
                            let diag = self.table.diagonal(&gamma, self.shift);
                            self.table.apply_into(&diag, &self.table.couplings(&gamma), mi, x, out);
                        }
                        Ok(())
                    },
                    |_, x| {
                        report.norm_drift = report.norm_drift.max(drift(x));
                        Ok(())
                    },
                )?;
                report.steps += steps;
                report.rejected += rejected;
                report.smallest_step = report.smallest_step.min(smallest.to_f64_lossy());
                h = next;
                t = target;
            }
            let global = cis(-self.shift * t);
            let amps = y.iter().map(|a| a * global).collect();
            states.push(SectorStateVector { basis: self.basis.clone(), amplitudes: amps });
        }
        Ok(SectorTrajectory { times: times.to_vec(), states, report })
    }
}

/// Propagates `initial` from `t = 0` to `t_final` under `network`.
pub fn propagate_sector<T: Real, N: BosonicNetwork<T> + ?Sized>(
    initial: &SectorStateVector<T>,
    network: &N,
    t_final: T,
    tol: T,
) -> Result<SectorPropagation<T>> {
    propagate_sector_with(initial, network, t_final, PropagationOptions::with_tol(tol))
}

pub fn propagate_sector_with<T: Real, N: BosonicNetwork<T> + ?Sized>(
    initial: &SectorStateVector<T>,
    network: &N,
    t_final: T,
    options: PropagationOptions<T>,
) -> Result<SectorPropagation<T>> {
    if !(t_final >= T::zero()) {
        return Err(Error::invalid("t_final must be non-negative"));
    }
    SectorPropagator::new(network, initial.basis.clone(), options)?.evolve(initial, t_final)
}

/// Classical RK4 with `steps` equal steps and no error control.
pub fn propagate_sector_fixed_step<T: Real, N: BosonicNetwork<T> + ?Sized>(
    initial: &SectorStateVector<T>,
    network: &N,
    t_final: T,
    steps: usize,
) -> Result<SectorStateVector<T>> {
    if steps == 0 {
        return Err(Error::invalid("need at least one step"));
    }
    let table = HoppingTable::build(&initial.basis, &network.coupled_pairs());
    let mi = Complex::new(T::zero(), -T::one());
    let mut f = |s: T, x: &[Complex<T>], out: &mut [Complex<T>]| -> Result<()> {
        let gamma: Matrix<T> = network.coefficient_matrix(s)?;
        table.apply_into(&table.diagonal(&gamma, T::zero()), &table.couplings(&gamma), mi, x, out);
        Ok(())
    };
    let zero = Complex::new(T::zero(), T::zero());
    let mut buf = Rk4Buffers::new(initial.len(), zero);
    let mut y = initial.amplitudes.clone();
    let mut out = vec![zero; y.len()];
    let h = t_final / T::from_count(steps);
    for k in 0..steps {
        let t = h * T::from_count(k);
        let mut k1 = std::mem::take(&mut buf.k1);
        f(t, &y, &mut k1)?;
        buf.step(&mut f, t, h, &y, &k1, &mut out)?;
        buf.k1 = k1;
        std::mem::swap(&mut y, &mut out);
    }
    Ok(SectorStateVector { basis: initial.basis.clone(), amplitudes: y })
}
