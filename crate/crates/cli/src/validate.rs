//! Static checks and physics caveats for a config, reported rather than thrown.

use std::fmt;

use coupled_oscillators::combinatorics::{composition_count, poisson_weight};
use coupled_oscillators::driven::vacuum_evolution;
use coupled_oscillators::oracle::DEFAULT_SECTOR_CAPACITY;
use coupled_oscillators::{CouplingScheduleF64, DriveWaveformF64, TwoModeSystemF64};

use crate::config::{ExperimentConfig, Scenario, TimeGrid};

/// Poisson tail mass allowed outside a truncated two-mode box.
pub const TAIL_BUDGET: f64 = 1e-12;

const APPROXIMATE: &str = "analytic layer approximate; use compare";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub level: Level,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn error(code: &'static str, message: impl Into<String>) -> Self {
        Self { level: Level::Error, code, message: message.into() }
    }

    fn warning(code: &'static str, message: impl Into<String>) -> Self {
        Self { level: Level::Warning, code, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            Level::Error => "error",
            Level::Warning => "warning",
        };
        write!(f, "{level}[{}]: {}", self.code, self.message)
    }
}

/// Diagnostics for a raw config document. Empty means clean.
pub fn validate_text(text: &str) -> Vec<Diagnostic> {
    match ExperimentConfig::parse(text) {
        Ok(cfg) => validate(&cfg),
        Err(e) => vec![Diagnostic::error("schema", e.0)],
    }
}

pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    scenario(&cfg.scenario, &cfg.time_grid, false, &mut out);
    out
}

/// Smallest cutoff whose summed Poisson tails for the two means stay under `budget`.
pub fn recommended_cutoff(mean_a: f64, mean_b: f64, budget: f64) -> usize {
    let mean = mean_a.max(mean_b);
    let mut n = mean.ceil() as usize;
    loop {
        if poisson_tail(mean_a, n) + poisson_tail(mean_b, n) < budget {
            return n.max(1);
        }
        n += 1;
    }
}

fn poisson_tail(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut k = n + 1;
    loop {
        let w = poisson_weight(mean, k);
        sum += w;
        if k as f64 > mean && w < sum * 1e-17 {
            return sum;
        }
        k += 1;
    }
}

/// Largest mean occupations reached by the driven vacuum over the grid.
pub fn driven_means(system: &TwoModeSystemF64, drive: &DriveWaveformF64, grid: &TimeGrid, tol: f64) -> coupled_oscillators::Result<(f64, f64)> {
    let probe = TimeGrid { samples: grid.samples.min(65), ..grid.clone() };
    let mut m = (0.0f64, 0.0f64);
    for t in probe.points() {
        let (a, b) = vacuum_evolution(system, drive, t, tol)?;
        m = (m.0.max(a.norm_sqr()), m.1.max(b.norm_sqr()));
    }
    Ok(m)
}

fn sign_change(s: &CouplingScheduleF64, label: &str, out: &mut Vec<Diagnostic>) {
    if s.changes_sign() {
        out.push(Diagnostic::warning("sign_change", format!("{label} changes sign; {APPROXIMATE}")));
    }
}

fn two_mode(system: &TwoModeSystemF64, grid: &TimeGrid, out: &mut Vec<Diagnostic>) {
    match system.theta_dot_bound(grid.t_start, grid.t_end) {
        Ok(w) if w > 0.0 => out.push(Diagnostic::warning(
            "theta_dot",
            format!("detuned system with a time-dependent coupling (|dθ/dt| up to {w:.3e}); {APPROXIMATE}"),
        )),
        Ok(_) => {}
        Err(e) => out.push(Diagnostic::error("numeric", e.to_string())),
    }
    if system.is_resonant() {
        sign_change(&system.schedule, "coupling", out);
    }
}

fn capacity(modes: usize, quanta: usize, out: &mut Vec<Diagnostic>) {
    let size = composition_count(modes, quanta);
    if size > DEFAULT_SECTOR_CAPACITY as u128 {
        out.push(Diagnostic::error(
            "capacity",
            format!("{quanta} quanta in {modes} modes span {size} sector states, above the limit {DEFAULT_SECTOR_CAPACITY}"),
        ));
    }
}

fn truncation(cutoff: Option<usize>, means: coupled_oscillators::Result<(f64, f64)>, out: &mut Vec<Diagnostic>) {
    let (ma, mb) = match means {
        Ok(m) => m,
        Err(e) => return out.push(Diagnostic::error("numeric", e.to_string())),
    };
    let need = recommended_cutoff(ma, mb, TAIL_BUDGET);
    match cutoff {
        Some(c) if c < need => out.push(Diagnostic::warning(
            "truncation",
            format!("cutoff {c} leaves Poisson tail above {TAIL_BUDGET:e}; recommended cutoff {need}"),
        )),
        _ => {}
    }
    let side = cutoff.unwrap_or(need) as u128 + 1;
    if side * side > DEFAULT_SECTOR_CAPACITY as u128 {
        out.push(Diagnostic::error("capacity", format!("truncated box of {} states above the limit {DEFAULT_SECTOR_CAPACITY}", side * side)));
    }
}

fn scenario(s: &Scenario, grid: &TimeGrid, oracle: bool, out: &mut Vec<Diagnostic>) {
    let tol = coupled_oscillators::DEFAULT_TOL;
    match s {
        Scenario::TwoModeFock { system, n } => {
            two_mode(system, grid, out);
            if oracle {
                capacity(2, *n, out);
            }
        }
        Scenario::TwoModeCoherent { system, alpha } => {
            if !system.is_resonant() {
                out.push(Diagnostic::error("unsupported", "coherent transfer is only available on resonance"));
            }
            sign_change(&system.schedule, "coupling", out);
            if oracle {
                let m = alpha.norm_sqr();
                truncation(None, Ok((m, m)), out);
            }
        }
        Scenario::Dissipation { .. } => {}
        Scenario::DrivenVacuum { system, drive, cutoff } => {
            two_mode(system, grid, out);
            truncation(*cutoff, driven_means(system, drive, grid, tol), out);
        }
        Scenario::DrivenFock { system, .. } => two_mode(system, grid, out),
        Scenario::ThreeMode { system, n } => {
            match system.has_constant_ratio(grid.t_start, grid.t_end) {
                Ok(true) => {}
                Ok(false) => out.push(Diagnostic::warning("theta_dot", format!("g'/g varies in time; {APPROXIMATE}"))),
                Err(e) => out.push(Diagnostic::error("numeric", e.to_string())),
            }
            sign_change(&system.g, "g", out);
            sign_change(&system.g_prime, "g'", out);
            capacity(3, *n, out);
        }
        Scenario::Chain { system, n, .. } => {
            if !system.is_time_independent() {
                out.push(Diagnostic::warning("theta_dot", "chain couplings vary in time; analytic layer unavailable; use compare"));
            }
            capacity(system.modes(), *n, out);
        }
        Scenario::Compare { model, cutoff, .. } => match (&**model, cutoff) {
            (Scenario::DrivenVacuum { system, drive, cutoff: inner }, outer) => {
                two_mode(system, grid, out);
                truncation(outer.or(*inner), driven_means(system, drive, grid, tol), out);
            }
            (Scenario::TwoModeCoherent { alpha, .. }, Some(c)) => {
                scenario(model, grid, false, out);
                let m = alpha.norm_sqr();
                truncation(Some(*c), Ok((m, m)), out);
            }
            (inner, _) => scenario(inner, grid, true, out),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_meets_budget() {
        let n = recommended_cutoff(2.25, 0.0, 1e-12);
        assert!(poisson_tail(2.25, n) < 1e-12);
        assert!(poisson_tail(2.25, n - 1) >= 1e-12);
        assert_eq!(recommended_cutoff(0.0, 0.0, 1e-12), 1);
    }

    #[test]
    fn tail_matches_complement() {
        let cdf: f64 = (0..=3).map(|k| poisson_weight(1.0, k)).sum();
        assert!((poisson_tail(1.0, 3) - (1.0 - cdf)).abs() < 1e-15);
    }
}
