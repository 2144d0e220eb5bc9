//! Experiment configuration documents.

use std::path::PathBuf;

use coupled_oscillators::{ChainSystemF64, DriveWaveformF64, ThreeModeSystemF64, TwoModeSystemF64, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub output: OutputSettings,
    /// Overrides the default integration / quadrature tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = self.samples;
        let h = (self.t_end - self.t_start) / (n - 1) as f64;
        (0..n).map(|k| if k + 1 == n { self.t_end } else { self.t_start + h * k as f64 }).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// File stem; defaults to the scenario name.
    #[serde(default)]
    pub prefix: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    /// `|n⟩_a|0⟩_b`: occupation probabilities and a-mode energy.
    TwoModeFock { system: TwoModeSystemF64, n: usize },
    /// `|α⟩_a|0⟩_b` on resonance.
    TwoModeCoherent { system: TwoModeSystemF64, alpha: C64 },
    /// Emitted energy `E(x)` of the rectification scheme; the grid runs over `x = g0 t`.
    Dissipation { g0_tau: f64 },
    /// Both modes start in vacuum under a classical source.
    DrivenVacuum {
        system: TwoModeSystemF64,
        drive: DriveWaveformF64,
        #[serde(default)]
        cutoff: Option<usize>,
    },
    /// `|n⟩_a|m⟩_b` under a source, projected on normal-mode coherent probes.
    DrivenFock {
        system: TwoModeSystemF64,
        drive: DriveWaveformF64,
        n: usize,
        m: usize,
        probes: Vec<(C64, C64)>,
    },
    /// `|n00⟩` in the three-mode star.
    ThreeMode { system: ThreeModeSystemF64, n: usize },
    /// `n` quanta in one mode of a chain.
    Chain { system: ChainSystemF64, n: usize, source: usize },
    /// Analytic layer against the oracle for the wrapped scenario.
    Compare {
        model: Box<Scenario>,
        #[serde(default)]
        cutoff: Option<usize>,
        /// Flag the report when `max_abs_prob_diff` exceeds this.
        #[serde(default)]
        threshold: Option<f64>,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TwoModeFock { .. } => "two_mode_fock",
            Self::TwoModeCoherent { .. } => "two_mode_coherent",
            Self::Dissipation { .. } => "dissipation",
            Self::DrivenVacuum { .. } => "driven_vacuum",
            Self::DrivenFock { .. } => "driven_fock",
            Self::ThreeMode { .. } => "three_mode",
            Self::Chain { .. } => "chain",
            Self::Compare { .. } => "compare",
        }
    }
}

/// Malformed or inconsistent configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError(format!("config schema: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(coupled_oscillators::DEFAULT_TOL)
    }

    /// Structural checks; physics caveats are left to `validate`.
    pub fn check(&self) -> Result<(), ConfigError> {
        let g = &self.time_grid;
        if g.samples < 2 {
            return Err(ConfigError("time_grid.samples must be at least 2".into()));
        }
        if !(g.t_start >= 0.0) || !(g.t_end > g.t_start) || !g.t_end.is_finite() {
            return Err(ConfigError("time_grid needs t_end > t_start >= 0".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err(ConfigError("tolerance must lie in (0, 1)".into()));
            }
        }
        check_scenario(&self.scenario, false)
    }
}

fn invalid(e: coupled_oscillators::Error) -> ConfigError {
    ConfigError(e.to_string())
}

fn check_scenario(s: &Scenario, nested: bool) -> Result<(), ConfigError> {
    match s {
        Scenario::TwoModeFock { system, .. } | Scenario::TwoModeCoherent { system, .. } => system.validate().map_err(invalid),
        Scenario::Dissipation { g0_tau } => {
            if *g0_tau > 0.0 && g0_tau.is_finite() {
                Ok(())
            } else {
                Err(ConfigError("g0_tau must be positive".into()))
            }
        }
        Scenario::DrivenVacuum { system, drive, cutoff } => {
            system.validate().map_err(invalid)?;
            drive.validate().map_err(invalid)?;
            match cutoff {
                Some(0) => Err(ConfigError("cutoff must be at least 1".into())),
                _ => Ok(()),
            }
        }
        Scenario::DrivenFock { system, drive, probes, .. } => {
            system.validate().map_err(invalid)?;
            drive.validate().map_err(invalid)?;
            if probes.is_empty() {
                return Err(ConfigError("driven_fock needs at least one probe".into()));
            }
            Ok(())
        }
        Scenario::ThreeMode { system, .. } => system.validate().map_err(invalid),
        Scenario::Chain { system, source, .. } => {
            system.validate().map_err(invalid)?;
            if *source >= system.modes() {
                return Err(ConfigError(format!("source mode {source} outside a chain of {}", system.modes())));
            }
            Ok(())
        }
        Scenario::Compare { model, .. } => {
            if nested {
                return Err(ConfigError("compare scenarios cannot be nested".into()));
            }
            if matches!(**model, Scenario::Dissipation { .. } | Scenario::DrivenFock { .. }) {
                return Err(ConfigError(format!("compare is not available for {}", model.name())));
            }
            check_scenario(model, true)
        }
    }
}
