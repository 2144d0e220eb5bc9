//! Scenario dispatch: evaluates the analytic layer (or the oracle comparison)
//! over the time grid and writes the artifacts.

use std::path::{Path, PathBuf};

use coupled_oscillators::driven::{fock_pair_coherent_amplitude, joint_distribution, reduced_density_driven, vacuum_evolution};
use coupled_oscillators::multimode::{chain_multinomial_probabilities, multinomial_probabilities};
use coupled_oscillators::oracle::{
    compare_chain, compare_coherent_transfer, compare_driven_vacuum, compare_three_mode, compare_two_mode_fock,
};
use coupled_oscillators::two_mode::{
    evolve_coherent, mean_energy_coherent, mean_energy_fock, occupation_probabilities, rectified_energy,
    reduced_density_fock,
};
use coupled_oscillators::{Error, OccupationDistribution};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Scenario};
use crate::output::{digest, resolve_dir, Artifact, Stamp, Table, Writer};
use crate::validate::{driven_means, recommended_cutoff, validate, Level, TAIL_BUDGET};

/// Default `max_abs_prob_diff` above which a comparison is flagged.
pub const DEFAULT_THRESHOLD: f64 = 1e-8;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numeric(Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numeric(e) => write!(f, "numeric error: {e}"),
            Self::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        Self::Numeric(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

pub struct RunOptions<'a> {
    pub out: Option<&'a Path>,
    pub tol: Option<f64>,
    /// Wrap a plain scenario in `compare`.
    pub compare: bool,
}

/// Everything produced by one invocation.
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

pub fn run_text(text: &str, opts: &RunOptions<'_>) -> Result<RunOutcome, RunError> {
    let mut cfg = ExperimentConfig::parse(text).map_err(|e| RunError::Config(e.0))?;
    if let Some(t) = opts.tol {
        cfg.tolerance = Some(t);
        cfg.check().map_err(|e| RunError::Config(e.0))?;
    }
    if opts.compare && !matches!(cfg.scenario, Scenario::Compare { .. }) {
        let model = Box::new(cfg.scenario.clone());
        cfg.scenario = Scenario::Compare { model, cutoff: None, threshold: None };
        cfg.check().map_err(|e| RunError::Config(e.0))?;
    }

    let mut warnings = Vec::new();
    for d in validate(&cfg) {
        match d.level {
            Level::Error => return Err(RunError::Config(d.to_string())),
            Level::Warning => warnings.push(d.to_string()),
        }
    }

    let writer = Writer {
        dir: resolve_dir(opts.out, cfg.output.dir.as_deref()),
        prefix: cfg.output.prefix.clone().unwrap_or_else(|| cfg.scenario.name().to_string()),
        stamp: Stamp { digest: digest(text.as_bytes()), scenario: cfg.scenario.name().into(), tolerance: cfg.tolerance() },
    };
    let mut files = Vec::new();
    for (suffix, artifact) in evaluate(&cfg)? {
        files.push(writer.write(&suffix, &artifact)?);
    }
    Ok(RunOutcome { files, warnings })
}

type Artifacts = Vec<(String, Artifact)>;

fn complex_columns(prefix: &str) -> [String; 2] {
    [format!("re_{prefix}"), format!("im_{prefix}")]
}

fn distribution_table(modes: usize, times: &[f64], mut at: impl FnMut(f64) -> coupled_oscillators::Result<OccupationDistribution<f64>>) -> Result<Table, Error> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=modes).map(|k| format!("n{k}")));
    cols.push("probability".into());
    let mut table = Table::new(cols);
    for &t in times {
        for (occ, p) in at(t)?.entries {
            let mut row = vec![t];
            row.extend(occ.iter().map(|&k| k as f64));
            row.push(p);
            table.push(row);
        }
    }
    Ok(table)
}

/// Computes every artifact for the config without touching the filesystem.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let times = cfg.time_grid.points();
    let t_end = cfg.time_grid.t_end;
    let tol = cfg.tolerance();
    let mut out: Artifacts = Vec::new();

    match &cfg.scenario {
        Scenario::TwoModeFock { system, n } => {
            let mut cols = vec!["t".to_string()];
            cols.extend((0..=*n).map(|s| format!("P_{}_{}", n - s, s)));
            cols.push("energy_a".into());
            let mut table = Table::new(cols);
            for &t in &times {
                let mut row = vec![t];
                row.extend(occupation_probabilities(*n, system, t)?);
                row.push(mean_energy_fock(*n, system, t)?);
                table.push(row);
            }
            out.push((String::new(), Artifact::Csv(table)));
            let rho = reduced_density_fock(*n, system, t_end)?;
            out.push(("_rho".into(), Artifact::Json(json!({ "t": t_end, "rho_a": rho.to_json() }))));
        }
        Scenario::TwoModeCoherent { system, alpha } => {
            let mut cols = vec!["t".to_string()];
            cols.extend(complex_columns("alpha_a"));
            cols.extend(complex_columns("alpha_b"));
            cols.push("energy_a".into());
            let mut table = Table::new(cols);
            for &t in &times {
                let (a, b) = evolve_coherent(*alpha, system, t)?;
                table.push(vec![t, a.re, a.im, b.re, b.im, mean_energy_coherent(*alpha, system, t)?]);
            }
            out.push((String::new(), Artifact::Csv(table)));
        }
        Scenario::Dissipation { g0_tau } => {
            let mut table = Table::new(["x", "energy"]);
            for &x in &times {
                table.push(vec![x, rectified_energy(*g0_tau, x)]);
            }
            out.push((String::new(), Artifact::Csv(table)));
        }
        Scenario::DrivenVacuum { system, drive, cutoff } => {
            let mut cols = vec!["t".to_string()];
            cols.extend(complex_columns("alpha_a"));
            cols.extend(complex_columns("alpha_b"));
            cols.extend(["n_a".to_string(), "n_b".to_string()]);
            let mut table = Table::new(cols);
            for &t in &times {
                let (a, b) = vacuum_evolution(system, drive, t, tol)?;
                table.push(vec![t, a.re, a.im, b.re, b.im, a.norm_sqr(), b.norm_sqr()]);
            }
            out.push((String::new(), Artifact::Csv(table)));
            if let Some(c) = cutoff {
                let mut joint = Table::new(["n_a", "n_b", "probability"]);
                for (na, row) in joint_distribution(*c, system, drive, t_end, tol)?.into_iter().enumerate() {
                    for (nb, p) in row.into_iter().enumerate() {
                        joint.push(vec![na as f64, nb as f64, p]);
                    }
                }
                out.push(("_joint".into(), Artifact::Csv(joint)));
                let rho = reduced_density_driven(c + 1, system, drive, t_end, tol)?;
                out.push(("_rho".into(), Artifact::Json(json!({ "t": t_end, "rho_a": rho.to_json() }))));
            }
        }
        Scenario::DrivenFock { system, drive, n, m, probes } => {
            let mut cols = vec!["t".to_string()];
            for k in 0..probes.len() {
                cols.extend(complex_columns(&format!("amp{k}")));
                cols.push(format!("abs2_amp{k}"));
            }
            let mut table = Table::new(cols);
            for &t in &times {
                let mut row = vec![t];
                for (alpha, beta) in probes {
                    let z = fock_pair_coherent_amplitude(*n, *m, *alpha, *beta, system, drive, t, tol)?;
                    row.extend([z.re, z.im, z.norm_sqr()]);
                }
                table.push(row);
            }
            out.push((String::new(), Artifact::Csv(table)));
        }
        Scenario::ThreeMode { system, n } => {
            let table = distribution_table(3, &times, |t| multinomial_probabilities(*n, system, t, tol))?;
            out.push((String::new(), Artifact::Csv(table)));
        }
        Scenario::Chain { system, n, source } => {
            let table = distribution_table(system.modes(), &times, |t| chain_multinomial_probabilities(*n, system, *source, t))?;
            out.push((String::new(), Artifact::Csv(table)));
        }
        Scenario::Compare { model, cutoff, threshold } => {
            let threshold = threshold.unwrap_or(DEFAULT_THRESHOLD);
            let (report, sampled, used_cutoff) = match &**model {
                Scenario::TwoModeFock { system, n } => (compare_two_mode_fock(*n, system, &times, tol)?, json!(times), None),
                Scenario::ThreeMode { system, n } => (compare_three_mode(*n, system, &times, tol)?, json!(times), None),
                Scenario::Chain { system, n, source } => {
                    (compare_chain(*n, system, *source, &times, tol)?, json!(times), None)
                }
                Scenario::TwoModeCoherent { system, alpha } => {
                    let m = alpha.norm_sqr();
                    let c = cutoff.unwrap_or_else(|| recommended_cutoff(m, m, TAIL_BUDGET));
                    (compare_coherent_transfer(*alpha, system, t_end, c, tol, None)?, json!([t_end]), Some(c))
                }
                Scenario::DrivenVacuum { system, drive, cutoff: inner } => {
                    let c = match cutoff.or(*inner) {
                        Some(c) => c,
                        None => {
                            let (ma, mb) = driven_means(system, drive, &cfg.time_grid, tol)?;
                            recommended_cutoff(ma, mb, TAIL_BUDGET)
                        }
                    };
                    (compare_driven_vacuum(system, drive, t_end, c, tol, None)?, json!([t_end]), Some(c))
                }
                other => return Err(RunError::Config(format!("compare is not available for {}", other.name()))),
            };
            let report_value: Value = serde_json::to_value(&report).expect("report serializes");
            out.push((
                "_report".into(),
                Artifact::Json(json!({
                    "model": model.name(),
                    "times": sampled,
                    "cutoff": used_cutoff,
                    "threshold": threshold,
                    "within_threshold": report.max_abs_prob_diff <= threshold,
                    "report": report_value,
                })),
            ));
        }
    }
    Ok(out)
}
