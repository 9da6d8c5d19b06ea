//! Experiment configuration: a TOML document describing the process, the
//! certificate, the verification schedule and the run parameters.
//!
//! ```toml
//! id = "ma1-demo"
//!
//! [process]
//! kind = "moving-average"          # independent-innovations | moving-average | martingale-difference
//! horizon = 8
//! coefficients = [1.0, 0.5]
//! innovations = [[1.0, 0.5], [-1.0, 0.5]]
//! seed = 42                        # monte-carlo path sampling
//!
//! [certificate]                    # optional; defaults to minimal/unit
//! mode = "minimal"                 # minimal | explicit
//! magnitudes = "unit"              # unit | conditional-abs
//! # phi = [0.5]                    # explicit mode only
//! # phi_tail_zero = true
//!
//! [schedule]                       # optional; defaults fit the horizon
//! n_grid = [2, 4, 8]
//! m_grid = [1, 2]
//! b_grid = [0.5, 1.0, 2.0]
//! decay_threshold = 0.3
//!
//! [run]
//! backend = "exhaustive"           # exhaustive | monte-carlo
//! trials = 10000                   # monte-carlo only
//! seed = 7                         # randomized verification checks
//! out = "out"
//! checks = ["lattice-axioms", "filtration", "independence", "mixingale", "mds-cesaro", "wlln"]
//! ```
//!
//! Unknown keys are rejected with the list of expected fields; grid and
//! distribution validation errors name the offending field.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::process::ProcessSpec;
use crate::wlln::Schedule;

/// Configuration errors carry enough position or field context to fix the
/// file.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Which backend realizes the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum BackendChoice {
    Exhaustive,
    MonteCarlo,
}

impl BackendChoice {
    pub fn name(&self) -> &'static str {
        match self {
            BackendChoice::Exhaustive => "exhaustive",
            BackendChoice::MonteCarlo => "monte-carlo",
        }
    }
}

/// The verification suites, in dependency order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    LatticeAxioms,
    Filtration,
    Independence,
    Mixingale,
    MdsCesaro,
    Wlln,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::LatticeAxioms,
        Suite::Filtration,
        Suite::Independence,
        Suite::Mixingale,
        Suite::MdsCesaro,
        Suite::Wlln,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::LatticeAxioms => "lattice-axioms",
            Suite::Filtration => "filtration",
            Suite::Independence => "independence",
            Suite::Mixingale => "mixingale",
            Suite::MdsCesaro => "mds-cesaro",
            Suite::Wlln => "wlln",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMode {
    /// Derive the dependence numbers from the realized process.
    #[default]
    Minimal,
    /// Use the `phi` stated in the config.
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MagnitudeChoice {
    /// `c_i = e`.
    #[default]
    Unit,
    /// `c_i = T|f_i|`.
    ConditionalAbs,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    #[serde(default)]
    pub mode: CertificateMode,
    #[serde(default)]
    pub magnitudes: MagnitudeChoice,
    /// Explicit dependence numbers `Φ_1..Φ_M`.
    #[serde(default)]
    pub phi: Vec<f64>,
    /// Asserts `Φ_m = 0` beyond the stated numbers.
    #[serde(default)]
    pub phi_tail_zero: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub m_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub b_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub decay_threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_backend")]
    pub backend: BackendChoice,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Suites to run; defaults to all, in dependency order.
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

fn default_backend() -> BackendChoice {
    BackendChoice::Exhaustive
}

fn default_trials() -> usize {
    10_000
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: default_backend(),
            trials: default_trials(),
            seed: 0,
            out: default_out(),
            checks: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment identifier used in CSV rows; derived from the process
    /// kind when omitted.
    #[serde(default)]
    pub id: Option<String>,
    pub process: ProcessSpec,
    #[serde(default)]
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn experiment_id(&self) -> String {
        match &self.id {
            Some(id) => id.clone(),
            None => format!("{}-h{}", self.process.kind.name(), self.process.horizon),
        }
    }

    /// The schedule with defaults fitted to the horizon: the default
    /// horizon grid keeps the powers 4, 16, 64, … that the process length
    /// allows (at least the horizon itself).
    pub fn schedule(&self) -> Schedule {
        let default = Schedule::default();
        let n_grid = self.schedule.n_grid.clone().unwrap_or_else(|| {
            let mut grid: Vec<usize> = default
                .n_grid
                .iter()
                .copied()
                .filter(|&n| n <= self.process.horizon)
                .collect();
            if grid.is_empty() {
                grid.push(self.process.horizon);
            }
            grid
        });
        Schedule {
            n_grid,
            m_grid: self.schedule.m_grid.clone().unwrap_or(default.m_grid),
            b_grid: self.schedule.b_grid.clone().unwrap_or(default.b_grid),
            decay_threshold: self
                .schedule
                .decay_threshold
                .unwrap_or(default.decay_threshold),
        }
    }

    /// The requested suites in dependency order.
    pub fn suites(&self) -> Result<Vec<Suite>, ConfigError> {
        match &self.run.checks {
            None => Ok(Suite::ALL.to_vec()),
            Some(names) => {
                let mut requested = Vec::new();
                for name in names {
                    let suite = Suite::from_name(name).ok_or_else(|| {
                        invalid(
                            "run.checks",
                            format!(
                                "unknown suite {name:?}; expected one of {}",
                                Suite::ALL.map(|s| s.name()).join(", ")
                            ),
                        )
                    })?;
                    if !requested.contains(&suite) {
                        requested.push(suite);
                    }
                }
                if requested.is_empty() {
                    return Err(invalid("run.checks", "no suites requested"));
                }
                requested.sort();
                Ok(requested)
            }
        }
    }

    fn validate(self) -> Result<Self, ConfigError> {
        let process = self
            .process
            .validated()
            .map_err(|e| invalid("process", e.to_string()))?;

        let validated = Self { process, ..self };

        let schedule = validated.schedule();
        check_grid_usize("schedule.n_grid", &schedule.n_grid)?;
        check_grid_usize("schedule.m_grid", &schedule.m_grid)?;
        check_grid_f64("schedule.b_grid", &schedule.b_grid)?;
        if *schedule.n_grid.last().expect("nonempty") > validated.process.horizon {
            return Err(invalid(
                "schedule.n_grid",
                format!(
                    "largest horizon {} exceeds the process horizon {}",
                    schedule.n_grid.last().expect("nonempty"),
                    validated.process.horizon
                ),
            ));
        }
        if schedule.n_grid[0] == 0 || schedule.m_grid[0] == 0 {
            return Err(invalid("schedule", "grids start at 1"));
        }
        if schedule.b_grid[0] <= 0.0 {
            return Err(invalid("schedule.b_grid", "levels must be positive"));
        }
        if schedule.decay_threshold.is_nan() || schedule.decay_threshold <= 0.0 {
            return Err(invalid(
                "schedule.decay_threshold",
                "threshold must be positive",
            ));
        }

        match validated.certificate.mode {
            CertificateMode::Explicit => {
                if validated.certificate.phi.is_empty() {
                    return Err(invalid(
                        "certificate.phi",
                        "explicit mode needs at least one dependence number",
                    ));
                }
                if let Some(bad) = validated
                    .certificate
                    .phi
                    .iter()
                    .find(|p| !p.is_finite() || **p < 0.0)
                {
                    return Err(invalid(
                        "certificate.phi",
                        format!("dependence number {bad} is not finite and nonnegative"),
                    ));
                }
            }
            CertificateMode::Minimal => {
                if !validated.certificate.phi.is_empty() {
                    return Err(invalid(
                        "certificate.phi",
                        "phi is set but mode is \"minimal\"; use mode = \"explicit\"",
                    ));
                }
            }
        }

        if validated.run.backend == BackendChoice::MonteCarlo && validated.run.trials < 2 {
            return Err(invalid("run.trials", "monte-carlo needs at least 2 trials"));
        }

        validated.suites()?;
        Ok(validated)
    }
}

fn check_grid_usize(field: &str, grid: &[usize]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(invalid(field, "grid is empty"));
    }
    for pair in grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(invalid(
                field,
                format!(
                    "grid must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                ),
            ));
        }
    }
    Ok(())
}

fn check_grid_f64(field: &str, grid: &[f64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(invalid(field, "grid is empty"));
    }
    for pair in grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(invalid(
                field,
                format!(
                    "grid must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                ),
            ));
        }
    }
    Ok(())
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text)?;
    config.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::ProcessKind;

    const MINIMAL: &str = r#"
        [process]
        kind = "independent-innovations"
        horizon = 8
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let config = parse_config(MINIMAL).unwrap();
        assert_eq!(config.process.kind, ProcessKind::IndependentInnovations);
        assert_eq!(config.process.innovations, vec![(1.0, 0.5), (-1.0, 0.5)]);
        assert_eq!(config.run.backend, BackendChoice::Exhaustive);
        let schedule = config.schedule();
        assert_eq!(schedule.n_grid, vec![4]);
        assert_eq!(schedule.m_grid, vec![1, 2, 4, 8]);
        assert_eq!(config.suites().unwrap(), Suite::ALL.to_vec());
        assert_eq!(config.experiment_id(), "independent-innovations-h8");
    }

    #[test]
    fn unknown_keys_are_rejected_with_expectations() {
        let text = r#"
            [process]
            kind = "independent-innovations"
            horizon = 4
            phii = [0.5]
        "#;
        let err = parse_config(text).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("phii"), "{message}");
        assert!(message.contains("expected"), "{message}");
    }

    #[test]
    fn decreasing_grid_is_rejected() {
        let text = r#"
            [process]
            kind = "independent-innovations"
            horizon = 8

            [schedule]
            n_grid = [8, 4]
        "#;
        let err = parse_config(text).unwrap_err();
        assert!(
            matches!(err, ConfigError::Validation { ref field, .. } if field == "schedule.n_grid")
        );
    }

    #[test]
    fn oversized_horizon_grid_is_rejected() {
        let text = r#"
            [process]
            kind = "independent-innovations"
            horizon = 4

            [schedule]
            n_grid = [4, 16]
        "#;
        assert!(parse_config(text).is_err());
    }

    #[test]
    fn explicit_mode_requires_phi() {
        let text = r#"
            [process]
            kind = "moving-average"
            horizon = 4
            coefficients = [1.0, 0.5]

            [certificate]
            mode = "explicit"
        "#;
        let err = parse_config(text).unwrap_err();
        assert!(
            matches!(err, ConfigError::Validation { ref field, .. } if field == "certificate.phi")
        );
    }

    #[test]
    fn minimal_mode_rejects_phi() {
        let text = r#"
            [process]
            kind = "moving-average"
            horizon = 4
            coefficients = [1.0, 0.5]

            [certificate]
            phi = [0.5]
        "#;
        assert!(parse_config(text).is_err());
    }

    #[test]
    fn unknown_suite_is_rejected() {
        let text = r#"
            [process]
            kind = "independent-innovations"
            horizon = 4

            [run]
            checks = ["lattice-axioms", "wllnn"]
        "#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("expected one of"));
    }

    #[test]
    fn suites_come_back_in_dependency_order() {
        let text = r#"
            [process]
            kind = "independent-innovations"
            horizon = 4

            [run]
            checks = ["wlln", "lattice-axioms"]
        "#;
        let config = parse_config(text).unwrap();
        assert_eq!(
            config.suites().unwrap(),
            vec![Suite::LatticeAxioms, Suite::Wlln]
        );
    }

    #[test]
    fn parse_error_reports_position() {
        let err = parse_config("[process\nkind = 1").unwrap_err();
        let message = err.to_string();
        assert!(matches!(err, ConfigError::Parse(_)));
        // toml reports line/column context.
        assert!(message.contains("line 1"), "{message}");
    }

    #[test]
    fn config_echo_round_trips() {
        let config = parse_config(MINIMAL).unwrap();
        let echoed = toml::to_string_pretty(&config).unwrap();
        let back = parse_config(&echoed).unwrap();
        assert_eq!(back.process.horizon, config.process.horizon);
        assert_eq!(back.run.backend, config.run.backend);
    }
}
