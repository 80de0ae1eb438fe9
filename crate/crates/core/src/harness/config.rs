//! TOML experiment configuration and its validation.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::acquisition::{AcquisitionKind, PriorShape, PriorWeight};
use crate::optim::{Budget, FalsificationProblem, FitSchedule, PiboOptions, TrustRegionParams};
use crate::signal::{ChannelSpec, InputSpec};
use crate::stl::{parse, Formula};
use crate::sut::{DeltaSigmaConfig, ExternalSut, SsConfig, SutHandle};

fn default_repetitions() -> usize {
    20
}

fn default_budget() -> usize {
    1000
}

fn default_parallelism() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Simulation budget `N` per run.
    #[serde(default = "default_budget")]
    pub max_simulations: usize,
    /// Initial design size `M`; `2n` when absent.
    #[serde(default)]
    pub initial_design: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    pub benchmarks: Vec<BenchmarkConfig>,
    pub optimizers: Vec<OptimizerConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub label: String,
    /// Requirement text; exactly one of `spec` and `spec_file` is given.
    #[serde(default)]
    pub spec: Option<String>,
    #[serde(default)]
    pub spec_file: Option<PathBuf>,
    pub duration: f64,
    pub step: f64,
    pub sut: SutConfig,
    pub inputs: Vec<ChannelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SutConfig {
    StaticSwitched {
        gamma: f64,
    },
    DeltaSigma {
        #[serde(default = "default_u_max")]
        u_max: f64,
        #[serde(default = "default_saturation")]
        saturation: f64,
    },
    External {
        command: Vec<String>,
        #[serde(default)]
        working_dir: Option<PathBuf>,
        #[serde(default = "default_timeout")]
        timeout_secs: f64,
        /// Output channels to keep; every non-input column when empty.
        #[serde(default)]
        outputs: Vec<String>,
    },
}

fn default_u_max() -> f64 {
    DeltaSigmaConfig::default().u_max
}

fn default_saturation() -> f64 {
    DeltaSigmaConfig::default().saturation
}

fn default_timeout() -> f64 {
    60.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Vanilla,
    Turbo,
    Pibo,
    Hcr,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub shape: PriorShape,
    /// `N / 10` when absent.
    #[serde(default)]
    pub beta_star: Option<f64>,
    #[serde(default = "yes")]
    pub initial_design_from_prior: bool,
    #[serde(default = "yes")]
    pub candidates_from_prior: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub id: String,
    pub kind: OptimizerKind,
    #[serde(default)]
    pub acquisition: Option<AcquisitionKind>,
    #[serde(default)]
    pub prior: Option<PriorConfig>,
    #[serde(default)]
    pub trust_region: Option<TrustRegionParams>,
    #[serde(default)]
    pub fit: Option<FitSchedule>,
}

impl OptimizerConfig {
    pub fn acquisition(&self) -> AcquisitionKind {
        self.acquisition.unwrap_or(match self.kind {
            OptimizerKind::Turbo => AcquisitionKind::Ts,
            _ => AcquisitionKind::lcb(),
        })
    }

    pub fn pibo_options(&self, max_simulations: usize) -> PiboOptions {
        let p = self.prior.unwrap_or(PriorConfig {
            shape: PriorShape::UShaped,
            beta_star: None,
            initial_design_from_prior: true,
            candidates_from_prior: true,
        });
        PiboOptions {
            prior: PriorWeight::new(p.shape, p.beta_star.unwrap_or(max_simulations as f64 / 10.0)),
            prior_initial_design: p.initial_design_from_prior,
            prior_candidates: p.candidates_from_prior,
        }
    }
}

/// Labels and ids become file-name components joined by `__`.
fn check_key(kind: &str, key: &str) -> Result<(), ConfigError> {
    let ok = !key.is_empty()
        && !key.contains("__")
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!(
            "{kind} `{key}` must be non-empty ASCII letters, digits, `-`, `_` or `.` without `__`"
        )))
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        for b in &mut self.benchmarks {
            if let Some(f) = &mut b.spec_file {
                fix(f);
            }
            if let SutConfig::External {
                working_dir: Some(w), ..
            } = &mut b.sut
            {
                fix(w);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.repetitions < 1 {
            return Err(ConfigError::Invalid("repetitions must be at least 1".into()));
        }
        if self.parallelism < 1 {
            return Err(ConfigError::Invalid("parallelism must be at least 1".into()));
        }
        if self.benchmarks.is_empty() || self.optimizers.is_empty() {
            return Err(ConfigError::Invalid(
                "need at least one benchmark and one optimizer".into(),
            ));
        }
        let mut labels = HashSet::new();
        for b in &self.benchmarks {
            check_key("benchmark label", &b.label)?;
            if !labels.insert(&b.label) {
                return Err(ConfigError::Invalid(format!("duplicate benchmark label `{}`", b.label)));
            }
            let built = b.build()?;
            self.budget_for(built.inputs.dim())?;
        }
        let mut ids = HashSet::new();
        for o in &self.optimizers {
            check_key("optimizer id", &o.id)?;
            if !ids.insert(&o.id) {
                return Err(ConfigError::Invalid(format!("duplicate optimizer id `{}`", o.id)));
            }
            if o.prior.is_some() && o.kind != OptimizerKind::Pibo {
                return Err(ConfigError::Invalid(format!(
                    "optimizer `{}`: prior is only used by pibo",
                    o.id
                )));
            }
            if o.trust_region.is_some() && o.kind != OptimizerKind::Turbo {
                return Err(ConfigError::Invalid(format!(
                    "optimizer `{}`: trust_region is only used by turbo",
                    o.id
                )));
            }
            if let Some(p) = o.prior.and_then(|p| p.beta_star) {
                if !(p > 0.0) {
                    return Err(ConfigError::Invalid(format!(
                        "optimizer `{}`: beta_star must be positive",
                        o.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn budget_for(&self, dim: usize) -> Result<Budget, ConfigError> {
        let m = self.initial_design.unwrap_or(2 * dim);
        Budget::new(self.max_simulations, m).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

impl BenchmarkConfig {
    pub fn formula(&self) -> Result<Formula, ConfigError> {
        let text = match (&self.spec, &self.spec_file) {
            (Some(s), None) => s.clone(),
            (None, Some(f)) => std::fs::read_to_string(f).map_err(|e| ConfigError::Io {
                path: f.clone(),
                source: e,
            })?,
            _ => {
                return Err(ConfigError::Invalid(format!(
                    "benchmark `{}`: give exactly one of `spec` and `spec_file`",
                    self.label
                )))
            }
        };
        parse(&text).map_err(|e| ConfigError::Spec {
            label: self.label.clone(),
            message: e.to_string(),
        })
    }

    /// Builds the problem after checking that inputs, system and formula
    /// fit together.
    pub fn build(&self) -> Result<FalsificationProblem, ConfigError> {
        let invalid = |m: String| ConfigError::Invalid(format!("benchmark `{}`: {m}", self.label));
        let inputs =
            InputSpec::new(self.inputs.clone(), self.duration, self.step).map_err(|e| invalid(e.to_string()))?;
        let sut = match &self.sut {
            SutConfig::StaticSwitched { gamma } => SsConfig::new(*gamma).and_then(SutHandle::static_switched),
            SutConfig::DeltaSigma { u_max, saturation } => SutHandle::delta_sigma(DeltaSigmaConfig {
                u_max: *u_max,
                saturation: *saturation,
            }),
            SutConfig::External {
                command,
                working_dir,
                timeout_secs,
                outputs,
            } => {
                if !(*timeout_secs > 0.0) {
                    return Err(invalid("timeout_secs must be positive".into()));
                }
                ExternalSut::new(
                    command.clone(),
                    working_dir.clone(),
                    Duration::from_secs_f64(*timeout_secs),
                )
                .and_then(|ext| {
                    SutHandle::external(
                        ext,
                        inputs.channel_names().map(str::to_string).collect(),
                        outputs.clone(),
                    )
                })
            }
        }
        .map_err(|e| invalid(e.to_string()))?;

        let declared: Vec<&str> = inputs.channel_names().collect();
        for needed in sut.inputs() {
            if !declared.contains(&needed.as_str()) {
                return Err(invalid(format!("system input `{needed}` has no input channel")));
            }
        }
        for name in &declared {
            if !sut.inputs().iter().any(|i| i == name) {
                return Err(invalid(format!("input channel `{name}` is not an input of the system")));
            }
        }
        let formula = self.formula()?;
        let known_outputs = !sut.outputs().is_empty();
        for s in formula.signals() {
            let known = declared.contains(&s) || sut.outputs().iter().any(|o| o == s);
            if known_outputs && !known {
                return Err(invalid(format!("requirement refers to unknown signal `{s}`")));
            }
        }
        let samples = inputs.sample_count().map_err(|e| invalid(e.to_string()))?;
        let horizon = formula.horizon(self.step);
        if horizon >= samples {
            return Err(invalid(format!(
                "requirement horizon needs {} samples but traces have {samples}",
                horizon + 1
            )));
        }
        Ok(FalsificationProblem::new(inputs, sut, formula))
    }
}
