//! Systems under test: a uniform simulate interface over builtin models and
//! external simulator processes.

mod delta_sigma;
mod external;
mod ss;

use std::time::Duration;

use thiserror::Error;

pub use delta_sigma::{
    check_initial_state, delta_sigma_step, quantize, DeltaSigmaConfig, FEEDBACK, INIT_BOUND, INPUT_GAIN,
};
pub use external::ExternalSut;
pub use ss::{ss_objective, SsConfig};

use crate::trace::{Trace, TraceError};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid system configuration: {0}")]
    Config(String),
    #[error("input trace lacks channel `{0}`")]
    MissingInput(String),
    #[error("simulator output lacks channel `{0}`")]
    MissingOutput(String),
    #[error("channel `{channel}` value {value} is outside the admissible range")]
    OutOfRange { channel: String, value: f64 },
    #[error("failed to start `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("simulator exited with status {code:?}: {stderr}")]
    ExitStatus { code: Option<i32>, stderr: String },
    #[error("simulator exceeded {0:?}")]
    Timeout(Duration),
    #[error("malformed simulator output: {0}")]
    MalformedOutput(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug)]
pub enum SutKind {
    StaticSwitched(SsConfig),
    DeltaSigma(DeltaSigmaConfig),
    External(ExternalSut),
}

/// A black-box simulator mapping input traces to input-plus-output traces.
#[derive(Debug)]
pub struct SutHandle {
    kind: SutKind,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl SutHandle {
    /// Inputs `u1`, `u2` in `[-1, 1]`; output `y`.
    pub fn static_switched(cfg: SsConfig) -> Result<Self, SimulationError> {
        cfg.validate()?;
        Self::new(SutKind::StaticSwitched(cfg), names(&["u1", "u2"]), names(&["y"]))
    }

    /// Inputs `u`, `x1_init`, `x2_init`, `x3_init` (initial states read at
    /// the first sample); outputs `x1`, `x2`, `x3`, `v`.
    pub fn delta_sigma(cfg: DeltaSigmaConfig) -> Result<Self, SimulationError> {
        cfg.validate()?;
        Self::new(
            SutKind::DeltaSigma(cfg),
            names(&["u", "x1_init", "x2_init", "x3_init"]),
            names(&["x1", "x2", "x3", "v"]),
        )
    }

    pub fn external(sut: ExternalSut, inputs: Vec<String>, outputs: Vec<String>) -> Result<Self, SimulationError> {
        Self::new(SutKind::External(sut), inputs, outputs)
    }

    fn new(kind: SutKind, inputs: Vec<String>, outputs: Vec<String>) -> Result<Self, SimulationError> {
        if let Some(dup) = inputs.iter().find(|i| outputs.contains(i)) {
            return Err(SimulationError::Config(format!(
                "channel `{dup}` declared as both input and output"
            )));
        }
        Ok(Self { kind, inputs, outputs })
    }

    pub fn kind(&self) -> &SutKind {
        &self.kind
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    /// Simulates the system; the result carries the input channels followed
    /// by the output channels on the input time grid.
    pub fn simulate(&self, inputs: &Trace) -> Result<Trace, SimulationError> {
        for name in &self.inputs {
            if inputs.channel(name).is_none() {
                return Err(SimulationError::MissingInput(name.clone()));
            }
        }
        let input = |name: &str| inputs.channel(name).expect("checked above");
        let mut out = Trace::new(inputs.times().to_vec(), Vec::new())?;
        match &self.kind {
            SutKind::StaticSwitched(cfg) => {
                let y = input("u1")
                    .iter()
                    .zip(input("u2"))
                    .map(|(&a, &b)| ss_objective(a, b, cfg.gamma))
                    .collect::<Result<Vec<_>, _>>()?;
                out = out.with_channel("y", y)?;
            }
            SutKind::DeltaSigma(cfg) => {
                let u = input("u");
                let mut state = [input("x1_init")[0], input("x2_init")[0], input("x3_init")[0]];
                check_initial_state(state)?;
                let mut cols: [Vec<f64>; 4] = Default::default();
                for &uk in u {
                    if !(uk.abs() <= cfg.u_max) {
                        return Err(SimulationError::OutOfRange {
                            channel: "u".into(),
                            value: uk,
                        });
                    }
                    for (c, &s) in cols.iter_mut().zip(&state) {
                        c.push(s);
                    }
                    let (next, v) = delta_sigma_step(state, uk);
                    cols[3].push(v);
                    state = next;
                }
                for (name, col) in self.outputs.iter().zip(cols) {
                    out = out.with_channel(name.clone(), col)?;
                }
            }
            SutKind::External(ext) => {
                let produced = ext.run(inputs)?;
                let wanted: Vec<String> = if self.outputs.is_empty() {
                    produced
                        .channel_names()
                        .filter(|n| inputs.channel(n).is_none())
                        .map(str::to_string)
                        .collect()
                } else {
                    self.outputs.clone()
                };
                for name in wanted {
                    let col = produced
                        .channel(&name)
                        .ok_or_else(|| SimulationError::MissingOutput(name.clone()))?
                        .to_vec();
                    out = out.with_channel(name, col)?;
                }
            }
        }
        Ok(inputs.clone().merge(&out)?)
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}
