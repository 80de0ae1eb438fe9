//! Process-level boundary to simulators hosted outside this toolkit.
//!
//! Each call writes `input.csv` into a fresh temporary directory, runs
//! `<command...> <input.csv> <output.csv>` and reads `output.csv` back. Both
//! files use the trace CSV layout and share the time column.

use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use super::SimulationError;
use crate::trace::Trace;

const POLL: Duration = Duration::from_millis(2);

#[derive(Debug)]
pub struct ExternalSut {
    pub command: Vec<String>,
    pub working_dir: Option<PathBuf>,
    pub timeout: Duration,
    in_flight: Mutex<()>,
}

impl ExternalSut {
    pub fn new(command: Vec<String>, working_dir: Option<PathBuf>, timeout: Duration) -> Result<Self, SimulationError> {
        if command.is_empty() {
            return Err(SimulationError::Config("external command is empty".into()));
        }
        Ok(Self {
            command,
            working_dir,
            timeout,
            in_flight: Mutex::new(()),
        })
    }

    /// Runs one simulation; calls on the same handle are serialized.
    pub fn run(&self, inputs: &Trace) -> Result<Trace, SimulationError> {
        let _guard = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        let dir = tempfile::tempdir()?;
        let input = dir.path().join("input.csv");
        let output = dir.path().join("output.csv");
        let log = dir.path().join("stderr.log");
        inputs.save(&input)?;

        let mut cmd = Command::new(&self.command[0]);
        cmd.args(&self.command[1..])
            .arg(&input)
            .arg(&output)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(std::fs::File::create(&log)?);
        if let Some(wd) = &self.working_dir {
            cmd.current_dir(wd);
        }
        let mut child = cmd.spawn().map_err(|e| SimulationError::Spawn {
            command: self.command[0].clone(),
            source: e,
        })?;
        let started = Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if started.elapsed() >= self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                return Err(SimulationError::Timeout(self.timeout));
            }
            thread::sleep(POLL);
        };
        if !status.success() {
            let stderr = std::fs::read_to_string(&log).unwrap_or_default();
            return Err(SimulationError::ExitStatus {
                code: status.code(),
                stderr: stderr.trim().to_string(),
            });
        }
        if !output.exists() {
            return Err(SimulationError::MalformedOutput("output.csv was not written".into()));
        }
        let produced = Trace::load(&output).map_err(|e| SimulationError::MalformedOutput(e.to_string()))?;
        if produced.len() != inputs.len()
            || produced
                .times()
                .iter()
                .zip(inputs.times())
                .any(|(a, b)| (a - b).abs() > 1e-9 * b.abs().max(1.0))
        {
            return Err(SimulationError::MalformedOutput(
                "output time column differs from the input".into(),
            ));
        }
        Ok(produced)
    }
}
