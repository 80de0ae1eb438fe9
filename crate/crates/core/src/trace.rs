//! Uniformly sampled multi-channel time series and their CSV form.
//!
//! The CSV layout is a header `time,<ch1>,<ch2>,...` followed by one row per
//! sample. Values are written with the shortest representation that parses
//! back to the same `f64`, so a write/read cycle is lossless.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

const STEP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace has no samples")]
    Empty,
    #[error("channel `{name}` has {got} samples, expected {expected}")]
    LengthMismatch { name: String, got: usize, expected: usize },
    #[error("duplicate channel `{0}`")]
    DuplicateChannel(String),
    #[error("time stamps must be strictly increasing (row {0})")]
    NotIncreasing(usize),
    #[error("time step is not uniform at row {0}")]
    NonUniform(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv header must start with `time`")]
    MissingTime,
    #[error("row {row}, column `{column}`: cannot parse `{text}`")]
    BadValue { row: usize, column: String, text: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    times: Vec<f64>,
    channels: Vec<(String, Vec<f64>)>,
}

impl Trace {
    pub fn new(times: Vec<f64>, channels: Vec<(String, Vec<f64>)>) -> Result<Self, TraceError> {
        if times.is_empty() {
            return Err(TraceError::Empty);
        }
        check_grid(&times)?;
        for (i, (name, values)) in channels.iter().enumerate() {
            if values.len() != times.len() {
                return Err(TraceError::LengthMismatch {
                    name: name.clone(),
                    got: values.len(),
                    expected: times.len(),
                });
            }
            if channels[..i].iter().any(|(other, _)| other == name) {
                return Err(TraceError::DuplicateChannel(name.clone()));
            }
        }
        Ok(Self { times, channels })
    }

    /// A trace on the grid `0, step, 2*step, ...` with `len` samples and no channels.
    pub fn uniform(step: f64, len: usize) -> Result<Self, TraceError> {
        let times = (0..len).map(|k| k as f64 * step).collect();
        Self::new(times, Vec::new())
    }

    pub fn with_channel(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self, TraceError> {
        let name = name.into();
        if values.len() != self.len() {
            return Err(TraceError::LengthMismatch {
                name,
                got: values.len(),
                expected: self.len(),
            });
        }
        if self.channel(&name).is_some() {
            return Err(TraceError::DuplicateChannel(name));
        }
        self.channels.push((name, values));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Sampling period; `1.0` for single-sample traces.
    pub fn step(&self) -> f64 {
        if self.times.len() < 2 {
            1.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(n, _)| n.as_str())
    }

    pub fn channels(&self) -> &[(String, Vec<f64>)] {
        &self.channels
    }

    /// Adds every channel of `other` that is not already present. Both traces
    /// must share the same time column.
    pub fn merge(mut self, other: &Trace) -> Result<Self, TraceError> {
        if other.times != self.times {
            return Err(TraceError::LengthMismatch {
                name: "time".into(),
                got: other.len(),
                expected: self.len(),
            });
        }
        for (name, values) in &other.channels {
            if self.channel(name).is_none() {
                self.channels.push((name.clone(), values.clone()));
            }
        }
        Ok(self)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), TraceError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string()];
        header.extend(self.channels.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = Vec::with_capacity(header.len());
            row.push(t.to_string());
            row.extend(self.channels.iter().map(|(_, v)| v[k].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, TraceError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("time") {
            return Err(TraceError::MissingTime);
        }
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        for (row, record) in r.records().enumerate() {
            let record = record?;
            for (col, text) in record.iter().enumerate() {
                let value = text.parse::<f64>().map_err(|_| TraceError::BadValue {
                    row: row + 1,
                    column: header[col].clone(),
                    text: text.to_string(),
                })?;
                columns[col].push(value);
            }
        }
        let mut columns = columns.into_iter();
        let times = columns.next().unwrap_or_default();
        let channels = header.into_iter().skip(1).zip(columns).collect();
        Self::new(times, channels)
    }

    pub fn load(path: &Path) -> Result<Self, TraceError> {
        Self::read_csv(File::open(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), TraceError> {
        self.write_csv(File::create(path)?)
    }
}

fn check_grid(times: &[f64]) -> Result<(), TraceError> {
    if times.len() < 2 {
        return Ok(());
    }
    let step = times[1] - times[0];
    for (i, w) in times.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !(d > 0.0) {
            return Err(TraceError::NotIncreasing(i + 1));
        }
        if (d - step).abs() > STEP_TOLERANCE * step.abs().max(times[i + 1].abs()) {
            return Err(TraceError::NonUniform(i + 1));
        }
    }
    Ok(())
}
