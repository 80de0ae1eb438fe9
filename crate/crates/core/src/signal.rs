//! Input-signal generation from a flat parameter vector.
//!
//! Parameters are laid out channel by channel: the first `segments` values
//! belong to the first channel, and so on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{Trace, TraceError};

const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("channel `{0}`: range lower bound must be below upper bound")]
    EmptyRange(String),
    #[error("channel `{0}` needs at least one segment")]
    NoSegments(String),
    #[error("channel `{0}`: constant interpolation takes exactly one segment")]
    ConstantSegments(String),
    #[error("duration {duration} is not a positive multiple of step {step}")]
    BadGrid { duration: f64, step: f64 },
    #[error("input spec declares no channels")]
    NoChannels,
    #[error("expected {expected} parameters, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {index} = {value} outside [{lo}, {hi}]")]
    OutOfRange { index: usize, value: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Piecewise constant: segment `j` holds on `(j*T/S, (j+1)*T/S]`, the first closed.
    #[default]
    Previous,
    /// Control points spread uniformly over `[0, T]` joined by straight lines.
    Linear,
    /// A single value for the whole horizon.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "one")]
    pub segments: usize,
    #[serde(default)]
    pub interpolation: Interpolation,
}

fn one() -> usize {
    1
}

impl ChannelSpec {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, segments: usize, interpolation: Interpolation) -> Self {
        Self {
            name: name.into(),
            lo,
            hi,
            segments,
            interpolation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub channels: Vec<ChannelSpec>,
    /// Simulation horizon in seconds.
    pub duration: f64,
    /// Sample period in seconds.
    pub step: f64,
}

impl InputSpec {
    pub fn new(channels: Vec<ChannelSpec>, duration: f64, step: f64) -> Result<Self, SignalError> {
        let spec = Self {
            channels,
            duration,
            step,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if self.channels.is_empty() {
            return Err(SignalError::NoChannels);
        }
        for c in &self.channels {
            if !(c.lo < c.hi) {
                return Err(SignalError::EmptyRange(c.name.clone()));
            }
            if c.segments == 0 {
                return Err(SignalError::NoSegments(c.name.clone()));
            }
            if c.interpolation == Interpolation::Constant && c.segments != 1 {
                return Err(SignalError::ConstantSegments(c.name.clone()));
            }
        }
        self.sample_count()?;
        Ok(())
    }

    /// Number of grid intervals `T / dt`.
    fn intervals(&self) -> Result<usize, SignalError> {
        let bad = || SignalError::BadGrid {
            duration: self.duration,
            step: self.step,
        };
        if !(self.step > 0.0) || !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(bad());
        }
        let ratio = self.duration / self.step;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > GRID_TOLERANCE * k.max(1.0) {
            return Err(bad());
        }
        Ok(k as usize)
    }

    /// Samples per generated trace, `T / dt + 1`.
    pub fn sample_count(&self) -> Result<usize, SignalError> {
        Ok(self.intervals()? + 1)
    }

    pub fn dim(&self) -> usize {
        self.channels.iter().map(|c| c.segments).sum()
    }

    pub fn param_box(&self) -> ParamBox {
        ParamBox::new(
            self.channels
                .iter()
                .flat_map(|c| std::iter::repeat_n((c.lo, c.hi), c.segments))
                .collect(),
        )
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|c| c.name.as_str())
    }

    /// Builds the input trace for parameter vector `x`.
    pub fn generate(&self, x: &[f64]) -> Result<Trace, SignalError> {
        let n = self.dim();
        if x.len() != n {
            return Err(SignalError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        self.param_box().check(x)?;
        let intervals = self.intervals()?;
        let mut trace = Trace::uniform(self.step, intervals + 1)?;
        let mut offset = 0;
        for c in &self.channels {
            let values = &x[offset..offset + c.segments];
            offset += c.segments;
            let samples = (0..=intervals)
                .map(|k| sample_channel(c, values, k, intervals))
                .collect();
            trace = trace.with_channel(c.name.clone(), samples)?;
        }
        Ok(trace)
    }
}

fn sample_channel(c: &ChannelSpec, values: &[f64], k: usize, intervals: usize) -> f64 {
    let s = values.len();
    match c.interpolation {
        Interpolation::Constant => values[0],
        Interpolation::Previous => values[(k * s).div_ceil(intervals).saturating_sub(1).min(s - 1)],
        Interpolation::Linear => {
            if s == 1 {
                return values[0];
            }
            let num = k * (s - 1);
            let i = num / intervals;
            if i >= s - 1 {
                return values[s - 1];
            }
            let frac = (num % intervals) as f64 / intervals as f64;
            let v = values[i] + (values[i + 1] - values[i]) * frac;
            v.clamp(c.lo, c.hi)
        }
    }
}

/// Axis-aligned box of admissible parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    bounds: Vec<(f64, f64)>,
}

impl ParamBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self { bounds }
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(vec![(0.0, 1.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn check(&self, x: &[f64]) -> Result<(), SignalError> {
        if x.len() != self.dim() {
            return Err(SignalError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (index, (&value, &(lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            if !(value >= lo && value <= hi) {
                return Err(SignalError::OutOfRange { index, value, lo, hi });
            }
        }
        Ok(())
    }

    /// Maps a unit-cube point affinely onto the box.
    pub fn unit_to_box(&self, u: &[f64]) -> Result<Vec<f64>, SignalError> {
        ParamBox::unit(self.dim()).check(u)?;
        Ok(u.iter()
            .zip(&self.bounds)
            .map(|(&u, &(lo, hi))| {
                // pin the corners so that u = 1 lands on `hi` exactly
                if u == 1.0 {
                    hi
                } else {
                    lo + u * (hi - lo)
                }
            })
            .collect())
    }

    pub fn box_to_unit(&self, x: &[f64]) -> Result<Vec<f64>, SignalError> {
        self.check(x)?;
        Ok(x.iter()
            .zip(&self.bounds)
            .map(|(&x, &(lo, hi))| ((x - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect())
    }
}
