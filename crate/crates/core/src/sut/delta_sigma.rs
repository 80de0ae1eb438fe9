//! Third-order delta-sigma modulator in cascade-of-integrators feedback form
//! with a one-bit quantizer.
//!
//! ```text
//! v   = sign(x3)                 sign(0) = +1
//! x1' = x1 + b1*u - a1*v
//! x2' = x2 + x1   - a2*v
//! x3' = x3 + x2   - a3*v
//! ```
//!
//! with `b1 = a1 = 0.044`, `a2 = 0.2881`, `a3 = 0.7997`. States stay bounded
//! for moderate inputs; larger inputs and initial offsets push an integrator
//! past the saturation bound.

use serde::{Deserialize, Serialize};

use super::SimulationError;

pub const FEEDBACK: [f64; 3] = [0.044, 0.2881, 0.7997];
pub const INPUT_GAIN: f64 = 0.044;
pub const INIT_BOUND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSigmaConfig {
    /// Input amplitude bound, `|u| <= u_max`.
    pub u_max: f64,
    /// States must stay strictly below this magnitude.
    #[serde(default = "default_saturation")]
    pub saturation: f64,
}

fn default_saturation() -> f64 {
    1.0
}

impl Default for DeltaSigmaConfig {
    fn default() -> Self {
        Self {
            u_max: 0.45,
            saturation: default_saturation(),
        }
    }
}

impl DeltaSigmaConfig {
    pub fn validate(&self) -> Result<(), SimulationError> {
        if !(self.u_max > 0.0) || !(self.saturation > 0.0) {
            return Err(SimulationError::Config(
                "delta-sigma input bound and saturation must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub fn quantize(x3: f64) -> f64 {
    if x3 >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One modulator step; returns the next state and the quantizer output used
/// for the feedback.
pub fn delta_sigma_step(state: [f64; 3], u: f64) -> ([f64; 3], f64) {
    let [x1, x2, x3] = state;
    let v = quantize(x3);
    let [a1, a2, a3] = FEEDBACK;
    ([x1 + INPUT_GAIN * u - a1 * v, x2 + x1 - a2 * v, x3 + x2 - a3 * v], v)
}

pub fn check_initial_state(state: [f64; 3]) -> Result<(), SimulationError> {
    for (i, v) in state.into_iter().enumerate() {
        if !(v.abs() <= INIT_BOUND) {
            return Err(SimulationError::OutOfRange {
                channel: format!("x{}_init", i + 1),
                value: v,
            });
        }
    }
    Ok(())
}
