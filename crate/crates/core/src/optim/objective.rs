//! Things an optimizer can minimize: simulator-backed falsification problems
//! and a few closed-form test landscapes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::signal::{InputSpec, ParamBox, SignalError};
use crate::stl::{signed_robustness, Formula, MonitorError};
use crate::sut::{SimulationError, SutHandle};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

/// A black-box function over a parameter box; negative values falsify.
pub trait Objective: Sync {
    fn bounds(&self) -> ParamBox;
    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError>;

    fn dim(&self) -> usize {
        self.bounds().dim()
    }
}

/// Input generation, simulation and robustness monitoring bundled together.
#[derive(Debug)]
pub struct FalsificationProblem {
    pub inputs: InputSpec,
    pub sut: SutHandle,
    pub formula: Formula,
}

impl FalsificationProblem {
    pub fn new(inputs: InputSpec, sut: SutHandle, formula: Formula) -> Self {
        Self { inputs, sut, formula }
    }
}

impl Objective for FalsificationProblem {
    fn bounds(&self) -> ParamBox {
        self.inputs.param_box()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        let trace = self.inputs.generate(x)?;
        let out = self.sut.simulate(&trace)?;
        Ok(signed_robustness(&self.formula, &out)?)
    }
}

/// Scaled squared distance to a centre: `0.1 (|x - c|^2 / r^2 - 1)`, so the
/// minimum is -0.1 and the negative set is the open ball of radius `r`.
#[derive(Debug, Clone)]
pub struct Sphere {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Sphere {
    /// Centre drawn uniformly from `[0.2, 0.8]^n`.
    pub fn random(dim: usize, radius: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            center: (0..dim).map(|_| rng.gen_range(0.2..0.8)).collect(),
            radius,
        }
    }
}

impl Objective for Sphere {
    fn bounds(&self) -> ParamBox {
        ParamBox::unit(self.center.len())
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.bounds().check(x)?;
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum();
        Ok(0.1 * (d2 / (self.radius * self.radius) - 1.0))
    }
}

/// `max_i min(x_i, 1 - x_i) - margin`: negative only when every coordinate
/// lies within `margin` of a face, i.e. near one of the corners.
#[derive(Debug, Clone)]
pub struct Corners {
    pub dim: usize,
    pub margin: f64,
}

impl Objective for Corners {
    fn bounds(&self) -> ParamBox {
        ParamBox::unit(self.dim)
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.bounds().check(x)?;
        Ok(x.iter().map(|v| v.min(1.0 - v)).fold(0.0, f64::max) - self.margin)
    }
}

/// A central cube holding exactly half of the volume is negative,
/// everything else positive.
#[derive(Debug, Clone)]
pub struct CentralHalf {
    pub dim: usize,
}

impl Objective for CentralHalf {
    fn bounds(&self) -> ParamBox {
        ParamBox::unit(self.dim)
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.bounds().check(x)?;
        let half_width = 0.5 * 0.5f64.powf(1.0 / self.dim as f64);
        Ok(x.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max) - half_width)
    }
}

/// Never falsifiable.
#[derive(Debug, Clone)]
pub struct ConstantPositive {
    pub dim: usize,
    pub value: f64,
}

impl Objective for ConstantPositive {
    fn bounds(&self) -> ParamBox {
        ParamBox::unit(self.dim)
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.bounds().check(x)?;
        Ok(self.value)
    }
}
