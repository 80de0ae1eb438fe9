//! Falsification drivers.
//!
//! All optimizers search the unit cube and map points affinely onto the
//! problem's parameter box before evaluating. Each one stops at the first
//! negative value or when the simulation budget is spent.

mod baselines;
mod bo;
mod objective;
mod surrogate;
mod turbo;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baselines::{run_hcr, run_random};
pub use bo::{run_pibo, run_vanilla_bo, PiboOptions};
pub use objective::{CentralHalf, ConstantPositive, Corners, EvalError, FalsificationProblem, Objective, Sphere};
pub use surrogate::FitSchedule;
pub use turbo::{run_turbo, TrustRegionParams, TrustRegionState, TrustRegionUpdate};

use crate::signal::ParamBox;

/// Upper bound on the quasi-random candidate set.
pub const MAX_CANDIDATES: usize = 5000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BudgetError {
    #[error("initial design size {initial} must satisfy 1 <= M < N = {max}")]
    Invalid { initial: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_simulations: usize,
    pub initial_design: usize,
}

impl Budget {
    pub fn new(max_simulations: usize, initial_design: usize) -> Result<Self, BudgetError> {
        if initial_design < 1 || initial_design >= max_simulations {
            return Err(BudgetError::Invalid {
                initial: initial_design,
                max: max_simulations,
            });
        }
        Ok(Self {
            max_simulations,
            initial_design,
        })
    }

    /// `N = 1000`, `M = 2n`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            max_simulations: 1000,
            initial_design: (2 * dim).max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// 1-based simulation counter.
    pub sim_index: usize,
    /// Point in the problem's parameter box.
    pub x: Vec<f64>,
    /// Signed robustness; `None` when the simulation failed.
    pub y: Option<f64>,
    pub falsified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsificationResult {
    pub records: Vec<EvalRecord>,
    pub success: bool,
    pub simulations: usize,
    /// Hyperparameter fits performed.
    pub gp_fits: usize,
    /// Set when more than a tenth of the budget was lost to failed simulations.
    pub aborted: bool,
}

impl FalsificationResult {
    /// Lowest robustness seen.
    pub fn best(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.y).reduce(f64::min)
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.y.is_none()).count()
    }
}

/// Whether a driver should keep going after an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
}

/// Book-keeping shared by every driver: evaluation, budget, stop rule,
/// failure accounting.
struct Run<'a, O: Objective + ?Sized> {
    objective: &'a O,
    bounds: ParamBox,
    budget: Budget,
    records: Vec<EvalRecord>,
    /// Unit-cube coordinates of each record, same order.
    unit: Vec<Vec<f64>>,
    failures: usize,
    gp_fits: usize,
    success: bool,
    aborted: bool,
}

impl<'a, O: Objective + ?Sized> Run<'a, O> {
    fn new(objective: &'a O, budget: Budget) -> Self {
        Self {
            objective,
            bounds: objective.bounds(),
            budget,
            records: Vec::new(),
            unit: Vec::new(),
            failures: 0,
            gp_fits: 0,
            success: false,
            aborted: false,
        }
    }

    fn dim(&self) -> usize {
        self.bounds.dim()
    }

    fn sims(&self) -> usize {
        self.records.len()
    }

    fn remaining(&self) -> usize {
        self.budget.max_simulations - self.sims()
    }

    fn evaluate(&mut self, u: &[f64]) -> Flow {
        debug_assert!(self.remaining() > 0 && !self.success && !self.aborted);
        let x = self
            .bounds
            .unit_to_box(u)
            .expect("optimizer proposed a point outside the unit cube");
        let (y, error) = match self.objective.evaluate(&x) {
            Ok(v) if v.is_nan() => (None, Some("robustness is NaN".to_string())),
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let falsified = y.is_some_and(|v| v < 0.0);
        if y.is_none() {
            self.failures += 1;
        }
        self.records.push(EvalRecord {
            sim_index: self.records.len() + 1,
            x,
            y,
            falsified,
            error,
        });
        self.unit.push(u.to_vec());
        if falsified {
            self.success = true;
            return Flow::Stop;
        }
        if self.failures * 10 > self.budget.max_simulations {
            self.aborted = true;
            return Flow::Stop;
        }
        if self.remaining() == 0 {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }

    /// Evaluates points in order until one stops the run.
    fn evaluate_all(&mut self, points: &[Vec<f64>]) -> Flow {
        for p in points {
            if self.evaluate(p) == Flow::Stop {
                return Flow::Stop;
            }
        }
        Flow::Continue
    }

    /// Successful evaluations as unit-cube inputs and values.
    fn observed(&self, range: std::ops::Range<usize>) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in range {
            if let Some(y) = self.records[i].y {
                xs.push(self.unit[i].clone());
                ys.push(y);
            }
        }
        (xs, ys)
    }

    fn finish(self) -> FalsificationResult {
        FalsificationResult {
            simulations: self.records.len(),
            records: self.records,
            success: self.success,
            gp_fits: self.gp_fits,
            aborted: self.aborted,
        }
    }
}

fn uniform_points(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

/// Candidate-set size `100 n`, capped.
pub fn candidate_count(dim: usize) -> usize {
    (100 * dim).clamp(1, MAX_CANDIDATES)
}

/// Owen-scrambled Sobol points in the unit cube. Dimensions past the
/// generator's table fall back to pseudo-random coordinates.
pub fn sobol_candidates(count: usize, dim: usize, seed: u32) -> Vec<Vec<f64>> {
    let mut fallback = ChaCha8Rng::seed_from_u64(u64::from(seed));
    (0..count)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    if d < sobol_burley::NUM_DIMENSIONS as usize && i < 1 << 16 {
                        f64::from(sobol_burley::sample(i as u32, d as u32, seed))
                    } else {
                        fallback.gen::<f64>()
                    }
                })
                .collect()
        })
        .collect()
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
