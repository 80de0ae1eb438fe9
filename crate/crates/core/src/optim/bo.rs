//! Global Bayesian optimization and its prior-weighted variant.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::surrogate::{choose, Selection, Surrogate};
use super::{
    candidate_count, rng_for, sobol_candidates, uniform_points, Budget, FalsificationResult, FitSchedule, Flow,
    Objective, Run,
};
use crate::acquisition::{AcquisitionKind, PriorWeight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiboOptions {
    pub prior: PriorWeight,
    /// Draw the initial design from the prior instead of uniformly.
    pub prior_initial_design: bool,
    /// Draw the second half of each candidate set from the prior.
    pub prior_candidates: bool,
}

impl PiboOptions {
    pub fn new(prior: PriorWeight) -> Self {
        Self {
            prior,
            prior_initial_design: true,
            prior_candidates: true,
        }
    }
}

/// Random initial design, then one GP-guided simulation per iteration
/// until falsification or the budget runs out.
pub fn run_vanilla_bo<O: Objective + ?Sized>(
    objective: &O,
    acquisition: AcquisitionKind,
    budget: Budget,
    schedule: &FitSchedule,
    seed: u64,
) -> FalsificationResult {
    bo_loop(objective, acquisition, budget, schedule, seed, None)
}

/// As [`run_vanilla_bo`] with candidate scores weighted by
/// `pi(x)^(beta_star / j)`, `j` counting model-guided iterations from 1.
pub fn run_pibo<O: Objective + ?Sized>(
    objective: &O,
    acquisition: AcquisitionKind,
    options: &PiboOptions,
    budget: Budget,
    schedule: &FitSchedule,
    seed: u64,
) -> FalsificationResult {
    bo_loop(objective, acquisition, budget, schedule, seed, Some(options))
}

fn bo_loop<O: Objective + ?Sized>(
    objective: &O,
    acquisition: AcquisitionKind,
    budget: Budget,
    schedule: &FitSchedule,
    seed: u64,
    pibo: Option<&PiboOptions>,
) -> FalsificationResult {
    let mut run = Run::new(objective, budget);
    let mut rng = rng_for(seed);
    let n = run.dim();

    let mut init = uniform_points(&mut rng, budget.initial_design, n);
    if let Some(p) = pibo.filter(|p| p.prior_initial_design) {
        init = init.iter().map(|v| p.prior.transform(v)).collect();
    }
    if run.evaluate_all(&init) == Flow::Stop {
        return run.finish();
    }

    let mut surrogate = Surrogate::new(*schedule);
    let mut j = 0;
    loop {
        j += 1;
        let mut candidates = sobol_candidates(candidate_count(n), n, rng.gen());
        if let Some(p) = pibo.filter(|p| p.prior_candidates) {
            let half = candidates.len() / 2;
            for c in &mut candidates[half..] {
                *c = p.prior.transform(c);
            }
        }
        let (x, y) = run.observed(0..run.sims());
        let model = if x.is_empty() {
            None
        } else {
            surrogate.model(x, &y, &mut rng, &mut run.gp_fits)
        };
        let pick = match model {
            Some(model) => {
                let sel = Selection {
                    acquisition,
                    sims: run.sims(),
                    prior: pibo.map(|p| (&p.prior, j)),
                };
                choose(&model, &candidates, &sel, &mut rng)
            }
            None => rng.gen_range(0..candidates.len()),
        };
        if run.evaluate(&candidates[pick]) == Flow::Stop {
            return run.finish();
        }
    }
}
