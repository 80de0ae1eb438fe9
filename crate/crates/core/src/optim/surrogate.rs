//! GP refitting cadence and candidate selection shared by the model-based
//! drivers.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{
    apply_prior, argmin, lcb_beta_with_base, score_lcb, score_ts, score_u, AcquisitionKind, PriorWeight,
};
use crate::gp::{Dataset, FitOptions, GpModel, Hyper};

/// How often and on how much data hyperparameters are refit. The model is
/// always conditioned on all available data; only the likelihood ascent is
/// restricted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitSchedule {
    /// Refit on every iteration while the data set has at most this many points...
    pub every_iteration_up_to: usize,
    /// ...and on every `thin_every`-th iteration beyond it.
    pub thin_every: usize,
    /// Largest data set the likelihood is maximized on; bigger sets are
    /// subsampled (best half by value, the rest at random).
    pub max_fit_points: usize,
    /// Local ascents for a cold fit.
    pub restarts: usize,
    /// Every `cold_every`-th fit is a cold multi-start fit; the others run a
    /// single ascent from the previous hyperparameters.
    pub cold_every: usize,
    pub max_iters: usize,
}

impl Default for FitSchedule {
    fn default() -> Self {
        Self {
            every_iteration_up_to: 300,
            thin_every: 5,
            max_fit_points: 100,
            restarts: 8,
            cold_every: 10,
            max_iters: 40,
        }
    }
}

/// Keeps the last hyperparameters between iterations and refits on schedule.
#[derive(Debug, Clone)]
pub(crate) struct Surrogate {
    schedule: FitSchedule,
    hyper: Option<Hyper>,
    iteration: usize,
    fits: usize,
}

impl Surrogate {
    pub fn new(schedule: FitSchedule) -> Self {
        Self {
            schedule,
            hyper: None,
            iteration: 0,
            fits: 0,
        }
    }

    /// Forgets the hyperparameters (e.g. after a trust-region restart).
    pub fn reset(&mut self) {
        self.hyper = None;
        self.iteration = 0;
    }

    /// Returns a model conditioned on `(x, y)`, refitting hyperparameters
    /// when due. `None` when even the fallback conditioning fails.
    pub fn model(&mut self, x: Vec<Vec<f64>>, y: &[f64], rng: &mut ChaCha8Rng, fitted: &mut usize) -> Option<GpModel> {
        let data = Dataset::new(x, y).ok()?;
        let (hyper, model) = self.refresh(&data, rng, fitted);
        match model {
            Some(m) if m.data().len() == data.len() => Some(m),
            _ => GpModel::with_hyper(data, hyper).ok(),
        }
    }

    /// Current hyperparameters for `data`, refit when due; `fitted` counts
    /// likelihood maximizations. The fitted model is returned too when a fit
    /// happened, conditioned on the (possibly subsampled) fitting data.
    pub fn refresh(&mut self, data: &Dataset, rng: &mut ChaCha8Rng, fitted: &mut usize) -> (Hyper, Option<GpModel>) {
        let m = data.len();
        let s = self.schedule;
        let due =
            self.hyper.is_none() || m <= s.every_iteration_up_to || self.iteration.is_multiple_of(s.thin_every.max(1));
        self.iteration += 1;
        let seed: u64 = rng.gen();
        if due {
            let cold = self.hyper.is_none() || self.fits.is_multiple_of(s.cold_every.max(1));
            let opts = FitOptions {
                restarts: if cold { s.restarts } else { 1 },
                max_iters: s.max_iters,
                seed,
                warm_start: if cold { None } else { self.hyper.clone() },
            };
            let fit_data = self.fit_subset(data, rng);
            *fitted += 1;
            self.fits += 1;
            // on numerical failure keep the previous hyperparameters
            if let Ok(model) = GpModel::fit(fit_data, &opts) {
                self.hyper = Some(model.hyper().clone());
                return (model.hyper().clone(), Some(model));
            }
        }
        let hyper = self.hyper.clone().unwrap_or_else(|| Hyper::default_for(data.dim()));
        (hyper, None)
    }

    fn fit_subset(&self, data: &Dataset, rng: &mut ChaCha8Rng) -> Dataset {
        let m = data.len();
        let cap = self.schedule.max_fit_points.max(2);
        if m <= cap {
            return data.clone();
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| data.y()[a].total_cmp(&data.y()[b]).then(a.cmp(&b)));
        let best = cap / 2;
        let rest = &order[best..];
        let mut picked: Vec<usize> = order[..best].to_vec();
        picked.extend(sample(rng, rest.len(), cap - best).into_iter().map(|i| rest[i]));
        picked.sort_unstable();
        let x = picked.iter().map(|&i| data.x()[i].clone()).collect();
        let y = picked.iter().map(|&i| data.y()[i]).collect();
        Dataset::standardized(x, y).expect("subset of a valid data set")
    }
}

/// How an iteration's candidates are scored.
pub(crate) struct Selection<'a> {
    pub acquisition: AcquisitionKind,
    /// Simulations performed so far; drives the exploration schedule.
    pub sims: usize,
    /// Prior weighting with its iteration index.
    pub prior: Option<(&'a PriorWeight, usize)>,
}

/// Index of the best candidate under the acquisition (lower is better).
pub(crate) fn choose(model: &GpModel, candidates: &[Vec<f64>], sel: &Selection, rng: &mut ChaCha8Rng) -> usize {
    let scores: Vec<f64> = match sel.acquisition {
        AcquisitionKind::Ts => {
            let seed: u64 = rng.gen();
            match model.sample_posterior(candidates, seed) {
                Ok(draw) => draw.into_iter().map(score_ts).collect(),
                // jitter exhausted: fall back to the posterior mean
                Err(_) => model.predict_many(candidates).into_iter().map(|(m, _)| m).collect(),
            }
        }
        AcquisitionKind::Lcb { log_base } => {
            let beta = lcb_beta_with_base(sel.sims, log_base);
            model
                .predict_many(candidates)
                .into_iter()
                .map(|(m, s)| score_lcb(m, s, beta))
                .collect()
        }
        AcquisitionKind::Pi { tau } => {
            let target = model.data().standardize(tau);
            model
                .predict_many(candidates)
                .into_iter()
                .map(|(m, s)| score_u(m, s, target))
                .collect()
        }
    };
    let scores = match sel.prior {
        Some((prior, j)) => apply_prior(&scores, candidates, prior, j),
        None => scores,
    };
    argmin(&scores).unwrap_or(0)
}
