//! Single trust-region Bayesian optimization with restarts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::surrogate::{choose, Selection, Surrogate};
use super::{
    candidate_count, rng_for, sobol_candidates, uniform_points, Budget, FalsificationResult, FitSchedule, Flow,
    Objective, Run,
};
use crate::acquisition::AcquisitionKind;
use crate::gp::{Dataset, GpModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrustRegionParams {
    pub length_init: f64,
    pub length_min: f64,
    pub length_max: f64,
    pub success_tolerance: usize,
    /// `max(4, n)` when absent.
    pub failure_tolerance: Option<usize>,
    /// Relative margin a new value must beat the incumbent by to count as a success.
    pub improvement_tolerance: f64,
    /// Expected number of perturbed coordinates per candidate.
    pub perturbed_dims: f64,
}

impl Default for TrustRegionParams {
    fn default() -> Self {
        Self {
            length_init: 0.8,
            length_min: 0.5f64.powi(7),
            length_max: 1.6,
            success_tolerance: 3,
            failure_tolerance: None,
            improvement_tolerance: 0.0,
            perturbed_dims: 20.0,
        }
    }
}

impl TrustRegionParams {
    pub fn failure_tolerance_for(&self, dim: usize) -> usize {
        self.failure_tolerance.unwrap_or(dim.max(4))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrustRegionUpdate {
    Unchanged,
    Expanded,
    Shrunk,
    /// The base length fell below its minimum.
    Collapsed,
}

/// Current region: incumbent, base length and the streak counters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionState {
    pub center: Vec<f64>,
    pub best: f64,
    pub length: f64,
    pub success_count: usize,
    pub failure_count: usize,
}

impl TrustRegionState {
    pub fn new(params: &TrustRegionParams, center: Vec<f64>, best: f64) -> Self {
        Self {
            center,
            best,
            length: params.length_init,
            success_count: 0,
            failure_count: 0,
        }
    }

    /// Records the outcome of the latest evaluation (`None` for a failed
    /// simulation, which never improves).
    pub fn observe(&mut self, params: &TrustRegionParams, x: &[f64], y: Option<f64>) -> TrustRegionUpdate {
        let threshold = self.best - params.improvement_tolerance * self.best.abs();
        match y {
            Some(v) if v < threshold => {
                self.success_count += 1;
                self.failure_count = 0;
            }
            _ => {
                self.failure_count += 1;
                self.success_count = 0;
            }
        }
        if let Some(v) = y.filter(|v| *v < self.best) {
            self.best = v;
            self.center = x.to_vec();
        }
        let dim = self.center.len();
        if self.success_count >= params.success_tolerance {
            self.length = (2.0 * self.length).min(params.length_max);
            self.success_count = 0;
            TrustRegionUpdate::Expanded
        } else if self.failure_count >= params.failure_tolerance_for(dim) {
            self.length /= 2.0;
            self.failure_count = 0;
            if self.length < params.length_min {
                TrustRegionUpdate::Collapsed
            } else {
                TrustRegionUpdate::Shrunk
            }
        } else {
            TrustRegionUpdate::Unchanged
        }
    }

    /// Per-dimension `[lo, hi]` of the region intersected with the unit
    /// cube. Side lengths are `L w_i` with `w` the lengthscales divided by
    /// their geometric mean.
    pub fn bounds(&self, lengthscales: &[f64]) -> Vec<(f64, f64)> {
        let n = lengthscales.len() as f64;
        let geo = (lengthscales.iter().map(|l| l.ln()).sum::<f64>() / n).exp();
        self.center
            .iter()
            .zip(lengthscales)
            .map(|(c, l)| {
                let half = 0.5 * self.length * l / geo;
                ((c - half).max(0.0), (c + half).min(1.0))
            })
            .collect()
    }
}

/// A region and the point picked from it, for locality checks.
#[derive(Debug, Clone)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct Step {
    pub bounds: Vec<(f64, f64)>,
    pub point: Vec<f64>,
}

pub fn run_turbo<O: Objective + ?Sized>(
    objective: &O,
    acquisition: AcquisitionKind,
    budget: Budget,
    params: &TrustRegionParams,
    schedule: &FitSchedule,
    seed: u64,
) -> FalsificationResult {
    turbo_loop(objective, acquisition, budget, params, schedule, seed, None)
}

pub(crate) fn turbo_loop<O: Objective + ?Sized>(
    objective: &O,
    acquisition: AcquisitionKind,
    budget: Budget,
    params: &TrustRegionParams,
    schedule: &FitSchedule,
    seed: u64,
    mut steps: Option<&mut Vec<Step>>,
) -> FalsificationResult {
    let mut run = Run::new(objective, budget);
    let mut rng = rng_for(seed);
    let n = run.dim();
    let mut surrogate = Surrogate::new(*schedule);
    let perturb_prob = (params.perturbed_dims / n as f64).min(1.0);

    'restart: loop {
        let start = run.sims();
        let init = uniform_points(&mut rng, budget.initial_design, n);
        if run.evaluate_all(&init) == Flow::Stop {
            return run.finish();
        }
        surrogate.reset();
        let mut state: Option<TrustRegionState> = None;
        loop {
            let (x, y) = run.observed(start..run.sims());
            let Some(best_idx) = (0..y.len()).min_by(|&a, &b| y[a].total_cmp(&y[b])) else {
                // nothing usable since the restart: keep sampling at random
                if run.evaluate(&uniform_points(&mut rng, 1, n)[0]) == Flow::Stop {
                    return run.finish();
                }
                continue;
            };
            let tr = state.get_or_insert_with(|| TrustRegionState::new(params, x[best_idx].clone(), y[best_idx]));
            let Ok(data) = Dataset::new(x.clone(), &y) else {
                unreachable!("observed values are finite")
            };
            let (hyper, _) = surrogate.refresh(&data, &mut rng, &mut run.gp_fits);
            let bounds = tr.bounds(&hyper.lengthscales);

            let candidates = region_candidates(&tr.center, &bounds, perturb_prob, &mut rng);
            let local = local_data(&x, &y, &bounds, &tr.center, &hyper.lengthscales, 2 * n);
            let pick = match GpModel::with_hyper(local, hyper.clone()) {
                Ok(model) => {
                    let sel = Selection {
                        acquisition,
                        sims: run.sims(),
                        prior: None,
                    };
                    choose(&model, &candidates, &sel, &mut rng)
                }
                Err(_) => rng.gen_range(0..candidates.len()),
            };
            let point = candidates[pick].clone();
            if let Some(s) = steps.as_deref_mut() {
                s.push(Step {
                    bounds: bounds.clone(),
                    point: point.clone(),
                });
            }
            if run.evaluate(&point) == Flow::Stop {
                return run.finish();
            }
            let y_new = run.records.last().and_then(|r| r.y);
            if tr.observe(params, &point, y_new) == TrustRegionUpdate::Collapsed {
                continue 'restart;
            }
        }
    }
}

/// Candidates inside the region: each perturbs the centre on a random
/// subset of coordinates (at least one) with quasi-random values.
fn region_candidates(
    center: &[f64],
    bounds: &[(f64, f64)],
    perturb_prob: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let n = center.len();
    let raw = sobol_candidates(candidate_count(n), n, rng.gen());
    raw.into_iter()
        .map(|p| {
            let mut mask: Vec<bool> = (0..n).map(|_| rng.gen::<f64>() < perturb_prob).collect();
            if !mask.iter().any(|&m| m) {
                mask[rng.gen_range(0..n)] = true;
            }
            (0..n)
                .map(|d| {
                    let (lo, hi) = bounds[d];
                    if mask[d] {
                        (lo + (hi - lo) * p[d]).clamp(lo, hi)
                    } else {
                        center[d]
                    }
                })
                .collect()
        })
        .collect()
}

/// Points inside the region, topped up with the nearest outside points
/// (scaled by the lengthscales) until at least `min_points` are used.
fn local_data(
    x: &[Vec<f64>],
    y: &[f64],
    bounds: &[(f64, f64)],
    center: &[f64],
    ls: &[f64],
    min_points: usize,
) -> Dataset {
    let inside = |p: &[f64]| p.iter().zip(bounds).all(|(v, (lo, hi))| v >= lo && v <= hi);
    let mut chosen: Vec<usize> = (0..x.len()).filter(|&i| inside(&x[i])).collect();
    if chosen.len() < min_points {
        let inv: Vec<f64> = ls.iter().map(|l| 1.0 / l).collect();
        let mut outside: Vec<(f64, usize)> = (0..x.len())
            .filter(|&i| !inside(&x[i]))
            .map(|i| (crate::gp::scaled_distance(&x[i], center, &inv), i))
            .collect();
        outside.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        chosen.extend(outside.iter().take(min_points - chosen.len()).map(|(_, i)| *i));
        chosen.sort_unstable();
    }
    let xs = chosen.iter().map(|&i| x[i].clone()).collect();
    let ys: Vec<f64> = chosen.iter().map(|&i| y[i]).collect();
    Dataset::new(xs, &ys).expect("non-empty finite local data")
}
