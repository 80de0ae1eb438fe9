//! Model-free baselines: corners-then-random alternation and uniform random
//! search.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{rng_for, uniform_points, Budget, FalsificationResult, Flow, Objective, Run};

/// Enumerates the `2^n` cube corners in a seeded random order without
/// repetition.
struct CornerOrder {
    dim: usize,
    listed: Option<std::vec::IntoIter<u64>>,
    seen: HashSet<Vec<bool>>,
}

impl CornerOrder {
    /// Up to this dimension the whole corner set is shuffled up front.
    const LIST_LIMIT: usize = 16;

    fn new(dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let listed = (dim <= Self::LIST_LIMIT).then(|| {
            let mut all: Vec<u64> = (0..1u64 << dim).collect();
            all.shuffle(rng);
            all.into_iter()
        });
        Self {
            dim,
            listed,
            seen: HashSet::new(),
        }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        let bits: Vec<bool> = match &mut self.listed {
            Some(it) => {
                let code = it.next()?;
                (0..self.dim).map(|d| code >> d & 1 == 1).collect()
            }
            None => loop {
                // 2^n is astronomically larger than any budget here
                let b: Vec<bool> = (0..self.dim).map(|_| rng.gen()).collect();
                if self.seen.insert(b.clone()) {
                    break b;
                }
            },
        };
        Some(bits.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect())
    }
}

/// Alternates a fresh corner with a uniform random point, starting with a
/// corner; once every corner has been tried only random points follow.
pub fn run_hcr<O: Objective + ?Sized>(objective: &O, budget: Budget, seed: u64) -> FalsificationResult {
    let mut run = Run::new(objective, budget);
    let mut rng = rng_for(seed);
    let n = run.dim();
    let mut corners = CornerOrder::new(n, &mut rng);
    let mut corner_turn = true;
    loop {
        let point = if corner_turn { corners.next(&mut rng) } else { None };
        let point = point.unwrap_or_else(|| uniform_points(&mut rng, 1, n).remove(0));
        corner_turn = !corner_turn;
        if run.evaluate(&point) == Flow::Stop {
            return run.finish();
        }
    }
}

/// Uniform random sampling of the box.
pub fn run_random<O: Objective + ?Sized>(objective: &O, budget: Budget, seed: u64) -> FalsificationResult {
    let mut run = Run::new(objective, budget);
    let mut rng = rng_for(seed);
    let n = run.dim();
    loop {
        let point = uniform_points(&mut rng, 1, n).remove(0);
        if run.evaluate(&point) == Flow::Stop {
            return run.finish();
        }
    }
}
