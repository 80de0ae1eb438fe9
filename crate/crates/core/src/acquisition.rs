//! Candidate scoring: Thompson sampling, lower confidence bound, probability
//! of improvement in its `U` form, and prior weighting.
//!
//! Every score here is oriented so that lower is better.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, SQRT_2};

use serde::{Deserialize, Serialize};

/// Variance below which `score_u` saturates instead of dividing.
pub const SIGMA_FLOOR: f64 = 1e-12;
/// Lower bound on any prior density value.
pub const DENSITY_FLOOR: f64 = 1e-12;
/// Coordinates are kept this far from the cube faces before evaluating the
/// U-shaped density, which is unbounded at 0 and 1.
const EDGE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AcquisitionKind {
    Ts,
    Lcb {
        /// Logarithm base in the exploration schedule; natural log when absent.
        #[serde(default)]
        log_base: Option<f64>,
    },
    Pi {
        /// Target in raw robustness units.
        #[serde(default = "default_tau")]
        tau: f64,
    },
}

fn default_tau() -> f64 {
    -1.0
}

impl AcquisitionKind {
    pub fn lcb() -> Self {
        Self::Lcb { log_base: None }
    }

    pub fn pi(tau: f64) -> Self {
        Self::Pi { tau }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Ts => "ts",
            Self::Lcb { .. } => "lcb",
            Self::Pi { .. } => "pi",
        }
    }
}

/// Exploration weight `sqrt(0.125 ln(2j + 1))` after `j` simulations.
pub fn lcb_beta(j: usize) -> f64 {
    lcb_beta_with_base(j, None)
}

pub fn lcb_beta_with_base(j: usize, log_base: Option<f64>) -> f64 {
    let ln = (2.0 * j as f64 + 1.0).ln();
    let log = match log_base {
        Some(b) => ln / b.ln(),
        None => ln,
    };
    (0.125 * log).sqrt()
}

pub fn score_lcb(mu: f64, sigma: f64, beta: f64) -> f64 {
    mu - beta * sigma
}

/// `(mu - tau) / sigma`; saturates to `±inf` for a vanishing `sigma`.
pub fn score_u(mu: f64, sigma: f64, tau: f64) -> f64 {
    if sigma <= SIGMA_FLOOR {
        if mu > tau {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        (mu - tau) / sigma
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Probability that the objective falls below `tau`: `Phi((tau - mu) / sigma)`.
pub fn probability_of_improvement(mu: f64, sigma: f64, tau: f64) -> f64 {
    if sigma <= SIGMA_FLOOR {
        return if mu > tau { 0.0 } else { 1.0 };
    }
    normal_cdf((tau - mu) / sigma)
}

pub fn score_ts(draw: f64) -> f64 {
    draw
}

/// Index of the smallest score (first on ties). NaN scores never win.
pub fn argmin(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorShape {
    Uniform,
    /// Symmetric Beta(1/2, 1/2) per dimension: mass concentrated at the faces.
    UShaped,
}

impl PriorShape {
    pub fn density_1d(&self, u: f64) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::UShaped => {
                let u = u.clamp(EDGE, 1.0 - EDGE);
                (FRAC_1_PI / (u * (1.0 - u)).sqrt()).max(DENSITY_FLOOR)
            }
        }
    }

    pub fn cdf_1d(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Self::Uniform => u,
            Self::UShaped => 2.0 * FRAC_1_PI * u.sqrt().asin(),
        }
    }

    pub fn inverse_cdf_1d(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        match self {
            Self::Uniform => v,
            Self::UShaped => (FRAC_PI_2 * v).sin().powi(2).clamp(0.0, 1.0),
        }
    }
}

/// Product-form density over the unit cube with a confidence `beta_star`
/// that is divided by the iteration index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorWeight {
    pub shape: PriorShape,
    pub beta_star: f64,
}

impl PriorWeight {
    pub fn new(shape: PriorShape, beta_star: f64) -> Self {
        Self { shape, beta_star }
    }

    pub fn uniform(beta_star: f64) -> Self {
        Self::new(PriorShape::Uniform, beta_star)
    }

    pub fn u_shaped(beta_star: f64) -> Self {
        Self::new(PriorShape::UShaped, beta_star)
    }

    pub fn density(&self, u: &[f64]) -> f64 {
        u.iter()
            .map(|&v| self.shape.density_1d(v))
            .product::<f64>()
            .max(DENSITY_FLOOR)
    }

    pub fn ln_density(&self, u: &[f64]) -> f64 {
        u.iter()
            .map(|&v| self.shape.density_1d(v).ln())
            .sum::<f64>()
            .max(DENSITY_FLOOR.ln())
    }

    /// `pi(u)^(beta_star / j)`.
    pub fn weight(&self, u: &[f64], j: usize) -> f64 {
        (self.beta_star / j as f64 * self.ln_density(u)).exp()
    }

    /// Maps a uniform sample of the cube to a sample of the prior.
    pub fn transform(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|&x| self.shape.inverse_cdf_1d(x)).collect()
    }
}

/// Applies the prior weight at iteration `j >= 1`. A lower-is-better score
/// `s` is read as the maximize form `exp(-s)`, multiplied by the weight and
/// returned on the log scale with the sign restored, so the result is again
/// lower-is-better: `s - (beta_star / j) ln pi(u)`.
pub fn apply_prior(scores: &[f64], candidates: &[Vec<f64>], prior: &PriorWeight, j: usize) -> Vec<f64> {
    assert!(j >= 1, "prior weighting starts at iteration 1");
    let exponent = prior.beta_star / j as f64;
    scores
        .iter()
        .zip(candidates)
        .map(|(s, u)| s - exponent * prior.ln_density(u))
        .collect()
}
