//! Static switched benchmark: a memoryless two-input map that is falsified
//! only in a small neighbourhood of the corner `(1, 1)`.
//!
//! Away from the corner square `(gamma, 1]^2` the output is a bowl with its
//! zero minimum at `(gamma, gamma)`, just outside the failing set. Inside the
//! square the output switches to `|x - (1,1)|^2 - (1-gamma)^2`, which is
//! negative only within distance `1 - gamma` of the corner. The switch is a
//! jump upwards, so descending the bowl stalls on its rim.

use serde::{Deserialize, Serialize};

use super::SimulationError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsConfig {
    pub gamma: f64,
}

impl SsConfig {
    pub fn new(gamma: f64) -> Result<Self, SimulationError> {
        let cfg = Self { gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.gamma > 0.0 && self.gamma < 1.0 {
            Ok(())
        } else {
            Err(SimulationError::Config(format!(
                "static switched threshold must lie in (0, 1), got {}",
                self.gamma
            )))
        }
    }
}

pub fn ss_objective(x1: f64, x2: f64, gamma: f64) -> Result<f64, SimulationError> {
    for (i, v) in [x1, x2].into_iter().enumerate() {
        if !(-1.0..=1.0).contains(&v) {
            return Err(SimulationError::OutOfRange {
                channel: format!("u{}", i + 1),
                value: v,
            });
        }
    }
    Ok(if x1.min(x2) <= gamma {
        ((x1 - gamma).powi(2) + (x2 - gamma).powi(2)) / (2.0 * (1.0 + gamma))
    } else {
        (x1 - 1.0).powi(2) + (x2 - 1.0).powi(2) - (1.0 - gamma).powi(2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((ss_objective(1.0, 1.0, 0.7).unwrap() + 0.09).abs() < 1e-12);
        assert!((ss_objective(-1.0, -1.0, 0.7).unwrap() - 1.7).abs() < 1e-12);
        for g in [0.7, 0.8, 0.9, 0.33] {
            assert_eq!(ss_objective(g, g, g).unwrap(), 0.0);
        }
    }

    #[test]
    fn falsified_only_near_the_corner() {
        for gamma in [0.7, 0.8, 0.9] {
            assert!(ss_objective(1.0, 1.0, gamma).unwrap() < 0.0);
            let r = 2.0 * (1.0 - gamma);
            for i in 0..=200 {
                for j in 0..=200 {
                    let x1 = -1.0 + i as f64 / 100.0;
                    let x2 = -1.0 + j as f64 / 100.0;
                    if (x1 - 1.0).abs().max((x2 - 1.0).abs()) > r {
                        assert!(ss_objective(x1, x2, gamma).unwrap() > 0.0, "({x1}, {x2}) at {gamma}");
                    }
                }
            }
        }
    }

    #[test]
    fn failing_set_shrinks_with_gamma() {
        let count = |gamma: f64| {
            (0..=200)
                .flat_map(|i| (0..=200).map(move |j| (i, j)))
                .filter(|&(i, j)| ss_objective(-1.0 + i as f64 / 100.0, -1.0 + j as f64 / 100.0, gamma).unwrap() < 0.0)
                .count()
        };
        let (a, b, c) = (count(0.7), count(0.8), count(0.9));
        assert!(a > b && b > c && c > 0);
    }

    #[test]
    fn slope_at_origin() {
        let h = 1e-6;
        let f = |a: f64, b: f64| ss_objective(a, b, 0.7).unwrap();
        let gx = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let gy = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
        assert!(gx + gy < 0.0);
    }

    #[test]
    fn rejects_out_of_box() {
        assert!(ss_objective(1.5, 0.0, 0.7).is_err());
        assert!(SsConfig::new(1.0).is_err());
        assert!(SsConfig::new(0.0).is_err());
    }
}
