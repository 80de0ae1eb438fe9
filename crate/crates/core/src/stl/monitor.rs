//! Max-semantics robustness of a formula over a sampled trace.
//!
//! Each node is expanded into its full sequence of verdicts over the samples
//! where it is defined, once, bottom-up. A node of horizon `h` on a trace of
//! length `n` is defined at steps `0..n-h`.

use thiserror::Error;

use super::formula::{Formula, Predicate};
use super::vbool::{conjunction, VBool};
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("formula needs {needed} samples from step {step} but the trace has {len}")]
    HorizonExceedsTrace { step: usize, needed: usize, len: usize },
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("predicate `{0}` is not finite at step {1}")]
    NonFinite(String, usize),
}

/// Robustness of `formula` at step `k` of `trace`.
pub fn robustness(formula: &Formula, trace: &Trace, k: usize) -> Result<VBool, MonitorError> {
    let dt = trace.step();
    let needed = formula.horizon(dt) + 1;
    if k + needed > trace.len() {
        return Err(MonitorError::HorizonExceedsTrace {
            step: k,
            needed,
            len: trace.len(),
        });
    }
    let values = expand(formula, trace, dt, k + 1)?;
    Ok(values[k])
}

/// Signed robustness at the first sample; negative means the trace violates
/// the formula.
pub fn signed_robustness(formula: &Formula, trace: &Trace) -> Result<f64, MonitorError> {
    robustness(formula, trace, 0).map(VBool::signed)
}

/// Verdicts of `formula` at steps `0..count`; the caller guarantees the
/// horizon fits.
fn expand(f: &Formula, trace: &Trace, dt: f64, count: usize) -> Result<Vec<VBool>, MonitorError> {
    match f {
        Formula::Pred(p) => predicate(p, trace, count),
        Formula::Not(g) => Ok(expand(g, trace, dt, count)?.into_iter().map(|v| !v).collect()),
        Formula::And(l, r) | Formula::Or(l, r) => {
            let lv = expand(l, trace, dt, count)?;
            let rv = expand(r, trace, dt, count)?;
            let is_and = matches!(f, Formula::And(..));
            Ok(lv
                .into_iter()
                .zip(rv)
                .map(|(a, b)| if is_and { a.and(b) } else { a.or(b) })
                .collect())
        }
        Formula::Always(window, g) | Formula::Eventually(window, g) => {
            let (lo, hi) = window.steps(dt);
            let negate = matches!(f, Formula::Eventually(..));
            let mut inner = expand(g, trace, dt, count + hi)?;
            if negate {
                inner.iter_mut().for_each(|v| *v = !*v);
            }
            Ok((0..count)
                .map(|k| {
                    let v = conjunction(inner[k + lo..=k + hi].iter().copied()).expect("window is non-empty");
                    if negate {
                        !v
                    } else {
                        v
                    }
                })
                .collect())
        }
    }
}

fn predicate(p: &Predicate, trace: &Trace, count: usize) -> Result<Vec<VBool>, MonitorError> {
    let mut names = Vec::new();
    p.lhs.signals(&mut names);
    p.rhs.signals(&mut names);
    let columns: Vec<(&str, &[f64])> = names
        .iter()
        .map(|n| {
            trace
                .channel(n)
                .map(|c| (*n, c))
                .ok_or_else(|| MonitorError::UnknownSignal(n.to_string()))
        })
        .collect::<Result<_, _>>()?;
    (0..count)
        .map(|k| {
            let lookup = |name: &str| columns.iter().find(|(n, _)| *n == name).map(|(_, c)| c[k]);
            let m = p
                .margin(&lookup)
                .map_err(|name| MonitorError::UnknownSignal(name.to_string()))?;
            if m.is_nan() {
                return Err(MonitorError::NonFinite(p.to_string(), k));
            }
            Ok(VBool::from_margin(m))
        })
        .collect()
}
