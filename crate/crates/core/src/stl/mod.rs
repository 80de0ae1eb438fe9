//! Signal temporal logic: formulas, their text syntax, and a robustness
//! monitor under Max semantics.

mod formula;
mod monitor;
mod parse;
mod vbool;

pub use formula::{BinOp, CmpOp, Expr, Formula, Interval, Predicate};
pub use monitor::{robustness, signed_robustness, MonitorError};
pub use parse::{parse, SyntaxError};
pub use vbool::{conjunction, VBool};
