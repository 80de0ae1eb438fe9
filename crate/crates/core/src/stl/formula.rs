//! Formula and expression trees.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Real-valued expression over named channels, evaluated per sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Signal(String),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn signal(name: impl Into<String>) -> Self {
        Expr::Signal(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Evaluates the expression, resolving channels through `lookup`.
    pub fn eval<'a, F>(&'a self, lookup: &F) -> Result<f64, &'a str>
    where
        F: Fn(&str) -> Option<f64>,
    {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Signal(name) => lookup(name).ok_or(name.as_str())?,
            Expr::Neg(e) => -e.eval(lookup)?,
            Expr::Abs(e) => e.eval(lookup)?.abs(),
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(lookup)?, r.eval(lookup)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                }
            }
        })
    }

    pub fn signals<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Signal(s) => {
                if !out.contains(&s.as_str()) {
                    out.push(s)
                }
            }
            Expr::Neg(e) | Expr::Abs(e) => e.signals(out),
            Expr::Binary(_, l, r) => {
                l.signals(out);
                r.signals(out);
            }
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, Expr::Const(_) | Expr::Signal(_) | Expr::Abs(_) | Expr::Neg(_))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Signal(s) => f.write_str(s),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Abs(e) => write!(f, "abs({e})"),
            Expr::Binary(op, l, r) => {
                write_operand(f, l)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, r)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    if e.is_atomic() {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
        }
    }
}

/// A comparison `lhs op rhs`, normalized to a margin that is positive exactly
/// when the comparison holds strictly.
///
/// `>`/`>=` give `lhs - rhs`, `<`/`<=` give `rhs - lhs`; `==` is two-valued,
/// `+1` when both sides are equal and `-1` otherwise. Under the strict
/// verdict rule the non-strict forms coincide with the strict ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Predicate {
    pub fn new(lhs: Expr, op: CmpOp, rhs: Expr) -> Self {
        Self { lhs, op, rhs }
    }

    /// `name > threshold`.
    pub fn above(name: &str, threshold: f64) -> Self {
        Self::new(Expr::signal(name), CmpOp::Gt, Expr::Const(threshold))
    }

    /// `name < threshold`.
    pub fn below(name: &str, threshold: f64) -> Self {
        Self::new(Expr::signal(name), CmpOp::Lt, Expr::Const(threshold))
    }

    pub fn margin<'a, F>(&'a self, lookup: &F) -> Result<f64, &'a str>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let l = self.lhs.eval(lookup)?;
        let r = self.rhs.eval(lookup)?;
        Ok(match self.op {
            CmpOp::Gt | CmpOp::Ge => l - r,
            CmpOp::Lt | CmpOp::Le => r - l,
            CmpOp::Eq => {
                if l == r {
                    1.0
                } else {
                    -1.0
                }
            }
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// Closed time window `[lo, hi]` in seconds, relative to the evaluation instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Step indices covering the window on a grid of period `dt`: the lower
    /// bound is rounded down and the upper bound up.
    pub fn steps(&self, dt: f64) -> (usize, usize) {
        const EPS: f64 = 1e-9;
        let lo = (self.lo / dt + EPS).floor().max(0.0) as usize;
        let hi = (self.hi / dt - EPS).ceil().max(0.0) as usize;
        (lo, hi.max(lo))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Pred(Predicate),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Always(Interval, Box<Formula>),
    Eventually(Interval, Box<Formula>),
}

impl Formula {
    pub fn pred(p: Predicate) -> Self {
        Formula::Pred(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn always(lo: f64, hi: f64, f: Formula) -> Self {
        Formula::Always(Interval::new(lo, hi), Box::new(f))
    }

    pub fn eventually(lo: f64, hi: f64, f: Formula) -> Self {
        Formula::Eventually(Interval::new(lo, hi), Box::new(f))
    }

    /// Number of samples past the evaluation instant the formula reads on a
    /// grid of period `dt`.
    pub fn horizon(&self, dt: f64) -> usize {
        match self {
            Formula::Pred(_) => 0,
            Formula::Not(f) => f.horizon(dt),
            Formula::And(l, r) | Formula::Or(l, r) => l.horizon(dt).max(r.horizon(dt)),
            Formula::Always(i, f) | Formula::Eventually(i, f) => i.steps(dt).1 + f.horizon(dt),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Pred(_) => 1,
            Formula::Not(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => 1 + f.depth(),
            Formula::And(l, r) | Formula::Or(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Channel names referenced by predicates, in first-use order.
    pub fn signals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_signals(&mut out);
        out
    }

    fn collect_signals<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Formula::Pred(p) => {
                p.lhs.signals(out);
                p.rhs.signals(out);
            }
            Formula::Not(f) | Formula::Always(_, f) | Formula::Eventually(_, f) => f.collect_signals(out),
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.collect_signals(out);
                r.collect_signals(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Pred(p) => write!(f, "{p}"),
            Formula::Not(g) => write!(f, "not ({g})"),
            Formula::And(l, r) => write!(f, "({l}) and ({r})"),
            Formula::Or(l, r) => write!(f, "({l}) or ({r})"),
            Formula::Always(i, g) => write!(f, "alw_[{},{}] ({g})", i.lo, i.hi),
            Formula::Eventually(i, g) => write!(f, "ev_[{},{}] ({g})", i.lo, i.hi),
        }
    }
}
