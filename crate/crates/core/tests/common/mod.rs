//! Shared generators and a brute-force reference evaluator.
#![allow(dead_code)]

use falsibo::stl::{BinOp, CmpOp, Expr, Formula, Interval, Predicate};
use falsibo::trace::Trace;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

pub const SIGNALS: [&str; 2] = ["a", "b"];
pub const MAX_TRACE: usize = 20;

/// Values with frequent ties and zeros, plus arbitrary reals.
pub fn value() -> impl Strategy<Value = f64> {
    prop_oneof![(-4i32..=4).prop_map(|v| f64::from(v) * 0.5), -5.0f64..5.0]
}

fn expr() -> impl Strategy<Value = Expr> {
    let sig = prop::sample::select(SIGNALS.to_vec()).prop_map(Expr::signal);
    prop_oneof![
        4 => sig.clone(),
        1 => sig.clone().prop_map(|e| Expr::Abs(Box::new(e))),
        1 => (sig.clone(), sig).prop_map(|(l, r)| Expr::binary(BinOp::Sub, l, r)),
    ]
}

fn predicate() -> impl Strategy<Value = Formula> {
    let op = prop::sample::select(vec![CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le, CmpOp::Eq]);
    let threshold = (-4i32..=4).prop_map(|v| Expr::Const(f64::from(v) * 0.5));
    (expr(), op, threshold).prop_map(|(l, op, r)| Formula::Pred(Predicate::new(l, op, r)))
}

fn window() -> impl Strategy<Value = Interval> {
    (0u32..=3, 0u32..=3).prop_map(|(lo, w)| Interval::new(f64::from(lo), f64::from(lo + w)))
}

/// Formulas of depth at most 4 with integer windows.
pub fn formula() -> impl Strategy<Value = Formula> {
    predicate()
        .prop_recursive(3, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
                (window(), inner.clone()).prop_map(|(w, f)| Formula::Always(w, Box::new(f))),
                (window(), inner).prop_map(|(w, f)| Formula::Eventually(w, Box::new(f))),
            ]
        })
        .prop_filter("depth at most 4", |f| f.depth() <= 4)
}

/// A unit-step trace over both signals, long enough for `horizon` and at
/// most `MAX_TRACE` samples.
pub fn trace_for(horizon: usize) -> impl Strategy<Value = Trace> {
    let min_len = (horizon + 1).min(MAX_TRACE);
    (min_len..=MAX_TRACE).prop_flat_map(|len| {
        (prop::collection::vec(value(), len), prop::collection::vec(value(), len)).prop_map(move |(a, b)| {
            Trace::uniform(1.0, len)
                .and_then(|t| t.with_channel("a", a))
                .and_then(|t| t.with_channel("b", b))
                .expect("valid trace")
        })
    })
}

pub fn instance() -> impl Strategy<Value = (Formula, Trace)> {
    formula()
        .prop_filter("fits a short trace", |f| f.horizon(1.0) < MAX_TRACE)
        .prop_flat_map(|f| {
            let h = f.horizon(1.0);
            (Just(f), trace_for(h))
        })
}

/// `count` deterministic draws from a strategy.
pub fn sample<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| {
            strategy
                .new_tree(&mut runner)
                .expect("strategy produces values")
                .current()
        })
        .collect()
}

/// Reference evaluation, written straight from the semantics: a
/// (verdict, magnitude) pair per node, recomputed at every step without
/// sharing.
pub fn oracle(f: &Formula, t: &Trace, k: usize) -> (bool, f64) {
    fn and(l: (bool, f64), r: (bool, f64)) -> (bool, f64) {
        match (l.0, r.0) {
            (true, true) => (true, l.1.min(r.1)),
            (true, false) => r,
            (false, true) => l,
            (false, false) => (false, l.1.max(r.1)),
        }
    }
    fn not(v: (bool, f64)) -> (bool, f64) {
        (!v.0, v.1)
    }
    fn eval(e: &Expr, t: &Trace, k: usize) -> f64 {
        match e {
            Expr::Const(c) => *c,
            Expr::Signal(s) => t.channel(s).expect("known signal")[k],
            Expr::Neg(e) => -eval(e, t, k),
            Expr::Abs(e) => eval(e, t, k).abs(),
            Expr::Binary(op, l, r) => {
                let (l, r) = (eval(l, t, k), eval(r, t, k));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                }
            }
        }
    }
    match f {
        Formula::Pred(p) => {
            let (l, r) = (eval(&p.lhs, t, k), eval(&p.rhs, t, k));
            let m = match p.op {
                CmpOp::Gt | CmpOp::Ge => l - r,
                CmpOp::Lt | CmpOp::Le => r - l,
                CmpOp::Eq if l == r => 1.0,
                CmpOp::Eq => -1.0,
            };
            (m > 0.0, m.abs())
        }
        Formula::Not(g) => not(oracle(g, t, k)),
        Formula::And(l, r) => and(oracle(l, t, k), oracle(r, t, k)),
        Formula::Or(l, r) => not(and(not(oracle(l, t, k)), not(oracle(r, t, k)))),
        Formula::Always(w, g) => {
            let (lo, hi) = (w.lo as usize, w.hi as usize);
            (k + lo..=k + hi)
                .map(|i| oracle(g, t, i))
                .reduce(and)
                .expect("non-empty window")
        }
        Formula::Eventually(w, g) => {
            let dual = Formula::Always(*w, Box::new(Formula::not((**g).clone())));
            not(oracle(&dual, t, k))
        }
    }
}

/// Steps at which the formula is defined on the trace.
pub fn defined_steps(f: &Formula, t: &Trace) -> std::ops::Range<usize> {
    0..t.len() - f.horizon(t.step())
}
