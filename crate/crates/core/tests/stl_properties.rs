mod common;

use common::{defined_steps, instance, oracle, value};
use falsibo::stl::{parse, robustness, signed_robustness, Formula, Predicate, VBool};
use falsibo::trace::Trace;
use proptest::prelude::*;

fn vbool() -> impl Strategy<Value = VBool> {
    (any::<bool>(), value().prop_map(f64::abs)).prop_map(|(v, m)| VBool::new(v, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn monitor_matches_reference((f, t) in instance()) {
        for k in defined_steps(&f, &t) {
            let got = robustness(&f, &t, k).unwrap();
            prop_assert_eq!((got.verdict, got.magnitude), oracle(&f, &t, k), "k = {}", k);
        }
    }

    #[test]
    fn de_morgan(l in vbool(), r in vbool()) {
        prop_assert_eq!(l.or(r), !((!l).and(!r)));
        prop_assert_eq!(l.and(r), !((!l).or(!r)));
        prop_assert_eq!(!!l, l);
    }

    #[test]
    fn eventually_is_dual_of_always((f, t) in instance()) {
        let window = falsibo::stl::Interval::new(0.0, 2.0);
        let ev = Formula::Eventually(window, Box::new(f.clone()));
        let alw = Formula::Always(window, Box::new(Formula::not(f)));
        prop_assume!(ev.horizon(1.0) < t.len());
        for k in defined_steps(&ev, &t) {
            prop_assert_eq!(robustness(&ev, &t, k).unwrap(), !robustness(&alw, &t, k).unwrap());
        }
    }

    #[test]
    fn sign_agrees_with_verdict((f, t) in instance()) {
        let v = robustness(&f, &t, 0).unwrap();
        let s = v.signed();
        prop_assert!(v.magnitude >= 0.0 && v.magnitude.is_finite());
        if s > 0.0 { prop_assert!(v.verdict); }
        if s < 0.0 { prop_assert!(!v.verdict); }
    }

    #[test]
    fn print_then_parse_is_identity(f in common::formula()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn predicate_shift_adds_exactly(s in prop::collection::vec(value(), 1..10), c in 0.0f64..10.0) {
        let f = Formula::pred(Predicate::above("s", 0.0));
        let base = Trace::uniform(1.0, s.len()).unwrap().with_channel("s", s.clone()).unwrap();
        let moved: Vec<f64> = s.iter().map(|v| v + c).collect();
        let shifted = Trace::uniform(1.0, s.len()).unwrap().with_channel("s", moved).unwrap();
        prop_assert_eq!(signed_robustness(&f, &shifted).unwrap(), signed_robustness(&f, &base).unwrap() + c);
    }
}
