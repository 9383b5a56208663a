mod common;

use common::*;
use proptest::prelude::*;
use sigzone::automata::{
    compose, is_strongly_deterministic, validate, validate_plma, Flow, VarKind,
};
use sigzone::io::{emit_model, parse_model_str};
use sigzone::poly::Rational;

fn rate(r: i64) -> Flow {
    Flow::Rate(Rational::from(r))
}

#[test]
fn sensor_spec_shape() {
    let net = network(SENSORS);
    let spec = &net.spec;
    assert_eq!(spec.locations.len(), 4);
    assert_eq!(spec.edges.len(), 3);
    assert_eq!(
        spec.vars_of_kind(VarKind::Clock)
            .map(|d| spec.var_name(d))
            .collect::<Vec<_>>(),
        ["x"]
    );
    assert_eq!(
        spec.vars_of_kind(VarKind::Signal)
            .map(|d| spec.var_name(d))
            .collect::<Vec<_>>(),
        ["s1", "s2"]
    );
    assert_eq!(net.bounders.len(), 2);
}

#[test]
fn bounder_shape() {
    let net = network(SENSORS);
    let b = &net.bounders[0];
    assert_eq!(b.locations.len(), 4);
    assert_eq!(b.edges.len(), 6);
    let s1 = b.space.lookup("s1").unwrap();
    for l in &b.locations {
        let decreasing = l.name.starts_with("dec");
        assert_eq!(
            l.invariant.dim_interval(s1).unwrap().minimum().is_some(),
            decreasing,
            "{}",
            l.name
        );
    }
}

#[test]
fn mixed_guard_in_spec_is_rejected() {
    let text = "clock x;\nsignal s in [0, 1];\nautomaton ptas a {\n    loc l0;\n    loc l1;\n    edge l0 -> l1 when x <= s sync go;\n    init l0;\n}\nautomaton sba b {\n    loc m flow { s: 1 };\n    init m;\n}\ntarget l1;\n";
    let err = parse_model_str(text).unwrap_err().to_string();
    assert!(err.contains("mixes a clock and a signal"), "{err}");
}

#[test]
fn product_has_constant_flows() {
    let a = composed(SENSORS);
    assert!(validate_plma(&a).is_empty());
    assert_eq!(a.locations.len(), 4 * 4 * 4);
    let l = &a.locations[a.loc_id("(l1, inc_slow, dec_fast)").unwrap()];
    let by_name = |n: &str| l.flow[&a.space.lookup(n).unwrap()].clone();
    assert_eq!(by_name("x"), rate(1));
    assert_eq!(by_name("s1"), rate(1));
    assert_eq!(by_name("s2"), rate(-3));
}

#[test]
fn bundled_products_are_strongly_deterministic() {
    for set in [TWO_RATE, PREDICATES, SENSORS, SENSE_GAP] {
        let net = network(set);
        assert!(is_strongly_deterministic(&net.spec));
        assert!(net.bounders.iter().all(is_strongly_deterministic));
        let a = compose(&net).unwrap();
        assert!(is_strongly_deterministic(&a), "{set:?}");
        assert!(validate(&a).is_empty());
    }
}

#[test]
fn product_accepts_where_the_spec_accepts() {
    let a = composed(SENSE_GAP);
    for l in &a.locations {
        assert_eq!(l.accepting, l.name.starts_with("(lT,"), "{}", l.name);
    }
}

#[test]
fn booleans_compose_with_rate_zero() {
    let a = composed(PREDICATES);
    let p1 = a.space.lookup("P1").unwrap();
    assert_eq!(a.var_kinds[&p1], VarKind::Boolean);
    assert!(a.locations.iter().all(|l| l.flow[&p1] == rate(0)));
    assert_eq!(a.init_box[&p1].lo, Rational::from(1));
}

#[test]
fn emitted_models_parse_back() {
    for name in ["fig1a.szm", "fig1b.szm", "fig5.szm", "fig9.szm"] {
        let mut files = vec![name];
        if name.starts_with("fig1") {
            files.extend(["sba_s1.szm", "sba_s2.szm"]);
        }
        let once = emit_model(&network(&files));
        let again = emit_model(&parse_model_str(&once).unwrap());
        assert_eq!(once, again, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_pairs_compose_to_linear_automata(seed in any::<u64>()) {
        let net = random_network(seed, seed % 2 == 0);
        prop_assert!(validate(&net.spec).is_empty());
        prop_assert!(validate(&net.bounders[0]).is_empty());
        let a = compose(&net).unwrap();
        prop_assert!(validate_plma(&a).is_empty());
        prop_assert!(a.locations.iter().all(|l| l.flow.values().all(|f| matches!(f, Flow::Rate(_)))));
        prop_assert_eq!(a.locations.len(), net.spec.locations.len() * net.bounders[0].locations.len());
        prop_assert!(is_strongly_deterministic(&a));
        // The signal rate in each product location is the bounder's.
        let s = a.space.lookup("s").unwrap();
        let bs = net.bounders[0].space.lookup("s").unwrap();
        for l in &a.locations {
            let mode = l.name.trim_end_matches(')').rsplit(", ").next().unwrap();
            let m = net.bounders[0].loc_id(mode).unwrap();
            prop_assert_eq!(&l.flow[&s], &net.bounders[0].locations[m].flow[&bs]);
        }
    }
}
