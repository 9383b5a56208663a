mod common;

use common::*;
use sigzone::automata::Automaton;
use sigzone::exemplify::{exemplify, Deadlock, DeadlockKind, RunKind};
use sigzone::io::{
    breakpoints, emit_plot, emit_trace, location_parts, model_hash, parse_model_str, parse_trace,
    polyline, PlotFormat, TraceDocument, TraceError,
};
use sigzone::poly::Rational;
use sigzone::semantics::{Budget, ConcreteRun, Verdict};

fn points(list: &[(&str, &str)]) -> Vec<(Rational, Rational)> {
    list.iter().map(|(t, v)| (q(t), q(v))).collect()
}

#[test]
fn example_plot_breakpoints() {
    let a = composed(TWO_RATE);
    let run = rho(&a, "12");
    assert_eq!(
        polyline(&a, &run, 0),
        points(&[("0", "0"), ("3.8", "7.6"), ("3.8", "0"), ("6.8", "3")])
    );
    assert_eq!(
        polyline(&a, &run, 1),
        points(&[("0", "-2"), ("3.8", "9.4"), ("6.8", "9.4")])
    );
}

#[test]
fn example_plot_csv_is_byte_stable() {
    let a = composed(TWO_RATE);
    let run = rho(&a, "12");
    let csv = emit_plot(&a, &run, PlotFormat::Csv);
    assert_eq!(csv, "t,x1,x2\n0,0,-2\n3.8,7.6,9.4\n3.8,0,9.4\n6.8,3,9.4\n");
    assert_eq!(emit_plot(&a, &run, PlotFormat::Csv), csv);
}

#[test]
fn zero_length_run_plots_one_point() {
    let a = composed(TWO_RATE);
    let mut run = rho(&a, "12");
    run.states.truncate(1);
    run.steps.clear();
    assert_eq!(polyline(&a, &run, 0), points(&[("0", "0")]));
    assert_eq!(breakpoints(&a, &run).len(), 1);
}

#[test]
fn breakpoint_count_bound() {
    let a = composed(TWO_RATE);
    let run = rho(&a, "12");
    // 2 per step plus the start, minus the merged end of the last delay.
    assert!(breakpoints(&a, &run).len() <= 2 * run.steps.len() + 1);
}

/// Minimal well-formedness: every opened element is closed in order.
fn well_formed(xml: &str) -> bool {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = xml;
    while let Some(start) = rest.find('<') {
        let end = match rest[start..].find('>') {
            Some(e) => start + e,
            None => return false,
        };
        let tag = &rest[start + 1..end];
        if let Some(name) = tag.strip_prefix('/') {
            if stack.pop().as_deref() != Some(name.trim()) {
                return false;
            }
        } else if !tag.ends_with('/') {
            stack.push(tag.split_whitespace().next().unwrap_or("").to_string());
        }
        rest = &rest[end + 1..];
    }
    stack.is_empty()
}

#[test]
fn svg_is_well_formed_and_labels_actions() {
    let a = composed(TWO_RATE);
    let svg = emit_plot(&a, &rho(&a, "12"), PlotFormat::Svg);
    assert!(svg.starts_with("<svg"));
    assert!(well_formed(&svg));
    assert!(svg.contains(">a1</text>") && svg.contains(">a2</text>"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("stroke-dasharray").count(), 2);
}

#[test]
fn example_trace_round_trips() {
    let a = composed(TWO_RATE);
    let run = rho(&a, "12");
    let hash = model_hash(&[&model_text("fig5.szm")]);
    let doc = TraceDocument::from_run(&a, &hash, RunKind::Positive, &run, Verdict::Positive, None);
    let text = emit_trace(&doc);
    assert!(text.contains("\"duration\": \"19/5\""));
    assert!(text.contains("\"duration\": \"3\""));
    assert!(text.contains("\"x2\": \"47/5\""));
    assert!(!text.contains("t_abs"));
    let back = parse_trace(&text).unwrap();
    assert_eq!(back, doc);
    assert_eq!(back.to_run(&a).unwrap(), run);
    assert_eq!(emit_trace(&back), text);
}

#[test]
fn single_state_trace() {
    let a = composed(TWO_RATE);
    let run = ConcreteRun {
        pval: qs(&["1"]),
        states: vec![rho(&a, "1").states[0].clone()],
        steps: vec![],
    };
    let doc = TraceDocument::from_run(&a, "h", RunKind::Positive, &run, Verdict::Positive, None);
    assert_eq!(doc.steps.len(), 1);
    assert!(doc.steps[0].action.is_none());
    assert_eq!(
        parse_trace(&emit_trace(&doc)).unwrap().to_run(&a).unwrap(),
        run
    );
}

#[test]
fn negative_trace_carries_its_deadlock() {
    let a = composed(TWO_RATE);
    let res = exemplify(&a, &a.accepting(), Budget::default(), 1).unwrap();
    let neg = res[0].get(RunKind::NegParam).unwrap();
    let doc = TraceDocument::from_run(&a, "h", neg.kind, &neg.run, neg.verdict, neg.deadlock);
    let value: serde_json::Value = serde_json::from_str(&emit_trace(&doc)).unwrap();
    let dl = neg.deadlock.unwrap();
    assert_eq!(
        dl,
        Deadlock {
            kind: DeadlockKind::Parametric,
            index: dl.index
        }
    );
    assert_eq!(
        value["deadlock"],
        serde_json::json!({ "kind": "parametric", "index": dl.index })
    );
    assert_eq!(value["kind"], "neg_param");
    assert_eq!(value["verdict"]["negative"]["reason"], "guard");
}

#[test]
fn traces_keep_component_locations() {
    let a = composed(SENSE_GAP);
    assert_eq!(
        location_parts("(l1, dec_fast, inc_slow)"),
        ["l1", "dec_fast", "inc_slow"]
    );
    assert_eq!(location_parts("l1"), ["l1"]);
    let res = exemplify(&a, &a.accepting(), Budget::default(), 1).unwrap();
    let pos = res[0].positive().unwrap();
    let doc = TraceDocument::from_run(&a, "h", pos.kind, &pos.run, pos.verdict, None);
    assert!(doc.steps.iter().all(|s| s.location.len() == 3));
    assert_eq!(doc.to_run(&a).unwrap(), pos.run);
}

#[test]
fn malformed_traces_are_rejected() {
    let a = composed(TWO_RATE);
    let doc = TraceDocument::from_run(
        &a,
        "h",
        RunKind::Positive,
        &rho(&a, "12"),
        Verdict::Positive,
        None,
    );
    assert!(matches!(parse_trace("{"), Err(TraceError::Json(_))));

    let mut bad = doc.clone();
    bad.steps[1].location = vec!["nowhere".into()];
    assert!(matches!(
        bad.to_run(&a),
        Err(TraceError::UnknownLocation(_))
    ));

    let mut bad = doc.clone();
    bad.steps[0].valuation.remove("x1");
    assert!(matches!(bad.to_run(&a), Err(TraceError::Missing(_))));

    let mut bad = doc.clone();
    bad.steps[0].edge = Some(7);
    assert!(matches!(bad.to_run(&a), Err(TraceError::UnknownEdge(0, 7))));

    let mut bad = doc.clone();
    bad.steps[2].duration = Some(q("1"));
    assert!(matches!(bad.to_run(&a), Err(TraceError::TrailingAction)));

    let mut bad = doc;
    bad.steps[0].duration = None;
    assert!(matches!(bad.to_run(&a), Err(TraceError::MissingStep(0))));
}

#[test]
fn model_hash_depends_on_every_file() {
    let one = model_hash(&["a", "b"]);
    assert_eq!(one.len(), 64);
    assert_ne!(one, model_hash(&["ab"]));
    assert_ne!(one, model_hash(&["a", "c"]));
    assert_eq!(one, model_hash(&["a", "b"]));
}

#[test]
fn rationals_in_models() {
    let text = "param p;\nvar x in [0.5, 3/2];\nautomaton plma m {\n    loc l invariant x <= 7 flow { x: -1.25 };\n    init l;\n}\ntarget l;\n";
    let net = parse_model_str(text).unwrap();
    let x = net.spec.space.lookup("x").unwrap();
    assert_eq!(net.spec.init_box[&x].lo, q("1/2"));
    assert_eq!(net.spec.init_box[&x].hi, q("3/2"));
    assert_eq!(
        net.spec.locations[0].flow[&x],
        sigzone::automata::Flow::Rate(q("-5/4"))
    );
}

#[test]
fn syntax_errors_report_positions() {
    let err =
        parse_model_str("param p;\nclock x;\nautomaton ptas a {\n    loc l0 invariant x <= ;\n}\n")
            .unwrap_err()
            .to_string();
    assert!(err.contains(":4:"), "{err}");
    let err = parse_model_str(
        "automaton ptas a {\n    loc l0 invariant y <= 1;\n    init l0;\n}\ntarget l0;\n",
    )
    .unwrap_err()
    .to_string();
    assert!(err.contains('y'), "{err}");
}

#[test]
fn missing_target_is_an_error() {
    let text = "clock x;\nautomaton ptas a {\n    loc l0;\n    init l0;\n}\n";
    assert!(parse_model_str(text).is_err());
}

/// Slope of every plotted segment equals the rate of the location occupied
/// during that segment.
fn assert_slopes(a: &Automaton, run: &ConcreteRun) {
    let stamps = run.timestamps();
    let rows = breakpoints(a, run);
    for w in rows.windows(2) {
        let ((t0, v0), (t1, v1)) = (&w[0], &w[1]);
        if t0 == t1 {
            continue;
        }
        let k = (0..run.steps.len())
            .find(|&k| &stamps[k] <= t0 && &stamps[k + 1] >= t1)
            .expect("segment inside a delay");
        let flow = a.flow_map(run.states[k].location).unwrap();
        for (i, d) in a.vars().enumerate() {
            let slope = (&v1[i] - &v0[i]) / (t1 - t0);
            assert_eq!(
                slope,
                flow.get(&d).cloned().unwrap_or_default(),
                "{} in state {k}",
                a.var_name(d)
            );
        }
    }
}

#[test]
fn plotted_slopes_match_rates() {
    for set in [TWO_RATE, PREDICATES, SENSE_GAP] {
        let a = composed(set);
        for r in exemplify(&a, &a.accepting(), Budget::default(), 2).unwrap() {
            for t in r.runs.iter().filter(|t| t.kind == RunKind::Positive) {
                assert_slopes(&a, &t.run);
            }
        }
    }
}
