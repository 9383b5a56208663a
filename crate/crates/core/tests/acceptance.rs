//! Acceptance suite: one PASS/FAIL line per criterion on standard output.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use rand::SeedableRng;
use sigzone::automata::{compose, validate_plma, Automaton, Flow};
use sigzone::exemplify::{exemplify, DeadlockKind, ExemplifyResult, RunKind};
use sigzone::io::{emit_plot, parse_constraint, polyline, PlotFormat};
use sigzone::poly::{DimKind, Polyhedron, Rational, Space};
use sigzone::semantics::{validate_run, Budget, FailReason, Symbolic, Verdict};

type Outcome = Result<(), String>;

/// Wall-clock budget per criterion. Overruns are reported, not failed,
/// since they depend on the host.
const DESK_SCALE_SECS: f64 = 5.0;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn criterion(n: u32, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default())
    });
    let secs = start.elapsed().as_secs_f64();
    let note = if secs > DESK_SCALE_SECS {
        ", over the desk-scale budget"
    } else {
        ""
    };
    match &outcome {
        Ok(()) => println!("PASS {n} {name} ({secs:.2} s{note})"),
        Err(why) => println!("FAIL {n} {name} ({secs:.2} s{note}): {why}"),
    }
    outcome.is_ok()
}

fn pzg_golden() -> Outcome {
    let a = composed(TWO_RATE);
    let sym = Symbolic::new(&a).unwrap();
    let g = sym.explore(&a.accepting(), Budget::default()).unwrap();
    ensure!(g.states.len() == 3, "{} symbolic states", g.states.len());
    let want = [
        ("l1", "0 <= x1 && x1 <= 10 && -4 <= 3 * x1 - 2 * x2 && 3 * x1 - 2 * x2 <= 4 && p >= 0"),
        ("l2", "0 <= x1 && x1 <= 3 && -2 < x2 && x2 <= 17 && p >= 0"),
        ("l3", "x1 >= 3 && -5 < x2 - x1 && x2 - x1 <= 14 && p - 6 <= x2 - x1 && x2 - x1 <= p - 2 && p >= 0"),
    ];
    for (s, (loc, text)) in g.states.iter().zip(want) {
        ensure!(
            a.locations[s.location].name == loc,
            "state at {}",
            a.locations[s.location].name
        );
        let zone = sym.hide_clock(&s.zone);
        let expected = parse_constraint(&sym.space, text).unwrap();
        ensure!(zone.equals(&expected).unwrap(), "{loc}: got {zone}");
    }
    Ok(())
}

fn oracle_fixtures() -> Outcome {
    let a = composed(TWO_RATE);
    let v = validate_run(&a, &rho(&a, "12")).unwrap();
    ensure!(v == Verdict::Positive, "rho at p = 12: {v:?}");
    let v = validate_run(&a, &rho_prime(&a, "12")).unwrap();
    ensure!(
        v == Verdict::Negative {
            index: 1,
            reason: FailReason::Guard
        },
        "rho' at p = 12: {v:?}"
    );
    let v = validate_run(&a, &rho_prime(&a, "14.5")).unwrap();
    ensure!(v == Verdict::Positive, "rho' at p = 14.5: {v:?}");
    Ok(())
}

fn constant_flows() -> Outcome {
    let a = composed(SENSORS);
    ensure!(validate_plma(&a).is_empty(), "{:?}", validate_plma(&a));
    let l = &a.locations[a
        .loc_id("(l1, inc_slow, dec_fast)")
        .ok_or("spot-check location missing")?];
    for (var, rate) in [("x", 1), ("s1", 1), ("s2", -3)] {
        let got = &l.flow[&a.space.lookup(var).unwrap()];
        ensure!(
            *got == Flow::Rate(Rational::from(rate)),
            "{var} has rate {got}"
        );
    }
    for seed in 0..100 {
        let net = random_network(seed, seed % 2 == 0);
        let a = compose(&net).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(
            validate_plma(&a).is_empty(),
            "seed {seed}: {:?}",
            validate_plma(&a)
        );
    }
    Ok(())
}

/// Slope of every plotted segment is the rate of the location occupied.
fn slopes_match(a: &Automaton, run: &sigzone::semantics::ConcreteRun) -> bool {
    let stamps = run.timestamps();
    let rows = sigzone::io::breakpoints(a, run);
    rows.windows(2).all(|w| {
        let ((t0, v0), (t1, v1)) = (&w[0], &w[1]);
        if t0 == t1 {
            return true;
        }
        let Some(k) = (0..run.steps.len()).find(|&k| &stamps[k] <= t0 && &stamps[k + 1] >= t1)
        else {
            return false;
        };
        let flow = a.flow_map(run.states[k].location).unwrap();
        a.vars().enumerate().all(|(i, d)| {
            (&v1[i] - &v0[i]) / (t1 - t0) == flow.get(&d).cloned().unwrap_or_default()
        })
    })
}

fn positives_hold(a: &Automaton, results: &[ExemplifyResult]) -> Outcome {
    for r in results {
        let pos = r
            .positive()
            .ok_or(format!("attempt {} has no positive run", r.attempt))?;
        let v = validate_run(a, &pos.run).unwrap();
        ensure!(
            v == Verdict::Positive,
            "attempt {}: positive run is {v:?}",
            r.attempt
        );
        ensure!(
            slopes_match(a, &pos.run),
            "attempt {}: plotted slope differs from a rate",
            r.attempt
        );
    }
    Ok(())
}

fn positive_runs(bundled: &[(&str, Automaton, Vec<ExemplifyResult>)]) -> Outcome {
    for (name, a, results) in bundled {
        ensure!(!results.is_empty(), "{name}: target not reached");
        positives_hold(a, results).map_err(|e| format!("{name}: {e}"))?;
    }
    let (_, sensors, results) = &bundled[2];
    let words: BTreeSet<&Vec<usize>> = results.iter().map(|r| &r.symbolic_run.edges).collect();
    ensure!(
        results.len() == 6 && words.len() == 6,
        "sensor network gave {} distinct words",
        words.len()
    );
    let modes = |r: &ExemplifyResult| -> Vec<String> {
        r.positive()
            .unwrap()
            .run
            .states
            .iter()
            .map(|s| sensors.locations[s.location].name.clone())
            .collect()
    };
    let paths: BTreeSet<Vec<String>> = results.iter().map(modes).collect();
    ensure!(paths.len() == 6, "sensor positives share mode sequences");

    let budget = Budget {
        max_depth: 8,
        max_states: 400,
        max_hits: 1,
    };
    let mut reached = 0;
    for seed in 0..50 {
        let a = compose(&random_network(seed, seed % 3 != 0)).unwrap();
        let results = exemplify(&a, &a.accepting(), budget, 1).unwrap();
        if !results.is_empty() {
            reached += 1;
        }
        positives_hold(&a, &results).map_err(|e| format!("random model {seed}: {e}"))?;
    }
    ensure!(reached > 0, "no random model reached its target");
    Ok(())
}

fn negatives_hold(a: &Automaton, r: &ExemplifyResult) -> Outcome {
    let pos = r.positive().unwrap();
    for neg in r.runs.iter().filter(|t| t.kind != RunKind::Positive) {
        let v = validate_run(a, &neg.run).unwrap();
        let Verdict::Negative { index, .. } = v else {
            return Err(format!("{:?} run validates", neg.kind));
        };
        let dl = neg.deadlock.ok_or("negative without deadlock")?;
        ensure!(
            index >= dl.index,
            "fails at {index} before its deadlock {}",
            dl.index
        );
        ensure!(
            neg.run.edge_word() == pos.run.edge_word(),
            "edge word differs from the positive run"
        );
        if neg.kind == RunKind::NegParam {
            ensure!(
                dl.kind == DeadlockKind::Parametric,
                "parametric run tagged {:?}",
                dl.kind
            );
            let proj = |k: usize| r.symbolic_run.state_at(k).zone.project_params();
            let mut point = neg.run.pval.clone();
            point.resize(proj(0).space().len(), Rational::zero());
            ensure!(proj(dl.index).contains(&point), "pval outside projP(C_i)");
            ensure!(
                !proj(dl.index + 1).contains(&point),
                "pval inside projP(C_i+1)"
            );
        }
    }
    Ok(())
}

fn negative_runs(bundled: &[(&str, Automaton, Vec<ExemplifyResult>)]) -> Outcome {
    let mut seen = 0;
    for (name, a, results) in bundled {
        for r in results {
            negatives_hold(a, r).map_err(|e| format!("{name} attempt {}: {e}", r.attempt))?;
            seen += r.runs.len() - 1;
        }
    }
    ensure!(seen > 0, "no negative runs emitted");
    let (_, _, gap) = &bundled[3];
    for r in gap {
        let p = &r.positive().unwrap().run.pval[0];
        ensure!(*p >= Rational::from(5), "positive p = {p}");
        let neg = r
            .get(RunKind::NegParam)
            .ok_or("no parametric negative for the sense-gap network")?;
        let np = &neg.run.pval[0];
        ensure!(
            !np.is_negative() && *np < Rational::from(5),
            "parametric negative p = {np}"
        );
    }
    Ok(())
}

fn exhibit_suite() -> Outcome {
    let cases: [(&[&str], &str, &[&str]); 10] = [
        (&["x"], "0 <= x && x <= 2", &["1"]),
        (&["x"], "0 < x && x <= 1", &["1/2"]),
        (&["x"], "x < 1/2", &["-1/2"]),
        (&["x", "y"], "x = 3 && y > x", &["3", "4"]),
        (&["x"], "x > 3", &["4"]),
        (&["x"], "2 <= x && x <= 5", &["2"]),
        (&["x"], "0 <= x && x <= 1/2", &["1/4"]),
        (&["x"], "0 <= x && x < 1", &["1/2"]),
        (&["x", "y"], "y >= 7", &["1", "7"]),
        (&["x", "y"], "", &["1", "1"]),
    ];
    for (names, text, want) in cases {
        let mut s = Space::new();
        for n in names {
            s.push(*n, DimKind::Variable);
        }
        let s = s.into_arc();
        let poly = if text.is_empty() {
            Polyhedron::universe(&s)
        } else {
            parse_constraint(&s, text).unwrap()
        };
        let got = poly.exhibit_point().unwrap();
        ensure!(got == qs(want), "{text}: got {got:?}");
    }
    Ok(())
}

fn plot_golden() -> Outcome {
    let a = composed(TWO_RATE);
    let run = rho(&a, "12");
    let pts = |list: &[(&str, &str)]| list.iter().map(|(t, v)| (q(t), q(v))).collect::<Vec<_>>();
    ensure!(
        polyline(&a, &run, 0) == pts(&[("0", "0"), ("3.8", "7.6"), ("3.8", "0"), ("6.8", "3")]),
        "x1 polyline"
    );
    ensure!(
        polyline(&a, &run, 1) == pts(&[("0", "-2"), ("3.8", "9.4"), ("6.8", "9.4")]),
        "x2 polyline"
    );
    let csv = emit_plot(&a, &run, PlotFormat::Csv);
    ensure!(
        csv == "t,x1,x2\n0,0,-2\n3.8,7.6,9.4\n3.8,0,9.4\n6.8,3,9.4\n",
        "csv bytes: {csv:?}"
    );
    ensure!(
        emit_plot(&a, &run, PlotFormat::Csv) == csv,
        "csv not stable"
    );
    Ok(())
}

fn boolean_and_fm(bundled: &[(&str, Automaton, Vec<ExemplifyResult>)]) -> Outcome {
    let (_, a, results) = &bundled[1];
    let word = |r: &ExemplifyResult| -> Vec<String> {
        r.symbolic_run
            .edges
            .iter()
            .map(|e| a.edges[*e].action.clone())
            .collect()
    };
    let r = results
        .iter()
        .find(|r| word(r) == ["a1", "check", "a2"])
        .ok_or("no a1.check.a2 run")?;
    let pos = r.positive().unwrap();
    ensure!(
        pos.run.steps[2].duration < Rational::from(3),
        "positive check-a2 gap {}",
        pos.run.steps[2].duration
    );
    let neg = r
        .get(RunKind::NegVar)
        .ok_or("no variable-deadlock negative")?;
    let v = validate_run(a, &neg.run).unwrap();
    ensure!(
        matches!(v, Verdict::Negative { index: 2, .. }),
        "negative fails with {v:?}"
    );
    ensure!(
        neg.run.steps[2].duration >= Rational::from(3),
        "negative check-a2 gap {}",
        neg.run.steps[2].duration
    );

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    for case in 0..500 {
        let dims = rand::Rng::gen_range(&mut rng, 1..=3);
        let n = rand::Rng::gen_range(&mut rng, 1..=4);
        let rows = (0..n).map(|_| oracle::random_row(&mut rng, dims)).collect();
        oracle::check(dims, rows).map_err(|e| format!("system {case}: {e}"))?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let mut ok = true;
    ok &= criterion(1, "zone graph of the two-rate example", pzg_golden);
    ok &= criterion(2, "run oracle fixtures", oracle_fixtures);
    ok &= criterion(3, "composition yields constant flows", constant_flows);

    let mut bundled = Vec::new();
    ok &= criterion(4, "positive runs exist and validate", || {
        for (name, set) in [
            ("two-rate", TWO_RATE),
            ("predicates", PREDICATES),
            ("sensors", SENSORS),
            ("sense-gap", SENSE_GAP),
        ] {
            let a = composed(set);
            let results = exemplify(&a, &a.accepting(), Budget::default(), 6).unwrap();
            bundled.push((name, a, results));
        }
        positive_runs(&bundled)
    });
    ok &= criterion(5, "negative runs fail and keep the edge word", || {
        negative_runs(&bundled)
    });
    ok &= criterion(6, "point exhibition heuristic", exhibit_suite);
    ok &= criterion(7, "plot of the example run", plot_golden);
    ok &= criterion(8, "boolean case study and elimination oracle", || {
        boolean_and_fm(&bundled)
    });
    assert!(ok, "some acceptance criteria failed");
}
