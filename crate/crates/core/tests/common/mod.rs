//! Shared fixtures: the bundled models and the hand-written runs of the
//! two-rate example.
#![allow(dead_code)]

pub mod oracle;

use sigzone::automata::{compose, Automaton, Network};
use sigzone::io::parse_model;
use sigzone::poly::Rational;
use sigzone::semantics::{ConcreteRun, ConcreteState, Step};

pub const TWO_RATE: &[&str] = &["fig5.szm"];
pub const PREDICATES: &[&str] = &["fig9.szm"];
pub const SENSORS: &[&str] = &["fig1a.szm", "sba_s1.szm", "sba_s2.szm"];
pub const SENSE_GAP: &[&str] = &["fig1b.szm", "sba_s1.szm", "sba_s2.szm"];

pub fn model_path(name: &str) -> String {
    format!("{}/../../models/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn model_text(name: &str) -> String {
    std::fs::read_to_string(model_path(name)).unwrap()
}

pub fn network(names: &[&str]) -> Network {
    let texts: Vec<(String, String)> = names
        .iter()
        .map(|n| (n.to_string(), model_text(n)))
        .collect();
    let files: Vec<(&str, &str)> = texts
        .iter()
        .map(|(n, t)| (n.as_str(), t.as_str()))
        .collect();
    parse_model(&files).unwrap()
}

pub fn composed(names: &[&str]) -> Automaton {
    compose(&network(names)).unwrap()
}

pub fn q(text: &str) -> Rational {
    text.parse().unwrap()
}

pub fn qs(texts: &[&str]) -> Vec<Rational> {
    texts.iter().map(|t| q(t)).collect()
}

fn state(a: &Automaton, loc: &str, vals: &[&str]) -> ConcreteState {
    ConcreteState {
        location: a.loc_id(loc).unwrap(),
        valuation: qs(vals),
    }
}

fn edge(a: &Automaton, action: &str) -> usize {
    a.edges.iter().position(|e| e.action == action).unwrap()
}

/// The accepting run of the two-rate example: start at (0, -2), wait 3.8,
/// reset x1, wait 3.
pub fn rho(a: &Automaton, p: &str) -> ConcreteRun {
    ConcreteRun {
        pval: qs(&[p]),
        states: vec![
            state(a, "l1", &["0", "-2"]),
            state(a, "l2", &["0", "9.4"]),
            state(a, "l3", &["3", "9.4"]),
        ],
        steps: vec![
            Step {
                edge: edge(a, "a1"),
                duration: q("3.8"),
            },
            Step {
                edge: edge(a, "a2"),
                duration: q("3"),
            },
        ],
    }
}

/// The alternative sequence that reaches x2 = 15 before the second guard.
pub fn rho_prime(a: &Automaton, p: &str) -> ConcreteRun {
    ConcreteRun {
        pval: qs(&[p]),
        states: vec![
            state(a, "l1", &["0", "0"]),
            state(a, "l2", &["0", "15"]),
            state(a, "l3", &["3", "15"]),
        ],
        steps: vec![
            Step {
                edge: edge(a, "a1"),
                duration: q("5"),
            },
            Step {
                edge: edge(a, "a2"),
                duration: q("3"),
            },
        ],
    }
}

/// Random small specification over clocks `x`, `y` (and `p` when
/// `param`) and signal `s`, plus a two-mode bounder for `s`. Edge actions
/// are unique, so the product is strongly deterministic.
pub fn random_network(seed: u64, param: bool) -> Network {
    use rand::{Rng, SeedableRng};
    use sigzone::automata::{AutomatonBuilder, AutomatonKind, Flow, InitInterval, VarKind};
    use sigzone::poly::{AtomicConstraint, LinearTerm};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let c = |v: i64| LinearTerm::constant(Rational::from(v));
    let s_init = InitInterval {
        lo: Rational::from(0),
        hi: Rational::from(5),
    };

    let mut b = AutomatonBuilder::new("spec", AutomatonKind::Ptas);
    let p = param.then(|| b.param("p"));
    let x = b.var("x", VarKind::Clock, InitInterval::point(Rational::from(0)));
    let y = b.var("y", VarKind::Clock, InitInterval::point(Rational::from(0)));
    let s = b.var("s", VarKind::Signal, s_init.clone());
    let atom = |rng: &mut rand_chacha::ChaCha8Rng| -> AtomicConstraint {
        let k = rng.gen_range(0..=6);
        match rng.gen_range(0..8) {
            0 => AtomicConstraint::ge(LinearTerm::var(x), c(k)),
            1 => AtomicConstraint::le(LinearTerm::var(x), c(k + 1)),
            2 => AtomicConstraint::lt(LinearTerm::var(y).plus(x, Rational::from(-1)), c(k - 3)),
            3 => AtomicConstraint::gt(LinearTerm::var(y), c(k)),
            4 => AtomicConstraint::ge(LinearTerm::var(s), c(k)),
            5 => AtomicConstraint::le(LinearTerm::var(s), c(k)),
            6 => match p {
                Some(p) => AtomicConstraint::le(LinearTerm::var(x), LinearTerm::var(p)),
                None => AtomicConstraint::eq(LinearTerm::var(y), c(k)),
            },
            _ => match p {
                Some(p) => AtomicConstraint::ge(LinearTerm::var(y), LinearTerm::var(p)),
                None => AtomicConstraint::lt(LinearTerm::var(s), c(k)),
            },
        }
    };
    let n = rng.gen_range(2..=4);
    let mut locs = Vec::new();
    for i in 0..n {
        let inv = if rng.gen_bool(0.3) {
            vec![AtomicConstraint::le(
                LinearTerm::var(x),
                c(rng.gen_range(3..=9)),
            )]
        } else {
            vec![]
        };
        locs.push(b.location(&format!("l{i}"), i + 1 == n, inv, &[]));
    }
    b.initial(locs[0]);
    let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    for _ in 0..rng.gen_range(0..=2) {
        pairs.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    for (i, (from, to)) in pairs.into_iter().enumerate() {
        let guard: Vec<AtomicConstraint> =
            (0..rng.gen_range(0..=2)).map(|_| atom(&mut rng)).collect();
        let mut resets = Vec::new();
        for d in [x, y] {
            if rng.gen_bool(0.4) {
                resets.push((d, Rational::from(0)));
            }
        }
        b.edge(locs[from], locs[to], guard, Some(&format!("a{i}")), &resets);
    }
    let spec = b.build().unwrap();

    let mut sb = AutomatonBuilder::new("bound", AutomatonKind::Sba);
    let s = sb.var("s", VarKind::Signal, s_init);
    let mut modes = Vec::new();
    for m in 0..2 {
        let rate: i64 = rng.gen_range(-2..=2);
        let inv = if rate < 0 {
            vec![AtomicConstraint::ge(LinearTerm::var(s), c(0))]
        } else {
            vec![]
        };
        modes.push(sb.location(
            &format!("m{m}"),
            false,
            inv,
            &[(s, Flow::Rate(Rational::from(rate)))],
        ));
    }
    sb.initial(modes[0]);
    sb.edge(modes[0], modes[1], vec![], Some("up"), &[]);
    sb.edge(modes[1], modes[0], vec![], Some("down"), &[]);
    Network {
        spec,
        bounders: vec![sb.build().unwrap()],
    }
}
