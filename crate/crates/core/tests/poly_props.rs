use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use sigzone::poly::{
    AtomicConstraint, DimKind, FlowMap, LinearTerm, Polyhedron, Rational, Relation, Space,
};

fn q(n: i64) -> Rational {
    Rational::from(n)
}

fn space3() -> Arc<Space> {
    let mut s = Space::new();
    s.push("p", DimKind::Parameter);
    s.push("x", DimKind::Variable);
    s.push("y", DimKind::Variable);
    s.into_arc()
}

fn arb_atoms() -> impl Strategy<Value = Vec<AtomicConstraint>> {
    let atom = (
        proptest::collection::vec(-4i64..=4, 3),
        -8i64..=8,
        prop_oneof![Just(Relation::Lt), Just(Relation::Le), Just(Relation::Eq)],
    )
        .prop_map(|(c, k, rel)| {
            AtomicConstraint::new(
                LinearTerm::from_parts(c.into_iter().enumerate().map(|(d, v)| (d, q(v))), q(k)),
                rel,
            )
        });
    proptest::collection::vec(atom, 0..5)
}

fn arb_flow() -> impl Strategy<Value = FlowMap> {
    (-3i64..=3, -3i64..=3).prop_map(|(a, b)| FlowMap::from([(1, q(a)), (2, q(b))]))
}

fn arb_point() -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((-20i64..=20, 1i64..=4), 3)
        .prop_map(|v| v.into_iter().map(|(n, d)| Rational::new(n, d)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exhibited_points_satisfy_every_atom(atoms in arb_atoms()) {
        let s = space3();
        let c = Polyhedron::from_atoms(&s, &atoms).unwrap();
        match c.exhibit_point() {
            Ok(v) => {
                prop_assert!(atoms.iter().all(|a| a.holds(&v)));
                prop_assert_eq!(c.exhibit_point().unwrap(), v);
            }
            Err(_) => prop_assert!(!c.is_satisfiable()),
        }
    }

    #[test]
    fn backward_cone_contains_origin(point in arb_point(), flow in arb_flow()) {
        let s = space3();
        let forward = Polyhedron::point(&s, &point).time_elapse(&flow);
        prop_assert!(forward.time_past(&flow).contains(&point));
        // A delay of 2 along the flow lands inside the forward cone.
        let mut later = point.clone();
        for (d, r) in &flow {
            later[*d] = &later[*d] + &(r * &q(2));
        }
        prop_assert!(forward.contains(&later));
    }

    #[test]
    fn update_is_idempotent(atoms in arb_atoms(), v in -6i64..=6) {
        let s = space3();
        let c = Polyhedron::from_atoms(&s, &atoms).unwrap();
        prop_assume!(c.is_satisfiable());
        let assigns = BTreeMap::from([(1, q(v))]);
        let once = c.update(&assigns);
        let twice = once.update(&assigns);
        prop_assert!(once.equals(&twice).unwrap());
        let iv = once.dim_interval(1).unwrap();
        prop_assert_eq!(iv.minimum(), Some(&q(v)));
        prop_assert!(iv.upper_attained);
        prop_assert_eq!(iv.upper_value(), Some(&q(v)));
    }

    #[test]
    fn membership_is_substitution(atoms in arb_atoms(), point in arb_point()) {
        let s = space3();
        let c = Polyhedron::from_atoms(&s, &atoms).unwrap();
        prop_assert_eq!(c.contains(&point), atoms.iter().all(|a| a.holds(&point)));
    }

    #[test]
    fn difference_points_leave_the_subtrahend(a in arb_atoms(), b in arb_atoms()) {
        let s = space3();
        let pa = Polyhedron::from_atoms(&s, &a).unwrap();
        let pb = Polyhedron::from_atoms(&s, &b).unwrap();
        match pa.point_in_difference(&pb).unwrap() {
            Some(v) => {
                prop_assert!(pa.contains(&v));
                prop_assert!(!pb.contains(&v));
            }
            None => prop_assert!(pa.is_subset(&pb).unwrap()),
        }
    }

    #[test]
    fn projection_contains_shadow_of_points(atoms in arb_atoms()) {
        let s = space3();
        let c = Polyhedron::from_atoms(&s, &atoms).unwrap();
        prop_assume!(c.is_satisfiable());
        let v = c.exhibit_point().unwrap();
        prop_assert!(c.project_params().contains(&v));
        prop_assert!(c.minimize().equals(&c).unwrap());
    }
}
