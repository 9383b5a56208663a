//! Brute-force oracle for projections of small bounded systems.
//!
//! It never eliminates anything. A bounded polyhedron projects onto
//! its first axis as an interval whose closure endpoints are first
//! coordinates of vertices, and every vertex solves some square subsystem of
//! tight constraints. Testing every such coordinate, the midpoints between
//! them and one point beyond each end therefore locates both bounds and their
//! attainedness exactly. Feasibility of a fixed first coordinate recurses on
//! the remaining dimensions.

use std::collections::BTreeSet;

use sigzone::poly::{
    AtomicConstraint, DimInterval, DimKind, Endpoint, LinearTerm, Polyhedron, Rational, Relation,
    Space,
};

/// `coeffs · x + constant  rel  0`.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
    pub rel: Relation,
}

const BOX: i64 = 20;

fn q(n: i64) -> Rational {
    Rational::from(n)
}

pub fn holds(rel: Relation, v: &Rational) -> bool {
    match rel {
        Relation::Lt => v.is_negative(),
        Relation::Le => !v.is_positive(),
        Relation::Eq => v.is_zero(),
    }
}

/// Unique solution of the square system `a x = b`, if any.
pub fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let sub = &f * &a[col][c];
                    a[r][c] = &a[r][c] - &sub;
                }
                let sub = &f * &b[col];
                b[r] = &b[r] - &sub;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Vertex coordinates on axis 0, then the probe list with a flag telling
/// which probes are vertex coordinates.
pub fn probes(rows: &[Row], dims: usize) -> Vec<(Rational, bool)> {
    let mut verts = BTreeSet::new();
    for pick in subsets(rows.len(), dims) {
        let a = pick.iter().map(|&i| rows[i].coeffs.clone()).collect();
        let b = pick.iter().map(|&i| -rows[i].constant.clone()).collect();
        if let Some(x) = solve(a, b) {
            verts.insert(x[0].clone());
        }
    }
    let verts: Vec<Rational> = verts.into_iter().collect();
    let mut out = Vec::new();
    if let (Some(lo), Some(hi)) = (verts.first(), verts.last()) {
        out.push((lo - &q(1), false));
        for w in verts.windows(2) {
            out.push((w[0].clone(), true));
            out.push(((&w[0] + &w[1]) / q(2), false));
        }
        out.push((hi.clone(), true));
        out.push((hi + &q(1), false));
    }
    out
}

pub fn fix_first(rows: &[Row], v: &Rational) -> Vec<Row> {
    rows.iter()
        .map(|r| Row {
            coeffs: r.coeffs[1..].to_vec(),
            constant: &r.constant + &(&r.coeffs[0] * v),
            rel: r.rel,
        })
        .collect()
}

pub fn feasible(rows: &[Row], dims: usize) -> bool {
    if dims == 0 {
        return rows.iter().all(|r| holds(r.rel, &r.constant));
    }
    probes(rows, dims)
        .iter()
        .any(|(v, _)| feasible(&fix_first(rows, v), dims - 1))
}

/// Oracle shadow on axis 0: `((lower, attained), (upper, attained))`, or
/// `None` when empty.
pub fn shadow(rows: &[Row], dims: usize) -> Option<((Rational, bool), (Rational, bool))> {
    let ps = probes(rows, dims);
    let ok: Vec<bool> = ps
        .iter()
        .map(|(v, _)| feasible(&fix_first(rows, v), dims - 1))
        .collect();
    let first = ok.iter().position(|b| *b)?;
    let last = ok.iter().rposition(|b| *b)?;
    let lower = if ps[first].1 {
        (ps[first].0.clone(), true)
    } else {
        (ps[first - 1].0.clone(), false)
    };
    let upper = if ps[last].1 {
        (ps[last].0.clone(), true)
    } else {
        (ps[last + 1].0.clone(), false)
    };
    Some((lower, upper))
}

pub fn boxed(dims: usize, random: Vec<Row>) -> Vec<Row> {
    let mut rows = random;
    for d in 0..dims {
        let mut c = vec![q(0); dims];
        c[d] = q(1);
        rows.push(Row {
            coeffs: c.clone(),
            constant: q(-BOX),
            rel: Relation::Le,
        });
        c[d] = q(-1);
        rows.push(Row {
            coeffs: c,
            constant: q(-BOX),
            rel: Relation::Le,
        });
    }
    rows
}

pub fn to_poly(rows: &[Row], dims: usize) -> Polyhedron {
    let mut s = Space::new();
    for d in 0..dims {
        s.push(format!("x{d}"), DimKind::Variable);
    }
    let s = s.into_arc();
    let atoms: Vec<AtomicConstraint> = rows
        .iter()
        .map(|r| {
            let t =
                LinearTerm::from_parts(r.coeffs.iter().cloned().enumerate(), r.constant.clone());
            AtomicConstraint::new(t, r.rel)
        })
        .collect();
    Polyhedron::from_atoms(&s, &atoms).unwrap()
}

/// Compares projection onto axis 0 of the boxed system with the oracle.
pub fn check(dims: usize, random: Vec<Row>) -> Result<(), String> {
    let rows = boxed(dims, random);
    let p = to_poly(&rows, dims);
    let projected = p.eliminate(&(1..dims).collect());
    let oracle = shadow(&rows, dims);
    if projected.is_satisfiable() != oracle.is_some() || p.is_satisfiable() != oracle.is_some() {
        return Err(format!("satisfiability differs on {p}"));
    }
    let Some(((lo, lo_att), (hi, hi_att))) = oracle else {
        return Ok(());
    };
    let iv = projected.dim_interval(0).map_err(|e| e.to_string())?;
    let want = DimInterval {
        lower: Endpoint::Finite(lo),
        lower_attained: lo_att,
        upper: Endpoint::Finite(hi),
        upper_attained: hi_att,
    };
    if iv != want {
        return Err(format!("{p}: projection {iv}, oracle {want}"));
    }
    for (v, _) in probes(&rows, dims) {
        let inside = feasible(&fix_first(&rows, &v), dims - 1);
        let mut point = vec![q(0); dims];
        point[0] = v.clone();
        if projected.contains(&point) != inside {
            return Err(format!("{p}: membership of {v} differs"));
        }
    }
    Ok(())
}

/// A random row with coefficients and constant in [-5, 5].
pub fn random_row(rng: &mut impl rand::Rng, dims: usize) -> Row {
    let rel = [Relation::Lt, Relation::Le, Relation::Eq][rng.gen_range(0..3)];
    Row {
        coeffs: (0..dims).map(|_| q(rng.gen_range(-5..=5))).collect(),
        constant: q(rng.gen_range(-5..=5)),
        rel,
    }
}
