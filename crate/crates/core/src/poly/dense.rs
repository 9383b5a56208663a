//! Allocation-free satisfiability by Fourier–Motzkin elimination over small
//! registries, with machine-integer coefficients. Used for emptiness tests
//! and redundancy removal; projections go through [`super::fast`].

use std::cmp::Ordering;

use num_integer::Integer;

use super::rational::Rational;
use super::space::DimId;
use super::system::System;
use super::term::{AtomicConstraint, Relation};

const K: usize = 10;
type Coeffs = [i64; K];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Q {
    n: i64,
    d: i64,
}

impl Q {
    fn new(n: i128, d: i128) -> Option<Q> {
        if let (Ok(n), Ok(d)) = (i64::try_from(n), i64::try_from(d)) {
            if n != i64::MIN && d != i64::MIN {
                return Q::new64(n, d);
            }
        }
        let g = n.gcd(&d);
        if g == 0 {
            return None;
        }
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        // i64::MIN is excluded so that negation never overflows
        let n = i64::try_from(n).ok().filter(|n| *n != i64::MIN)?;
        Some(Q {
            n,
            d: i64::try_from(d).ok()?,
        })
    }

    fn new64(n: i64, d: i64) -> Option<Q> {
        let g = n.gcd(&d);
        if g == 0 {
            return None;
        }
        let (n, d) = (n / g, d / g);
        Some(if d < 0 {
            Q { n: -n, d: -d }
        } else {
            Q { n, d }
        })
    }

    /// `a x + b y`.
    fn lin(a: i64, x: Q, b: i64, y: Q) -> Option<Q> {
        let (a, b) = (i128::from(a), i128::from(b));
        if x.d == y.d {
            return Q::new(a * i128::from(x.n) + b * i128::from(y.n), i128::from(x.d));
        }
        let l = a.checked_mul(i128::from(x.n) * i128::from(y.d))?;
        let r = b.checked_mul(i128::from(y.n) * i128::from(x.d))?;
        Q::new(l.checked_add(r)?, i128::from(x.d) * i128::from(y.d))
    }

    fn cmp(self, o: Q) -> Ordering {
        (i128::from(self.n) * i128::from(o.d)).cmp(&(i128::from(o.n) * i128::from(self.d)))
    }

    fn neg(self) -> Q {
        Q {
            n: -self.n,
            d: self.d,
        }
    }
}

/// `a · x ⋈ b`.
#[derive(Debug, Clone, Copy)]
struct Row {
    a: Coeffs,
    b: Q,
    rel: Relation,
}

fn negated(a: &Coeffs) -> Coeffs {
    let mut out = *a;
    for c in out.iter_mut() {
        *c = -*c;
    }
    out
}

impl Row {
    fn negations(&self) -> ([Row; 2], usize) {
        // not (a x <= b) is -a x < -b; not (a x < b) is -a x <= -b
        let flipped = |rel| Row {
            a: negated(&self.a),
            b: self.b.neg(),
            rel,
        };
        match self.rel {
            Relation::Le => ([flipped(Relation::Lt); 2], 1),
            Relation::Lt => ([flipped(Relation::Le); 2], 1),
            Relation::Eq => (
                [
                    Row {
                        rel: Relation::Lt,
                        ..*self
                    },
                    flipped(Relation::Lt),
                ],
                2,
            ),
        }
    }
}

/// `lo ⋈ dir · x ⋈ hi`, the flag marking strictness.
#[derive(Debug, Clone, Copy)]
struct Ent {
    dir: Coeffs,
    lo: Option<(Q, bool)>,
    hi: Option<(Q, bool)>,
}

impl Ent {
    fn equality(&self) -> Option<Q> {
        match (self.lo, self.hi) {
            (Some((l, false)), Some((h, false))) if l == h => Some(l),
            _ => None,
        }
    }

    fn rows(&self) -> ([Row; 2], usize) {
        let rel = |s: bool| if s { Relation::Lt } else { Relation::Le };
        if let Some(v) = self.equality() {
            return (
                [Row {
                    a: self.dir,
                    b: v,
                    rel: Relation::Eq,
                }; 2],
                1,
            );
        }
        let mut out = [Row {
            a: self.dir,
            b: Q { n: 0, d: 1 },
            rel: Relation::Le,
        }; 2];
        let mut n = 0;
        if let Some((h, s)) = self.hi {
            out[n] = Row {
                a: self.dir,
                b: h,
                rel: rel(s),
            };
            n += 1;
        }
        if let Some((l, s)) = self.lo {
            out[n] = Row {
                a: negated(&self.dir),
                b: l.neg(),
                rel: rel(s),
            };
            n += 1;
        }
        (out, n)
    }
}

#[derive(Debug, Clone)]
struct Dense {
    k: usize,
    ents: Vec<Ent>,
    empty: bool,
}

impl Dense {
    fn new(k: usize) -> Dense {
        Dense {
            k,
            ents: Vec::new(),
            empty: false,
        }
    }

    fn add(&mut self, r: &Row) -> Option<()> {
        if self.empty {
            return Some(());
        }
        let k = self.k;
        let g = r.a[..k].iter().fold(0i64, |acc, c| acc.gcd(c));
        if g == 0 {
            let holds = match r.rel {
                Relation::Lt => r.b.n > 0,
                Relation::Le => r.b.n >= 0,
                Relation::Eq => r.b.n == 0,
            };
            self.empty |= !holds;
            return Some(());
        }
        let lead = r.a[..k].iter().find(|c| **c != 0).copied().unwrap_or(1);
        let s: i64 = if lead < 0 { -1 } else { 1 };
        let mut dir = [0i64; K];
        for j in 0..k {
            dir[j] = r.a[j] / g * s;
        }
        let v = Q::new(
            i128::from(r.b.n) * i128::from(s),
            i128::from(r.b.d) * i128::from(g),
        )?;
        let strict = r.rel == Relation::Lt;
        let idx = match self.ents.iter().position(|e| e.dir[..k] == dir[..k]) {
            Some(i) => i,
            None => {
                self.ents.push(Ent {
                    dir,
                    lo: None,
                    hi: None,
                });
                self.ents.len() - 1
            }
        };
        let e = &mut self.ents[idx];
        let tighter = |cur: Option<(Q, bool)>, want: Ordering| match cur {
            None => true,
            Some((c, cs)) => {
                let o = v.cmp(c);
                o == want || (o == Ordering::Equal && strict && !cs)
            }
        };
        if r.rel == Relation::Eq {
            if tighter(e.hi, Ordering::Less) {
                e.hi = Some((v, false));
            }
            if tighter(e.lo, Ordering::Greater) {
                e.lo = Some((v, false));
            }
        } else if s > 0 {
            if tighter(e.hi, Ordering::Less) {
                e.hi = Some((v, strict));
            }
        } else if tighter(e.lo, Ordering::Greater) {
            e.lo = Some((v, strict));
        }
        if let (Some((l, ls)), Some((h, hs))) = (e.lo, e.hi) {
            match l.cmp(h) {
                Ordering::Greater => self.empty = true,
                Ordering::Equal if ls || hs => self.empty = true,
                _ => {}
            }
        }
        Some(())
    }

    /// Same order rule as the arbitrary-precision elimination.
    fn pick(&self, keep: Option<usize>) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for d in (0..self.k).filter(|d| Some(*d) != keep) {
            let (mut p, mut n, mut used, mut eq) = (0usize, 0usize, false, false);
            for e in &self.ents {
                let c = e.dir[d];
                if c == 0 {
                    continue;
                }
                used = true;
                if e.equality().is_some() {
                    eq = true;
                    break;
                }
                let (up, lo) = if c > 0 { (e.hi, e.lo) } else { (e.lo, e.hi) };
                p += usize::from(up.is_some());
                n += usize::from(lo.is_some());
            }
            if !used {
                continue;
            }
            let cost = if eq { 0 } else { p * n + 1 };
            if best.is_none_or(|(bc, _)| cost < bc) {
                best = Some((cost, d));
            }
        }
        best.map(|(_, d)| d)
    }

    /// `x r + y s`, or `None` on overflow.
    fn combine(&self, x: i64, r: &Row, y: i64, s: &Row, rel: Relation) -> Option<Row> {
        let mut a = [0i64; K];
        for j in 0..self.k {
            a[j] = x
                .checked_mul(r.a[j])?
                .checked_add(y.checked_mul(s.a[j])?)
                .filter(|v| *v != i64::MIN)?;
        }
        Some(Row {
            a,
            b: Q::lin(x, r.b, y, s.b)?,
            rel,
        })
    }

    fn eliminate(&self, d: usize) -> Option<Dense> {
        let mut out = Dense::new(self.k);
        if let Some(ei) = self
            .ents
            .iter()
            .position(|e| e.dir[d] != 0 && e.equality().is_some())
        {
            let eq = Row {
                a: self.ents[ei].dir,
                b: self.ents[ei].equality().expect("equality"),
                rel: Relation::Eq,
            };
            let c = eq.a[d];
            for (i, e) in self.ents.iter().enumerate() {
                if i == ei {
                    continue;
                }
                let (rows, n) = e.rows();
                for r in &rows[..n] {
                    let ca = r.a[d];
                    // |c| r - sign(c) ca eq
                    let nr = if ca == 0 {
                        *r
                    } else {
                        self.combine(c.abs(), r, -(c.signum() * ca), &eq, r.rel)?
                    };
                    out.add(&nr)?;
                }
                if out.empty {
                    break;
                }
            }
            return Some(out);
        }
        let mut pos: Vec<Row> = Vec::new();
        let mut neg: Vec<Row> = Vec::new();
        for e in &self.ents {
            let (rows, n) = e.rows();
            for r in &rows[..n] {
                match r.a[d].cmp(&0) {
                    Ordering::Equal => out.add(r)?,
                    Ordering::Greater => pos.push(*r),
                    Ordering::Less => neg.push(*r),
                }
            }
        }
        for p in &pos {
            for n in &neg {
                let rel = if p.rel == Relation::Lt || n.rel == Relation::Lt {
                    Relation::Lt
                } else {
                    Relation::Le
                };
                out.add(&self.combine(-n.a[d], p, p.a[d], n, rel)?)?;
                if out.empty {
                    return Some(out);
                }
            }
        }
        Some(out)
    }

    fn satisfiable(mut self) -> Option<bool> {
        loop {
            if self.empty {
                return Some(false);
            }
            let Some(d) = self.pick(None) else {
                return Some(true);
            };
            self = self.eliminate(d)?;
        }
    }
}

/// Lower and upper bound of one dim over a satisfiable system, with
/// strictness flags.
pub(crate) type DimBounds = (Option<(Rational, bool)>, Option<(Rational, bool)>);

/// Bounds of `dim` after eliminating every other dim; `Some(None)` when the
/// system is empty.
pub(crate) fn dim_bounds(s: &System, dim: DimId) -> Option<Option<DimBounds>> {
    let mut t = [0i64; K];
    let (rows, k, dims) = encode_with_dims(&s.atoms())?;
    let Ok(i) = dims.binary_search(&dim) else {
        return Some(rows_satisfiable(&rows, k)?.then_some((None, None)));
    };
    t[i] = 1;
    project(&rows, k, &t)
}

/// Range of each integer-coefficient linear form (without constant part)
/// over the system; `Some(None)` when the system is empty.
pub(crate) fn form_bounds(
    s: &System,
    forms: &[Vec<(DimId, i64)>],
) -> Option<Option<Vec<DimBounds>>> {
    let (rows, k, dims) = encode_with_dims(&s.atoms())?;
    if k + 1 > K {
        return None;
    }
    if !rows_satisfiable(&rows, k)? {
        return Some(None);
    }
    let mut out = Vec::with_capacity(forms.len());
    for f in forms {
        let mut t = [0i64; K];
        let mut outside = false;
        for (d, c) in f {
            match dims.binary_search(d) {
                Ok(i) => t[i] = *c,
                Err(_) => outside = true,
            }
        }
        // a dim the system does not mention leaves the form unbounded
        out.push(if outside {
            (None, None)
        } else {
            project(&rows, k, &t)?.expect("satisfiable")
        });
    }
    Some(Some(out))
}

/// Bounds of `t · x`: a fresh dim `y = t · x` is added and everything else
/// eliminated.
fn project(rows: &[Row], k: usize, t: &Coeffs) -> Option<Option<DimBounds>> {
    let nz: Vec<usize> = (0..k).filter(|j| t[*j] != 0).collect();
    let (mut cur, y) = if nz.len() == 1 && t[nz[0]] == 1 {
        (Dense::new(k), nz[0])
    } else {
        if k + 1 > K {
            return None;
        }
        (Dense::new(k + 1), k)
    };
    for r in rows {
        cur.add(r)?;
    }
    if y == k {
        let mut a = [0i64; K];
        for j in 0..k {
            a[j] = t[j].checked_neg()?;
        }
        a[k] = 1;
        cur.add(&Row {
            a,
            b: Q { n: 0, d: 1 },
            rel: Relation::Eq,
        })?;
    }
    loop {
        if cur.empty {
            return Some(None);
        }
        let Some(d) = cur.pick(Some(y)) else { break };
        cur = cur.eliminate(d)?;
    }
    let q = |b: Option<(Q, bool)>| b.map(|(v, s)| (Rational::new(v.n, v.d), s));
    Some(Some(match cur.ents.first() {
        Some(e) => (q(e.lo), q(e.hi)),
        None => (None, None),
    }))
}

/// Atoms as dense rows over a compact renumbering of their dims.
fn encode(atoms: &[AtomicConstraint]) -> Option<(Vec<Row>, usize)> {
    encode_with_dims(atoms).map(|(rows, k, _)| (rows, k))
}

fn encode_with_dims(atoms: &[AtomicConstraint]) -> Option<(Vec<Row>, usize, Vec<DimId>)> {
    let mut dims: Vec<DimId> = atoms
        .iter()
        .flat_map(|a| a.term.coeffs().keys().copied())
        .collect();
    dims.sort_unstable();
    dims.dedup();
    if dims.len() > K {
        return None;
    }
    let mut rows = Vec::with_capacity(atoms.len());
    for at in atoms {
        let mut l: i64 = 1;
        for c in at.term.coeffs().values() {
            l = i64::try_from(i128::from(l).lcm(&i128::from(c.to_i64_parts()?.1))).ok()?;
        }
        let mut a = [0i64; K];
        for (d, c) in at.term.coeffs() {
            let i = dims.binary_search(d).ok()?;
            let (n, den) = c.to_i64_parts()?;
            a[i] = n.checked_mul(l / den).filter(|v| *v != i64::MIN)?;
        }
        let (kn, kd) = at.term.constant_part().to_i64_parts()?;
        let b = Q::new(-i128::from(kn) * i128::from(l), i128::from(kd))?;
        rows.push(Row { a, b, rel: at.rel });
    }
    let k = dims.len();
    Some((rows, k, dims))
}

fn rows_satisfiable<'a>(rows: impl IntoIterator<Item = &'a Row>, k: usize) -> Option<bool> {
    let mut s = Dense::new(k);
    for r in rows {
        s.add(r)?;
        if s.empty {
            return Some(false);
        }
    }
    s.satisfiable()
}

pub(crate) fn is_satisfiable(s: &System) -> Option<bool> {
    if s.empty {
        return Some(false);
    }
    let (rows, k) = encode(&s.atoms())?;
    rows_satisfiable(&rows, k)
}

/// Same result as [`System::minimize_exact`].
pub(crate) fn minimize(s: &System) -> Option<System> {
    if s.empty {
        return Some(s.clone());
    }
    let atoms = s.atoms();
    let (rows, k) = encode(&atoms)?;
    let mut base = Dense::new(k);
    for r in &rows {
        base.add(r)?;
    }
    if base.empty || !base.clone().satisfiable()? {
        return Some(System::empty());
    }
    // Atoms come one per direction and side, so each owns one bound of one
    // entry (both bounds for an equality).
    let mut keep = vec![true; rows.len()];
    for (i, r) in rows.iter().enumerate() {
        let mut probe = Dense::new(k);
        probe.add(r)?;
        let dir = probe.ents[0].dir;
        let e = base
            .ents
            .iter()
            .position(|e| e.dir[..k] == dir[..k])
            .expect("atom entry");
        let (negs, n) = r.negations();
        let mut redundant = true;
        for neg in &negs[..n] {
            let mut t = base.clone();
            match (r.rel, probe.ents[0].hi.is_some()) {
                (Relation::Eq, _) => {
                    t.ents[e].lo = None;
                    t.ents[e].hi = None;
                }
                (_, true) => t.ents[e].hi = None,
                (_, false) => t.ents[e].lo = None,
            }
            t.add(neg)?;
            if t.satisfiable()? {
                redundant = false;
                break;
            }
        }
        if redundant {
            keep[i] = false;
            let ent = &mut base.ents[e];
            match (r.rel, probe.ents[0].hi.is_some()) {
                (Relation::Eq, _) => {
                    ent.lo = None;
                    ent.hi = None;
                }
                (_, true) => ent.hi = None,
                (_, false) => ent.lo = None,
            }
        }
    }
    let kept: Vec<AtomicConstraint> = atoms
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(a, _)| a)
        .collect();
    Some(System::from_atoms(&kept))
}
