//! Canonical constraint storage and Fourier–Motzkin elimination.
//!
//! Each atom is normalized to `dir · x ⋈ c` where `dir` has integer
//! coefficients with gcd 1 and a positive leading coefficient. All atoms
//! sharing a direction collapse into a single lower/upper bound pair, which
//! removes parallel redundancy and detects most contradictions immediately.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::rational::Rational;
use super::space::DimId;
use super::term::{AtomicConstraint, LinearTerm, Relation};

pub(crate) type Dir = Vec<(DimId, Rational)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bound {
    pub value: Rational,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub(crate) struct Bounds {
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
}

impl Bounds {
    fn tighten_lower(&mut self, b: Bound) {
        let replace = match &self.lower {
            None => true,
            Some(cur) => b.value > cur.value || (b.value == cur.value && b.strict && !cur.strict),
        };
        if replace {
            self.lower = Some(b);
        }
    }

    fn tighten_upper(&mut self, b: Bound) {
        let replace = match &self.upper {
            None => true,
            Some(cur) => b.value < cur.value || (b.value == cur.value && b.strict && !cur.strict),
        };
        if replace {
            self.upper = Some(b);
        }
    }

    fn is_empty(&self) -> bool {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => {
                l.value > u.value || (l.value == u.value && (l.strict || u.strict))
            }
            _ => false,
        }
    }

    pub fn equality(&self) -> Option<&Rational> {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) if l.value == u.value && !l.strict && !u.strict => Some(&l.value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub(crate) struct System {
    pub rows: BTreeMap<Dir, Bounds>,
    pub empty: bool,
}

/// Positive factor turning the coefficients into coprime integers.
fn normalizer(coeffs: &BTreeMap<DimId, Rational>) -> Rational {
    let small = || -> Option<Rational> {
        let mut l: i128 = 1;
        for c in coeffs.values() {
            let (_, d) = c.to_i64_parts()?;
            l = l.lcm(&i128::from(d));
            if l > i128::from(i64::MAX) {
                return None;
            }
        }
        let mut g: i128 = 0;
        for c in coeffs.values() {
            let (n, d) = c.to_i64_parts()?;
            g = g.gcd(&(i128::from(n) * (l / i128::from(d))));
        }
        Some(Rational::new(
            i64::try_from(l).ok()?,
            i64::try_from(g).ok()?,
        ))
    };
    if let Some(r) = small() {
        return r;
    }
    let l = coeffs
        .values()
        .fold(BigInt::one(), |acc, c| acc.lcm(&c.denom()));
    let g = coeffs.values().fold(BigInt::zero(), |acc, c| {
        acc.gcd(&(c.numer() * &l / c.denom()))
    });
    Rational::from_bigints(l, g)
}

impl System {
    pub fn universe() -> Self {
        System::default()
    }

    pub fn empty() -> Self {
        System {
            rows: BTreeMap::new(),
            empty: true,
        }
    }

    pub fn from_atoms<'a>(atoms: impl IntoIterator<Item = &'a AtomicConstraint>) -> Self {
        let mut s = System::universe();
        for a in atoms {
            s.add(a);
            if s.empty {
                break;
            }
        }
        s
    }

    pub fn add(&mut self, atom: &AtomicConstraint) {
        if self.empty {
            return;
        }
        let coeffs = atom.term.coeffs();
        if coeffs.is_empty() {
            if !atom.rel.holds(atom.term.constant_part()) {
                self.set_empty();
            }
            return;
        }
        let mut scale = normalizer(coeffs);
        let leading = coeffs.values().next().expect("nonempty");
        if leading.is_negative() {
            scale = -scale;
        }
        let dir: Dir = coeffs.iter().map(|(d, c)| (*d, c * &scale)).collect();
        // scale * (dir' x + k) rel 0, i.e. dir x + scale*k rel' 0
        let rhs = -(atom.term.constant_part() * &scale);
        let strict = atom.rel == Relation::Lt;
        let entry = self.rows.entry(dir).or_default();
        match atom.rel {
            Relation::Eq => {
                entry.tighten_lower(Bound {
                    value: rhs.clone(),
                    strict: false,
                });
                entry.tighten_upper(Bound {
                    value: rhs,
                    strict: false,
                });
            }
            _ if scale.is_positive() => entry.tighten_upper(Bound { value: rhs, strict }),
            _ => entry.tighten_lower(Bound { value: rhs, strict }),
        }
        if entry.is_empty() {
            self.set_empty();
        }
    }

    fn set_empty(&mut self) {
        self.rows.clear();
        self.empty = true;
    }

    pub fn conj(&self, other: &System) -> System {
        if self.empty || other.empty {
            return System::empty();
        }
        let mut out = self.clone();
        for a in other.atoms() {
            out.add(&a);
            if out.empty {
                break;
            }
        }
        out
    }

    /// Deterministic atom list: per direction, the equality if any, else the
    /// lower then the upper bound.
    pub fn atoms(&self) -> Vec<AtomicConstraint> {
        if self.empty {
            return vec![AtomicConstraint::new(
                LinearTerm::constant(Rational::one()),
                Relation::Le,
            )];
        }
        let mut out = Vec::with_capacity(self.rows.len() * 2);
        for (dir, b) in &self.rows {
            let t = LinearTerm::from_parts(dir.iter().cloned(), Rational::zero());
            if let Some(v) = b.equality() {
                let mut t = t;
                t.add_constant(&-v);
                out.push(AtomicConstraint::new(t, Relation::Eq));
                continue;
            }
            if let Some(l) = &b.lower {
                // l - t rel 0
                let mut lt = t.neg();
                lt.add_constant(&l.value);
                out.push(AtomicConstraint::new(
                    lt,
                    if l.strict { Relation::Lt } else { Relation::Le },
                ));
            }
            if let Some(u) = &b.upper {
                let mut ut = t.clone();
                ut.add_constant(&-&u.value);
                out.push(AtomicConstraint::new(
                    ut,
                    if u.strict { Relation::Lt } else { Relation::Le },
                ));
            }
        }
        out
    }

    pub fn dims(&self) -> BTreeSet<DimId> {
        self.rows
            .keys()
            .flat_map(|d| d.iter().map(|(i, _)| *i))
            .collect()
    }

    pub fn mentions(&self, d: DimId) -> bool {
        self.rows.keys().any(|dir| dir.iter().any(|(i, _)| *i == d))
    }

    pub fn holds(&self, point: &[Rational]) -> bool {
        !self.empty && self.atoms().iter().all(|a| a.holds(point))
    }

    /// Existentially quantifies `d` away.
    pub fn eliminate_one(&self, d: DimId) -> System {
        if self.empty || !self.mentions(d) {
            return self.clone();
        }
        let atoms = self.atoms();
        // Prefer substitution through an equality mentioning d.
        if let Some(eq) = atoms
            .iter()
            .find(|a| a.rel == Relation::Eq && !a.term.coeff(d).is_zero())
        {
            let c = eq.term.coeff(d);
            // d = -(eq.term - c d)/c
            let mut rest = eq.term.clone();
            rest.add_coeff(d, &-&c);
            let by = rest.scale(&-c.recip());
            let mut out = System::universe();
            for a in &atoms {
                if std::ptr::eq(a, eq) {
                    continue;
                }
                out.add(&AtomicConstraint::new(a.term.substitute(d, &by), a.rel));
                if out.empty {
                    break;
                }
            }
            return out;
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut out = System::universe();
        for a in atoms {
            let c = a.term.coeff(d);
            if c.is_zero() {
                out.add(&a);
            } else if c.is_positive() {
                pos.push((c, a));
            } else {
                neg.push((c, a));
            }
        }
        for (cp, p) in &pos {
            for (cn, n) in &neg {
                // (-cn) * p + cp * n eliminates d
                let t = p.term.scale(&-cn).add_scaled(&n.term, cp);
                let rel = if p.rel == Relation::Lt || n.rel == Relation::Lt {
                    Relation::Lt
                } else {
                    Relation::Le
                };
                out.add(&AtomicConstraint::new(t, rel));
                if out.empty {
                    return out;
                }
            }
        }
        out
    }

    /// Eliminates every dim in `dims`, choosing a cheap order greedily.
    pub fn eliminate(&self, dims: &BTreeSet<DimId>) -> System {
        if let Some(out) = super::fast::eliminate(self, dims) {
            return out;
        }
        self.eliminate_exact(dims)
    }

    /// Arbitrary-precision elimination, used when machine integers overflow.
    pub fn eliminate_exact(&self, dims: &BTreeSet<DimId>) -> System {
        let mut cur = self.clone();
        let mut left: BTreeSet<DimId> = dims.iter().copied().filter(|d| cur.mentions(*d)).collect();
        while !left.is_empty() && !cur.empty {
            let pick = cur.cheapest(&left);
            cur = cur.eliminate_one(pick);
            left.remove(&pick);
            left.retain(|d| cur.mentions(*d));
        }
        cur
    }

    fn cheapest(&self, candidates: &BTreeSet<DimId>) -> DimId {
        let mut best: Option<(usize, DimId)> = None;
        for &d in candidates {
            let mut has_eq = false;
            let (mut p, mut n) = (0usize, 0usize);
            for (dir, b) in &self.rows {
                let Some((_, c)) = dir.iter().find(|(i, _)| *i == d) else {
                    continue;
                };
                if b.equality().is_some() {
                    has_eq = true;
                    break;
                }
                let (up, lo) = if c.is_positive() {
                    (&b.upper, &b.lower)
                } else {
                    (&b.lower, &b.upper)
                };
                if up.is_some() {
                    p += 1;
                }
                if lo.is_some() {
                    n += 1;
                }
            }
            let cost = if has_eq { 0 } else { p * n + 1 };
            if best.is_none_or(|(bc, _)| cost < bc) {
                best = Some((cost, d));
            }
        }
        best.expect("candidates nonempty").1
    }

    pub fn is_satisfiable(&self) -> bool {
        if self.empty {
            return false;
        }
        if let Some(sat) = super::dense::is_satisfiable(self) {
            return sat;
        }
        let all = self.dims();
        !self.eliminate(&all).empty
    }

    /// Drops bounds implied by the rest of the system.
    pub fn minimize(&self) -> System {
        if self.empty {
            return self.clone();
        }
        if let Some(out) = super::dense::minimize(self) {
            return out;
        }
        self.minimize_exact()
    }

    pub fn minimize_exact(&self) -> System {
        if self.empty {
            return self.clone();
        }
        if !self.is_satisfiable() {
            return System::empty();
        }
        let mut atoms = self.atoms();
        let mut i = 0;
        while i < atoms.len() {
            let others: Vec<AtomicConstraint> = atoms
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, a)| a.clone())
                .collect();
            let base = System::from_atoms(&others);
            let redundant = atoms[i].negate().iter().all(|n| {
                let mut s = base.clone();
                s.add(n);
                !s.is_satisfiable()
            });
            if redundant {
                atoms.remove(i);
            } else {
                i += 1;
            }
        }
        System::from_atoms(&atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn atom(c: &[(DimId, i64)], k: i64, rel: Relation) -> AtomicConstraint {
        AtomicConstraint::new(
            LinearTerm::from_parts(c.iter().map(|(d, v)| (*d, q(*v))), q(k)),
            rel,
        )
    }

    #[test]
    fn parallel_atoms_merge() {
        // x <= 5, 2x <= 8, -x <= -1
        let s = System::from_atoms(&[
            atom(&[(0, 1)], -5, Relation::Le),
            atom(&[(0, 2)], -8, Relation::Le),
            atom(&[(0, -1)], 1, Relation::Le),
        ]);
        assert_eq!(s.rows.len(), 1);
        let b = &s.rows[&vec![(0, q(1))]];
        assert_eq!(b.upper.as_ref().unwrap().value, q(4));
        assert_eq!(b.lower.as_ref().unwrap().value, q(1));
    }

    #[test]
    fn opposing_bounds_become_equality() {
        let s = System::from_atoms(&[
            atom(&[(0, 1)], 0, Relation::Le),
            atom(&[(0, -1)], 0, Relation::Le),
        ]);
        let atoms = s.atoms();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].rel, Relation::Eq);
    }

    #[test]
    fn strict_conflict_is_empty() {
        let s = System::from_atoms(&[
            atom(&[(0, 1)], 0, Relation::Lt),
            atom(&[(0, -1)], 0, Relation::Le),
        ]);
        assert!(s.empty);
    }

    #[test]
    fn fm_keeps_strictness() {
        // x < y, y <= 0  =>  x < 0
        let s = System::from_atoms(&[
            atom(&[(0, 1), (1, -1)], 0, Relation::Lt),
            atom(&[(1, 1)], 0, Relation::Le),
        ]);
        let e = s.eliminate_one(1);
        let a = e.atoms();
        assert_eq!(a, vec![atom(&[(0, 1)], 0, Relation::Lt)]);
    }

    #[test]
    fn minimize_drops_implied() {
        // x <= 1, y <= 1, x + y <= 5
        let s = System::from_atoms(&[
            atom(&[(0, 1)], -1, Relation::Le),
            atom(&[(1, 1)], -1, Relation::Le),
            atom(&[(0, 1), (1, 1)], -5, Relation::Le),
        ]);
        assert_eq!(s.minimize().atoms().len(), 2);
    }

    fn exact_sat(s: &System) -> bool {
        !s.empty && !s.eliminate_exact(&s.dims()).empty
    }

    fn exact_subset(a: &System, b: &System) -> bool {
        if !exact_sat(a) {
            return true;
        }
        b.atoms().iter().all(|atom| {
            atom.negate().iter().all(|n| {
                let mut piece = a.clone();
                piece.add(n);
                !exact_sat(&piece)
            })
        })
    }

    fn exact_equal(a: &System, b: &System) -> bool {
        exact_subset(a, b) && exact_subset(b, a)
    }

    fn arb_atom(scale: i64) -> impl Strategy<Value = AtomicConstraint> {
        (
            proptest::collection::vec(-5i64..=5, 3),
            -10i64..=10,
            prop_oneof![Just(Relation::Lt), Just(Relation::Le), Just(Relation::Eq)],
        )
            .prop_map(move |(c, k, rel)| {
                let coeffs: Vec<(DimId, i64)> =
                    c.iter().enumerate().map(|(d, v)| (d, v * scale)).collect();
                atom(&coeffs, k, rel)
            })
    }

    fn arb_system() -> impl Strategy<Value = System> {
        prop_oneof![
            4 => proptest::collection::vec(arb_atom(1), 1..6),
            1 => proptest::collection::vec(arb_atom(1_000_000_007), 1..6),
        ]
        .prop_map(|atoms| System::from_atoms(&atoms))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        // The machine-integer paths must agree with the exact rational code.
        #[test]
        fn fast_paths_match_exact(s in arb_system(), d in 0usize..3) {
            prop_assert_eq!(s.is_satisfiable(), exact_sat(&s));
            let dims = BTreeSet::from([d]);
            prop_assert!(exact_equal(&s.eliminate(&dims), &s.eliminate_exact(&dims)));
            let m = s.minimize();
            prop_assert!(exact_equal(&m, &s));
            prop_assert!(exact_equal(&m, &s.minimize_exact()));
        }
    }
}
