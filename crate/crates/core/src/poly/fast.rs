//! Machine-integer mirror of [`System`] used as a fast path.
//!
//! Every operation follows the same normalization, elimination order and
//! substitution choice as the arbitrary-precision code, so results are
//! identical. Any overflow aborts with `None` and the caller falls back.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::rational::Rational;
use super::space::DimId;
use super::system::{Bound, Bounds, System};
use super::term::Relation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Q {
    n: i128,
    d: i128,
}

impl Q {
    fn new(n: i128, d: i128) -> Option<Q> {
        if d == 0 {
            return None;
        }
        let g = n.gcd(&d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        Some(Q { n, d })
    }

    fn add(self, o: Q) -> Option<Q> {
        let n = self
            .n
            .checked_mul(o.d)?
            .checked_add(o.n.checked_mul(self.d)?)?;
        Q::new(n, self.d.checked_mul(o.d)?)
    }

    fn neg(self) -> Option<Q> {
        Some(Q {
            n: self.n.checked_neg()?,
            d: self.d,
        })
    }

    fn mul_int(self, k: i128) -> Option<Q> {
        Q::new(self.n.checked_mul(k)?, self.d)
    }

    fn div_int(self, k: i128) -> Option<Q> {
        Q::new(self.n, self.d.checked_mul(k)?)
    }

    fn cmp(self, o: Q) -> Option<Ordering> {
        Some(self.n.checked_mul(o.d)?.cmp(&o.n.checked_mul(self.d)?))
    }

    fn from_rational(r: &Rational) -> Option<Q> {
        Some(Q {
            n: r.numer().to_i128()?,
            d: r.denom().to_i128()?,
        })
    }

    fn to_rational(self) -> Rational {
        Rational::from_bigints(BigInt::from(self.n), BigInt::from(self.d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct B {
    value: Q,
    strict: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Fb {
    lower: Option<B>,
    upper: Option<B>,
}

impl Fb {
    fn tighten_lower(&mut self, b: B) -> Option<()> {
        let replace = match &self.lower {
            None => true,
            Some(cur) => match b.value.cmp(cur.value)? {
                Ordering::Greater => true,
                Ordering::Equal => b.strict && !cur.strict,
                Ordering::Less => false,
            },
        };
        if replace {
            self.lower = Some(b);
        }
        Some(())
    }

    fn tighten_upper(&mut self, b: B) -> Option<()> {
        let replace = match &self.upper {
            None => true,
            Some(cur) => match b.value.cmp(cur.value)? {
                Ordering::Less => true,
                Ordering::Equal => b.strict && !cur.strict,
                Ordering::Greater => false,
            },
        };
        if replace {
            self.upper = Some(b);
        }
        Some(())
    }

    fn is_empty(&self) -> Option<bool> {
        Some(match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => match l.value.cmp(u.value)? {
                Ordering::Greater => true,
                Ordering::Equal => l.strict || u.strict,
                Ordering::Less => false,
            },
            _ => false,
        })
    }

    fn equality(&self) -> Option<Q> {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) if l.value == u.value && !l.strict && !u.strict => Some(l.value),
            _ => None,
        }
    }
}

type FDir = Vec<(DimId, i128)>;

/// `coeffs · x + k rel 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Atom {
    coeffs: FDir,
    k: Q,
    rel: Relation,
}

impl Atom {
    fn coeff(&self, d: DimId) -> i128 {
        self.coeffs
            .iter()
            .find(|(i, _)| *i == d)
            .map_or(0, |(_, c)| *c)
    }

    /// `a * self + b * other` for integers `a, b`.
    fn combine(&self, a: i128, other: &Atom, b: i128, rel: Relation) -> Option<Atom> {
        let mut m: BTreeMap<DimId, i128> = BTreeMap::new();
        for (d, c) in &self.coeffs {
            *m.entry(*d).or_default() += c.checked_mul(a)?;
        }
        for (d, c) in &other.coeffs {
            let e = m.entry(*d).or_default();
            *e = e.checked_add(c.checked_mul(b)?)?;
        }
        let coeffs = m.into_iter().filter(|(_, c)| *c != 0).collect();
        let k = self.k.mul_int(a)?.add(other.k.mul_int(b)?)?;
        Some(Atom { coeffs, k, rel })
    }
}

#[derive(Debug, Clone, Default)]
struct FSys {
    rows: BTreeMap<FDir, Fb>,
    empty: bool,
}

impl FSys {
    fn from_system(s: &System) -> Option<FSys> {
        if s.empty {
            return Some(FSys {
                rows: BTreeMap::new(),
                empty: true,
            });
        }
        let mut rows = BTreeMap::new();
        for (dir, b) in &s.rows {
            let fd: FDir = dir
                .iter()
                .map(|(d, c)| c.numer().to_i128().map(|c| (*d, c)))
                .collect::<Option<_>>()?;
            let conv = |x: &Option<Bound>| -> Option<Option<B>> {
                match x {
                    None => Some(None),
                    Some(b) => Some(Some(B {
                        value: Q::from_rational(&b.value)?,
                        strict: b.strict,
                    })),
                }
            };
            rows.insert(
                fd,
                Fb {
                    lower: conv(&b.lower)?,
                    upper: conv(&b.upper)?,
                },
            );
        }
        Some(FSys { rows, empty: false })
    }

    fn to_system(&self) -> System {
        if self.empty {
            return System::empty();
        }
        let conv = |x: &Option<B>| {
            x.map(|b| Bound {
                value: b.value.to_rational(),
                strict: b.strict,
            })
        };
        let rows = self
            .rows
            .iter()
            .map(|(dir, b)| {
                let d = dir
                    .iter()
                    .map(|(i, c)| {
                        (
                            *i,
                            Rational::from_bigints(BigInt::from(*c), BigInt::from(1)),
                        )
                    })
                    .collect();
                (
                    d,
                    Bounds {
                        lower: conv(&b.lower),
                        upper: conv(&b.upper),
                    },
                )
            })
            .collect();
        System { rows, empty: false }
    }

    fn add(&mut self, atom: &Atom) -> Option<()> {
        if self.empty {
            return Some(());
        }
        if atom.coeffs.is_empty() {
            let z = atom.k;
            let holds = match atom.rel {
                Relation::Lt => z.n < 0,
                Relation::Le => z.n <= 0,
                Relation::Eq => z.n == 0,
            };
            if !holds {
                self.set_empty();
            }
            return Some(());
        }
        let g = atom.coeffs.iter().fold(0i128, |acc, (_, c)| acc.gcd(c));
        let sign: i128 = if atom.coeffs[0].1 < 0 { -1 } else { 1 };
        let dir: FDir = atom
            .coeffs
            .iter()
            .map(|(d, c)| (*d, c / g * sign))
            .collect();
        let rhs = atom.k.mul_int(-sign)?.div_int(g)?;
        let strict = atom.rel == Relation::Lt;
        let entry = self.rows.entry(dir).or_default();
        match atom.rel {
            Relation::Eq => {
                entry.tighten_lower(B {
                    value: rhs,
                    strict: false,
                })?;
                entry.tighten_upper(B {
                    value: rhs,
                    strict: false,
                })?;
            }
            _ if sign > 0 => entry.tighten_upper(B { value: rhs, strict })?,
            _ => entry.tighten_lower(B { value: rhs, strict })?,
        }
        if entry.is_empty()? {
            self.set_empty();
        }
        Some(())
    }

    fn set_empty(&mut self) {
        self.rows.clear();
        self.empty = true;
    }

    fn atoms(&self) -> Option<Vec<Atom>> {
        let mut out = Vec::with_capacity(self.rows.len() * 2);
        for (dir, b) in &self.rows {
            if let Some(v) = b.equality() {
                out.push(Atom {
                    coeffs: dir.clone(),
                    k: v.neg()?,
                    rel: Relation::Eq,
                });
                continue;
            }
            let rel = |s: bool| if s { Relation::Lt } else { Relation::Le };
            if let Some(l) = &b.lower {
                let coeffs = dir.iter().map(|(d, c)| (*d, -c)).collect();
                out.push(Atom {
                    coeffs,
                    k: l.value,
                    rel: rel(l.strict),
                });
            }
            if let Some(u) = &b.upper {
                out.push(Atom {
                    coeffs: dir.clone(),
                    k: u.value.neg()?,
                    rel: rel(u.strict),
                });
            }
        }
        Some(out)
    }

    fn mentions(&self, d: DimId) -> bool {
        self.rows.keys().any(|dir| dir.iter().any(|(i, _)| *i == d))
    }

    fn eliminate_one(&self, d: DimId) -> Option<FSys> {
        if self.empty || !self.mentions(d) {
            return Some(self.clone());
        }
        let atoms = self.atoms()?;
        if let Some(ei) = atoms
            .iter()
            .position(|a| a.rel == Relation::Eq && a.coeff(d) != 0)
        {
            let eq = &atoms[ei];
            let c = eq.coeff(d);
            let mut out = FSys::default();
            for (i, a) in atoms.iter().enumerate() {
                if i == ei {
                    continue;
                }
                // |c| a - sign(c) ca eq has no d and the same sense as a.
                let ca = a.coeff(d);
                let t = if ca == 0 {
                    a.clone()
                } else {
                    a.combine(c.abs(), eq, -(c.signum() * ca), a.rel)?
                };
                out.add(&t)?;
                if out.empty {
                    break;
                }
            }
            return Some(out);
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut out = FSys::default();
        for a in atoms {
            let c = a.coeff(d);
            match c.cmp(&0) {
                Ordering::Equal => out.add(&a)?,
                Ordering::Greater => pos.push((c, a)),
                Ordering::Less => neg.push((c, a)),
            }
        }
        for (cp, p) in &pos {
            for (cn, n) in &neg {
                let rel = if p.rel == Relation::Lt || n.rel == Relation::Lt {
                    Relation::Lt
                } else {
                    Relation::Le
                };
                out.add(&p.combine(-cn, n, *cp, rel)?)?;
                if out.empty {
                    return Some(out);
                }
            }
        }
        Some(out)
    }

    fn eliminate(&self, dims: &BTreeSet<DimId>) -> Option<FSys> {
        let mut cur = self.clone();
        let mut left: BTreeSet<DimId> = dims.iter().copied().filter(|d| cur.mentions(*d)).collect();
        while !left.is_empty() && !cur.empty {
            let pick = cur.cheapest(&left);
            cur = cur.eliminate_one(pick)?;
            left.remove(&pick);
            left.retain(|d| cur.mentions(*d));
        }
        Some(cur)
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
                let (up, lo) = if *c > 0 {
                    (&b.upper, &b.lower)
                } else {
                    (&b.lower, &b.upper)
                };
                p += usize::from(up.is_some());
                n += usize::from(lo.is_some());
            }
            let cost = if has_eq { 0 } else { p * n + 1 };
            if best.is_none_or(|(bc, _)| cost < bc) {
                best = Some((cost, d));
            }
        }
        best.expect("candidates nonempty").1
    }
}

pub(crate) fn eliminate(s: &System, dims: &BTreeSet<DimId>) -> Option<System> {
    Some(FSys::from_system(s)?.eliminate(dims)?.to_system())
}
