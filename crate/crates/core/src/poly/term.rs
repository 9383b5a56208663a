use std::collections::BTreeMap;
use std::fmt;

use super::rational::Rational;
use super::space::{DimId, Space};

/// `sum coeffs[d] * d + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<DimId, Rational>,
    constant: Rational,
}

impl LinearTerm {
    pub fn zero() -> Self {
        LinearTerm::default()
    }

    pub fn constant(c: Rational) -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(d: DimId) -> Self {
        Self::zero().plus(d, Rational::one())
    }

    pub fn from_parts(
        coeffs: impl IntoIterator<Item = (DimId, Rational)>,
        constant: Rational,
    ) -> Self {
        let mut t = LinearTerm::constant(constant);
        for (d, c) in coeffs {
            t.add_coeff(d, &c);
        }
        t
    }

    pub fn coeffs(&self) -> &BTreeMap<DimId, Rational> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn coeff(&self, d: DimId) -> Rational {
        self.coeffs.get(&d).cloned().unwrap_or_default()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_coeff(&mut self, d: DimId, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(d).or_default();
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&d);
        }
    }

    pub fn plus(mut self, d: DimId, c: Rational) -> Self {
        self.add_coeff(d, &c);
        self
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn scale(&self, k: &Rational) -> LinearTerm {
        if k.is_zero() {
            return LinearTerm::zero();
        }
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(d, c)| (*d, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    /// `self + k * other`
    pub fn add_scaled(&self, other: &LinearTerm, k: &Rational) -> LinearTerm {
        let mut out = self.clone();
        for (d, c) in &other.coeffs {
            out.add_coeff(*d, &(c * k));
        }
        out.constant += &other.constant * k;
        out
    }

    pub fn neg(&self) -> LinearTerm {
        self.scale(&-Rational::one())
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        let mut acc = self.constant.clone();
        for (d, c) in &self.coeffs {
            acc += c * &point[*d];
        }
        acc
    }

    /// Replaces dimension `d` by the term `by`.
    pub fn substitute(&self, d: DimId, by: &LinearTerm) -> LinearTerm {
        match self.coeffs.get(&d) {
            None => self.clone(),
            Some(c) => {
                let mut base = self.clone();
                base.coeffs.remove(&d);
                base.add_scaled(by, c)
            }
        }
    }

    pub fn dims(&self) -> impl Iterator<Item = DimId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn display<'a>(&'a self, space: &'a Space) -> TermDisplay<'a> {
        TermDisplay {
            term: self,
            space,
            with_constant: true,
        }
    }
}

pub struct TermDisplay<'a> {
    term: &'a LinearTerm,
    space: &'a Space,
    with_constant: bool,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, c) in &self.term.coeffs {
            let name = if *d < self.space.len() {
                self.space.name(*d).to_string()
            } else {
                format!("_d{d}")
            };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
            first = false;
        }
        let k = &self.term.constant;
        if self.with_constant && (first || !k.is_zero()) {
            if first {
                write!(f, "{k}")?;
            } else if k.is_negative() {
                write!(f, " - {}", k.abs())?;
            } else {
                write!(f, " + {k}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Lt,
    Le,
    Eq,
}

impl Relation {
    pub fn holds(self, v: &Rational) -> bool {
        match self {
            Relation::Lt => v.is_negative(),
            Relation::Le => !v.is_positive(),
            Relation::Eq => v.is_zero(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
        }
    }
}

/// `term rel 0` with `rel` one of `<`, `<=`, `=`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomicConstraint {
    pub term: LinearTerm,
    pub rel: Relation,
}

impl AtomicConstraint {
    pub fn new(term: LinearTerm, rel: Relation) -> Self {
        AtomicConstraint { term, rel }
    }

    pub fn lt(lhs: LinearTerm, rhs: LinearTerm) -> Self {
        Self::new(lhs.add_scaled(&rhs, &-Rational::one()), Relation::Lt)
    }

    pub fn le(lhs: LinearTerm, rhs: LinearTerm) -> Self {
        Self::new(lhs.add_scaled(&rhs, &-Rational::one()), Relation::Le)
    }

    pub fn eq(lhs: LinearTerm, rhs: LinearTerm) -> Self {
        Self::new(lhs.add_scaled(&rhs, &-Rational::one()), Relation::Eq)
    }

    pub fn gt(lhs: LinearTerm, rhs: LinearTerm) -> Self {
        Self::lt(rhs, lhs)
    }

    pub fn ge(lhs: LinearTerm, rhs: LinearTerm) -> Self {
        Self::le(rhs, lhs)
    }

    pub fn holds(&self, point: &[Rational]) -> bool {
        self.rel.holds(&self.term.eval(point))
    }

    /// Negation as a disjunction of atoms (two pieces for an equality,
    /// `t < 0` first).
    pub fn negate(&self) -> Vec<AtomicConstraint> {
        let neg = self.term.neg();
        match self.rel {
            Relation::Le => vec![AtomicConstraint::new(neg, Relation::Lt)],
            Relation::Lt => vec![AtomicConstraint::new(neg, Relation::Le)],
            Relation::Eq => vec![
                AtomicConstraint::new(self.term.clone(), Relation::Lt),
                AtomicConstraint::new(neg, Relation::Lt),
            ],
        }
    }

    pub fn display<'a>(&'a self, space: &'a Space) -> AtomDisplay<'a> {
        AtomDisplay { atom: self, space }
    }
}

pub struct AtomDisplay<'a> {
    atom: &'a AtomicConstraint,
    space: &'a Space,
}

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.atom.term;
        let lhs = TermDisplay {
            term: t,
            space: self.space,
            with_constant: false,
        };
        if t.is_constant() {
            write!(f, "{} {} 0", t.constant, self.atom.rel.symbol())
        } else {
            write!(f, "{} {} {}", lhs, self.atom.rel.symbol(), -&t.constant)
        }
    }
}
