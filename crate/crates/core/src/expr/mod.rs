//! Exact symbolic expressions.
//!
//! An [`Expr`] is kept in a canonical sum-of-monomials form at all times:
//! every constructor and arithmetic operation returns the normal form, so
//! structural equality is mathematical equality for polynomial and Laurent
//! expressions. The node variants of a classical expression tree map onto
//! this representation as follows:
//!
//! * rational constants are the coefficient of the empty monomial,
//! * symbols and abstract functions `h^(k)(x)` are [`Atom`]s,
//! * sums are the term map, products are [`Monomial`]s with one rational
//!   coefficient, integer powers are atom exponents,
//! * `exp` and `ln` are atoms wrapping a canonical argument.
//!
//! Reciprocals of multi-term sums are atoms too ([`Atom::Sum`]), and only
//! ever appear with negative exponents. Rational functions are therefore not
//! unique; [`simplify`] brings them to a reduced fraction and
//! [`is_zero_rational`] decides equality over the field of fractions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

mod parse;
mod print;
mod ratfun;
mod taylor;

pub use num_rational::BigRational as Rational;
pub use parse::{parse, parse_with, ParseOptions};
pub use print::to_latex;
pub use ratfun::{is_zero_rational, simplify};
pub use taylor::taylor_expand;

/// Name of the single space variable of abstract functions.
pub const SPACE_VAR: &str = "x";

/// Errors raised by the expression kernel.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown derivative notation at line {line}, column {column}: {message}")]
    UnknownDerivative {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("exponent must be an integer constant")]
    NonIntegerExponent,
    #[error("cannot expand as a power series: {0}")]
    NotExpandable(String),
    #[error("space derivative of an expression containing the time symbol `{0}`")]
    TimeInSpaceDerivative(String),
}

/// Shorthand for `Rational::from_integer`.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` as a reduced rational. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// An interned-by-value symbol name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Number of derivatives taken in a named time variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeDeriv {
    pub var: Symbol,
    pub order: u32,
}

/// Abstract function of the space variable, `name^(order)(x)`.
///
/// `time` is only set for unknowns inside problem equations, where mixed
/// derivatives such as `D(u,t,x)` occur.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncAtom {
    pub name: Symbol,
    pub order: u32,
    pub time: Option<TimeDeriv>,
}

impl FuncAtom {
    pub fn new(name: &str, order: u32) -> Self {
        FuncAtom {
            name: Symbol::new(name),
            order,
            time: None,
        }
    }

    pub fn time_order(&self) -> u32 {
        self.time.as_ref().map_or(0, |t| t.order)
    }
}

/// Indivisible factor of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Sym(Symbol),
    Func(FuncAtom),
    Exp(Expr),
    Ln(Expr),
    /// Multi-term base of a negative power.
    Sum(Expr),
}

impl Atom {
    fn rank(&self) -> u8 {
        match self {
            Atom::Sym(_) | Atom::Func(_) => 0,
            Atom::Exp(_) => 1,
            Atom::Ln(_) => 2,
            Atom::Sum(_) => 3,
        }
    }

    pub fn is_transcendental(&self) -> bool {
        matches!(self, Atom::Exp(_) | Atom::Ln(_) | Atom::Sum(_))
    }

    /// Whether `sym` occurs anywhere inside this atom.
    pub fn contains_symbol(&self, sym: &Symbol) -> bool {
        match self {
            Atom::Sym(s) => s == sym,
            Atom::Func(f) => f.time.as_ref().is_some_and(|t| &t.var == sym),
            Atom::Exp(e) | Atom::Ln(e) | Atom::Sum(e) => e.contains_symbol(sym),
        }
    }
}

// Named atoms sort by (name, derivative order); symbols before functions of
// the same name.
impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Atom::Sym(a), Atom::Sym(b)) => a.cmp(b),
            (Atom::Func(a), Atom::Func(b)) => a.cmp(b),
            (Atom::Sym(a), Atom::Func(b)) => a.cmp(&b.name).then(Ordering::Less),
            (Atom::Func(a), Atom::Sym(b)) => a.name.cmp(b).then(Ordering::Greater),
            (Atom::Exp(a), Atom::Exp(b))
            | (Atom::Ln(a), Atom::Ln(b))
            | (Atom::Sum(a), Atom::Sum(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Product of atoms raised to nonzero integer powers, sorted by atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn from_atom(atom: Atom, k: i32) -> Self {
        if k == 0 {
            Monomial::one()
        } else {
            Monomial(alloc::vec![(atom, k)]).merge_exps()
        }
    }

    /// Builds a monomial from unsorted factors, merging repeats.
    pub fn from_factors<I: IntoIterator<Item = (Atom, i32)>>(factors: I) -> Self {
        let mut map: BTreeMap<Atom, i32> = BTreeMap::new();
        for (a, k) in factors {
            *map.entry(a).or_insert(0) += k;
        }
        Monomial(map.into_iter().filter(|(_, k)| *k != 0).collect()).merge_exps()
    }

    /// Collects `exp(q*m)^k` factors sharing the monomial `m` into the single
    /// canonical factor `exp(m/d)^n` with `n/d` the reduced total exponent.
    fn merge_exps(self) -> Monomial {
        if !self.0.iter().any(|(a, _)| matches!(a, Atom::Exp(_))) {
            return self;
        }
        let mut totals: BTreeMap<Monomial, Rational> = BTreeMap::new();
        let mut rest = Vec::with_capacity(self.0.len());
        for (a, k) in self.0 {
            match &a {
                Atom::Exp(y) if y.0.len() == 1 => {
                    let (m, c) = y.0.iter().next().unwrap();
                    *totals.entry(m.clone()).or_insert_with(Rational::zero) +=
                        c * Rational::from_integer(k.into());
                }
                _ => rest.push((a, k)),
            }
        }
        for (m, q) in totals {
            if q.is_zero() {
                continue;
            }
            match q.numer().to_i32() {
                Some(n) => rest.push((
                    Atom::Exp(Expr::monomial(
                        Rational::new(BigInt::one(), q.denom().clone()),
                        m,
                    )),
                    n,
                )),
                None => rest.push((Atom::Exp(Expr::monomial(q, m)), 1)),
            }
        }
        rest.sort_by(|a, b| a.0.cmp(&b.0));
        Monomial(rest)
    }

    pub fn exponent(&self, atom: &Atom) -> i32 {
        self.0
            .binary_search_by(|(a, _)| a.cmp(atom))
            .map_or(0, |i| self.0[i].1)
    }

    pub fn degree_in(&self, sym: &Symbol) -> i32 {
        self.exponent(&Atom::Sym(sym.clone()))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let k = a[i].1 + b[j].1;
                    if k != 0 {
                        out.push((a[i].0.clone(), k));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out).merge_exps()
    }

    fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * k)).collect()).merge_exps()
    }

    /// Same monomial with the `i`-th factor's exponent lowered by one.
    fn lowered(&self, i: usize) -> Monomial {
        let mut v = self.0.clone();
        if v[i].1 == 1 {
            v.remove(i);
        } else {
            v[i].1 -= 1;
        }
        Monomial(v)
    }

    pub fn contains_symbol(&self, sym: &Symbol) -> bool {
        self.0.iter().any(|(a, _)| a.contains_symbol(sym))
    }

    #[allow(dead_code)]
    fn has_sum_atoms(&self) -> bool {
        self.0.iter().any(|(a, _)| matches!(a, Atom::Sum(_)))
    }
}

type TermMap = BTreeMap<Monomial, Rational>;

fn add_term(map: &mut TermMap, mono: Monomial, coef: Rational) {
    if coef.is_zero() {
        return;
    }
    match map.entry(mono) {
        alloc::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += coef;
            if e.get().is_zero() {
                e.remove();
            }
        }
        alloc::collections::btree_map::Entry::Vacant(e) => {
            e.insert(coef);
        }
    }
}

/// Canonical symbolic expression over exact rationals. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<TermMap>);

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    fn from_map(map: TermMap) -> Self {
        Expr(Arc::new(map))
    }

    pub fn zero() -> Self {
        Expr::from_map(TermMap::new())
    }

    pub fn one() -> Self {
        Expr::rational(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::rational(rat(n))
    }

    pub fn rational(q: Rational) -> Self {
        Expr::monomial(q, Monomial::one())
    }

    pub fn monomial(coef: Rational, mono: Monomial) -> Self {
        let mut map = TermMap::new();
        add_term(&mut map, mono, coef);
        Expr::from_map(map)
    }

    pub fn symbol(name: &str) -> Self {
        Expr::sym(&Symbol::new(name))
    }

    pub fn sym(s: &Symbol) -> Self {
        Expr::atom_pow(Atom::Sym(s.clone()), 1)
    }

    /// `name` differentiated `order` times in the space variable.
    pub fn func(name: &str, order: u32) -> Self {
        Expr::atom_pow(Atom::Func(FuncAtom::new(name, order)), 1)
    }

    pub fn func_atom(f: FuncAtom) -> Self {
        Expr::atom_pow(Atom::Func(f), 1)
    }

    /// `atom^k`. A [`Atom::Sum`] raised to a nonnegative power is expanded.
    pub fn atom_pow(atom: Atom, k: i32) -> Self {
        if let Atom::Sum(base) = &atom {
            if k >= 0 {
                return base.pow_nonneg(k as u32);
            }
        }
        Expr::monomial(Rational::one(), Monomial::from_atom(atom, k))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    /// The value if this expression is a rational constant.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.0.is_empty() {
            return None;
        }
        if self.0.len() == 1 {
            let (m, c) = self.0.iter().next().unwrap();
            if m.is_one() {
                return Some(c);
            }
        }
        None
    }

    /// Like [`Expr::as_rational`] but maps zero to `Some(0)`.
    pub fn to_rational(&self) -> Option<Rational> {
        if self.is_zero() {
            Some(Rational::zero())
        } else {
            self.as_rational().cloned()
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.single_atom() {
            Some(Atom::Sym(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_func(&self) -> Option<&FuncAtom> {
        match self.single_atom() {
            Some(Atom::Func(f)) => Some(f),
            _ => None,
        }
    }

    /// The atom if this expression is exactly `1 * atom^1`.
    pub fn single_atom(&self) -> Option<&Atom> {
        if self.0.len() != 1 {
            return None;
        }
        let (m, c) = self.0.iter().next().unwrap();
        match m.factors() {
            [(a, 1)] if c.is_one() => Some(a),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> + '_ {
        self.0.iter()
    }

    /// Builds an expression from arbitrary terms, combining like monomials.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Self {
        let mut map = TermMap::new();
        for (m, c) in terms {
            add_term(&mut map, m, c);
        }
        Expr::from_map(map)
    }

    pub fn scale(&self, q: &Rational) -> Expr {
        if q.is_zero() {
            return Expr::zero();
        }
        if q.is_one() {
            return self.clone();
        }
        Expr::from_map(self.0.iter().map(|(m, c)| (m.clone(), c * q)).collect())
    }

    fn mul_ref(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if let Some(q) = self.as_rational() {
            return other.scale(q);
        }
        if let Some(q) = other.as_rational() {
            return self.scale(q);
        }
        let mut map = TermMap::new();
        for (ma, ca) in self.0.iter() {
            for (mb, cb) in other.0.iter() {
                add_term(&mut map, ma.mul(mb), ca * cb);
            }
        }
        Expr::from_map(map)
    }

    fn add_ref(&self, other: &Expr, sign: bool) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        let mut map = (*self.0).clone();
        for (m, c) in other.0.iter() {
            add_term(&mut map, m.clone(), if sign { c.clone() } else { -c });
        }
        Expr::from_map(map)
    }

    /// Multiplies by `coef * mono` without building an intermediate `Expr`.
    pub fn mul_monomial(&self, coef: &Rational, mono: &Monomial) -> Expr {
        if coef.is_zero() {
            return Expr::zero();
        }
        Expr::from_map(
            self.0
                .iter()
                .map(|(m, c)| (m.mul(mono), c * coef))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        )
    }

    fn pow_nonneg(&self, k: u32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if self.0.len() == 1 {
            let (m, c) = self.0.iter().next().unwrap();
            // Reciprocal-sum exponents stay negative under positive powers.
            let mut q = Rational::one();
            for _ in 0..k {
                q *= c;
            }
            return Expr::monomial(q, m.pow(k as i32));
        }
        let mut base = self.clone();
        let mut acc = Expr::one();
        let mut n = k;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    /// Integer power; negative exponents go through [`Expr::recip`].
    pub fn pow(&self, k: i32) -> Result<Expr, ExprError> {
        if k >= 0 {
            Ok(self.pow_nonneg(k as u32))
        } else {
            Ok(self.recip()?.pow_nonneg(k.unsigned_abs()))
        }
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if self.0.len() == 1 {
            let (m, c) = self.0.iter().next().unwrap();
            return Ok(monomial_recip(c, m));
        }
        // Pull out the common monomial so the remaining base is a
        // polynomial in its atoms.
        let mut mins: BTreeMap<&Atom, i32> = BTreeMap::new();
        let mut seen: BTreeMap<&Atom, usize> = BTreeMap::new();
        for m in self.0.keys() {
            for (a, k) in m.factors() {
                let e = mins.entry(a).or_insert(*k);
                *e = (*e).min(*k);
                *seen.entry(a).or_insert(0) += 1;
            }
        }
        let n_terms = self.0.len();
        let common = Monomial::from_factors(mins.into_iter().filter_map(|(a, k)| {
            let k = if seen[a] < n_terms { k.min(0) } else { k };
            (k != 0).then(|| (a.clone(), k))
        }));
        let inv_common = common.pow(-1);
        let rest = self.mul_monomial_expanding(&inv_common);
        if rest.0.len() == 1 {
            return Ok(rest.recip()?.mul_monomial_expanding(&inv_common));
        }
        let lead = rest.0.values().next().unwrap().clone();
        let base = rest.scale(&lead.recip());
        Ok(
            Expr::monomial(lead.recip(), Monomial::from_atom(Atom::Sum(base), -1))
                .mul_monomial_expanding(&inv_common),
        )
    }

    /// Multiplies by a monomial whose reciprocal-sum exponents may be
    /// positive; such factors cancel at the exponent level first and only
    /// what remains positive is expanded.
    fn mul_monomial_expanding(&self, mono: &Monomial) -> Expr {
        let mut plain = TermMap::new();
        let mut expanded = Expr::zero();
        for (m, c) in self.0.iter() {
            let prod = m.mul(mono);
            if !prod
                .0
                .iter()
                .any(|(a, k)| matches!(a, Atom::Sum(_)) && *k > 0)
            {
                add_term(&mut plain, prod, c.clone());
                continue;
            }
            let mut kept = Vec::new();
            let mut term = Expr::one();
            for (a, k) in prod.0 {
                match &a {
                    Atom::Sum(b) if k > 0 => term = term.mul_ref(&b.pow_nonneg(k as u32)),
                    _ => kept.push((a, k)),
                }
            }
            expanded += term.mul_monomial(c, &Monomial(kept));
        }
        Expr::from_map(plain) + expanded
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        if let Some(q) = other.as_rational() {
            return Ok(self.scale(&q.recip()));
        }
        Ok(self.mul_ref(&other.recip()?))
    }

    /// `exp(self)`, split over the terms of the argument.
    pub fn exp(&self) -> Expr {
        let mut out = Expr::one();
        for (m, q) in self.0.iter() {
            if let [(Atom::Ln(x), 1)] = m.factors() {
                if q.is_integer() {
                    if let Some(k) = q.to_integer().to_i32() {
                        if let Ok(p) = x.pow(k) {
                            out = out.mul_ref(&p);
                            continue;
                        }
                    }
                }
            }
            let factor = if q.is_integer() && q.to_integer().to_i32().is_some() {
                let k = q.to_integer().to_i32().unwrap();
                Expr::atom_pow(Atom::Exp(Expr::monomial(Rational::one(), m.clone())), k)
            } else {
                let num = q.numer().to_i32();
                match num {
                    Some(n) if n != 0 => {
                        let inner = Expr::monomial(
                            Rational::new(BigInt::one(), q.denom().clone()),
                            m.clone(),
                        );
                        Expr::atom_pow(Atom::Exp(inner), n)
                    }
                    _ => Expr::atom_pow(Atom::Exp(Expr::monomial(q.clone(), m.clone())), 1),
                }
            };
            out = out.mul_ref(&factor);
        }
        out
    }

    /// `ln(self)`. Products of atoms split into sums of logarithms and
    /// `ln(exp(y))` collapses to `y`.
    pub fn ln(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::LogOfZero);
        }
        if self.0.len() == 1 {
            let (m, q) = self.0.iter().next().unwrap();
            if q.is_positive() {
                let mut out = if q.is_one() {
                    Expr::zero()
                } else {
                    Expr::atom_pow(Atom::Ln(Expr::rational(q.clone())), 1)
                };
                for (a, k) in m.factors() {
                    let l = match a {
                        Atom::Exp(y) => y.clone(),
                        Atom::Sum(b) => Expr::atom_pow(Atom::Ln(b.clone()), 1),
                        other => Expr::atom_pow(Atom::Ln(Expr::atom_pow(other.clone(), 1)), 1),
                    };
                    out += l.scale(&rat(*k as i64));
                }
                return Ok(out);
            }
        }
        Ok(Expr::atom_pow(Atom::Ln(self.clone()), 1))
    }

    pub fn contains_symbol(&self, sym: &Symbol) -> bool {
        self.0.keys().any(|m| m.contains_symbol(sym))
    }

    /// Whether any atom (searched recursively) satisfies `pred`.
    pub fn any_atom(&self, pred: &mut dyn FnMut(&Atom) -> bool) -> bool {
        for m in self.0.keys() {
            for (a, _) in m.factors() {
                if pred(a) {
                    return true;
                }
                if let Atom::Exp(e) | Atom::Ln(e) | Atom::Sum(e) = a {
                    if e.any_atom(pred) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// All named atoms (symbols and functions), searched recursively.
    pub fn named_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.any_atom(&mut |a| {
            if matches!(a, Atom::Sym(_) | Atom::Func(_)) {
                out.insert(a.clone());
            }
            false
        });
        out
    }

    /// Rewrites atoms. `f` returns the replacement for an atom, or `None` to
    /// keep it (transcendental atoms are then rebuilt from their mapped
    /// arguments). Each distinct atom is visited once.
    pub fn map_atoms<F>(&self, f: &mut F) -> Result<Expr, ExprError>
    where
        F: FnMut(&Atom) -> Result<Option<Expr>, ExprError>,
    {
        let mut cache: BTreeMap<Atom, Image> = BTreeMap::new();
        self.map_atoms_cached(f, &mut cache)
    }

    fn map_atoms_cached<F>(
        &self,
        f: &mut F,
        cache: &mut BTreeMap<Atom, Image>,
    ) -> Result<Expr, ExprError>
    where
        F: FnMut(&Atom) -> Result<Option<Expr>, ExprError>,
    {
        let mut map = TermMap::new();
        let mut pending: Vec<Expr> = Vec::new();
        for (m, c) in self.0.iter() {
            let mut kept: Vec<(Atom, i32)> = Vec::new();
            let mut replaced: Vec<Expr> = Vec::new();
            for (a, k) in m.factors() {
                if !cache.contains_key(a) {
                    let img = match f(a)? {
                        Some(e) => Image::Replace(e),
                        None => match a {
                            Atom::Exp(y) => {
                                let y2 = y.map_atoms_cached(f, cache)?;
                                if &y2 != y {
                                    Image::ExpOf(y2)
                                } else {
                                    Image::Keep
                                }
                            }
                            Atom::Ln(y) => {
                                let y2 = y.map_atoms_cached(f, cache)?;
                                if &y2 != y {
                                    Image::Replace(y2.ln()?)
                                } else {
                                    Image::Keep
                                }
                            }
                            Atom::Sum(b) => {
                                let b2 = b.map_atoms_cached(f, cache)?;
                                if &b2 != b {
                                    Image::Replace(b2)
                                } else {
                                    Image::Keep
                                }
                            }
                            _ => Image::Keep,
                        },
                    };
                    cache.insert(a.clone(), img);
                }
                match &cache[a] {
                    Image::Keep => kept.push((a.clone(), *k)),
                    Image::Replace(e) => replaced.push(e.pow(*k)?),
                    // exp(y)^k is rebuilt as exp(k*y) so that k*ln(x) can collapse
                    Image::ExpOf(y) => replaced.push(y.scale(&rat(*k as i64)).exp()),
                }
            }
            if replaced.is_empty() {
                add_term(&mut map, m.clone(), c.clone());
            } else {
                let mut term = Expr::monomial(c.clone(), Monomial(kept));
                for e in replaced {
                    term = term.mul_ref(&e);
                }
                pending.push(term);
            }
        }
        let mut out = Expr::from_map(map);
        for t in pending {
            out += t;
        }
        Ok(out)
    }

    /// Replaces every occurrence of `target` by `replacement`.
    pub fn substitute(&self, target: &Atom, replacement: &Expr) -> Result<Expr, ExprError> {
        self.map_atoms(&mut |a: &Atom| Ok((a == target).then(|| replacement.clone())))
    }

    pub fn substitute_symbol(&self, sym: &Symbol, replacement: &Expr) -> Result<Expr, ExprError> {
        if !self.contains_symbol(sym) {
            return Ok(self.clone());
        }
        self.substitute(&Atom::Sym(sym.clone()), replacement)
    }

    /// Applies the derivation determined by its values on named atoms.
    ///
    /// `image` gives the derivative of a symbol or function atom (`None`
    /// meaning zero); the chain rule through `exp`, `ln` and reciprocal sums
    /// and the Leibniz rule over monomials are handled here.
    pub fn derive_with<F>(&self, image: &mut F) -> Result<Expr, ExprError>
    where
        F: FnMut(&Atom) -> Result<Option<Expr>, ExprError>,
    {
        let mut d = Deriver {
            image,
            cache: BTreeMap::new(),
        };
        d.expr(self)
    }

    /// Partial derivative with respect to `atom`, all other named atoms
    /// held constant.
    pub fn diff_atom(&self, atom: &Atom) -> Expr {
        self.derive_with(&mut |a: &Atom| Ok((a == atom).then(Expr::one)))
            .expect("partial derivatives of canonical expressions cannot fail")
    }

    /// Partial derivative with respect to the symbol `sym`.
    pub fn diff(&self, sym: &Symbol) -> Expr {
        self.diff_atom(&Atom::Sym(sym.clone()))
    }

    /// Total derivative in the space variable `x`, rejecting the time
    /// symbol `t`.
    pub fn total_diff_x(&self) -> Result<Expr, ExprError> {
        self.total_diff_x_in(Some(&Symbol::new("t")))
    }

    /// Total derivative in `x`. Every function atom gains one derivative
    /// order; symbols other than `x` are constants, and the symbol `time`
    /// (when given) is an error.
    pub fn total_diff_x_in(&self, time: Option<&Symbol>) -> Result<Expr, ExprError> {
        self.derive_with(&mut |a: &Atom| match a {
            Atom::Sym(s) if s.as_str() == SPACE_VAR => Ok(Some(Expr::one())),
            Atom::Sym(s) if Some(s) == time => {
                Err(ExprError::TimeInSpaceDerivative(s.as_str().to_string()))
            }
            Atom::Func(f) => {
                let mut g = f.clone();
                g.order += 1;
                Ok(Some(Expr::func_atom(g)))
            }
            _ => Ok(None),
        })
    }

    /// Source-grammar rendering; `parse(e.to_source())` reproduces `e`.
    pub fn to_source(&self) -> String {
        print::render(self, print::Style::Source)
    }

    /// Human-oriented rendering: `h`, `h'`, `h''`, `h^(k)`.
    pub fn pretty(&self) -> String {
        print::render(self, print::Style::Text)
    }
}

enum Image {
    Keep,
    Replace(Expr),
    ExpOf(Expr),
}

fn monomial_recip(c: &Rational, m: &Monomial) -> Expr {
    let mut plain = Vec::new();
    let mut sums = Vec::new();
    for (a, k) in m.factors() {
        match a {
            Atom::Sum(b) => sums.push((b, -k)),
            _ => plain.push((a.clone(), -k)),
        }
    }
    let mut out = Expr::monomial(c.recip(), Monomial(plain));
    for (b, k) in sums {
        out = out.mul_ref(&b.pow_nonneg(k as u32));
    }
    out
}

struct Deriver<'a, F> {
    image: &'a mut F,
    cache: BTreeMap<Atom, Expr>,
}

impl<F> Deriver<'_, F>
where
    F: FnMut(&Atom) -> Result<Option<Expr>, ExprError>,
{
    fn atom(&mut self, a: &Atom) -> Result<Expr, ExprError> {
        if let Some(e) = self.cache.get(a) {
            return Ok(e.clone());
        }
        let img = match a {
            Atom::Sym(_) | Atom::Func(_) => (self.image)(a)?.unwrap_or_default(),
            Atom::Exp(y) => {
                let dy = self.expr(y)?;
                dy.mul_monomial(&Rational::one(), &Monomial::from_atom(a.clone(), 1))
            }
            Atom::Ln(y) => self.expr(y)?.checked_div(y)?,
            Atom::Sum(b) => self.expr(b)?,
        };
        self.cache.insert(a.clone(), img.clone());
        Ok(img)
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr, ExprError> {
        let mut map = TermMap::new();
        for (m, c) in e.0.iter() {
            for (i, (a, k)) in m.factors().iter().enumerate() {
                let img = self.atom(a)?;
                if img.is_zero() {
                    continue;
                }
                let rest = m.lowered(i);
                let coef = c * rat(*k as i64);
                for (m2, c2) in img.0.iter() {
                    add_term(&mut map, rest.mul(m2), &coef * c2);
                }
            }
        }
        Ok(Expr::from_map(map))
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Self {
        Expr::rational(q)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_source())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self.to_source())
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $body(self, rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $body(self, &rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $body(&self, rhs)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $body(&self, &rhs)
            }
        }
    };
}

bin_op!(Add, add, |a: &Expr, b: &Expr| a.add_ref(b, true));
bin_op!(Sub, sub, |a: &Expr, b: &Expr| a.add_ref(b, false));
bin_op!(Mul, mul, |a: &Expr, b: &Expr| a.mul_ref(b));

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(&-Rational::one())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl AddAssign<Expr> for Expr {
    fn add_assign(&mut self, rhs: Expr) {
        if self.is_zero() {
            *self = rhs;
            return;
        }
        let map = Arc::make_mut(&mut self.0);
        for (m, c) in rhs.0.iter() {
            add_term(map, m.clone(), c.clone());
        }
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        let map = Arc::make_mut(&mut self.0);
        for (m, c) in rhs.0.iter() {
            add_term(map, m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Expr> for Expr {
    fn sub_assign(&mut self, rhs: &Expr) {
        let map = Arc::make_mut(&mut self.0);
        for (m, c) in rhs.0.iter() {
            add_term(map, m.clone(), -c);
        }
    }
}

impl MulAssign<&Expr> for Expr {
    fn mul_assign(&mut self, rhs: &Expr) {
        *self = self.mul_ref(rhs);
    }
}

/// `n!` as a rational.
pub fn factorial(n: usize) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rational::from_integer(acc)
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> Rational {
    if k > n {
        return Rational::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[cfg(test)]
mod tests;
