//! Rational-function normalization: common denominators and cancellation of
//! reciprocal-sum atoms against the numerator.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::One;

use super::{add_term, Atom, Expr, ExprError, Monomial, Rational, TermMap};

/// Brings `e` to a reduced fraction: a polynomial numerator over products of
/// reciprocal-sum atoms, with every factor that divides the numerator
/// exactly cancelled. Idempotent.
pub fn simplify(e: &Expr) -> Expr {
    let e = normalize_args(e);
    if !has_sum_atoms(&e) {
        return e;
    }
    let (num, den) = together(&e);
    if num.is_zero() {
        return num;
    }
    let (mut poly, shift) = clear_plain_denominators(&num);
    let mut rest = Vec::new();
    for (base, mut k) in den {
        if is_polynomial(&base) {
            while k > 0 {
                match exact_div(&poly, &base) {
                    Some(q) => {
                        poly = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
        }
        if k > 0 {
            rest.push((base, k));
        }
    }
    let mut out = poly.mul_monomial(&Rational::one(), &shift.pow(-1));
    for (base, k) in rest {
        out = out * Expr::atom_pow(Atom::Sum(base), -(k as i32));
    }
    out
}

/// Zero test over the field of fractions: true iff the numerator of `e`
/// over a common denominator vanishes.
pub fn is_zero_rational(e: &Expr) -> bool {
    let e = normalize_args(e);
    if !has_sum_atoms(&e) {
        return e.is_zero();
    }
    together(&e).0.is_zero()
}

fn normalize_args(e: &Expr) -> Expr {
    let rebuilt = e.map_atoms(&mut |a: &Atom| -> Result<Option<Expr>, ExprError> {
        Ok(match a {
            Atom::Exp(y) => {
                let y2 = simplify(y);
                (&y2 != y).then(|| y2.exp())
            }
            Atom::Ln(y) => {
                let y2 = simplify(y);
                if &y2 != y {
                    y2.ln().ok()
                } else {
                    None
                }
            }
            _ => None,
        })
    });
    rebuilt.unwrap_or_else(|_| e.clone())
}

fn has_sum_atoms(e: &Expr) -> bool {
    e.terms()
        .any(|(m, _)| m.factors().iter().any(|(a, _)| matches!(a, Atom::Sum(_))))
}

fn is_polynomial(e: &Expr) -> bool {
    e.terms().all(|(m, _)| {
        m.factors()
            .iter()
            .all(|(a, k)| *k > 0 && !matches!(a, Atom::Sum(_)))
    })
}

/// Multiplies through by every reciprocal-sum denominator. Returns the
/// numerator and the cleared bases with multiplicities.
fn together(e: &Expr) -> (Expr, Vec<(Expr, u32)>) {
    let mut num = e.clone();
    let mut den: BTreeMap<Expr, u32> = BTreeMap::new();
    for _ in 0..64 {
        let mut need: BTreeMap<Expr, u32> = BTreeMap::new();
        for (m, _) in num.terms() {
            for (a, k) in m.factors() {
                if let Atom::Sum(b) = a {
                    let e = need.entry(b.clone()).or_insert(0);
                    *e = (*e).max(k.unsigned_abs());
                }
            }
        }
        if need.is_empty() {
            break;
        }
        let mut powers: BTreeMap<(Expr, u32), Expr> = BTreeMap::new();
        let mut acc = Expr::zero();
        let mut plain = TermMap::new();
        for (m, c) in num.terms() {
            let mut kept = Vec::new();
            let mut mults: BTreeMap<&Expr, u32> = need.iter().map(|(b, k)| (b, *k)).collect();
            for (a, k) in m.factors() {
                match a {
                    Atom::Sum(b) => {
                        let left = need[b] as i32 + k;
                        mults.insert(b, left as u32);
                    }
                    _ => kept.push((a.clone(), *k)),
                }
            }
            let base = Monomial(kept);
            let mut term = Expr::monomial(c.clone(), base.clone());
            let mut trivial = true;
            for (b, j) in mults {
                if j == 0 {
                    continue;
                }
                trivial = false;
                let p = powers
                    .entry((b.clone(), j))
                    .or_insert_with(|| b.pow_nonneg(j))
                    .clone();
                term = term * p;
            }
            if trivial {
                add_term(&mut plain, base, c.clone());
            } else {
                acc += term;
            }
        }
        num = Expr::from_map(plain) + acc;
        for (b, k) in need {
            *den.entry(b).or_insert(0) += k;
        }
    }
    (num, den.into_iter().collect())
}

/// Multiplies by the monomial that lifts all negative exponents to zero.
fn clear_plain_denominators(e: &Expr) -> (Expr, Monomial) {
    let mut mins: BTreeMap<Atom, i32> = BTreeMap::new();
    for (m, _) in e.terms() {
        for (a, k) in m.factors() {
            if *k < 0 {
                let v = mins.entry(a.clone()).or_insert(0);
                *v = (*v).min(*k);
            }
        }
    }
    let shift = Monomial::from_factors(mins.into_iter().map(|(a, k)| (a, -k)));
    (e.mul_monomial(&Rational::one(), &shift), shift)
}

/// Lexicographic term order, earlier atoms more significant.
fn lex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    let (x, y) = (a.factors(), b.factors());
    let (mut i, mut j) = (0, 0);
    loop {
        match (x.get(i), y.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some((_, ea)), None) => return ea.cmp(&0),
            (None, Some((_, eb))) => return 0.cmp(eb),
            (Some((aa, ea)), Some((bb, eb))) => match aa.cmp(bb) {
                Ordering::Less => return ea.cmp(&0),
                Ordering::Greater => return 0.cmp(eb),
                Ordering::Equal => {
                    if ea != eb {
                        return ea.cmp(eb);
                    }
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

fn leading(e: &Expr) -> (&Monomial, &Rational) {
    e.terms()
        .max_by(|(a, _), (b, _)| lex_cmp(a, b))
        .expect("nonzero polynomial")
}

fn divides(d: &Monomial, m: &Monomial) -> bool {
    d.factors().iter().all(|(a, k)| m.exponent(a) >= *k)
}

/// `n / b` when `b` divides `n` exactly as polynomials in their atoms.
fn exact_div(n: &Expr, b: &Expr) -> Option<Expr> {
    let (lm_b, lc_b) = leading(b);
    let lm_b = lm_b.clone();
    let inv_lm_b = lm_b.pow(-1);
    let inv_lc_b = lc_b.recip();
    let mut r = n.clone();
    let mut q = TermMap::new();
    let mut steps = 0usize;
    while !r.is_zero() {
        steps += 1;
        if steps > 100_000 {
            return None;
        }
        let (lm_r, lc_r) = leading(&r);
        if !divides(&lm_b, lm_r) {
            return None;
        }
        let tm = lm_r.mul(&inv_lm_b);
        let tc = lc_r * &inv_lc_b;
        r = r - b.mul_monomial(&tc, &tm);
        add_term(&mut q, tm, tc);
    }
    Some(Expr::from_map(q))
}
