//! Truncated power-series expansion of expressions in one symbol.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{rat, Atom, Expr, ExprError, Monomial, Rational, Symbol, SPACE_VAR};

type Series = Vec<Expr>;

/// Coefficients `a_0..=a_order` of `(sym - point)^k` in the expansion of `e`.
pub fn taylor_expand(
    e: &Expr,
    sym: &Symbol,
    point: &Rational,
    order: usize,
) -> Result<Vec<Expr>, ExprError> {
    let mut x = Expander {
        sym,
        point,
        len: order + 1,
        cache: BTreeMap::new(),
    };
    x.expr(e)
}

struct Expander<'a> {
    sym: &'a Symbol,
    point: &'a Rational,
    len: usize,
    cache: BTreeMap<Atom, Series>,
}

fn zeros(n: usize) -> Series {
    vec![Expr::zero(); n]
}

impl Expander<'_> {
    fn depends(&self, a: &Atom) -> Result<bool, ExprError> {
        match a {
            Atom::Func(f) => {
                if self.sym.as_str() == SPACE_VAR
                    || f.time.as_ref().is_some_and(|t| &t.var == self.sym)
                {
                    Err(ExprError::NotExpandable(format!(
                        "abstract function `{}` in `{}`",
                        f.name, self.sym
                    )))
                } else {
                    Ok(false)
                }
            }
            _ => Ok(a.contains_symbol(self.sym)),
        }
    }

    fn mul(&self, a: &[Expr], b: &[Expr]) -> Series {
        let mut out = zeros(self.len);
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(self.len - i) {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        out
    }

    fn pow(&self, base: &[Expr], k: u32) -> Series {
        let mut acc = zeros(self.len);
        acc[0] = Expr::one();
        let mut b: Series = base.to_vec();
        let mut n = k;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            n >>= 1;
            if n > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    fn inverse(&self, a: &[Expr]) -> Result<Series, ExprError> {
        if a[0].is_zero() {
            return Err(ExprError::NotExpandable(format!(
                "pole at {} = {}",
                self.sym, self.point
            )));
        }
        let b0 = a[0].recip()?;
        let mut b = zeros(self.len);
        b[0] = b0.clone();
        for n in 1..self.len {
            let mut s = Expr::zero();
            for k in 1..=n {
                if !a[k].is_zero() && !b[n - k].is_zero() {
                    s += &a[k] * &b[n - k];
                }
            }
            b[n] = -(&b0 * s);
        }
        Ok(b)
    }

    fn exp(&self, a: &[Expr]) -> Series {
        let mut e = zeros(self.len);
        e[0] = a[0].exp();
        for n in 1..self.len {
            let mut s = Expr::zero();
            for k in 1..=n {
                if !a[k].is_zero() && !e[n - k].is_zero() {
                    s += (&a[k] * &e[n - k]).scale(&rat(k as i64));
                }
            }
            e[n] = s.scale(&Rational::new(1.into(), (n as i64).into()));
        }
        e
    }

    fn ln(&self, a: &[Expr]) -> Result<Series, ExprError> {
        if a[0].is_zero() {
            return Err(ExprError::NotExpandable(format!(
                "logarithm vanishes at {} = {}",
                self.sym, self.point
            )));
        }
        let inv0 = a[0].recip()?;
        let mut l = zeros(self.len);
        l[0] = a[0].ln()?;
        for n in 1..self.len {
            let mut s = Expr::zero();
            for k in 1..n {
                if !l[k].is_zero() && !a[n - k].is_zero() {
                    s += (&l[k] * &a[n - k]).scale(&rat(k as i64));
                }
            }
            let s = s.scale(&Rational::new(1.into(), (n as i64).into()));
            l[n] = (&a[n] - s) * &inv0;
        }
        Ok(l)
    }

    fn atom(&mut self, a: &Atom) -> Result<Series, ExprError> {
        if let Some(s) = self.cache.get(a) {
            return Ok(s.clone());
        }
        let s = match a {
            Atom::Sym(_) => {
                let mut s = zeros(self.len);
                s[0] = Expr::rational(self.point.clone());
                if self.len > 1 {
                    s[1] = Expr::one();
                }
                s
            }
            Atom::Exp(y) => {
                let ys = self.expr(y)?;
                self.exp(&ys)
            }
            Atom::Ln(y) => {
                let ys = self.expr(y)?;
                self.ln(&ys)?
            }
            Atom::Sum(b) => self.expr(b)?,
            Atom::Func(_) => unreachable!("function atoms never depend on the expansion symbol"),
        };
        self.cache.insert(a.clone(), s.clone());
        Ok(s)
    }

    fn expr(&mut self, e: &Expr) -> Result<Series, ExprError> {
        let mut acc = zeros(self.len);
        for (m, c) in e.terms() {
            let mut constant = Vec::new();
            let mut varying = Vec::new();
            for (a, k) in m.factors() {
                if self.depends(a)? {
                    varying.push((a, *k));
                } else {
                    constant.push((a.clone(), *k));
                }
            }
            let head = Expr::monomial(c.clone(), Monomial(constant));
            if varying.is_empty() {
                acc[0] += head;
                continue;
            }
            let mut s = zeros(self.len);
            s[0] = head;
            for (a, k) in varying {
                let base = self.atom(a)?;
                let p = if k > 0 {
                    self.pow(&base, k as u32)
                } else {
                    let inv = self.inverse(&base)?;
                    self.pow(&inv, k.unsigned_abs())
                };
                s = self.mul(&s, &p);
            }
            for (i, x) in s.into_iter().enumerate() {
                if !x.is_zero() {
                    acc[i] += x;
                }
            }
        }
        Ok(acc)
    }
}
