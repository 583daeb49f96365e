use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::expr::{binomial, Atom, Expr, ExprError, Rational, Symbol};

/// Dense univariate polynomial over the rationals, lowest degree first,
/// without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn new(mut coefs: Vec<Rational>) -> Poly {
        while coefs.last().is_some_and(Zero::is_zero) {
            coefs.pop();
        }
        Poly(coefs)
    }

    pub fn zero() -> Poly {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Poly {
        Poly::new(alloc::vec![c])
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    /// `x^k`.
    pub fn monomial(c: Rational, k: usize) -> Poly {
        let mut v = alloc::vec![Rational::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.0
    }

    pub fn coefficient(&self, k: usize) -> Rational {
        self.0.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// Lowest power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.0.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer((k as i64).into()))
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn integral(&self) -> Poly {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(Rational::zero());
        for (k, c) in self.0.iter().enumerate() {
            v.push(c / Rational::from_integer(((k + 1) as i64).into()));
        }
        Poly::new(v)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// `p(x + alpha)` by Horner's scheme on polynomials.
    pub fn compose_shift(&self, alpha: &Rational) -> Poly {
        let lin = Poly::new(alloc::vec![alpha.clone(), Rational::one()]);
        self.0.iter().rev().fold(Poly::zero(), |acc, c| {
            &(&acc * &lin) + &Poly::constant(c.clone())
        })
    }

    /// Coefficients in powers of `x - a` (Taylor shift).
    pub fn recentered(&self, a: &Rational) -> Poly {
        let n = self.0.len();
        let mut out = alloc::vec![Rational::zero(); n];
        for (k, c) in self.0.iter().enumerate() {
            // c x^k = c Σ_j C(k,j) a^(k-j) (x-a)^j
            let mut apow = Rational::one();
            for j in (0..=k).rev() {
                out[j] += c * binomial(k, j) * &apow;
                apow *= a;
            }
        }
        Poly::new(out)
    }

    /// Reads a polynomial in `var` from an expression.
    pub fn from_expr(e: &Expr, var: &Symbol) -> Result<Poly, ExprError> {
        let mut out: Vec<Rational> = Vec::new();
        let target = Atom::Sym(var.clone());
        for (m, c) in e.terms() {
            let k = m.exponent(&target);
            if k < 0 || m.factors().len() > usize::from(k > 0) {
                return Err(ExprError::NotExpandable(alloc::format!(
                    "`{}` is not a polynomial in `{}`",
                    e.to_source(),
                    var
                )));
            }
            let k = k as usize;
            if out.len() <= k {
                out.resize(k + 1, Rational::zero());
            }
            out[k] += c;
        }
        Ok(Poly::new(out))
    }

    /// `Σ c_k (var - a)^k`.
    pub fn to_expr(&self, var: &Symbol, a: &Rational) -> Expr {
        let base = Expr::sym(var) - Expr::rational(a.clone());
        let mut acc = Expr::zero();
        let mut power = Expr::one();
        for c in &self.0 {
            acc += power.scale(c);
            power = &power * &base;
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new(
            (0..n)
                .map(|k| self.coefficient(k) + o.coefficient(k))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new(
            (0..n)
                .map(|k| self.coefficient(k) - o.coefficient(k))
                .collect(),
        )
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = alloc::vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, x) in self.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.0.iter().enumerate() {
                v[i + j] += x * y;
            }
        }
        Poly::new(v)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }
}
