//! Taylor coefficients by iterating the generator, resummed series in a
//! substituted time variable, and their Fourier form.

use alloc::vec;
use alloc::vec::Vec;

use crate::derivation::generator_for;
use crate::expr::{
    binomial, factorial, is_zero_rational, simplify, taylor_expand, Atom, Expr, Monomial, Rational,
    Symbol,
};
use crate::problem::{Problem, ProblemError, Substitution, SubstitutionKind};

/// Coefficient list for one unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub unknown: Symbol,
    pub coefficients: Vec<Expr>,
}

/// `u(t) ≈ Σ k_n (t - a)^n / n!`, with `k_n` stored undivided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesSolution {
    pub time: Symbol,
    pub point: Rational,
    pub order: usize,
    pub components: Vec<Component>,
}

impl SeriesSolution {
    pub fn component(&self, unknown: &str) -> Option<&Component> {
        self.components
            .iter()
            .find(|c| c.unknown.as_str() == unknown)
    }

    /// The truncated series of component `i` as a polynomial in time.
    pub fn polynomial(&self, i: usize) -> Expr {
        let dt = Expr::sym(&self.time) - Expr::rational(self.point.clone());
        let mut acc = Expr::zero();
        let mut power = Expr::one();
        for (n, k) in self.components[i].coefficients.iter().enumerate() {
            acc += (k * &power).scale(&factorial(n).recip());
            power = &power * &dt;
        }
        acc
    }
}

/// `u(t) ≈ Σ b_n (forward(t) - τ0)^n` for a substitution `τ = forward(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedSeries {
    pub substitution: Substitution,
    pub point: Rational,
    pub tau0: Rational,
    pub order: usize,
    pub components: Vec<Component>,
}

impl GeneralizedSeries {
    /// `forward(t) - τ0`.
    pub fn basis(&self) -> Expr {
        self.substitution.forward() - Expr::rational(self.tau0.clone())
    }

    /// The truncated series of component `i` as an expression in time.
    pub fn truncated(&self, i: usize) -> Expr {
        let basis = self.basis();
        let mut acc = Expr::zero();
        let mut power = Expr::one();
        for b in &self.components[i].coefficients {
            acc += b * &power;
            power = &power * &basis;
        }
        acc
    }
}

/// `k_n = Dⁿ(c)|_{s=a}` for every unknown of a first-order problem.
pub fn taylor_coefficients(p: &Problem, order: usize) -> Result<SeriesSolution, ProblemError> {
    let gen = generator_for(p)?;
    let mut components = Vec::new();
    for (i, unknown) in p.unknowns().enumerate() {
        let mut e = gen.jet(i);
        let mut coefficients = Vec::with_capacity(order + 1);
        coefficients.push(gen.restrict(&e)?);
        for _ in 0..order {
            e = simplify(&gen.apply(&e));
            coefficients.push(gen.restrict(&e)?);
        }
        components.push(Component {
            unknown: unknown.clone(),
            coefficients,
        });
    }
    Ok(SeriesSolution {
        time: p.time().clone(),
        point: p.point().clone(),
        order,
        components,
    })
}

/// Reduces to first order, computes the Taylor series and keeps the
/// components of the original unknowns.
pub fn solve(p: &Problem, order: usize) -> Result<SeriesSolution, ProblemError> {
    let reduced = p.reduce_to_first_order()?;
    let mut sol = taylor_coefficients(&reduced, order)?;
    sol.components.retain(|c| p.order_of(&c.unknown).is_some());
    Ok(sol)
}

/// Changes time by `sub`, solves in the new variable and divides by `n!`.
pub fn resummed_series(
    p: &Problem,
    sub: &Substitution,
    order: usize,
) -> Result<GeneralizedSeries, ProblemError> {
    let aux = p.change_time_variable(sub)?;
    let sol = solve(&aux, order)?;
    let components = sol
        .components
        .into_iter()
        .map(|c| Component {
            unknown: c.unknown,
            coefficients: c
                .coefficients
                .iter()
                .enumerate()
                .map(|(n, k)| simplify(&k.scale(&factorial(n).recip())))
                .collect(),
        })
        .collect();
    Ok(GeneralizedSeries {
        substitution: sub.clone(),
        point: p.point().clone(),
        tau0: aux.point().clone(),
        order,
        components,
    })
}

/// Re-expands a generalized series in powers of `t - a`.
pub fn expand_generalized(
    gs: &GeneralizedSeries,
    order: usize,
) -> Result<SeriesSolution, ProblemError> {
    if order > gs.order {
        return Err(ProblemError::OrderTooHigh {
            requested: order,
            available: gs.order,
        });
    }
    let time = gs.substitution.time().clone();
    let basis = taylor_expand(&gs.basis(), &time, &gs.point, order)?;
    let mut powers: Vec<Vec<Expr>> = vec![{
        let mut one = vec![Expr::zero(); order + 1];
        one[0] = Expr::one();
        one
    }];
    for n in 1..=order {
        let prev = &powers[n - 1];
        let mut next = vec![Expr::zero(); order + 1];
        for (i, x) in prev.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in basis.iter().enumerate().take(order + 1 - i) {
                if !y.is_zero() {
                    next[i + j] += x * y;
                }
            }
        }
        powers.push(next);
    }
    let components = gs
        .components
        .iter()
        .map(|c| {
            let coefficients = (0..=order)
                .map(|m| {
                    let mut acc = Expr::zero();
                    for (n, b) in c.coefficients.iter().enumerate().take(order + 1) {
                        if !powers[n][m].is_zero() {
                            acc += b * &powers[n][m];
                        }
                    }
                    simplify(&acc.scale(&factorial(m)))
                })
                .collect();
            Component {
                unknown: c.unknown.clone(),
                coefficients,
            }
        })
        .collect();
    Ok(SeriesSolution {
        time,
        point: gs.point.clone(),
        order,
        components,
    })
}

/// `(unknown, n)` for every coefficient where two series differ over the
/// field of fractions of their parameters.
pub fn mismatches(a: &SeriesSolution, b: &SeriesSolution) -> Vec<(Symbol, usize)> {
    let mut out = Vec::new();
    for ca in &a.components {
        let Some(cb) = b.components.iter().find(|c| c.unknown == ca.unknown) else {
            out.push((ca.unknown.clone(), 0));
            continue;
        };
        let n = ca.coefficients.len().max(cb.coefficients.len());
        for i in 0..n {
            let (x, y) = (ca.coefficients.get(i), cb.coefficients.get(i));
            let same = match (x, y) {
                (Some(x), Some(y)) => is_zero_rational(&(x - y)),
                _ => false,
            };
            if !same {
                out.push((ca.unknown.clone(), i));
            }
        }
    }
    out
}

/// `re + i·im` with real-valued parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexExpr {
    pub re: Expr,
    pub im: Expr,
}

/// Harmonic `k` of a component is the coefficient of `exp(-i k ω (t - a))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Harmonics {
    pub unknown: Symbol,
    pub harmonics: Vec<ComplexExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierSeries {
    pub time: Symbol,
    pub point: Rational,
    pub omega: Expr,
    pub order: usize,
    pub components: Vec<Harmonics>,
}

/// Puts `p := iω` in an exponential-substitution series and collects the
/// harmonics of `(exp(-iω(t-a)) - 1)^n`.
pub fn fourier_form(gs: &GeneralizedSeries, omega: &Expr) -> Result<FourierSeries, ProblemError> {
    if gs.substitution.kind() != SubstitutionKind::Exponential {
        return Err(ProblemError::NotExponential);
    }
    let p = gs
        .substitution
        .parameter()
        .and_then(|p| p.as_symbol())
        .ok_or_else(|| {
            ProblemError::Invalid("Fourier form needs a symbolic exponential rate".into())
        })?
        .clone();
    let p_atom = Atom::Sym(p.clone());
    let components = gs
        .components
        .iter()
        .map(|c| {
            let split: Vec<ComplexExpr> = c
                .coefficients
                .iter()
                .map(|b| substitute_imaginary(b, &p_atom, &p, omega))
                .collect::<Result<_, _>>()?;
            let n_max = split.len();
            let mut harmonics = Vec::with_capacity(n_max);
            for k in 0..n_max {
                let mut re = Expr::zero();
                let mut im = Expr::zero();
                for (n, z) in split.iter().enumerate().skip(k) {
                    let mut w = binomial(n, k);
                    if (n - k) % 2 == 1 {
                        w = -w;
                    }
                    re += z.re.scale(&w);
                    im += z.im.scale(&w);
                }
                harmonics.push(ComplexExpr {
                    re: simplify(&re),
                    im: simplify(&im),
                });
            }
            Ok(Harmonics {
                unknown: c.unknown.clone(),
                harmonics,
            })
        })
        .collect::<Result<Vec<_>, ProblemError>>()?;
    Ok(FourierSeries {
        time: gs.substitution.time().clone(),
        point: gs.point.clone(),
        omega: omega.clone(),
        order: gs.order,
        components,
    })
}

fn substitute_imaginary(
    b: &Expr,
    p_atom: &Atom,
    p: &Symbol,
    omega: &Expr,
) -> Result<ComplexExpr, ProblemError> {
    let mut re = Expr::zero();
    let mut im = Expr::zero();
    for (m, c) in b.terms() {
        let k = m.exponent(p_atom);
        let rest = Monomial::from_factors(m.factors().iter().filter(|(a, _)| a != p_atom).cloned());
        if rest.contains_symbol(p) {
            return Err(ProblemError::NotLaurent(b.to_source()));
        }
        let term = Expr::monomial(c.clone(), rest) * omega.pow(k)?;
        match k.rem_euclid(4) {
            0 => re += term,
            1 => im += term,
            2 => re -= &term,
            _ => im -= &term,
        }
    }
    Ok(ComplexExpr { re, im })
}

#[cfg(test)]
mod tests;
