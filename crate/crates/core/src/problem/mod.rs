//! Cauchy problems: validation, reduction to first order in time, and
//! invertible changes of the time variable.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::{simplify, Atom, Expr, ExprError, FuncAtom, Rational, Symbol, TimeDeriv};

mod substitution;

pub use substitution::{Substitution, SubstitutionKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProblemError {
    #[error("missing initial condition for `{unknown}` (derivative order {order})")]
    MissingInitialCondition { unknown: String, order: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("right-hand side for `{unknown}` contains its time derivative of order {order}")]
    TimeDerivativeInRhs { unknown: String, order: u32 },
    #[error("space derivative of `{0}` in an ODE problem")]
    SpaceDerivativeInOde(String),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("problem must be first order in time")]
    NotFirstOrder,
    #[error("operation requires a {0} problem")]
    WrongKind(&'static str),
    #[error("time derivative of the substitution vanishes at the expansion point")]
    DegenerateSubstitution,
    #[error("image of the expansion point is not a rational constant: {0}")]
    NonRationalPoint(String),
    #[error("substitution maps are not mutually inverse")]
    NotInverse,
    #[error("Fourier form requires an exponential substitution")]
    NotExponential,
    #[error("coefficient is not a Laurent polynomial in the substitution parameter: {0}")]
    NotLaurent(String),
    #[error("requested order {requested} exceeds series order {available}")]
    OrderTooHigh { requested: usize, available: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Ode,
    /// One unknown `u(t, x)`, or the first-order system it reduces to.
    Pde,
}

/// `D(unknown, t^order) = rhs` with data `D(unknown, t^m)|a = initial[m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub unknown: Symbol,
    pub order: u32,
    pub rhs: Expr,
    pub initial: Vec<Expr>,
}

/// A validated Cauchy problem.
///
/// Unknowns appear in right-hand sides as function atoms carrying their
/// time-derivative order, so `D(u,t,x)` and `u` are both atoms of `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    kind: ProblemKind,
    time: Symbol,
    point: Rational,
    equations: Vec<Equation>,
    params: Vec<Symbol>,
}

impl Problem {
    /// Validates and canonicalizes. Bare symbols named after unknowns are
    /// promoted to unknown atoms.
    pub fn new(
        kind: ProblemKind,
        time: Symbol,
        point: Rational,
        equations: Vec<Equation>,
        params: Vec<Symbol>,
    ) -> Result<Problem, ProblemError> {
        if equations.is_empty() {
            return Err(ProblemError::DimensionMismatch("no equations".into()));
        }
        let names: BTreeSet<Symbol> = equations.iter().map(|e| e.unknown.clone()).collect();
        if names.len() != equations.len() {
            return Err(ProblemError::Invalid("duplicate unknown".into()));
        }
        if kind == ProblemKind::Pde && equations.len() > 1 {
            // Only the reduction of a single unknown may carry several fields.
            let base = &equations[0];
            if base.order != 1 {
                return Err(ProblemError::DimensionMismatch(
                    "a PDE problem has a single unknown".into(),
                ));
            }
        }
        let mut eqs = Vec::with_capacity(equations.len());
        for eq in equations {
            if eq.order == 0 {
                return Err(ProblemError::Invalid(format!(
                    "equation for `{}` has time order 0",
                    eq.unknown
                )));
            }
            if (eq.initial.len() as u32) < eq.order {
                return Err(ProblemError::MissingInitialCondition {
                    unknown: eq.unknown.as_str().into(),
                    order: eq.initial.len() as u32,
                });
            }
            if eq.initial.len() as u32 > eq.order {
                return Err(ProblemError::DimensionMismatch(format!(
                    "`{}` is of order {} but has {} initial conditions",
                    eq.unknown,
                    eq.order,
                    eq.initial.len()
                )));
            }
            let rhs = promote_unknowns(&eq.rhs, &names)?;
            let initial = eq
                .initial
                .iter()
                .map(|e| {
                    if e.contains_symbol(&time) {
                        return Err(ProblemError::Invalid(format!(
                            "initial data for `{}` depends on `{}`",
                            eq.unknown, time
                        )));
                    }
                    if e.any_atom(&mut |a| {
                        matches!(a, Atom::Func(f) if names.contains(&f.name))
                            || matches!(a, Atom::Sym(s) if names.contains(s))
                    }) {
                        return Err(ProblemError::Invalid(format!(
                            "initial data for `{}` refers to an unknown",
                            eq.unknown
                        )));
                    }
                    Ok(simplify(e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            eqs.push(Equation {
                unknown: eq.unknown,
                order: eq.order,
                rhs: simplify(&rhs),
                initial,
            });
        }
        let p = Problem {
            kind,
            time,
            point,
            equations: eqs,
            params,
        };
        p.check_rhs()?;
        Ok(p)
    }

    fn check_rhs(&self) -> Result<(), ProblemError> {
        for eq in &self.equations {
            let mut err = None;
            eq.rhs.any_atom(&mut |a| {
                if let Atom::Func(f) = a {
                    match self.order_of(&f.name) {
                        Some(n) => {
                            if f.time_order() >= n {
                                err = Some(ProblemError::TimeDerivativeInRhs {
                                    unknown: f.name.as_str().into(),
                                    order: f.time_order(),
                                });
                            } else if self.kind == ProblemKind::Ode && f.order > 0 {
                                err = Some(ProblemError::SpaceDerivativeInOde(
                                    f.name.as_str().into(),
                                ));
                            }
                        }
                        None if f.time.is_some() => {
                            err = Some(ProblemError::Invalid(format!(
                                "time derivative of `{}`, which is not an unknown",
                                f.name
                            )));
                        }
                        None => {}
                    }
                }
                err.is_some()
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn time(&self) -> &Symbol {
        &self.time
    }

    pub fn point(&self) -> &Rational {
        &self.point
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn unknowns(&self) -> impl Iterator<Item = &Symbol> + '_ {
        self.equations.iter().map(|e| &e.unknown)
    }

    /// Time order of `name`, if it is an unknown.
    pub fn order_of(&self, name: &Symbol) -> Option<u32> {
        self.equations
            .iter()
            .find(|e| &e.unknown == name)
            .map(|e| e.order)
    }

    /// Highest time order over all unknowns.
    pub fn time_order(&self) -> u32 {
        self.equations.iter().map(|e| e.order).max().unwrap_or(0)
    }

    pub fn is_first_order(&self) -> bool {
        self.equations.iter().all(|e| e.order == 1)
    }

    /// Atom for `D(name, t^t_order, x^x_order)`.
    pub fn unknown_atom(&self, name: &Symbol, x_order: u32, t_order: u32) -> Atom {
        Atom::Func(FuncAtom {
            name: name.clone(),
            order: x_order,
            time: (t_order > 0).then(|| TimeDeriv {
                var: self.time.clone(),
                order: t_order,
            }),
        })
    }

    /// Equivalent first-order system. An unknown `u` of order `k` becomes
    /// `u, u_t, ..., u_t^(k-1)`; mixed derivatives `D(u,t^m,x^j)` become
    /// space derivatives of the new unknowns.
    pub fn reduce_to_first_order(&self) -> Result<Problem, ProblemError> {
        if self.is_first_order() {
            return Ok(self.clone());
        }
        let taken: BTreeSet<Symbol> = self.unknowns().cloned().collect();
        let mut chains: Vec<(Symbol, Vec<Symbol>)> = Vec::new();
        for eq in &self.equations {
            let mut names = alloc::vec![eq.unknown.clone()];
            for m in 1..eq.order {
                let mut name = format!("{}_{}", eq.unknown, self.time.as_str().repeat(m as usize));
                while taken.contains(&Symbol::new(&name)) {
                    name.push('_');
                }
                names.push(Symbol::new(&name));
            }
            chains.push((eq.unknown.clone(), names));
        }
        let mut rename = |a: &Atom| -> Result<Option<Expr>, ExprError> {
            if let Atom::Func(f) = a {
                if let Some((_, names)) = chains.iter().find(|(u, _)| u == &f.name) {
                    let m = f.time_order() as usize;
                    return Ok(Some(Expr::func_atom(FuncAtom {
                        name: names[m].clone(),
                        order: f.order,
                        time: None,
                    })));
                }
            }
            Ok(None)
        };
        let mut eqs = Vec::new();
        for (eq, (_, names)) in self.equations.iter().zip(&chains) {
            for m in 0..eq.order as usize {
                let rhs = if m + 1 < eq.order as usize {
                    Expr::func_atom(FuncAtom {
                        name: names[m + 1].clone(),
                        order: 0,
                        time: None,
                    })
                } else {
                    eq.rhs.map_atoms(&mut rename)?
                };
                eqs.push(Equation {
                    unknown: names[m].clone(),
                    order: 1,
                    rhs,
                    initial: alloc::vec![eq.initial[m].clone()],
                });
            }
        }
        Problem::new(
            self.kind,
            self.time.clone(),
            self.point.clone(),
            eqs,
            self.params.clone(),
        )
    }

    /// The auxiliary problem for `W(τ) = u(inverse(τ))`.
    pub fn change_time_variable(&self, sub: &Substitution) -> Result<Problem, ProblemError> {
        if sub.time() != &self.time {
            return Err(ProblemError::Invalid(format!(
                "substitution is in `{}` but the problem's time is `{}`",
                sub.time(),
                self.time
            )));
        }
        let tau = sub.var().clone();
        let tau0 = sub.image_of(&self.point)?;
        let tau0_expr = Expr::rational(tau0.clone());
        // dτ/dt as a function of τ
        let rate = simplify(
            &sub.forward()
                .diff(&self.time)
                .substitute_symbol(&self.time, sub.inverse())?,
        );
        if crate::expr::is_zero_rational(&rate.substitute_symbol(&tau, &tau0_expr)?) {
            return Err(ProblemError::DegenerateSubstitution);
        }
        // (rate d/dτ)^m = Σ_j table[m][j] (d/dτ)^j
        let max_order = self.time_order() as usize;
        let mut table: Vec<Vec<Expr>> = alloc::vec![alloc::vec![Expr::one()]];
        for m in 0..max_order {
            let prev = &table[m];
            let mut row = alloc::vec![Expr::zero(); m + 2];
            for j in 0..=m + 1 {
                let mut acc = Expr::zero();
                if j <= m {
                    acc += prev[j].diff(&tau);
                }
                if j >= 1 {
                    acc += &prev[j - 1];
                }
                row[j] = simplify(&(&rate * acc));
            }
            table.push(row);
        }
        let w = |name: &Symbol, x_order: u32, j: u32| {
            Expr::func_atom(FuncAtom {
                name: name.clone(),
                order: x_order,
                time: (j > 0).then(|| TimeDeriv {
                    var: tau.clone(),
                    order: j,
                }),
            })
        };
        let names: BTreeSet<Symbol> = self.unknowns().cloned().collect();
        let mut eqs = Vec::new();
        for eq in &self.equations {
            let n = eq.order as usize;
            let rhs = eq
                .rhs
                .substitute_symbol(&self.time, sub.inverse())?
                .map_atoms(&mut |a: &Atom| {
                    if let Atom::Func(f) = a {
                        if names.contains(&f.name) && f.time.is_some() {
                            let m = f.time_order() as usize;
                            let mut acc = Expr::zero();
                            for (j, c) in table[m].iter().enumerate() {
                                acc += c * w(&f.name, f.order, j as u32);
                            }
                            return Ok(Some(acc));
                        }
                    }
                    Ok(None)
                })?;
            let mut lower = rhs;
            for (j, c) in table[n].iter().enumerate().take(n) {
                lower -= &(c * w(&eq.unknown, 0, j as u32));
            }
            let rhs = simplify(&lower.checked_div(&table[n][n])?);
            let mut initial: Vec<Expr> = Vec::with_capacity(n);
            for (m, row) in table.iter().enumerate().take(n) {
                let at = |c: &Expr| -> Result<Expr, ExprError> {
                    Ok(simplify(&c.substitute_symbol(&tau, &tau0_expr)?))
                };
                let mut acc = eq.initial[m].clone();
                for (j, w_j) in initial.iter().enumerate() {
                    acc -= &(at(&row[j])? * w_j);
                }
                initial.push(simplify(&acc.checked_div(&at(&row[m])?)?));
            }
            eqs.push(Equation {
                unknown: eq.unknown.clone(),
                order: eq.order,
                rhs,
                initial,
            });
        }
        let mut params = self.params.clone();
        if let Some(p) = sub.parameter().and_then(|p| p.as_symbol()) {
            if !params.contains(p) {
                params.push(p.clone());
            }
        }
        Problem::new(self.kind, tau, tau0, eqs, params)
    }
}

fn promote_unknowns(e: &Expr, names: &BTreeSet<Symbol>) -> Result<Expr, ExprError> {
    e.map_atoms(&mut |a: &Atom| match a {
        Atom::Sym(s) if names.contains(s) => Ok(Some(Expr::func_atom(FuncAtom {
            name: s.clone(),
            order: 0,
            time: None,
        }))),
        _ => Ok(None),
    })
}

#[cfg(test)]
mod tests;
