//! Invertible changes of the independent variable.

use alloc::format;

use crate::expr::{is_zero_rational, simplify, Expr, Rational, Symbol};

use super::ProblemError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubstitutionKind {
    Identity,
    /// `τ = exp(-p (t - a))`.
    Exponential,
    /// `τ = (t - a) / (1 + p (t - a))`.
    Mobius,
    Custom,
}

/// `var = forward(time)` with `time = inverse(var)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    kind: SubstitutionKind,
    time: Symbol,
    var: Symbol,
    forward: Expr,
    inverse: Expr,
    parameter: Option<Expr>,
}

impl Substitution {
    pub fn identity(time: &Symbol) -> Substitution {
        Substitution {
            kind: SubstitutionKind::Identity,
            time: time.clone(),
            var: time.clone(),
            forward: Expr::sym(time),
            inverse: Expr::sym(time),
            parameter: None,
        }
    }

    pub fn exponential(
        time: &Symbol,
        var: &Symbol,
        p: &Expr,
        a: &Rational,
    ) -> Result<Substitution, ProblemError> {
        let shifted = Expr::sym(time) - Expr::rational(a.clone());
        let forward = (-(p * &shifted)).exp();
        let inverse = Expr::rational(a.clone())
            - Expr::sym(var)
                .ln()?
                .checked_div(p)
                .map_err(|_| ProblemError::Invalid("exponential rate must be nonzero".into()))?;
        Self::checked(
            SubstitutionKind::Exponential,
            time,
            var,
            forward,
            inverse,
            Some(p.clone()),
        )
    }

    pub fn mobius(
        time: &Symbol,
        var: &Symbol,
        p: &Expr,
        a: &Rational,
    ) -> Result<Substitution, ProblemError> {
        if p.is_zero() {
            return Err(ProblemError::Invalid(
                "Möbius parameter must be nonzero".into(),
            ));
        }
        let shifted = Expr::sym(time) - Expr::rational(a.clone());
        let forward = shifted.checked_div(&(Expr::one() + p * &shifted))?;
        let v = Expr::sym(var);
        let inverse = Expr::rational(a.clone()) + v.checked_div(&(Expr::one() - p * &v))?;
        Self::checked(
            SubstitutionKind::Mobius,
            time,
            var,
            forward,
            inverse,
            Some(p.clone()),
        )
    }

    /// A user-supplied pair of maps, accepted only if they compose to the
    /// identity both ways.
    pub fn custom(
        time: &Symbol,
        var: &Symbol,
        forward: Expr,
        inverse: Expr,
    ) -> Result<Substitution, ProblemError> {
        Self::checked(SubstitutionKind::Custom, time, var, forward, inverse, None)
    }

    fn checked(
        kind: SubstitutionKind,
        time: &Symbol,
        var: &Symbol,
        forward: Expr,
        inverse: Expr,
        parameter: Option<Expr>,
    ) -> Result<Substitution, ProblemError> {
        if time == var {
            return Err(ProblemError::Invalid(format!(
                "new variable must differ from `{time}`"
            )));
        }
        if forward.contains_symbol(var) || inverse.contains_symbol(time) {
            return Err(ProblemError::NotInverse);
        }
        let s = Substitution {
            kind,
            time: time.clone(),
            var: var.clone(),
            forward: simplify(&forward),
            inverse: simplify(&inverse),
            parameter,
        };
        let there = s.forward.substitute_symbol(time, &s.inverse)? - Expr::sym(var);
        let back = s.inverse.substitute_symbol(var, &s.forward)? - Expr::sym(time);
        if !is_zero_rational(&there) || !is_zero_rational(&back) {
            return Err(ProblemError::NotInverse);
        }
        Ok(s)
    }

    /// The substitution going the other way.
    pub fn inverted(&self) -> Substitution {
        Substitution {
            kind: if self.kind == SubstitutionKind::Identity {
                SubstitutionKind::Identity
            } else {
                SubstitutionKind::Custom
            },
            time: self.var.clone(),
            var: self.time.clone(),
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
            parameter: self.parameter.clone(),
        }
    }

    /// `forward(a)`, which must be a rational number.
    pub fn image_of(&self, a: &Rational) -> Result<Rational, ProblemError> {
        let v = simplify(
            &self
                .forward
                .substitute_symbol(&self.time, &Expr::rational(a.clone()))?,
        );
        v.to_rational()
            .ok_or_else(|| ProblemError::NonRationalPoint(v.to_source()))
    }

    pub fn kind(&self) -> SubstitutionKind {
        self.kind
    }

    pub fn time(&self) -> &Symbol {
        &self.time
    }

    pub fn var(&self) -> &Symbol {
        &self.var
    }

    pub fn forward(&self) -> &Expr {
        &self.forward
    }

    pub fn inverse(&self) -> &Expr {
        &self.inverse
    }

    pub fn parameter(&self) -> Option<&Expr> {
        self.parameter.as_ref()
    }
}
