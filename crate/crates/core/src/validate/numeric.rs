use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::{Float, ToPrimitive};

use crate::expr::{factorial, Atom, Expr, Symbol};
use crate::problem::{Problem, ProblemError, ProblemKind};
use crate::series::{GeneralizedSeries, SeriesSolution};

/// Numeric values for free symbols.
pub type Bindings = BTreeMap<Symbol, f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("numeric integration needs an ODE problem")]
    NotOde,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

fn to_f64(q: &crate::expr::Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Evaluates `e` with `env` supplying values of symbols and function atoms.
pub fn eval_f64(e: &Expr, env: &dyn Fn(&Atom) -> Option<f64>) -> Result<f64, NumericError> {
    let mut acc = 0.0;
    for (m, c) in e.terms() {
        let mut term = to_f64(c);
        for (a, k) in m.factors() {
            let v = match a {
                Atom::Sym(s) => env(a).ok_or_else(|| NumericError::Unbound(s.to_string()))?,
                Atom::Func(f) => env(a)
                    .ok_or_else(|| NumericError::Unbound(Expr::func_atom(f.clone()).pretty()))?,
                Atom::Exp(y) => Float::exp(eval_f64(y, env)?),
                Atom::Ln(y) => Float::ln(eval_f64(y, env)?),
                Atom::Sum(b) => eval_f64(b, env)?,
            };
            term *= Float::powi(v, *k);
        }
        acc += term;
    }
    Ok(acc)
}

fn eval_bound(
    e: &Expr,
    bindings: &Bindings,
    extra: &[(&Symbol, f64)],
) -> Result<f64, NumericError> {
    eval_f64(e, &|a: &Atom| match a {
        Atom::Sym(s) => extra
            .iter()
            .find(|(x, _)| *x == s)
            .map(|(_, v)| *v)
            .or_else(|| bindings.get(s).copied()),
        _ => None,
    })
}

/// Fixed-step solution on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericTrajectory {
    pub unknowns: Vec<Symbol>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub step: f64,
    pub method: &'static str,
}

struct System {
    time: Symbol,
    unknowns: Vec<Symbol>,
    rhs: Vec<Expr>,
}

impl System {
    fn new(p: &Problem) -> Result<System, NumericError> {
        if p.kind() != ProblemKind::Ode {
            return Err(NumericError::NotOde);
        }
        let r = p.reduce_to_first_order()?;
        Ok(System {
            time: r.time().clone(),
            unknowns: r.unknowns().cloned().collect(),
            rhs: r.equations().iter().map(|e| e.rhs.clone()).collect(),
        })
    }

    fn field(&self, t: f64, y: &[f64], bindings: &Bindings) -> Result<Vec<f64>, NumericError> {
        let env = |a: &Atom| match a {
            Atom::Sym(s) if s == &self.time => Some(t),
            Atom::Sym(s) => bindings.get(s).copied(),
            Atom::Func(f) if f.order == 0 && f.time.is_none() => self
                .unknowns
                .iter()
                .position(|u| u == &f.name)
                .map(|i| y[i]),
            _ => None,
        };
        self.rhs.iter().map(|f| eval_f64(f, &env)).collect()
    }

    fn step(&self, t: f64, y: &[f64], h: f64, b: &Bindings) -> Result<Vec<f64>, NumericError> {
        let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> {
            y.iter().zip(k).map(|(a, b)| a + s * b).collect()
        };
        let k1 = self.field(t, y, b)?;
        let k2 = self.field(t + h / 2.0, &axpy(y, &k1, h / 2.0), b)?;
        let k3 = self.field(t + h / 2.0, &axpy(y, &k2, h / 2.0), b)?;
        let k4 = self.field(t + h, &axpy(y, &k3, h), b)?;
        let next: Vec<f64> = (0..y.len())
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        if next.iter().all(|v| v.is_finite()) {
            Ok(next)
        } else {
            Err(NumericError::NonFinite { t: t + h })
        }
    }
}

/// Initial state of the reduced first-order system under `bindings`.
pub fn numeric_initial(p: &Problem, bindings: &Bindings) -> Result<Vec<f64>, NumericError> {
    let r = p.reduce_to_first_order()?;
    r.equations()
        .iter()
        .map(|e| eval_bound(&e.initial[0], bindings, &[]))
        .collect()
}

/// Classical fixed-step RK4 from `a` to `t_end` for an ODE problem
/// (reduced to first order; `init` lists the reduced unknowns).
pub fn rk4_solve(
    p: &Problem,
    init: &[f64],
    bindings: &Bindings,
    t_end: f64,
    steps: usize,
) -> Result<NumericTrajectory, NumericError> {
    let sys = System::new(p)?;
    if steps == 0 {
        return Err(NumericError::Invalid(
            "at least one step is required".into(),
        ));
    }
    if init.len() != sys.unknowns.len() {
        return Err(NumericError::Invalid(alloc::format!(
            "expected {} initial values, got {}",
            sys.unknowns.len(),
            init.len()
        )));
    }
    let a = to_f64(p.point());
    if t_end <= a {
        return Err(NumericError::Invalid(
            "t_end must exceed the expansion point".into(),
        ));
    }
    let h = (t_end - a) / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(a);
    states.push(init.to_vec());
    for n in 0..steps {
        let t = a + n as f64 * h;
        let next = sys.step(t, &states[n], h, bindings)?;
        times.push(a + (n + 1) as f64 * h);
        states.push(next);
    }
    Ok(NumericTrajectory {
        unknowns: sys.unknowns,
        times,
        states,
        step: h,
        method: "rk4",
    })
}

/// Numeric evaluation of a truncated series.
pub trait SeriesEval {
    fn eval_at(&self, unknown: &Symbol, t: f64, bindings: &Bindings) -> Result<f64, NumericError>;
    fn order(&self) -> usize;
}

fn missing(unknown: &Symbol) -> NumericError {
    NumericError::Invalid(alloc::format!("series has no component `{unknown}`"))
}

impl SeriesEval for SeriesSolution {
    fn eval_at(&self, unknown: &Symbol, t: f64, bindings: &Bindings) -> Result<f64, NumericError> {
        let c = self
            .component(unknown.as_str())
            .ok_or_else(|| missing(unknown))?;
        let dt = t - to_f64(&self.point);
        let mut acc = 0.0;
        for (n, k) in c.coefficients.iter().enumerate().rev() {
            let b = eval_bound(k, bindings, &[])? / to_f64(&factorial(n));
            acc = acc * dt + b;
        }
        Ok(acc)
    }

    fn order(&self) -> usize {
        self.order
    }
}

impl SeriesEval for GeneralizedSeries {
    fn eval_at(&self, unknown: &Symbol, t: f64, bindings: &Bindings) -> Result<f64, NumericError> {
        let c = self
            .components
            .iter()
            .find(|c| &c.unknown == unknown)
            .ok_or_else(|| missing(unknown))?;
        let time = self.substitution.time();
        let basis = eval_bound(&self.basis(), bindings, &[(time, t)])?;
        let mut acc = 0.0;
        for b in c.coefficients.iter().rev() {
            acc = acc * basis + eval_bound(b, bindings, &[])?;
        }
        Ok(acc)
    }

    fn order(&self) -> usize {
        self.order
    }
}

impl crate::series::FourierSeries {
    /// Real and imaginary parts of component `i` at time `t`.
    pub fn eval_complex(
        &self,
        i: usize,
        t: f64,
        bindings: &Bindings,
    ) -> Result<(f64, f64), NumericError> {
        let omega = eval_bound(&self.omega, bindings, &[])?;
        let dt = t - to_f64(&self.point);
        let (mut re, mut im) = (0.0, 0.0);
        for (k, z) in self.components[i].harmonics.iter().enumerate() {
            let (x, y) = (
                eval_bound(&z.re, bindings, &[])?,
                eval_bound(&z.im, bindings, &[])?,
            );
            // (x + iy) e^{-ikωΔt}
            let phase = -(k as f64) * omega * dt;
            let (s, c) = Float::sin_cos(phase);
            re += x * c - y * s;
            im += x * s + y * c;
        }
        Ok((re, im))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub t: f64,
    pub series_value: f64,
    pub reference_value: f64,
    pub abs_err: f64,
    /// `abs_err / |reference|`, or `abs_err` where the reference is zero.
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub unknown: Symbol,
    pub rows: Vec<ComparisonRow>,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub order: usize,
    pub steps: usize,
    pub step: f64,
}

/// Evaluates `series` and an RK4 reference (`steps` uniform steps up to the
/// last sample) at every sample. Samples off the grid are reached by one
/// shortened step from the preceding grid point.
pub fn compare_series_numeric(
    series: &dyn SeriesEval,
    p: &Problem,
    unknown: &Symbol,
    bindings: &Bindings,
    samples: &[f64],
    tol: f64,
    steps: usize,
) -> Result<ComparisonReport, NumericError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(NumericError::Invalid("tolerance must be positive".into()));
    }
    let a = to_f64(p.point());
    if samples.iter().any(|&t| !t.is_finite() || t < a) {
        return Err(NumericError::Invalid(
            "samples must lie at or after the expansion point".into(),
        ));
    }
    let sys = System::new(p)?;
    let idx = sys
        .unknowns
        .iter()
        .position(|u| u == unknown)
        .ok_or_else(|| missing(unknown))?;
    let init = numeric_initial(p, bindings)?;
    let t_end = samples.iter().copied().fold(a, f64::max);
    let traj = if t_end > a {
        Some(rk4_solve(p, &init, bindings, t_end, steps)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(samples.len());
    for &t in samples {
        let reference = match &traj {
            None => init[idx],
            Some(tr) => {
                let pos = (t - a) / tr.step;
                let n = Float::round(pos);
                if Float::abs(pos - n) < 1e-9 {
                    tr.states[n as usize][idx]
                } else {
                    let n = Float::floor(pos) as usize;
                    let h = t - tr.times[n];
                    sys.step(tr.times[n], &tr.states[n], h, bindings)?[idx]
                }
            }
        };
        let value = series.eval_at(unknown, t, bindings)?;
        let abs_err = Float::abs(value - reference);
        let rel_err = if reference != 0.0 {
            abs_err / Float::abs(reference)
        } else {
            abs_err
        };
        rows.push(ComparisonRow {
            t,
            series_value: value,
            reference_value: reference,
            abs_err,
            rel_err,
        });
    }
    let max_abs_err = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(ComparisonReport {
        unknown: unknown.clone(),
        pass: max_rel_err <= tol && rows.iter().all(|r| r.rel_err.is_finite()),
        rows,
        max_abs_err,
        max_rel_err,
        tolerance: tol,
        order: series.order(),
        steps,
        step: traj.map_or(0.0, |t| t.step),
    })
}
