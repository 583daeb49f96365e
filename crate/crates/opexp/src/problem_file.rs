//! Line-oriented problem files and substitution files.
//!
//! ```text
//! kind = pde
//! unknown = u
//! tvar = t
//! a = 0
//! eq: D(u,t,t) = u*D(u,t,x)
//! init: u|a = h
//! init: D(u,t)|a = g
//! param = p
//! ```

use std::collections::BTreeMap;

use opexp_core::expr::{
    parse, parse_with, Atom, Expr, ExprError, FuncAtom, ParseOptions, Rational, Symbol, SPACE_VAR,
};
use opexp_core::problem::{Equation, Problem, ProblemError, ProblemKind, Substitution};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Missing(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

fn line_err(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Line {
        line,
        message: message.into(),
    }
}

/// Parses `text` found at `column` (1-based) of file line `line`.
fn parse_at(
    text: &str,
    opts: &ParseOptions,
    line: usize,
    column: usize,
) -> Result<Expr, LoadError> {
    parse_with(text, opts).map_err(|e| match e {
        ExprError::Syntax {
            line: l,
            column: c,
            message,
        }
        | ExprError::UnknownDerivative {
            line: l,
            column: c,
            message,
        } => LoadError::Syntax {
            line: line + l - 1,
            column: if l == 1 { column + c - 1 } else { c },
            message,
        },
        other => line_err(line, other.to_string()),
    })
}

pub fn parse_rational(text: &str) -> Option<Rational> {
    parse(text.trim()).ok().and_then(|e| e.to_rational())
}

struct Entry<'a> {
    line: usize,
    // 1-based column of `body` within the line
    column: usize,
    body: &'a str,
}

type Entries<'a> = (BTreeMap<String, Entry<'a>>, Vec<Entry<'a>>, Vec<Entry<'a>>);

/// Splits `text` into key/value entries, dropping comments and blanks.
fn entries(text: &str) -> Result<Entries<'_>, LoadError> {
    let mut keys = BTreeMap::new();
    let mut eqs = Vec::new();
    let mut inits = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        let trimmed = content.trim_start();
        let offset = |s: &str| content.len() - s.len() + 1;
        if let Some(rest) = trimmed.strip_prefix("eq:") {
            eqs.push(Entry {
                line,
                column: offset(rest),
                body: rest,
            });
        } else if let Some(rest) = trimmed.strip_prefix("init:") {
            inits.push(Entry {
                line,
                column: offset(rest),
                body: rest,
            });
        } else if let Some((k, v)) = trimmed.split_once('=') {
            let key = k.trim().to_string();
            if keys.contains_key(&key) {
                return Err(line_err(line, format!("duplicate key `{key}`")));
            }
            keys.insert(
                key,
                Entry {
                    line,
                    column: offset(v),
                    body: v,
                },
            );
        } else {
            return Err(LoadError::Syntax {
                line,
                column: lead + 1,
                message: "expected `key = value`, `eq:` or `init:`".into(),
            });
        }
    }
    Ok((keys, eqs, inits))
}

fn names(list: &str) -> Vec<Symbol> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Symbol::new)
        .collect()
}

/// `D(u, t, t, ...)` or a bare `u`: the unknown and its time order.
fn derivative_head(text: &str, time: &Symbol) -> Option<(Symbol, u32)> {
    let text = text.trim();
    if let Some(inner) = text.strip_prefix("D(").and_then(|s| s.strip_suffix(')')) {
        let mut parts = inner.split(',').map(str::trim);
        let name = parts.next()?;
        let mut order = 0;
        for v in parts {
            if v != time.as_str() {
                return None;
            }
            order += 1;
        }
        Some((Symbol::new(name), order))
    } else if !text.is_empty() && text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Some((Symbol::new(text), 0))
    } else {
        None
    }
}

/// Reads and validates a problem file.
pub fn load_problem(text: &str) -> Result<Problem, LoadError> {
    let (keys, eqs, inits) = entries(text)?;
    for k in keys.keys() {
        if !["kind", "unknown", "unknowns", "tvar", "a", "param"].contains(&k.as_str()) {
            return Err(line_err(keys[k].line, format!("unknown key `{k}`")));
        }
    }
    let kind = match keys.get("kind").map(|e| e.body.trim()) {
        Some("ode") => ProblemKind::Ode,
        Some("pde") => ProblemKind::Pde,
        Some(other) => {
            return Err(line_err(
                keys["kind"].line,
                format!("kind must be `ode` or `pde`, not `{other}`"),
            ))
        }
        None => return Err(LoadError::Missing("missing `kind`".into())),
    };
    let unknowns = match (keys.get("unknown"), keys.get("unknowns")) {
        (Some(e), None) | (None, Some(e)) => names(e.body),
        (Some(_), Some(e)) => return Err(line_err(e.line, "give either `unknown` or `unknowns`")),
        (None, None) => return Err(LoadError::Missing("missing `unknown`".into())),
    };
    if unknowns.is_empty() {
        return Err(LoadError::Missing("no unknowns declared".into()));
    }
    let time = keys
        .get("tvar")
        .map(|e| Symbol::new(e.body.trim()))
        .unwrap_or_else(|| Symbol::new("t"));
    let point = match keys.get("a") {
        Some(e) => parse_rational(e.body).ok_or_else(|| {
            line_err(
                e.line,
                format!("`a` must be a rational number, not `{}`", e.body.trim()),
            )
        })?,
        None => Rational::from_integer(0.into()),
    };
    let params = keys.get("param").map(|e| names(e.body)).unwrap_or_default();
    let opts = ParseOptions {
        time: Some(time.clone()),
    };

    let mut rhs: BTreeMap<Symbol, (u32, Expr, usize)> = BTreeMap::new();
    for e in &eqs {
        let (lhs, body) = e
            .body
            .split_once('=')
            .ok_or_else(|| line_err(e.line, "equation needs `=`"))?;
        let (u, order) = derivative_head(lhs, &time)
            .filter(|(_, k)| *k > 0)
            .ok_or_else(|| {
                line_err(
                    e.line,
                    format!("left side must be `D({}, {}, ...)`", unknowns[0], time),
                )
            })?;
        if !unknowns.contains(&u) {
            return Err(line_err(e.line, format!("`{u}` is not a declared unknown")));
        }
        if rhs.contains_key(&u) {
            return Err(line_err(e.line, format!("second equation for `{u}`")));
        }
        let expr = parse_at(body, &opts, e.line, e.column + lhs.len() + 1)?;
        rhs.insert(u, (order, expr, e.line));
    }

    let mut data: BTreeMap<(Symbol, u32), Expr> = BTreeMap::new();
    for e in &inits {
        let (lhs, body) = e
            .body
            .split_once('=')
            .ok_or_else(|| line_err(e.line, "initial condition needs `=`"))?;
        let (head, at) = lhs
            .split_once('|')
            .ok_or_else(|| line_err(e.line, "initial condition needs `|a`"))?;
        let at = at.trim();
        if at != "a" && parse_rational(at).as_ref() != Some(&point) {
            return Err(line_err(
                e.line,
                format!("initial condition must be taken at a = {point}"),
            ));
        }
        let (u, k) = derivative_head(head, &time)
            .ok_or_else(|| line_err(e.line, "left side must be `u|a` or `D(u, t, ...)|a`"))?;
        if !unknowns.contains(&u) {
            return Err(line_err(e.line, format!("`{u}` is not a declared unknown")));
        }
        let mut expr = parse_at(
            body,
            &ParseOptions::default(),
            e.line,
            e.column + lhs.len() + 1,
        )?;
        if kind == ProblemKind::Pde {
            expr =
                functions_of_x(&expr, &params).map_err(|err| line_err(e.line, err.to_string()))?;
        }
        if data.insert((u.clone(), k), expr).is_some() {
            return Err(line_err(
                e.line,
                format!("repeated initial condition for `{u}`"),
            ));
        }
    }

    let mut equations = Vec::new();
    for u in &unknowns {
        let (order, expr, _) = rhs
            .remove(u)
            .ok_or_else(|| LoadError::Missing(format!("missing equation for `{u}`")))?;
        let mut initial = Vec::new();
        for k in 0..order {
            match data.remove(&(u.clone(), k)) {
                Some(e) => initial.push(e),
                None => {
                    return Err(ProblemError::MissingInitialCondition {
                        unknown: u.as_str().into(),
                        order: k,
                    }
                    .into())
                }
            }
        }
        equations.push(Equation {
            unknown: u.clone(),
            order,
            rhs: expr,
            initial,
        });
    }
    if let Some(((u, k), _)) = data.into_iter().next() {
        return Err(ProblemError::DimensionMismatch(format!(
            "initial condition for derivative {k} of `{u}` exceeds its order"
        ))
        .into());
    }
    Ok(Problem::new(kind, time, point, equations, params)?)
}

/// Bare names other than `x` and parameters become functions of `x`.
fn functions_of_x(e: &Expr, params: &[Symbol]) -> Result<Expr, ExprError> {
    e.map_atoms(&mut |a: &Atom| match a {
        Atom::Sym(s) if s.as_str() != SPACE_VAR && !params.contains(s) => {
            Ok(Some(Expr::func_atom(FuncAtom {
                name: s.clone(),
                order: 0,
                time: None,
            })))
        }
        _ => Ok(None),
    })
}

/// Reads a user-declared substitution:
///
/// ```text
/// var = tau
/// forward = 2*t + 1
/// inverse = (tau - 1)/2
/// ```
pub fn load_substitution(text: &str, time: &Symbol) -> Result<Substitution, LoadError> {
    let (keys, eqs, inits) = entries(text)?;
    if let Some(e) = eqs.first().or(inits.first()) {
        return Err(line_err(e.line, "unexpected entry in a substitution file"));
    }
    let get = |k: &str| {
        keys.get(k)
            .ok_or_else(|| LoadError::Missing(format!("missing `{k}`")))
    };
    let var = Symbol::new(get("var")?.body.trim());
    let f = get("forward")?;
    let i = get("inverse")?;
    let forward = parse_at(f.body, &ParseOptions::default(), f.line, f.column)?;
    let inverse = parse_at(i.body, &ParseOptions::default(), i.line, i.column)?;
    Ok(Substitution::custom(time, &var, forward, inverse)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use opexp_core::expr::rat;

    const PDE3: &str = "\
# showcase
kind = pde
unknown = u
tvar = t
a = 0
eq: D(u,t,t) = u*D(u,t,x)
init: u|a = h
init: D(u,t)|a = g
";

    #[test]
    fn loads_the_showcase_pde() {
        let p = load_problem(PDE3).unwrap();
        assert_eq!(p.kind(), ProblemKind::Pde);
        assert_eq!(p.time_order(), 2);
        let eq = &p.equations()[0];
        assert_eq!(
            eq.initial,
            vec![parse("h(x)").unwrap(), parse("g(x)").unwrap()]
        );
        assert_eq!(eq.rhs.to_source(), "u(x)*D(u,t,x)");
    }

    #[test]
    fn loads_an_ode_system() {
        let p = load_problem(
            "kind = ode\nunknowns = u, v\na = 1/2\neq: D(u,t) = v\neq: D(v,t) = -u + t\ninit: u|a = c1\ninit: v|1/2 = 3\n",
        )
        .unwrap();
        assert_eq!(p.point(), &opexp_core::expr::ratio(1, 2));
        assert_eq!(p.equations()[1].initial[0], Expr::int(3));
        assert_eq!(p.equations()[0].initial[0], Expr::symbol("c1"));
    }

    #[test]
    fn reports_errors() {
        let missing = PDE3.replace("init: D(u,t)|a = g\n", "");
        assert!(matches!(
            load_problem(&missing),
            Err(LoadError::Problem(ProblemError::MissingInitialCondition {
                order: 1,
                ..
            }))
        ));
        let bad = PDE3.replace("u*D(u,t,x)", "u*D(u,t,x");
        match load_problem(&bad) {
            Err(LoadError::Syntax { line, column, .. }) => {
                assert_eq!(line, 6);
                assert!(column > 15, "{column}");
            }
            other => panic!("{other:?}"),
        }
        assert!(load_problem(&PDE3.replace("D(u,t,x)", "D(u,y)")).is_err());
        assert!(matches!(
            load_problem("kind = sde\n"),
            Err(LoadError::Line { line: 1, .. })
        ));
        let extra = format!("{PDE3}init: D(u,t,t)|a = 0\n");
        assert!(matches!(
            load_problem(&extra),
            Err(LoadError::Problem(ProblemError::DimensionMismatch(_)))
        ));
    }

    #[test]
    fn reads_substitutions() {
        let t = Symbol::new("t");
        let s =
            load_substitution("var = tau\nforward = 2*t + 1\ninverse = (tau - 1)/2\n", &t).unwrap();
        assert_eq!(s.image_of(&rat(0)).unwrap(), rat(1));
        assert!(load_substitution("var = tau\nforward = 2*t\ninverse = tau\n", &t).is_err());
    }
}
