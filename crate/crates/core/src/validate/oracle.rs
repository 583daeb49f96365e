use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::expr::{simplify, Atom, Expr, ExprError, FuncAtom, Symbol, TimeDeriv};
use crate::problem::{Problem, ProblemError};
use crate::series::{Component, SeriesSolution};

/// Taylor coefficients of every unknown, obtained without the generator:
/// the equation `u^(n) = F` is differentiated `j` times in `t` by the
/// chain rule, evaluated at `t = a`, and the already known lower
/// derivatives are substituted. Works on higher-order problems directly.
pub fn oracle_coefficients(p: &Problem, order: usize) -> Result<SeriesSolution, ProblemError> {
    let t = p.time().clone();
    let a = Expr::rational(p.point().clone());
    let unknowns: Vec<Symbol> = p.unknowns().cloned().collect();
    let index = |name: &Symbol| unknowns.iter().position(|u| u == name);

    // Mixed-order systems need the higher-order unknowns a little further.
    let limit = order + p.time_order() as usize;
    // values[i][m] = m-th time derivative of unknown i at t = a
    let mut values: Vec<Vec<Expr>> = p
        .equations()
        .iter()
        .map(|e| e.initial.iter().take(limit + 1).cloned().collect())
        .collect();
    let mut current: Vec<Expr> = p.equations().iter().map(|e| e.rhs.clone()).collect();
    let mut space: BTreeMap<(usize, usize, u32), Expr> = BTreeMap::new();

    let mut j = 0usize;
    loop {
        let mut progressed = false;
        for (i, eq) in p.equations().iter().enumerate() {
            let m = eq.order as usize + j;
            if m > limit {
                continue;
            }
            progressed = true;
            let at_a = current[i]
                .substitute_symbol(&t, &a)?
                .map_atoms(&mut |atom: &Atom| {
                    let Atom::Func(f) = atom else { return Ok(None) };
                    let Some(v) = index(&f.name) else {
                        return Ok(None);
                    };
                    let tm = f.time_order() as usize;
                    let key = (v, tm, f.order);
                    if let Some(e) = space.get(&key) {
                        return Ok(Some(e.clone()));
                    }
                    let mut e = values[v][tm].clone();
                    for _ in 0..f.order {
                        e = e.total_diff_x_in(None)?;
                    }
                    space.insert(key, e.clone());
                    Ok(Some(e))
                })?;
            values[i].push(simplify(&at_a));
        }
        if !progressed {
            break;
        }
        for c in current.iter_mut() {
            *c = time_derivative(c, &t, &unknowns)?;
        }
        j += 1;
    }
    let components = unknowns
        .into_iter()
        .zip(values)
        .map(|(unknown, mut coefficients)| {
            coefficients.truncate(order + 1);
            Component {
                unknown,
                coefficients,
            }
        })
        .collect();
    Ok(SeriesSolution {
        time: t,
        point: p.point().clone(),
        order,
        components,
    })
}

/// `d/dt` treating unknown atoms as functions of time.
fn time_derivative(e: &Expr, t: &Symbol, unknowns: &[Symbol]) -> Result<Expr, ExprError> {
    e.derive_with(&mut |a: &Atom| match a {
        Atom::Sym(s) if s == t => Ok(Some(Expr::one())),
        Atom::Func(f) if unknowns.contains(&f.name) => Ok(Some(Expr::func_atom(FuncAtom {
            name: f.name.clone(),
            order: f.order,
            time: Some(TimeDeriv {
                var: t.clone(),
                order: f.time_order() + 1,
            }),
        }))),
        _ => Ok(None),
    })
}
