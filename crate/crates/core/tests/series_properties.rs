use opexp_core::expr::{
    is_zero_rational, parse, parse_with, rat, ratio, taylor_expand, Atom, Expr, ParseOptions,
    Symbol,
};
use opexp_core::problem::{Equation, Problem, ProblemKind, Substitution};
use opexp_core::series::{
    expand_generalized, fourier_form, mismatches, resummed_series, solve, taylor_coefficients,
};
use opexp_core::validate::{oracle_coefficients, Bindings};

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

fn problem(kind: ProblemKind, eqs: &[(&str, u32, &str, &[&str])]) -> Problem {
    let t = sym("t");
    let opts = ParseOptions {
        time: Some(t.clone()),
    };
    let equations = eqs
        .iter()
        .map(|(u, n, rhs, init)| Equation {
            unknown: sym(u),
            order: *n,
            rhs: parse_with(rhs, &opts).unwrap(),
            initial: init.iter().map(|s| parse(s).unwrap()).collect(),
        })
        .collect();
    Problem::new(kind, t, rat(0), equations, Vec::new()).unwrap()
}

fn ode(eqs: &[(&str, u32, &str, &[&str])]) -> Problem {
    problem(ProblemKind::Ode, eqs)
}

fn bank() -> Vec<Problem> {
    vec![
        ode(&[("u", 1, "u", &["c"])]),
        ode(&[("u", 1, "-2*u + 1", &["c"])]),
        ode(&[("u", 1, "t*u", &["c"])]),
        ode(&[("u", 1, "u^2", &["c"])]),
        ode(&[("u", 1, "u*(1 - u)", &["c"])]),
        ode(&[("u", 1, "t^2 - u", &["1/2"])]),
        ode(&[("u", 1, "u/(1 + t)", &["c"])]),
        ode(&[("u", 1, "v", &["c1"]), ("v", 1, "-u", &["c2"])]),
        ode(&[("u", 1, "u*v", &["c1"]), ("v", 1, "u - v", &["c2"])]),
        ode(&[("u", 2, "-u + t*D(u,t)", &["c0", "c1"])]),
        ode(&[("u", 1, "a*u + b*t", &["c"])]),
        problem(
            ProblemKind::Pde,
            &[("u", 2, "u(x)*D(u,t,x)", &["h(x)", "g(x)"])],
        ),
    ]
}

#[test]
fn generator_matches_oracle() {
    for p in bank() {
        let reduced = p.reduce_to_first_order().unwrap();
        let order = if p.kind() == ProblemKind::Pde { 6 } else { 10 };
        let gen = taylor_coefficients(&reduced, order).unwrap();
        let oracle = oracle_coefficients(&reduced, order).unwrap();
        assert!(
            mismatches(&gen, &oracle).is_empty(),
            "{:?}",
            p.equations()[0].rhs
        );
        // the oracle also accepts the unreduced problem
        let direct = oracle_coefficients(&p, order).unwrap();
        assert!(mismatches(&solve(&p, order).unwrap(), &direct).is_empty());
    }
}

#[test]
fn truncated_series_leaves_small_residual() {
    let t = sym("t");
    for p in bank()
        .into_iter()
        .filter(|p| p.kind() == ProblemKind::Ode && p.is_first_order())
    {
        let n = 6;
        let s = solve(&p, n).unwrap();
        let polys: Vec<(Symbol, Expr)> = s
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.unknown.clone(), s.polynomial(i)))
            .collect();
        for (i, eq) in p.equations().iter().enumerate() {
            let rhs = eq
                .rhs
                .map_atoms(&mut |a: &Atom| match a {
                    Atom::Func(f) => Ok(polys
                        .iter()
                        .find(|(u, _)| u == &f.name)
                        .map(|(_, e)| e.clone())),
                    _ => Ok(None),
                })
                .unwrap();
            let residual = polys[i].1.diff(&t) - rhs;
            let coefs = taylor_expand(&residual, &t, p.point(), n - 1).unwrap();
            assert!(
                coefs.iter().all(is_zero_rational),
                "residual of {:?}",
                eq.rhs
            );
        }
    }
}

#[test]
fn resummation_is_consistent_for_any_rate() {
    let t = sym("t");
    let tau = sym("tau");
    let rates = [
        Expr::rational(rat(1)),
        Expr::rational(rat(2)),
        Expr::rational(ratio(3, 2)),
        Expr::symbol("p"),
    ];
    for prob in bank() {
        let n = if prob.kind() == ProblemKind::Pde {
            4
        } else {
            6
        };
        let plain = solve(&prob, n).unwrap();
        for rate in &rates {
            let sub = Substitution::exponential(&t, &tau, rate, &rat(0)).unwrap();
            let gs = resummed_series(&prob, &sub, n).unwrap();
            let back = expand_generalized(&gs, n).unwrap();
            assert!(
                mismatches(&back, &plain).is_empty(),
                "p = {rate} for {:?}",
                prob.equations()[0].rhs
            );
        }
    }
}

#[test]
fn fourier_imaginary_part_is_high_order() {
    let n = 4;
    let prob = ode(&[("u", 1, "-u + u^2/2", &["c"])]);
    let sub =
        Substitution::exponential(&sym("t"), &sym("tau"), &Expr::symbol("p"), &rat(0)).unwrap();
    let gs = resummed_series(&prob, &sub, n).unwrap();
    let fs = fourier_form(&gs, &Expr::symbol("omega")).unwrap();
    let mut points = 0;
    for omega in [0.5, 1.0, 2.0, 3.0] {
        let b: Bindings = [(sym("c"), 0.7), (sym("omega"), omega)]
            .into_iter()
            .collect();
        let mut ratios = Vec::new();
        for k in 0..5 {
            let t = 0.04 / f64::powi(2.0, k);
            let (_, im) = fs.eval_complex(0, t, &b).unwrap();
            ratios.push(im.abs() / t.powi(n as i32 + 1));
            points += 1;
        }
        // an O(t^N) imaginary part would double the ratio at each halving
        let growth = ratios[4] / ratios[3];
        assert!(ratios[4] < 1e-3 || growth < 1.25, "ω = {omega}: {ratios:?}");
    }
    assert_eq!(points, 20);
}
