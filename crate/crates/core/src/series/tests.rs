use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::expr::{parse, parse_with, rat, ratio, ParseOptions};
use crate::problem::{Equation, ProblemKind};

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

fn ex(s: &str) -> Expr {
    parse(s).unwrap()
}

fn ode(rhs: &str, init: &str) -> Problem {
    let t = sym("t");
    let rhs = parse_with(
        rhs,
        &ParseOptions {
            time: Some(t.clone()),
        },
    )
    .unwrap();
    Problem::new(
        ProblemKind::Ode,
        t,
        rat(0),
        vec![Equation {
            unknown: sym("u"),
            order: 1,
            rhs,
            initial: vec![ex(init)],
        }],
        Vec::new(),
    )
    .unwrap()
}

fn pde3() -> Problem {
    let t = sym("t");
    let rhs = parse_with(
        "u(x)*D(u,t,x)",
        &ParseOptions {
            time: Some(t.clone()),
        },
    )
    .unwrap();
    Problem::new(
        ProblemKind::Pde,
        t,
        rat(0),
        vec![Equation {
            unknown: sym("u"),
            order: 2,
            rhs,
            initial: vec![ex("h(x)"), ex("g(x)")],
        }],
        Vec::new(),
    )
    .unwrap()
}

const PLAIN: [&str; 5] = [
    "h(x)",
    "g(x)",
    "h(x)*g'",
    "h(x)^2*g'' + g'*(h(x)*h' + g(x))",
    "h(x)*h'^2*g' + 3*h(x)^2*h'*g'' + h(x)^2*h''*g' + h(x)^3*D(g,x,x,x) \
     + 2*h'*g(x)*g' + 2*h(x)*g'^2 + 3*h(x)*g(x)*g''",
];

#[test]
fn pde_taylor_fixture() {
    let sol = solve(&pde3(), 4).unwrap();
    assert_eq!(sol.components.len(), 1);
    let u = &sol.components[0];
    for (k, want) in u.coefficients.iter().zip(PLAIN) {
        assert_eq!(k, &ex(want));
    }
}

#[test]
fn pde_resummed_fixture() {
    let p = ex("p");
    let sub = Substitution::exponential(&sym("t"), &sym("tau"), &p, &rat(0)).unwrap();
    let gs = resummed_series(&pde3(), &sub, 4).unwrap();
    assert_eq!(gs.tau0, rat(1));
    let want = [
        "h(x)",
        "-g(x)/p",
        "(h(x)*g' + g(x)*p)/(2*p^2)",
        "(-h(x)^2*g'' + (-g(x) - 3*h(x)*p - h(x)*h')*g' - 2*g(x)*p^2)/(6*p^3)",
        "(D(g,x,x,x)*h(x)^3 + (3*h(x)*g(x) + 6*h(x)^2*p + 3*h(x)^2*h')*g'' \
         + h(x)^2*h''*g' + 2*h(x)*g'^2 + (h(x)*h'^2 + (6*h(x)*p + 2*g(x))*h' \
         + 11*h(x)*p^2 + 6*g(x)*p)*g' + 6*g(x)*p^3)/(24*p^4)",
    ];
    for (n, (b, w)) in gs.components[0].coefficients.iter().zip(want).enumerate() {
        assert_eq!(b, &ex(w), "b_{n}");
    }
    let back = expand_generalized(&gs, 4).unwrap();
    let plain = solve(&pde3(), 4).unwrap();
    assert!(mismatches(&back, &plain).is_empty());
}

#[test]
fn numeric_rate_is_consistent() {
    for p in [rat(1), rat(2), ratio(3, 2)] {
        let sub =
            Substitution::exponential(&sym("t"), &sym("tau"), &Expr::rational(p), &rat(0)).unwrap();
        let gs = resummed_series(&pde3(), &sub, 4).unwrap();
        let back = expand_generalized(&gs, 4).unwrap();
        assert_eq!(back, solve(&pde3(), 4).unwrap());
    }
}

#[test]
fn mobius_is_consistent() {
    let sub = Substitution::mobius(&sym("t"), &sym("tau"), &ex("p"), &rat(0)).unwrap();
    let gs = resummed_series(&pde3(), &sub, 3).unwrap();
    let back = expand_generalized(&gs, 3).unwrap();
    assert!(mismatches(&back, &solve(&pde3(), 3).unwrap()).is_empty());
}

#[test]
fn ode_examples() {
    let s = solve(&ode("0", "c"), 4).unwrap();
    assert_eq!(
        s.components[0].coefficients,
        vec![
            ex("c"),
            Expr::zero(),
            Expr::zero(),
            Expr::zero(),
            Expr::zero()
        ]
    );
    let s = solve(&ode("u^2", "c"), 3).unwrap();
    assert_eq!(
        s.components[0].coefficients,
        vec![ex("c"), ex("c^2"), ex("2*c^3"), ex("6*c^4")]
    );
    assert_eq!(s.polynomial(0), ex("c + c^2*t + c^3*t^2 + c^4*t^3"));
}

#[test]
fn identity_resummation_matches_taylor() {
    let p = pde3();
    let gs = resummed_series(&p, &Substitution::identity(&sym("t")), 4).unwrap();
    let plain = solve(&p, 4).unwrap();
    for (n, (b, k)) in gs.components[0]
        .coefficients
        .iter()
        .zip(&plain.components[0].coefficients)
        .enumerate()
    {
        assert_eq!(b, &k.scale(&factorial(n).recip()));
    }
    assert_eq!(expand_generalized(&gs, 4).unwrap(), plain);
}

#[test]
fn decay_terminates() {
    let sub = Substitution::exponential(&sym("t"), &sym("tau"), &Expr::one(), &rat(0)).unwrap();
    let gs = resummed_series(&ode("-u", "c"), &sub, 6).unwrap();
    let b = &gs.components[0].coefficients;
    assert_eq!(b[0], ex("c"));
    assert_eq!(b[1], ex("c"));
    assert!(b[2..].iter().all(Expr::is_zero));
    assert_eq!(gs.truncated(0), ex("c*exp(-t)"));
    assert!(matches!(
        expand_generalized(&gs, 7),
        Err(ProblemError::OrderTooHigh { .. })
    ));
}

fn manual(coefs: &[&str]) -> GeneralizedSeries {
    let sub = Substitution::exponential(&sym("t"), &sym("tau"), &ex("p"), &rat(0)).unwrap();
    GeneralizedSeries {
        substitution: sub,
        point: rat(0),
        tau0: rat(1),
        order: coefs.len() - 1,
        components: vec![Component {
            unknown: sym("u"),
            coefficients: coefs.iter().map(|s| ex(s)).collect(),
        }],
    }
}

#[test]
fn fourier_examples() {
    let omega = ex("omega");
    let f = fourier_form(&manual(&["c", "c"]), &omega).unwrap();
    let h = &f.components[0].harmonics;
    assert!(h[0].re.is_zero() && h[0].im.is_zero());
    assert_eq!(h[1].re, ex("c"));
    assert!(h[1].im.is_zero());

    let f = fourier_form(&manual(&["b0", "b1"]), &omega).unwrap();
    let h = &f.components[0].harmonics;
    assert_eq!(h[0].re, ex("b0 - b1"));
    assert_eq!(h[1].re, ex("b1"));

    let f = fourier_form(&manual(&["7"]), &omega).unwrap();
    assert_eq!(f.components[0].harmonics.len(), 1);

    // -g/p at p = iω is i g/ω
    let f = fourier_form(&manual(&["h", "-g/p"]), &omega).unwrap();
    let h = &f.components[0].harmonics;
    assert_eq!(h[1].im, ex("g/omega"));
    assert_eq!(h[0].im, ex("-g/omega"));

    let mut gs = manual(&["c"]);
    gs.substitution = Substitution::mobius(&sym("t"), &sym("tau"), &ex("p"), &rat(0)).unwrap();
    assert!(matches!(
        fourier_form(&gs, &omega),
        Err(ProblemError::NotExponential)
    ));
}
