use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::expr::{is_zero_rational, parse, parse_with, rat, ParseOptions};

fn t() -> Symbol {
    Symbol::new("t")
}

fn tau() -> Symbol {
    Symbol::new("tau")
}

fn ex(s: &str, time: &Symbol) -> Expr {
    parse_with(
        s,
        &ParseOptions {
            time: Some(time.clone()),
        },
    )
    .unwrap()
}

fn problem(kind: ProblemKind, time: Symbol, eqs: &[(&str, u32, &str, &[&str])]) -> Problem {
    let equations = eqs
        .iter()
        .map(|(u, n, rhs, init)| Equation {
            unknown: Symbol::new(u),
            order: *n,
            rhs: ex(rhs, &time),
            initial: init.iter().map(|s| parse(s).unwrap()).collect(),
        })
        .collect();
    Problem::new(kind, time, rat(0), equations, Vec::new()).unwrap()
}

fn pde3() -> Problem {
    problem(
        ProblemKind::Pde,
        t(),
        &[("u", 2, "u(x)*D(u,t,x)", &["h(x)", "g(x)"])],
    )
}

fn same(a: &Expr, b: &Expr) -> bool {
    is_zero_rational(&(a - b))
}

#[test]
fn pde_auxiliary_equation() {
    let p = Expr::symbol("p");
    let sub = Substitution::exponential(&t(), &tau(), &p, &rat(0)).unwrap();
    let aux = pde3().change_time_variable(&sub).unwrap();
    assert_eq!(aux.time(), &tau());
    assert_eq!(aux.point(), &rat(1));
    let eq = &aux.equations()[0];
    let expected = ex("-u(x)*D(u,tau,x)/(p*tau) - D(u,tau)/tau", &tau());
    assert!(same(&eq.rhs, &expected), "{}", eq.rhs);
    assert_eq!(eq.initial[0], parse("h(x)").unwrap());
    assert!(same(&eq.initial[1], &parse("-g(x)/p").unwrap()));
    assert_eq!(aux.params(), &[Symbol::new("p")]);
}

#[test]
fn identity_is_a_no_op() {
    let p = pde3();
    let q = p
        .change_time_variable(&Substitution::identity(&t()))
        .unwrap();
    assert_eq!(p, q);
}

#[test]
fn decay_under_exponential_time() {
    let p = problem(ProblemKind::Ode, t(), &[("u", 1, "-u", &["c"])]);
    let sub = Substitution::exponential(&t(), &tau(), &Expr::one(), &rat(0)).unwrap();
    let q = p.change_time_variable(&sub).unwrap();
    let eq = &q.equations()[0];
    assert!(same(&eq.rhs, &ex("u(x)/tau", &tau())), "{}", eq.rhs);
    assert_eq!(eq.initial, vec![Expr::symbol("c")]);
}

#[test]
fn change_then_invert_round_trips() {
    let p = Expr::symbol("p");
    for sub in [
        Substitution::exponential(&t(), &tau(), &p, &rat(0)).unwrap(),
        Substitution::mobius(&t(), &tau(), &p, &rat(0)).unwrap(),
    ] {
        let orig = pde3();
        let back = orig
            .change_time_variable(&sub)
            .unwrap()
            .change_time_variable(&sub.inverted())
            .unwrap();
        assert_eq!(back.time(), orig.time());
        assert_eq!(back.point(), orig.point());
        for (a, b) in orig.equations().iter().zip(back.equations()) {
            assert!(same(&a.rhs, &b.rhs), "{} vs {}", a.rhs, b.rhs);
            for (x, y) in a.initial.iter().zip(&b.initial) {
                assert!(same(x, y));
            }
        }
    }
}

#[test]
fn reduction_introduces_velocity() {
    let r = pde3().reduce_to_first_order().unwrap();
    assert!(r.is_first_order());
    let eqs = r.equations();
    assert_eq!(eqs.len(), 2);
    assert_eq!(eqs[0].unknown, Symbol::new("u"));
    assert_eq!(eqs[0].rhs, parse("u_t(x)").unwrap());
    assert_eq!(eqs[1].unknown, Symbol::new("u_t"));
    assert_eq!(eqs[1].rhs, parse("u(x)*u_t'").unwrap());
    assert_eq!(eqs[1].initial, vec![parse("g(x)").unwrap()]);
}

#[test]
fn validation_errors() {
    let mk = |kind, order, rhs: &str, init: &[&str]| {
        Problem::new(
            kind,
            t(),
            rat(0),
            vec![Equation {
                unknown: Symbol::new("u"),
                order,
                rhs: ex(rhs, &t()),
                initial: init.iter().map(|s| parse(s).unwrap()).collect(),
            }],
            Vec::new(),
        )
    };
    assert!(matches!(
        mk(ProblemKind::Pde, 2, "u(x)", &["h(x)"]),
        Err(ProblemError::MissingInitialCondition { order: 1, .. })
    ));
    assert!(matches!(
        mk(ProblemKind::Pde, 1, "D(u,t,x)", &["h(x)"]),
        Err(ProblemError::TimeDerivativeInRhs { .. })
    ));
    assert!(matches!(
        mk(ProblemKind::Ode, 1, "u'", &["1"]),
        Err(ProblemError::SpaceDerivativeInOde(_))
    ));
    assert!(matches!(
        mk(ProblemKind::Ode, 1, "u", &["1", "2"]),
        Err(ProblemError::DimensionMismatch(_))
    ));
    assert!(matches!(
        mk(ProblemKind::Ode, 1, "u", &["t"]),
        Err(ProblemError::Invalid(_))
    ));
}

#[test]
fn bare_unknown_symbols_are_promoted() {
    let p = problem(ProblemKind::Ode, t(), &[("u", 1, "u^2", &["1"])]);
    assert_eq!(p.equations()[0].rhs, parse("u(x)^2").unwrap());
}

#[test]
fn substitution_checks() {
    let p = Expr::symbol("p");
    let m = Substitution::mobius(&t(), &tau(), &p, &rat(0)).unwrap();
    assert_eq!(m.image_of(&rat(0)).unwrap(), rat(0));
    let e = Substitution::exponential(&t(), &tau(), &p, &rat(2)).unwrap();
    assert_eq!(e.image_of(&rat(2)).unwrap(), rat(1));
    assert!(matches!(
        Substitution::custom(&t(), &tau(), parse("2*t").unwrap(), parse("tau").unwrap()),
        Err(ProblemError::NotInverse)
    ));
    assert!(Substitution::custom(
        &t(),
        &tau(),
        parse("2*t+1").unwrap(),
        parse("(tau-1)/2").unwrap()
    )
    .is_ok());
    assert!(Substitution::exponential(&t(), &tau(), &Expr::zero(), &rat(0)).is_err());
    assert!(matches!(
        e.image_of(&rat(0)),
        Err(ProblemError::NonRationalPoint(_))
    ));
}
