use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::expr::{parse, parse_with, rat, ParseOptions};
use crate::problem::Equation;

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

fn point(fields: &[(&str, &str)]) -> Generator {
    let fields = fields
        .iter()
        .map(|(c, f)| (sym(c), parse(f).unwrap()))
        .collect();
    Generator::new(Derivation::new(JetKind::Point, fields), sym("s"), true)
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
            initial: vec![parse(init).unwrap()],
        }],
        Vec::new(),
    )
    .unwrap()
}

#[test]
fn apply_examples() {
    let d = point(&[("c", "c")]);
    assert!(d.apply(&Expr::int(7)).is_zero());
    assert_eq!(d.apply(&parse("c^2").unwrap()), parse("2*c^2").unwrap());
    let d = point(&[("c", "s*c")]);
    assert_eq!(d.apply(&parse("s*c").unwrap()), parse("s^2*c + c").unwrap());
    for k in 1..=5 {
        let sk = Expr::symbol("s").pow(k).unwrap();
        let expected = Expr::symbol("s").pow(k - 1).unwrap().scale(&rat(k as i64));
        assert_eq!(d.apply(&sk), expected);
    }
}

#[test]
fn ode_generators_rename_time() {
    let g = ode_generator(&ode("u", "c")).unwrap();
    assert_eq!(g.derivation().targets(), &[sym("c")]);
    assert_eq!(g.derivation().coefficient(0, 0), parse("c").unwrap());
    let g = ode_generator(&ode("t*u", "c")).unwrap();
    assert_eq!(g.derivation().coefficient(0, 0), parse("s*c").unwrap());
    assert!(g.includes_shift());
}

#[test]
fn numeric_initial_data_get_placeholder_jets() {
    let g = ode_generator(&ode("u^2", "1/3")).unwrap();
    let c = g.jet(0);
    assert_eq!(c, Expr::symbol("c_u"));
    let k1 = g.restrict(&g.apply(&c)).unwrap();
    assert_eq!(k1, Expr::rational(crate::expr::ratio(1, 9)));
}

#[test]
fn functional_prolongation() {
    let d = Derivation::new(
        JetKind::Functional,
        vec![(sym("c"), parse("c(x)*c'").unwrap())],
    );
    assert_eq!(d.apply(&parse("c(x)").unwrap()), parse("c(x)*c'").unwrap());
    assert_eq!(
        d.apply(&parse("c'").unwrap()),
        parse("c'^2 + c(x)*c''").unwrap()
    );
}

#[test]
fn pde_generator_first_step() {
    let t = sym("t");
    let opts = ParseOptions {
        time: Some(t.clone()),
    };
    let p = Problem::new(
        ProblemKind::Pde,
        t,
        rat(0),
        vec![Equation {
            unknown: sym("u"),
            order: 2,
            rhs: parse_with("u(x)*D(u,t,x)", &opts).unwrap(),
            initial: vec![parse("h(x)").unwrap(), parse("g(x)").unwrap()],
        }],
        Vec::new(),
    )
    .unwrap()
    .reduce_to_first_order()
    .unwrap();
    assert!(ode_generator(&p).is_err());
    let g = pde_generator(&p).unwrap();
    let h = g.jet(0);
    assert_eq!(h, parse("h(x)").unwrap());
    assert_eq!(g.restrict(&g.apply(&h)).unwrap(), parse("g(x)").unwrap());
}
