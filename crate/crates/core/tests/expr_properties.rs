use opexp_core::expr::{parse, rat, ratio, simplify, Expr, FuncAtom, Rational, Symbol};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-5i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::rational(ratio(n, d))),
        prop::sample::select(vec!["a", "b", "c", "s"]).prop_map(Expr::symbol),
        (prop::sample::select(vec!["h", "g"]), 0u32..=2)
            .prop_map(|(f, k)| Expr::func_atom(FuncAtom::new(f, k))),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x + y),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| x * y),
            (inner.clone(), 0i32..=3).prop_map(|(x, k)| x.pow(k).unwrap()),
            inner.clone().prop_map(|x| (x * Expr::symbol("c")).exp()),
        ]
    })
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| ratio(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn diff_is_a_derivation(f in expr(), g in expr()) {
        let c = Symbol::new("c");
        let lhs = (&f * &g).diff(&c);
        let rhs = &f.diff(&c) * &g + &f * &g.diff(&c);
        prop_assert!(simplify(&(lhs - rhs)).is_zero());
    }

    #[test]
    fn total_diff_x_is_linear(f in expr(), g in expr(), al in small_rational(), be in small_rational()) {
        let lhs = (f.scale(&al) + g.scale(&be)).total_diff_x().unwrap();
        let rhs = f.total_diff_x().unwrap().scale(&al) + g.total_diff_x().unwrap().scale(&be);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn canonical_form_ignores_order(terms in prop::collection::vec(expr(), 1..6), seed in any::<u64>()) {
        let forward = terms.iter().fold(Expr::zero(), |acc, t| acc + t);
        let mut shuffled = terms.clone();
        // deterministic permutation from the seed
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let backward = shuffled.iter().fold(Expr::zero(), |acc, t| acc + t);
        prop_assert_eq!(&forward, &backward);
        let p1 = terms.iter().fold(Expr::one(), |acc, t| acc * t);
        let p2 = shuffled.iter().rev().fold(Expr::one(), |acc, t| t * &acc);
        prop_assert_eq!(p1, p2);
    }

    #[test]
    fn source_round_trips(e in expr()) {
        let printed = e.to_source();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &e, "{}", printed);
        prop_assert_eq!(back.to_source(), printed);
    }

    #[test]
    fn simplify_is_idempotent(e in expr(), d in expr()) {
        let Ok(q) = e.checked_div(&(d + Expr::symbol("b") + Expr::int(1))) else { return Ok(()) };
        let once = simplify(&q);
        prop_assert_eq!(simplify(&once), once);
    }
}

#[test]
fn substitution_examples() {
    let s = Symbol::new("s");
    assert_eq!(
        parse("s + c")
            .unwrap()
            .substitute_symbol(&s, &Expr::rational(rat(0)))
            .unwrap(),
        parse("c").unwrap()
    );
    let c = Symbol::new("c");
    assert_eq!(
        parse("c^2")
            .unwrap()
            .substitute_symbol(&c, &parse("h + g").unwrap())
            .unwrap(),
        parse("h^2 + 2*h*g + g^2").unwrap()
    );
}
