use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::expr::{rat, ratio};

fn r(n: i64) -> Rational {
    rat(n)
}

fn mat(rows: &[&[i64]]) -> MatrixPoly {
    let rows: Vec<Vec<Rational>> = rows
        .iter()
        .map(|row| row.iter().map(|&x| r(x)).collect())
        .collect();
    MatrixPoly::constant(&rows)
}

/// `Σ_k M_k x^k` from constant coefficient matrices.
fn poly_matrix(coefs: &[MatrixPoly]) -> MatrixPoly {
    let d = coefs[0].dim();
    MatrixPoly::from_fn(d, |i, j| {
        Poly::new(coefs.iter().map(|m| m.get(i, j).coefficient(0)).collect())
    })
}

fn times_power(m: &MatrixPoly, c: &Rational, k: usize) -> MatrixPoly {
    &(m.scale(c))
        * &MatrixPoly::from_fn(m.dim(), |i, j| {
            if i == j {
                Poly::monomial(r(1), k)
            } else {
                Poly::zero()
            }
        })
}

#[test]
fn constant_generator_gives_exponential() {
    let m = mat(&[&[1, 2], &[0, -1]]);
    let pb = peano_baker(&m, &r(0), 3);
    let mut want = MatrixPoly::identity(2);
    let mut mk = MatrixPoly::identity(2);
    for k in 1..=3 {
        mk = &mk * &m;
        want = &want + &times_power(&mk, &factorial(k).recip(), k);
    }
    assert_eq!(pb.value, want);
    assert_eq!(pb.terms[0], MatrixPoly::identity(2));

    let neg = anti_chrono(&-&m, &r(0), 3);
    let mut want = MatrixPoly::identity(2);
    let mut mk = MatrixPoly::identity(2);
    for k in 1..=3 {
        mk = &mk * &m;
        let sign = if k % 2 == 1 { r(-1) } else { r(1) };
        want = &want + &times_power(&mk, &(sign * factorial(k).recip()), k);
    }
    assert_eq!(neg.value, want);
}

#[test]
fn scalar_commuting_case() {
    let l = MatrixPoly::new(1, vec![Poly::monomial(r(1), 1)]);
    let pb = peano_baker(&l, &r(0), 2);
    assert_eq!(
        pb.value.get(0, 0),
        &Poly::new(vec![r(1), r(0), ratio(1, 2), r(0), ratio(1, 8)])
    );
    assert_eq!(anti_chrono(&l, &r(0), 2).value, pb.value);
}

/// Chronological n-fold integral by enumerating index tuples: the monomial
/// `N_{i1} τ1^{i1} ... N_{in} τn^{in}` integrates to `t^{S_1} / Π S_k` with
/// `S_k = Σ_{m≥k} (i_m + 1)`.
fn enumerated(coefs: &[MatrixPoly], n: usize) -> MatrixPoly {
    let d = coefs[0].dim();
    let deg = coefs.len();
    let mut total = MatrixPoly::zero(d);
    let count = deg.pow(n as u32);
    for mut code in 0..count {
        let mut idx = Vec::with_capacity(n);
        for _ in 0..n {
            idx.push(code % deg);
            code /= deg;
        }
        let mut prod = MatrixPoly::identity(d);
        for &i in &idx {
            prod = &prod * &coefs[i];
        }
        let mut weight = r(1);
        let mut s = 0usize;
        for &i in idx.iter().rev() {
            s += i + 1;
            weight /= r(s as i64);
        }
        total = &total + &times_power(&prod, &weight, s);
    }
    total
}

#[test]
fn noncommuting_second_order_term() {
    let n0 = mat(&[&[0, 1], &[0, 0]]);
    let n1 = mat(&[&[0, 0], &[1, 0]]);
    let coefs = [n0.clone(), n1.clone()];
    let l = poly_matrix(&coefs);
    let pb = peano_baker(&l, &r(0), 2);
    assert_eq!(pb.terms[2], enumerated(&coefs, 2));
    let reversed = anti_chrono(&l, &r(0), 2);
    assert_ne!(pb.terms[2], reversed.terms[2]);
    let inv = check_identity(Identity::Inverse, &l, &l, &r(0), 4);
    assert!(inv.pass, "{:?}", inv.lowest_order);
}

#[test]
fn depth_three_matches_enumeration() {
    let coefs = [
        mat(&[&[1, -2], &[3, 0]]),
        mat(&[&[0, 1], &[-1, 2]]),
        mat(&[&[2, 0], &[1, 1]]),
    ];
    let pb = peano_baker(&poly_matrix(&coefs), &r(0), 3);
    for n in 0..=3 {
        assert_eq!(pb.terms[n], enumerated(&coefs, n), "order {n}");
    }
}

#[test]
fn identities_hold_for_fixed_pair() {
    let b = poly_matrix(&[mat(&[&[1, 2], &[-1, 0]]), mat(&[&[0, 1], &[3, -2]])]);
    let c = poly_matrix(&[mat(&[&[0, -1], &[2, 1]]), mat(&[&[1, 0], &[1, 1]])]);
    for id in Identity::ALL {
        for a in [r(0), ratio(1, 2)] {
            let rep = check_identity(id, &b, &c, &a, 3);
            assert!(rep.pass, "{id} at {a}: {:?}", rep.lowest_order);
        }
    }
    // Truncation is sharp: the residual starts right after the depth.
    let rep = check_identity(Identity::ZassenhausSplit, &b, &c, &r(0), 3);
    assert_eq!(rep.lowest_order, Some(4));
}

#[test]
fn product_with_zero_b_is_exact() {
    let a = poly_matrix(&[mat(&[&[1, 2], &[-1, 0]]), mat(&[&[0, 1], &[3, -2]])]);
    let rep = check_identity(Identity::BchProduct, &MatrixPoly::zero(2), &a, &r(0), 4);
    assert!(rep.difference.is_zero());
    assert_eq!(rep.lowest_order, None);
    let rep = check_identity(Identity::Inverse, &a, &a, &r(0), 0);
    assert!(rep.pass);
}

#[test]
fn identity_names() {
    for id in Identity::ALL {
        assert_eq!(id.name().parse::<Identity>().unwrap(), id);
    }
    assert!("magnus".parse::<Identity>().is_err());
}

#[test]
fn shift_examples() {
    let q = Poly::new(vec![r(0), r(0), r(1)]);
    let rep = shift_check(&q, &r(1));
    assert!(rep.pass);
    assert_eq!(rep.series, Poly::new(vec![r(1), r(2), r(1)]));
    let c = Poly::constant(r(5));
    assert_eq!(shift_check(&c, &ratio(7, 3)).series, c);
    let q = Poly::new(vec![r(0), r(-1), r(0), r(1)]);
    let alpha = ratio(-2, 3);
    let rep = shift_check(&q, &alpha);
    assert!(rep.pass);
    // direct expansion of (s + α)^3 - (s + α)
    let a2 = &alpha * &alpha;
    let want = Poly::new(vec![
        &a2 * &alpha - &alpha,
        r(3) * &a2 - r(1),
        r(3) * &alpha,
        r(1),
    ]);
    assert_eq!(rep.shifted, want);
}

#[test]
fn recentering_and_evaluation() {
    let p = Poly::new(vec![r(1), r(-3), r(2)]);
    let q = p.recentered(&r(2));
    for x in [r(-1), ratio(1, 3), r(4)] {
        assert_eq!(p.eval(&x), q.eval(&(&x - r(2))));
    }
}
