//! Truncated time-ordered exponentials of polynomial matrices and exact
//! order-by-order checks of the identities relating them.
//!
//! Matrices are given as polynomials in the absolute variable; every
//! truncation is returned in powers of `t - a`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::expr::{factorial, Rational};

mod matrix;
mod poly;

pub use matrix::MatrixPoly;
pub use poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Later times to the left: `T exp`.
    Chronological,
    /// Later times to the right: `T₀ exp`.
    AntiChronological,
}

/// `Σ_{n≤K}` of the nested-integral series, in powers of `t - a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChronoTruncation {
    pub point: Rational,
    pub depth: usize,
    pub orientation: Orientation,
    /// `terms[n]` is the `n`-fold nested integral.
    pub terms: Vec<MatrixPoly>,
    pub value: MatrixPoly,
}

fn nested(
    integrand: &MatrixPoly,
    a: &Rational,
    depth: usize,
    orientation: Orientation,
) -> ChronoTruncation {
    let x = integrand.recentered(a);
    let d = x.dim();
    let mut terms = alloc::vec![MatrixPoly::identity(d)];
    for n in 1..=depth {
        let prev = &terms[n - 1];
        let prod = match orientation {
            Orientation::Chronological => &x * prev,
            Orientation::AntiChronological => prev * &x,
        };
        terms.push(prod.integral());
    }
    let mut value = MatrixPoly::zero(d);
    for t in &terms {
        value = &value + t;
    }
    ChronoTruncation {
        point: a.clone(),
        depth,
        orientation,
        terms,
        value,
    }
}

/// `T exp(∫_a^t L)` through nesting depth `depth`:
/// `P_n(t) = ∫_a^t L(τ) P_{n-1}(τ) dτ`.
pub fn peano_baker(l: &MatrixPoly, a: &Rational, depth: usize) -> ChronoTruncation {
    nested(l, a, depth, Orientation::Chronological)
}

/// `T₀ exp(∫_a^t X)` through nesting depth `depth`:
/// `Q_n(t) = ∫_a^t Q_{n-1}(τ) X(τ) dτ`. Pass `-L` for the inverse of
/// `peano_baker(L)`.
pub fn anti_chrono(x: &MatrixPoly, a: &Rational, depth: usize) -> ChronoTruncation {
    nested(x, a, depth, Orientation::AntiChronological)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Identity {
    /// `T₀exp(-∫L) · Texp(∫L) = I`.
    Inverse,
    /// `Texp(∫B) · Texp(∫A) = Texp(∫[B + E_B A E_B⁻¹])`.
    BchProduct,
    /// `Texp(∫(B+C)) = E_B · Texp(∫ E_B⁻¹ C E_B)`.
    ZassenhausSplit,
    /// `T₀exp(∫(B+C)) = T₀exp(∫ F_B C F_B⁻¹) · F_B` with `F_B = T₀exp(∫B)`.
    AntiSplit,
}

impl Identity {
    pub const ALL: [Identity; 4] = [
        Identity::Inverse,
        Identity::BchProduct,
        Identity::ZassenhausSplit,
        Identity::AntiSplit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Inverse => "inverse",
            Identity::BchProduct => "bch-product",
            Identity::ZassenhausSplit => "zassenhaus-split",
            Identity::AntiSplit => "anti-split",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown identity `{0}`")]
pub struct UnknownIdentity(pub alloc::string::String);

impl FromStr for Identity {
    type Err = UnknownIdentity;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Identity::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| UnknownIdentity(s.into()))
    }
}

/// Outcome of comparing both sides of an identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub identity: Identity,
    pub depth: usize,
    /// Left side minus right side in powers of `t - a`: through order
    /// `depth + 1` when that part is nonzero, otherwise in full.
    pub difference: MatrixPoly,
    /// Lowest power of `t - a` in the difference; `None` if it vanishes.
    pub lowest_order: Option<usize>,
    pub pass: bool,
}

/// Evaluates both sides of `id` with every time-ordered exponential cut at
/// nesting depth `depth`. `other` is `A` for the product identity and `C`
/// for the splits; the inverse identity uses `b` alone.
pub fn check_identity(
    id: Identity,
    b: &MatrixPoly,
    other: &MatrixPoly,
    a: &Rational,
    depth: usize,
) -> IdentityReport {
    // Work in σ = t - a throughout so that derived integrands are centered.
    let b = b.recentered(a);
    let other = other.recentered(a);
    // Orders above depth + 1 cannot change the verdict; the full difference
    // is only needed to tell an exact zero from a high-order one.
    let mut difference = sides(id, &b, &other, depth, Some(depth + 1));
    if difference.is_zero() {
        difference = sides(id, &b, &other, depth, None);
    }
    let lowest_order = difference.valuation();
    IdentityReport {
        identity: id,
        depth,
        pass: lowest_order.is_none_or(|k| k > depth),
        difference,
        lowest_order,
    }
}

/// Series in `σ`, cut at nesting depth `depth` and, if `cap` is set, at
/// powers above `cap`.
fn texp_capped(
    x: &MatrixPoly,
    depth: usize,
    cap: Option<usize>,
    orientation: Orientation,
) -> MatrixPoly {
    let cut = |m: MatrixPoly| match cap {
        Some(k) => m.truncated(k),
        None => m,
    };
    let mut term = MatrixPoly::identity(x.dim());
    let mut value = term.clone();
    for _ in 0..depth {
        let prod = match orientation {
            Orientation::Chronological => x * &term,
            Orientation::AntiChronological => &term * x,
        };
        term = cut(cut(prod).integral());
        value = &value + &term;
    }
    value
}

/// Left side minus right side of `id` for centered `b`, `other`.
fn sides(
    id: Identity,
    b: &MatrixPoly,
    other: &MatrixPoly,
    depth: usize,
    cap: Option<usize>,
) -> MatrixPoly {
    let cut = |m: MatrixPoly| match cap {
        Some(k) => m.truncated(k),
        None => m,
    };
    let mul = |x: &MatrixPoly, y: &MatrixPoly| cut(x * y);
    let texp = |m: &MatrixPoly| texp_capped(m, depth, cap, Orientation::Chronological);
    let t0exp = |m: &MatrixPoly| texp_capped(m, depth, cap, Orientation::AntiChronological);
    let (lhs, rhs) = match id {
        Identity::Inverse => (mul(&t0exp(&-b), &texp(b)), MatrixPoly::identity(b.dim())),
        Identity::BchProduct => {
            let e_b = texp(b);
            let e_b_inv = t0exp(&-b);
            let integrand = b + &mul(&mul(&e_b, other), &e_b_inv);
            (mul(&e_b, &texp(other)), texp(&integrand))
        }
        Identity::ZassenhausSplit => {
            let e_b = texp(b);
            let e_b_inv = t0exp(&-b);
            let integrand = mul(&mul(&e_b_inv, other), &e_b);
            (texp(&(b + other)), mul(&e_b, &texp(&integrand)))
        }
        Identity::AntiSplit => {
            let f_b = t0exp(b);
            let f_b_inv = texp(&-b);
            let integrand = mul(&mul(&f_b, other), &f_b_inv);
            (t0exp(&(b + other)), mul(&t0exp(&integrand), &f_b))
        }
    };
    &lhs - &rhs
}

/// Both sides of `exp(α d/ds) q(s) = q(s + α)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftReport {
    pub series: Poly,
    pub shifted: Poly,
    pub pass: bool,
}

/// Sums the terminating series `Σ α^k q^(k)/k!` and compares it with the
/// translate `q(s + α)`.
pub fn shift_check(q: &Poly, alpha: &Rational) -> ShiftReport {
    let mut series = Poly::zero();
    let mut deriv = q.clone();
    let mut apow = Rational::from_integer(1.into());
    let mut k = 0usize;
    while !deriv.is_zero() {
        series = &series + &deriv.scale(&(&apow / factorial(k)));
        deriv = deriv.derivative();
        apow *= alpha;
        k += 1;
    }
    let shifted = q.compose_shift(alpha);
    ShiftReport {
        pass: series == shifted,
        series,
        shifted,
    }
}

#[cfg(test)]
mod tests;
