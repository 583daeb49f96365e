//! Rendering in the source grammar, a readable text form, and LaTeX.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::{Atom, Expr, FuncAtom, Monomial, Rational, SPACE_VAR};

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Style {
    /// Round-trips through the parser.
    Source,
    /// `h`, `h'`, `h''`, `h^(k)`.
    Text,
}

fn func_name(f: &FuncAtom, style: Style) -> String {
    if let Some(t) = &f.time {
        let mut s = format!("D({}", f.name);
        for _ in 0..t.order {
            s.push(',');
            s.push_str(t.var.as_str());
        }
        for _ in 0..f.order {
            s.push(',');
            s.push_str(SPACE_VAR);
        }
        s.push(')');
        return s;
    }
    match (f.order, style) {
        (0, Style::Source) => format!("{}({SPACE_VAR})", f.name),
        (0, Style::Text) => f.name.to_string(),
        (1, _) => format!("{}'", f.name),
        (2, _) => format!("{}''", f.name),
        (k, Style::Text) => format!("{}^({k})", f.name),
        (k, Style::Source) => {
            let mut s = format!("D({}", f.name);
            for _ in 0..k {
                s.push(',');
                s.push_str(SPACE_VAR);
            }
            s.push(')');
            s
        }
    }
}

/// Base of a power, parenthesized when a following `^` would be ambiguous.
fn atom_base(a: &Atom, style: Style) -> String {
    match a {
        Atom::Sym(s) => s.to_string(),
        Atom::Func(f) => {
            let s = func_name(f, style);
            if f.order >= 3 && f.time.is_none() && style == Style::Text {
                format!("({s})")
            } else {
                s
            }
        }
        Atom::Exp(m) => format!("exp({})", render(m, style)),
        Atom::Ln(m) => format!("ln({})", render(m, style)),
        Atom::Sum(b) => format!("({})", render(b, style)),
    }
}

fn power(a: &Atom, k: u32, style: Style) -> String {
    if k == 1 {
        match a {
            Atom::Func(f) => func_name(f, style),
            _ => atom_base(a, style),
        }
    } else {
        format!("{}^{k}", atom_base(a, style))
    }
}

fn write_term(out: &mut String, coef: &Rational, mono: &Monomial, first: bool, style: Style) {
    let neg = coef.is_negative();
    match (first, neg) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    let n = coef.numer().abs();
    let d = coef.denom().clone();
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    for (a, k) in mono.factors() {
        match a {
            Atom::Exp(m) => {
                let arg = Expr::monomial(super::rat(*k as i64), Monomial::one()) * m;
                num.push(format!("exp({})", render(&arg, style)));
            }
            _ if *k > 0 => num.push(power(a, *k as u32, style)),
            _ => den.push(power(a, k.unsigned_abs(), style)),
        }
    }
    if !n.is_one() || num.is_empty() {
        num.insert(0, n.to_string());
    }
    if d != BigInt::one() {
        den.insert(0, d.to_string());
    }
    out.push_str(&num.join("*"));
    match den.len() {
        0 => {}
        1 => {
            out.push('/');
            out.push_str(&den[0]);
        }
        _ => {
            out.push_str("/(");
            out.push_str(&den.join("*"));
            out.push(')');
        }
    }
}

pub(crate) fn render(e: &Expr, style: Style) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in e.terms().enumerate() {
        write_term(&mut out, c, m, i == 0, style);
    }
    out
}

fn latex_func(f: &FuncAtom) -> String {
    if let Some(t) = &f.time {
        let total = t.order + f.order;
        let mut den = String::new();
        if t.order > 0 {
            den.push_str(&format!("\\partial {}", t.var));
            if t.order > 1 {
                den.push_str(&format!("^{{{}}}", t.order));
            }
        }
        if f.order > 0 {
            den.push_str(&format!("\\partial {SPACE_VAR}"));
            if f.order > 1 {
                den.push_str(&format!("^{{{}}}", f.order));
            }
        }
        let top = if total > 1 {
            format!("\\partial^{{{total}}}")
        } else {
            "\\partial".into()
        };
        return format!("\\frac{{{top} {}}}{{{den}}}", f.name);
    }
    match f.order {
        0 => f.name.to_string(),
        k if k <= 3 => format!("{}{}", f.name, "'".repeat(k as usize)),
        k => format!("{}^{{({k})}}", f.name),
    }
}

fn latex_atom(a: &Atom, k: u32) -> String {
    let base = match a {
        Atom::Sym(s) => s.to_string(),
        Atom::Func(f) => latex_func(f),
        Atom::Exp(m) => return format!("e^{{{}}}", to_latex(&m.scale(&super::rat(k as i64)))),
        Atom::Ln(m) => format!("\\ln\\left({}\\right)", to_latex(m)),
        Atom::Sum(b) => format!("\\left({}\\right)", to_latex(b)),
    };
    if k == 1 {
        base
    } else if matches!(a, Atom::Func(f) if f.order > 0 || f.time.is_some()) {
        format!("{{{base}}}^{{{k}}}")
    } else {
        format!("{base}^{{{k}}}")
    }
}

/// LaTeX rendering with primes for space derivatives.
pub fn to_latex(e: &Expr) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in e.terms().enumerate() {
        let neg = c.is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let n = c.numer().abs();
        let d = c.denom().clone();
        let mut num: Vec<String> = Vec::new();
        let mut den: Vec<String> = Vec::new();
        for (a, k) in m.factors() {
            if let Atom::Exp(inner) = a {
                let arg = inner.scale(&super::rat(*k as i64));
                num.push(format!("e^{{{}}}", to_latex(&arg)));
                continue;
            }
            if *k > 0 {
                num.push(latex_atom(a, *k as u32));
            } else {
                den.push(latex_atom(a, k.unsigned_abs()));
            }
        }
        let mut num_s = num.join(" ");
        if num_s.is_empty() {
            num_s = n.to_string();
        } else if !n.is_one() {
            num_s = format!("{n} {num_s}");
        }
        if d != BigInt::one() {
            den.insert(0, d.to_string());
        }
        if den.is_empty() {
            out.push_str(&num_s);
        } else {
            out.push_str(&format!("\\frac{{{num_s}}}{{{}}}", den.join(" ")));
        }
    }
    out
}
