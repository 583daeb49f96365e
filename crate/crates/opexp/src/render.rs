//! Text, LaTeX and CSV renderings of series and reports.

use std::cmp::Ordering;
use std::io;

use num_traits::{One, Signed, Zero};

use opexp_core::expr::{factorial, simplify, to_latex, Expr, Rational, Symbol};
use opexp_core::problem::SubstitutionKind;
use opexp_core::series::{FourierSeries, GeneralizedSeries, SeriesSolution};
use opexp_core::validate::ComparisonReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Text,
    Latex,
}

fn shifted_time(time: &Symbol, point: &Rational, style: Style) -> String {
    if point.is_zero() {
        return time.to_string();
    }
    let sign = if point.is_negative() { '+' } else { '-' };
    let a = point.abs();
    match style {
        Style::Text => format!("({time} {sign} {a})"),
        Style::Latex if a.is_integer() => format!("\\left({time} {sign} {a}\\right)"),
        Style::Latex => format!(
            "\\left({time} {sign} \\tfrac{{{}}}{{{}}}\\right)",
            a.numer(),
            a.denom()
        ),
    }
}

fn power(base: &str, n: usize, style: Style) -> String {
    match (n, style) {
        (1, _) => base.to_string(),
        (_, Style::Text) => format!("{base}^{n}"),
        (_, Style::Latex) => format!("{base}^{{{n}}}"),
    }
}

fn render_expr(e: &Expr, style: Style) -> String {
    match style {
        Style::Text => e.pretty(),
        Style::Latex => to_latex(e),
    }
}

/// `b_0 + b_1 B + b_2 B^2 + ...` with `B` already rendered.
fn render_sum(coefficients: &[Expr], basis: &str, style: Style) -> String {
    let mut out = String::new();
    for (n, b) in coefficients.iter().enumerate() {
        if b.is_zero() {
            continue;
        }
        let (neg, body) = if n == 0 {
            let s = render_expr(b, style);
            match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            }
        } else {
            let p = power(basis, n, style);
            let sep = if style == Style::Latex { " " } else { "*" };
            match b.to_rational() {
                Some(q) if q.abs().is_one() => (q.is_negative(), p),
                Some(q) => (
                    q.is_negative(),
                    format!("{}{sep}{p}", render_expr(&Expr::rational(q.abs()), style)),
                ),
                None => {
                    let single = b.len() == 1;
                    let neg = single && b.terms().all(|(_, c)| c.is_negative());
                    let inner = render_expr(&if neg { -b } else { b.clone() }, style);
                    let unit = single
                        && b.terms().all(|(m, c)| {
                            c.abs().is_one() && m.factors().iter().all(|(_, k)| *k > 0)
                        });
                    let inner = match (unit, style) {
                        (true, _) => inner,
                        (false, Style::Text) => format!("({inner})"),
                        (false, Style::Latex) => format!("\\left({inner}\\right)"),
                    };
                    (neg, format!("{inner}{sep}{p}"))
                }
            }
        };
        match (out.is_empty(), neg) {
            (true, true) => out.push('-'),
            (true, false) => {}
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// `k_n / n!`, the multiplier of `(t - a)^n`.
pub fn divided(sol: &SeriesSolution, i: usize) -> Vec<Expr> {
    sol.components[i]
        .coefficients
        .iter()
        .enumerate()
        .map(|(n, k)| simplify(&k.scale(&factorial(n).recip())))
        .collect()
}

pub fn taylor(sol: &SeriesSolution, style: Style) -> String {
    let basis = shifted_time(&sol.time, &sol.point, style);
    let mut out = String::new();
    for (i, c) in sol.components.iter().enumerate() {
        out.push_str(&format!(
            "{} = {}\n",
            c.unknown,
            render_sum(&divided(sol, i), &basis, style)
        ));
    }
    out
}

pub fn generalized(gs: &GeneralizedSeries, style: Style) -> String {
    let sub = &gs.substitution;
    let basis = if sub.kind() == SubstitutionKind::Identity {
        shifted_time(sub.time(), &gs.point, style)
    } else {
        let forward = render_expr(sub.forward(), style);
        let inner = match gs.tau0.cmp(&Rational::zero()) {
            Ordering::Equal => forward,
            Ordering::Greater => format!(
                "{forward} - {}",
                render_expr(&Expr::rational(gs.tau0.clone()), style)
            ),
            Ordering::Less => format!(
                "{forward} + {}",
                render_expr(&Expr::rational(-gs.tau0.clone()), style)
            ),
        };
        match style {
            Style::Text => format!("({inner})"),
            Style::Latex => format!("\\left({inner}\\right)"),
        }
    };
    let mut out = String::new();
    for c in &gs.components {
        out.push_str(&format!(
            "{} = {}\n",
            c.unknown,
            render_sum(&c.coefficients, &basis, style)
        ));
    }
    out
}

pub fn fourier(fs: &FourierSeries, style: Style) -> String {
    let mut out = String::new();
    let shifted = shifted_time(&fs.time, &fs.point, style);
    let omega = match (fs.omega.len(), style) {
        (0 | 1, _) => render_expr(&fs.omega, style),
        (_, Style::Text) => format!("({})", fs.omega.pretty()),
        (_, Style::Latex) => format!("\\left({}\\right)", to_latex(&fs.omega)),
    };
    match style {
        Style::Text => out.push_str(&format!(
            "# harmonic k multiplies exp(-i*k*{omega}*{shifted})\n"
        )),
        Style::Latex => {}
    }
    for h in &fs.components {
        for (k, z) in h.harmonics.iter().enumerate() {
            let (re, im) = (render_expr(&z.re, style), render_expr(&z.im, style));
            match style {
                Style::Text => out.push_str(&format!("{}[{k}] = {re} + i*({im})\n", h.unknown)),
                Style::Latex => out.push_str(&format!(
                    "\\hat{{{}}}_{{{k}}} = {re} + i\\left({im}\\right)\n",
                    h.unknown
                )),
            }
        }
    }
    out
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Rows `unknown, n, coefficient` with the multiplier of the `n`th basis power.
pub fn coefficients_csv(rows: &[(Symbol, Vec<Expr>)], out: &mut dyn io::Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["unknown", "n", "coefficient"])
        .map_err(csv_err)?;
    for (u, cs) in rows {
        for (n, c) in cs.iter().enumerate() {
            w.write_record([u.as_str(), &n.to_string(), &c.to_source()])
                .map_err(csv_err)?;
        }
    }
    w.flush()
}

pub fn fourier_csv(fs: &FourierSeries, out: &mut dyn io::Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["unknown", "k", "re", "im"])
        .map_err(csv_err)?;
    for h in &fs.components {
        for (k, z) in h.harmonics.iter().enumerate() {
            w.write_record([
                h.unknown.as_str(),
                &k.to_string(),
                &z.re.to_source(),
                &z.im.to_source(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()
}

pub fn comparison_csv(report: &ComparisonReport, out: &mut dyn io::Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "series_value", "reference_value", "abs_err", "rel_err"])
        .map_err(csv_err)?;
    for r in &report.rows {
        w.write_record(
            [r.t, r.series_value, r.reference_value, r.abs_err, r.rel_err]
                .map(|x| format!("{x:e}")),
        )
        .map_err(csv_err)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem_file::load_problem;
    use opexp_core::series::solve;

    #[test]
    fn prints_plain_series() {
        let riccati =
            load_problem("kind = ode\nunknown = u\neq: D(u,t) = u^2\ninit: u|a = c\n").unwrap();
        let s = solve(&riccati, 3).unwrap();
        assert_eq!(
            taylor(&s, Style::Text),
            "u = c + c^2*t + c^3*t^2 + c^4*t^3\n"
        );
        let trivial =
            load_problem("kind = ode\nunknown = u\neq: D(u,t) = 0\ninit: u|a = c\n").unwrap();
        assert_eq!(taylor(&solve(&trivial, 8).unwrap(), Style::Text), "u = c\n");
        let shifted =
            load_problem("kind = ode\nunknown = u\na = 1/2\neq: D(u,t) = -u\ninit: u|a = 2\n")
                .unwrap();
        assert_eq!(
            taylor(&solve(&shifted, 2).unwrap(), Style::Text),
            "u = 2 - 2*(t - 1/2) + (t - 1/2)^2\n"
        );
    }

    #[test]
    fn groups_multi_term_coefficients() {
        let p = load_problem(
            "kind = pde\nunknown = u\neq: D(u,t,t) = u*D(u,t,x)\ninit: u|a = h\ninit: D(u,t)|a = g\n",
        )
        .unwrap();
        let s = solve(&p, 3).unwrap();
        let text = taylor(&s, Style::Text);
        assert!(text.starts_with("u = h + g*t + (g'*h/2)*t^2 + ("), "{text}");
        let latex = taylor(&s, Style::Latex);
        assert!(latex.contains("t^{3}"), "{latex}");
    }

    #[test]
    fn writes_csv() {
        let mut buf = Vec::new();
        coefficients_csv(
            &[(Symbol::new("u"), vec![Expr::symbol("c"), Expr::int(0)])],
            &mut buf,
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "unknown,n,coefficient\nu,0,c\nu,1,0\n"
        );
    }
}
