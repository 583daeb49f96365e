//! Polynomial matrices: file format and seeded random generation.
//!
//! ```text
//! 2
//! 1 + t, 0
//! t^2/2, -1
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opexp_core::chrono::{MatrixPoly, Poly};
use opexp_core::expr::{parse, ratio, Atom, Expr, Rational, Symbol};

use crate::problem_file::LoadError;

fn err(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Line {
        line,
        message: message.into(),
    }
}

/// Reads a matrix whose entries are polynomials in `t` (or `tau`).
pub fn load_matrix(text: &str) -> Result<MatrixPoly, LoadError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (l0, first) = lines
        .next()
        .ok_or_else(|| LoadError::Missing("empty matrix file".into()))?;
    let dim: usize = first.parse().ok().filter(|&d| d > 0).ok_or_else(|| {
        err(
            l0,
            format!("expected a positive dimension, found `{first}`"),
        )
    })?;
    let mut cells: Vec<(usize, Expr)> = Vec::with_capacity(dim * dim);
    for (line, row) in lines.by_ref().take(dim) {
        let parts: Vec<&str> = row.split(',').collect();
        if parts.len() != dim {
            return Err(err(
                line,
                format!("expected {dim} entries, found {}", parts.len()),
            ));
        }
        for p in parts {
            let e = parse(p).map_err(|e| err(line, e.to_string()))?;
            cells.push((line, e));
        }
    }
    if cells.len() != dim * dim {
        return Err(LoadError::Missing(format!("expected {dim} rows")));
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, "extra row"));
    }
    let mut var: Option<Symbol> = None;
    for (line, e) in &cells {
        for a in e.named_atoms() {
            match a {
                Atom::Sym(s) if s.as_str() == "t" || s.as_str() == "tau" => match &var {
                    Some(v) if v != &s => return Err(err(*line, "entries mix `t` and `tau`")),
                    _ => var = Some(s),
                },
                other => {
                    return Err(err(
                        *line,
                        format!(
                            "`{}` is not a polynomial variable",
                            Expr::atom_pow(other, 1).pretty()
                        ),
                    ))
                }
            }
        }
    }
    let var = var.unwrap_or_else(|| Symbol::new("t"));
    let entries = cells
        .into_iter()
        .map(|(line, e)| Poly::from_expr(&e, &var).map_err(|e| err(line, e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MatrixPoly::new(dim, entries))
}

/// The matrix in the file format, centered at `a`.
pub fn format_matrix(m: &MatrixPoly, a: &Rational) -> String {
    let t = Symbol::new("t");
    let mut out = format!("{}\n", m.dim());
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim())
            .map(|j| m.get(i, j).to_expr(&t, a).to_source())
            .collect();
        out.push_str(&row.join(", "));
        out.push('\n');
    }
    out
}

/// Deterministic source of random polynomial matrices.
pub struct MatrixSource {
    rng: ChaCha8Rng,
}

impl MatrixSource {
    pub fn new(seed: u64) -> MatrixSource {
        MatrixSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Entries of degree at most `degree` with coefficients `n/d`,
    /// `|n| ≤ 3`, `d ∈ {1, 2}`.
    pub fn matrix(&mut self, dim: usize, degree: usize) -> MatrixPoly {
        MatrixPoly::from_fn(dim, |_, _| {
            Poly::new(
                (0..=degree)
                    .map(|_| ratio(self.rng.gen_range(-3..=3), self.rng.gen_range(1..=2)))
                    .collect(),
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use opexp_core::expr::rat;

    #[test]
    fn reads_and_writes_matrices() {
        let m = load_matrix("# B\n2\n1 + t, 0\nt^2/2, -1\n").unwrap();
        assert_eq!(m.get(0, 0), &Poly::new(vec![rat(1), rat(1)]));
        assert_eq!(m.get(1, 0), &Poly::new(vec![rat(0), rat(0), ratio(1, 2)]));
        let zero = rat(0);
        assert_eq!(load_matrix(&format_matrix(&m, &zero)).unwrap(), m);
        assert!(load_matrix("2\n1, 2\n").is_err());
        assert!(load_matrix("2\n1, 2\n3\n").is_err());
        assert!(load_matrix("1\nexp(t)\n").is_err());
        assert!(load_matrix("1\nt + tau\n").is_err());
        assert_eq!(
            load_matrix("1\ntau^2\n").unwrap().get(0, 0),
            &Poly::monomial(rat(1), 2)
        );
    }

    #[test]
    fn same_seed_same_matrices() {
        let a = MatrixSource::new(7).matrix(3, 2);
        let b = MatrixSource::new(7).matrix(3, 2);
        assert_eq!(a, b);
        assert_ne!(a, MatrixSource::new(8).matrix(3, 2));
        assert!(a.degree().unwrap_or(0) <= 2);
    }
}
