use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::expr::Rational;

use super::Poly;

/// Square matrix with polynomial entries, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixPoly {
    dim: usize,
    entries: Vec<Poly>,
}

impl MatrixPoly {
    /// Panics unless `entries.len() == dim * dim`.
    pub fn new(dim: usize, entries: Vec<Poly>) -> MatrixPoly {
        assert_eq!(entries.len(), dim * dim, "matrix must be square");
        MatrixPoly { dim, entries }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Poly) -> MatrixPoly {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        MatrixPoly { dim, entries }
    }

    pub fn zero(dim: usize) -> MatrixPoly {
        Self::from_fn(dim, |_, _| Poly::zero())
    }

    pub fn identity(dim: usize) -> MatrixPoly {
        Self::from_fn(dim, |i, j| if i == j { Poly::one() } else { Poly::zero() })
    }

    /// Constant matrix from rational rows.
    pub fn constant(rows: &[Vec<Rational>]) -> MatrixPoly {
        Self::from_fn(rows.len(), |i, j| Poly::constant(rows[i][j].clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(Poly::degree).max()
    }

    /// Lowest power of the variable with a nonzero coefficient in any entry.
    pub fn valuation(&self) -> Option<usize> {
        self.entries.iter().filter_map(Poly::valuation).min()
    }

    /// Matrix coefficient of `x^k`.
    pub fn coefficient(&self, k: usize) -> Vec<Rational> {
        self.entries.iter().map(|p| p.coefficient(k)).collect()
    }

    fn map(&self, f: impl Fn(&Poly) -> Poly) -> MatrixPoly {
        MatrixPoly {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> MatrixPoly {
        self.map(|p| p.scale(c))
    }

    pub fn derivative(&self) -> MatrixPoly {
        self.map(Poly::derivative)
    }

    pub fn integral(&self) -> MatrixPoly {
        self.map(Poly::integral)
    }

    pub fn recentered(&self, a: &Rational) -> MatrixPoly {
        self.map(|p| p.recentered(a))
    }

    /// Drops every power above `deg`.
    pub fn truncated(&self, deg: usize) -> MatrixPoly {
        self.map(|p| Poly::new(p.coefficients().iter().take(deg + 1).cloned().collect()))
    }
}

impl Add for &MatrixPoly {
    type Output = MatrixPoly;
    fn add(self, o: &MatrixPoly) -> MatrixPoly {
        assert_eq!(self.dim, o.dim);
        MatrixPoly {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &MatrixPoly {
    type Output = MatrixPoly;
    fn sub(self, o: &MatrixPoly) -> MatrixPoly {
        assert_eq!(self.dim, o.dim);
        MatrixPoly {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &MatrixPoly {
    type Output = MatrixPoly;
    fn mul(self, o: &MatrixPoly) -> MatrixPoly {
        assert_eq!(self.dim, o.dim);
        let d = self.dim;
        MatrixPoly::from_fn(d, |i, j| {
            let mut acc = Poly::zero();
            for k in 0..d {
                let (x, y) = (self.get(i, k), o.get(k, j));
                if !x.is_zero() && !y.is_zero() {
                    acc = &acc + &(x * y);
                }
            }
            acc
        })
    }
}

impl Neg for &MatrixPoly {
    type Output = MatrixPoly;
    fn neg(self) -> MatrixPoly {
        self.map(|p| -p)
    }
}
