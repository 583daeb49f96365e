//! Formal series solutions of nonlinear Cauchy problems.
//!
//! A first-order system `u_t = F(t, u, u_x, ...)` with data `u(a) = c` is
//! solved by the proper operator exponential
//! `u(t) = exp{(t - a) D} c |_{s=a}`, where `D = Δ + ∂/∂s` is the Lie
//! derivation generated by the right-hand side with time renamed to `s`.
//! Expanding the exponential gives the Taylor coefficients `Dⁿ c |_{s=a}`
//! directly, and an invertible change of the time variable before expanding
//! yields generalized (e.g. exponential or Fourier) series instead.
//!
//! The crate is `no_std` and needs only `alloc`; everything symbolic is
//! carried out over exact rationals.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chrono;
pub mod derivation;
pub mod expr;
pub mod problem;
pub mod series;
pub mod validate;

pub use chrono::{anti_chrono, check_identity, peano_baker, Identity, MatrixPoly, Poly};
pub use derivation::{Derivation, Generator, JetKind};
pub use expr::{parse, Atom, Expr, ExprError, FuncAtom, Rational, Symbol};
pub use problem::{Equation, Problem, ProblemError, ProblemKind, Substitution, SubstitutionKind};
pub use series::{FourierSeries, GeneralizedSeries, SeriesSolution};
