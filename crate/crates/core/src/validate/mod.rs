//! Independent checks: Taylor coefficients by repeated differentiation of
//! the equations in time, fixed-step RK4, and series-versus-numeric
//! comparison.

mod numeric;
mod oracle;

pub use numeric::{
    compare_series_numeric, eval_f64, numeric_initial, rk4_solve, Bindings, ComparisonReport,
    ComparisonRow, NumericError, NumericTrajectory, SeriesEval,
};
pub use oracle::oracle_coefficients;
