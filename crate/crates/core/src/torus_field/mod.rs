//! Periodic grids on `(R/Z)^n`, trigonometric calculus and strip fields.
//!
//! Fields are stored as values on the nodes `j·h` with `h = 1/N`; the
//! trigonometric interpolant is the band-limited function with the same
//! discrete spectrum. The Nyquist mode of an even grid is interpreted as
//! `cos(πN x)`, so odd derivatives zero its coefficient and even
//! derivatives keep it.

mod field;
mod grid;
pub mod io;
mod potential;
mod strip;

pub use field::{Partials, TorusField, hessian_margin};
pub(crate) use field::{derivative_multiplier, fft_nd};
pub use grid::TorusGrid;
pub use potential::PeriodicPotential;
pub use strip::StripField;
