//! Partial Legendre transforms of periodic convex potentials on the torus.
//!
//! The crate is organized bottom-up:
//!
//! * [`torus_field`] holds periodic grids, trigonometric differentiation and
//!   interpolation, and the strip fields `X × [0,1]` used by the 1+1 solver.
//! * [`legendre`] implements the change of variables `y = ∇u(x) + x`, its
//!   inversion and the conjugate `f(y) = -½|x-y|² - u(x)`.
//! * [`duality`] evaluates the residuals of the transform identities, the
//!   dual Monge-Ampère operator, the linearized symbol and the bordered
//!   dual Hessian.
//! * [`solver`] solves `u_tt(1+u_xx) - u_xt² = ε` through the linear dual
//!   equation, with an independent finite-difference Newton oracle.
//! * [`estimates`] measures derivative norms, convexity margins and
//!   maximum-principle bounds across ε sweeps.
//!
//! Data-parallel loops go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise.

pub mod cases;
pub mod duality;
pub mod error;
pub mod estimates;
pub mod exec;
pub mod fd;
pub mod legendre;
pub mod linalg;
pub mod solver;
pub mod torus_field;

pub use error::{Error, Result};
pub use legendre::{TransformPair, forward_map, inverse_transform, invert_map, partial_transform, partial_transform_strip};
pub use torus_field::{PeriodicPotential, StripField, TorusField, TorusGrid};
