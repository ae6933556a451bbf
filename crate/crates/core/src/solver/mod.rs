//! The degenerate 1+1 equation `u_tt (1 + u_xx) - u_xt² = ε` on `S¹ × [0,1]`
//! with Dirichlet slices, solved through its linear dual equation.

mod banded;
mod dual;
mod fd_oracle;

pub use banded::{BandLu, BandMatrix};
pub use dual::{DualLaplaceSolution, HomogeneousDualSolution, sinh_ratio_derivative, solve_dual_laplace};
pub use fd_oracle::{FD_MAX_NEWTON_STEPS, FD_RESIDUAL_TOLERANCE, FdSolution, fd_reference_solver, fd_residual};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::Scheme;
use crate::legendre::{conjugate_strip, partial_transform, partial_transform_strip};
use crate::torus_field::{PeriodicPotential, StripField, TorusGrid, io};

/// Default bound on `residual_ma` before a solve is rejected.
pub const DEFAULT_RESIDUAL_BOUND: f64 = 5e-2;
/// Slack allowed below `λ` in the convexity margin of a solution.
pub const DEFAULT_MARGIN_TOLERANCE: f64 = 1e-6;
/// Default allowed mismatch between the recovered boundary slices and the data.
pub const DEFAULT_BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Accepts `ε ∈ (0, 1]`.
pub fn validate_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {epsilon}")))
    }
}

/// Dirichlet data `u(·,0) = u0`, `u(·,1) = u1` on the circle.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub u0: PeriodicPotential,
    pub u1: PeriodicPotential,
    /// `min(margin(u0), margin(u1))`.
    pub lambda: f64,
}

impl BoundaryData {
    pub fn new(u0: PeriodicPotential, u1: PeriodicPotential) -> Result<Self> {
        if u0.grid() != u1.grid() {
            return Err(Error::InvalidGrid("u0 and u1 live on different grids".into()));
        }
        if u0.dims() != 1 {
            return Err(Error::InvalidGrid(format!(
                "the 1+1 solver needs n=1 boundary data, got n={}",
                u0.dims()
            )));
        }
        let lambda = u0.margin().min(u1.margin());
        Ok(Self { u0, u1, lambda })
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u0.grid()
    }
}

/// Conjugates of both boundary slices.
pub fn transform_boundary(b: &BoundaryData) -> Result<(PeriodicPotential, PeriodicPotential)> {
    Ok((partial_transform(&b.u0)?.f, partial_transform(&b.u1)?.f))
}

/// Slicewise conjugate of a dual strip.
pub fn recover_u(f: &StripField) -> Result<StripField> {
    conjugate_strip(&partial_transform_strip(f)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Number of t-intervals; defaults to the x-grid size.
    pub intervals: Option<usize>,
    pub residual_bound: f64,
    pub margin_tolerance: f64,
    pub boundary_tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            intervals: None,
            residual_bound: DEFAULT_RESIDUAL_BOUND,
            margin_tolerance: DEFAULT_MARGIN_TOLERANCE,
            boundary_tolerance: DEFAULT_BOUNDARY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DualSolveResult {
    pub epsilon: f64,
    pub lambda: f64,
    pub f: StripField,
    pub u: StripField,
    /// Sup-norm of `u_tt(1+u_xx) - u_xt² - ε` (spectral in x, Richardson FD in t).
    pub residual_ma: f64,
    /// Minimum of `1 + u_xx` over the strip.
    pub margin_min: f64,
    pub dual: DualLaplaceSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionManifest {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub lambda: f64,
    pub residual_ma: f64,
    pub margin_min: f64,
}

impl DualSolveResult {
    pub fn manifest(&self) -> SolutionManifest {
        SolutionManifest {
            epsilon: self.epsilon,
            n: self.u.grid().len(),
            m: self.u.intervals(),
            lambda: self.lambda,
            residual_ma: self.residual_ma,
            margin_min: self.margin_min,
        }
    }
}

/// `u_tt (1 + u_xx) - u_xt² - ε` at every node.
pub fn ma_residual(u: &StripField, epsilon: f64) -> Result<StripField> {
    let utt = u.t_derivative(2, Scheme::Richardson)?;
    let uxt = u.t_derivative(1, Scheme::Richardson)?.x_derivative(&[1])?;
    let uxx = u.x_derivative(&[2])?;
    let lhs = utt.zip_map(&uxx, |a, b| a * (1.0 + b));
    Ok(lhs.zip_map(&uxt, |l, c| l - c * c - epsilon))
}

/// Minimum of `1 + u_xx` over all nodes and levels.
pub fn strip_margin(u: &StripField) -> Result<f64> {
    Ok(u.x_derivative(&[2])?.min() + 1.0)
}

/// Boundary conjugates, exact dual solve, slicewise recovery, then the
/// residual, margin and boundary checks.
pub fn solve_1p1(b: &BoundaryData, epsilon: f64, opts: &SolveOptions) -> Result<DualSolveResult> {
    validate_epsilon(epsilon)?;
    if !(b.lambda > 0.0) {
        return Err(Error::NotConvex { margin: b.lambda });
    }
    let intervals = opts.intervals.unwrap_or_else(|| b.grid().len());
    if intervals < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 t-intervals, got {intervals}"
        )));
    }
    let (f0, f1) = transform_boundary(b)?;
    let dual = solve_dual_laplace(&f0, &f1, epsilon)?;
    let f = dual.strip(intervals)?;
    let u = recover_u(&f)?;

    let boundary_gap = u.slice(0).distance(&b.u0).max(u.slice(intervals).distance(&b.u1));
    if !(boundary_gap <= opts.boundary_tolerance) {
        return Err(Error::InvariantViolation(format!(
            "recovered boundary slices differ from the data by {boundary_gap:.3e}"
        )));
    }
    let margin_min = strip_margin(&u)?;
    if margin_min < b.lambda - opts.margin_tolerance {
        return Err(Error::InvariantViolation(format!(
            "convexity margin {margin_min:.9} fell below lambda {:.9}",
            b.lambda
        )));
    }
    let residual_ma = ma_residual(&u, epsilon)?.sup_norm();
    if !(residual_ma <= opts.residual_bound) {
        return Err(Error::ResidualTooLarge {
            residual: residual_ma,
            bound: opts.residual_bound,
        });
    }
    Ok(DualSolveResult {
        epsilon,
        lambda: b.lambda,
        f,
        u,
        residual_ma,
        margin_min,
        dual,
    })
}

/// Writes `u.csv`, `f.csv` and `manifest.json` into `dir`.
pub fn write_solution_bundle(dir: &Path, result: &DualSolveResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    io::write_atomic(&dir.join("u.csv"), io::strip_to_string(&result.u).as_bytes())?;
    io::write_atomic(&dir.join("f.csv"), io::strip_to_string(&result.f).as_bytes())?;
    let manifest = serde_json::to_string_pretty(&result.manifest())? + "\n";
    io::write_atomic(&dir.join("manifest.json"), manifest.as_bytes())
}
