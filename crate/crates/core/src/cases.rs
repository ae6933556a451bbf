//! Built-in potentials and strips with known closed forms, shared by the
//! tests, the acceptance suite and the command-line driver.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::torus_field::{PeriodicPotential, StripField, TorusField, TorusGrid};

/// Amplitude of the manufactured n=1 strip.
pub const MANUFACTURED_ALPHA_1D: f64 = 0.02;
/// Amplitude of the manufactured n=2 strip.
pub const MANUFACTURED_ALPHA_2D: f64 = 0.005;

/// `-(a/2π) cos(2πx)`, whose second derivative is `2πa cos(2πx)`.
pub fn cosine_value(a: f64, x: f64) -> f64 {
    -(a / (2.0 * PI)) * (2.0 * PI * x).cos()
}

/// Margin of [`cosine_potential`] with amplitude `a`: `1 - 2π|a|`.
pub fn cosine_margin(a: f64) -> f64 {
    1.0 - 2.0 * PI * a.abs()
}

/// `-(a/2π) cos(2πx₁)` on a grid of any dimension.
pub fn cosine_field(grid: &TorusGrid, a: f64) -> TorusField {
    TorusField::from_fn(grid, |x| cosine_value(a, x[0]))
}

pub fn cosine_potential(grid: &TorusGrid, a: f64) -> Result<PeriodicPotential> {
    PeriodicPotential::new(cosine_field(grid, a))
}

/// `ε t² / 2`.
pub fn quadratic_strip(grid: &TorusGrid, intervals: usize, epsilon: f64) -> Result<StripField> {
    StripField::from_fn(grid, intervals, |_, t| 0.5 * epsilon * t * t)
}

/// `t²/2 + α t sin(2πx)` on an n=1 grid.
pub fn manufactured_strip_1d(grid: &TorusGrid, intervals: usize, alpha: f64) -> Result<StripField> {
    if grid.dims() != 1 {
        return Err(Error::InvalidGrid("the 1-D manufactured strip needs n=1".into()));
    }
    StripField::from_fn(grid, intervals, |x, t| {
        0.5 * t * t + alpha * t * (2.0 * PI * x[0]).sin()
    })
}

/// `t²/2 + α t (sin 2πx₁ + ½ sin 2π(x₁+x₂))` on an n=2 grid.
pub fn manufactured_strip_2d(grid: &TorusGrid, intervals: usize, alpha: f64) -> Result<StripField> {
    if grid.dims() != 2 {
        return Err(Error::InvalidGrid("the 2-D manufactured strip needs n=2".into()));
    }
    StripField::from_fn(grid, intervals, |x, t| {
        0.5 * t * t
            + alpha * t * ((2.0 * PI * x[0]).sin() + 0.5 * (2.0 * PI * (x[0] + x[1])).sin())
    })
}

/// The manufactured strip matching the grid dimension.
pub fn manufactured_strip(grid: &TorusGrid, intervals: usize) -> Result<StripField> {
    match grid.dims() {
        1 => manufactured_strip_1d(grid, intervals, MANUFACTURED_ALPHA_1D),
        2 => manufactured_strip_2d(grid, intervals, MANUFACTURED_ALPHA_2D),
        n => Err(Error::InvalidGrid(format!("no manufactured strip for n={n}"))),
    }
}

/// One term `c cos(2π k·x) + s sin(2π k·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMode {
    pub k: Vec<i64>,
    pub cos: f64,
    pub sin: f64,
}

pub fn trig_value(modes: &[TrigMode], x: &[f64]) -> f64 {
    modes
        .iter()
        .map(|m| {
            let phase = 2.0 * PI * m.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum::<f64>();
            m.cos * phase.cos() + m.sin * phase.sin()
        })
        .sum()
}

pub fn trig_polynomial(grid: &TorusGrid, modes: &[TrigMode]) -> Result<TorusField> {
    if let Some(m) = modes.iter().find(|m| m.k.len() != grid.dims()) {
        return Err(Error::InvalidArgument(format!(
            "mode {:?} does not match grid dimension {}",
            m.k,
            grid.dims()
        )));
    }
    Ok(TorusField::from_fn(grid, |x| trig_value(modes, x)))
}
