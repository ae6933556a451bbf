use std::ops::Deref;

use super::field::{TorusField, hessian_margin};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// A periodic potential with a certified convexity margin: the smallest
/// eigenvalue of `D²u + I` over the grid nodes, which must be positive.
#[derive(Debug, Clone)]
pub struct PeriodicPotential {
    field: TorusField,
    margin: f64,
}

impl PeriodicPotential {
    pub fn new(field: TorusField) -> Result<Self> {
        let margin = hessian_margin(&field);
        if margin.is_nan() || margin <= 0.0 {
            return Err(Error::NotConvex { margin });
        }
        Ok(Self { field, margin })
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new(TorusField::from_fn(grid, f))
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn field(&self) -> &TorusField {
        &self.field
    }

    pub fn into_field(self) -> TorusField {
        self.field
    }
}

impl Deref for PeriodicPotential {
    type Target = TorusField;

    fn deref(&self) -> &TorusField {
        &self.field
    }
}
