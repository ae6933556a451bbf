use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on the unit torus `(R/Z)^n`, `n ≤ 3`, row-major node order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    sizes: Vec<usize>,
}

impl TorusGrid {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {}",
                sizes.len()
            )));
        }
        if let Some(&bad) = sizes.iter().find(|&&n| n < 8 || n % 2 != 0) {
            return Err(Error::InvalidGrid(format!(
                "sample counts must be even and >= 8, got {bad}"
            )));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
        })
    }

    /// Grid with the same count `n` in each of `dims` directions.
    pub fn cube(dims: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; dims])
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        1.0 / self.sizes[axis] as f64
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis indices of the flat node index `flat`.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for axis in (0..self.dims()).rev() {
            idx[axis] = flat % self.sizes[axis];
            flat /= self.sizes[axis];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&i, &n)| acc * n + i % n)
    }

    /// Coordinates `j_i / N_i` of node `flat`.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let idx = self.multi_index(flat);
        (0..self.dims())
            .map(|a| idx[a] as f64 / self.sizes[a] as f64)
            .collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|j| self.node(j))
    }

    /// Signed wavenumber of FFT bin `i` on an axis of `n` points. The
    /// Nyquist bin reports `+n/2`.
    pub fn wavenumber(i: usize, n: usize) -> i64 {
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }
}
