use super::field::TorusField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::fd::{self, Scheme};

/// Samples on `X × [0,1]`: `M+1` equispaced levels `t_k = k/M`, one
/// [`TorusField`] per level. Level 0 and level `M` carry the Dirichlet data.
#[derive(Debug, Clone)]
pub struct StripField {
    grid: TorusGrid,
    slices: Vec<TorusField>,
}

impl StripField {
    pub fn new(slices: Vec<TorusField>) -> Result<Self> {
        if slices.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a strip field needs at least 2 levels, got {}",
                slices.len()
            )));
        }
        let grid = slices[0].grid().clone();
        if slices.iter().any(|s| *s.grid() != grid) {
            return Err(Error::InvalidGrid("strip slices live on different grids".into()));
        }
        Ok(Self { grid, slices })
    }

    /// Samples `f(x, t)` on `intervals + 1` levels.
    pub fn from_fn(grid: &TorusGrid, intervals: usize, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidArgument("strip needs at least one interval".into()));
        }
        let h = 1.0 / intervals as f64;
        let slices = (0..=intervals)
            .map(|k| {
                let t = k as f64 * h;
                TorusField::from_fn(grid, |x| f(x, t))
            })
            .collect();
        Self::new(slices)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn slices(&self) -> &[TorusField] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &TorusField {
        &self.slices[k]
    }

    pub fn into_slices(self) -> Vec<TorusField> {
        self.slices
    }

    /// Number of intervals `M`; there are `M + 1` levels.
    pub fn intervals(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    pub fn level(&self, k: usize) -> f64 {
        k as f64 / self.intervals() as f64
    }

    /// Value at node `j` of level `k`.
    pub fn at(&self, k: usize, j: usize) -> f64 {
        self.slices[k].values()[j]
    }

    /// Samples of node `j` across all levels.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.slices.iter().map(|s| s.values()[j]).collect()
    }

    fn from_columns(&self, columns: Vec<Vec<f64>>) -> Result<StripField> {
        let levels = self.slices.len();
        let slices = (0..levels)
            .map(|k| TorusField::new(self.grid.clone(), columns.iter().map(|c| c[k]).collect()))
            .collect::<Result<Vec<_>>>()?;
        StripField::new(slices)
    }

    /// `∂_t^order` by finite differences, `order ∈ {1, 2}`.
    pub fn t_derivative(&self, order: usize, scheme: Scheme) -> Result<StripField> {
        let h = self.dt();
        let columns = crate::exec::try_map_range(self.grid.len(), |j| {
            // differences ignore a constant; removing it first saves digits
            let mut c = self.column(j);
            let base = c[0];
            c.iter_mut().for_each(|v| *v -= base);
            match order {
                1 => fd::d1(&c, h, scheme),
                2 => fd::d2(&c, h, scheme),
                _ => Err(Error::InvalidArgument(format!(
                    "t-derivative order must be 1 or 2, got {order}"
                ))),
            }
        })?;
        self.from_columns(columns)
    }

    /// Slicewise spectral derivative in the periodic variables.
    pub fn x_derivative(&self, order: &[i32]) -> Result<StripField> {
        let slices = crate::exec::try_map_range(self.slices.len(), |k| self.slices[k].derivative(order))?;
        StripField::new(slices)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> StripField {
        StripField {
            grid: self.grid.clone(),
            slices: self.slices.iter().map(|s| s.map(&f)).collect(),
        }
    }

    pub fn zip_map(&self, other: &StripField, f: impl Fn(f64, f64) -> f64) -> StripField {
        assert_eq!(self.slices.len(), other.slices.len(), "level counts differ");
        StripField {
            grid: self.grid.clone(),
            slices: self
                .slices
                .iter()
                .zip(&other.slices)
                .map(|(a, b)| a.zip_map(b, &f))
                .collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.slices.iter().map(TorusField::sup_norm).fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.slices.iter().map(TorusField::min).fold(f64::INFINITY, f64::min)
    }

    pub fn distance(&self, other: &StripField) -> f64 {
        assert_eq!(self.slices.len(), other.slices.len(), "level counts differ");
        self.slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    /// Keeps every `factor`-th level; `M` must be divisible by `factor`.
    pub fn coarsen_levels(&self, factor: usize) -> Result<StripField> {
        if factor == 0 || !self.intervals().is_multiple_of(factor) {
            return Err(Error::InvalidArgument(format!(
                "cannot coarsen {} intervals by {factor}",
                self.intervals()
            )));
        }
        StripField::new(self.slices.iter().step_by(factor).cloned().collect())
    }
}
