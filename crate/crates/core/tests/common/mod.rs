#![allow(dead_code)]

use pleg_core::cases::{self, TrigMode};
use pleg_core::torus_field::{PeriodicPotential, TorusGrid};
use proptest::prelude::*;

/// Up to `count` modes with wavenumbers in `-kmax..=kmax` per axis.
pub fn modes(dims: usize, kmax: i64, count: usize) -> impl Strategy<Value = Vec<TrigMode>> {
    proptest::collection::vec(
        (proptest::collection::vec(-kmax..=kmax, dims), -1.0f64..1.0, -1.0f64..1.0),
        1..=count,
    )
    .prop_map(|ms| ms.into_iter().map(|(k, cos, sin)| TrigMode { k, cos, sin }).collect())
}

/// The trig polynomial rescaled so that its Hessian margin is `1 - curvature`
/// (or the polynomial is constant).
pub fn potential(grid: &TorusGrid, modes: &[TrigMode], curvature: f64) -> PeriodicPotential {
    let raw = cases::trig_polynomial(grid, modes).unwrap();
    let dims = grid.dims();
    let mut worst: f64 = 0.0;
    for m in raw.hessian_plus_identity() {
        let shifted = m - nalgebra::DMatrix::<f64>::identity(dims, dims);
        worst = worst.max(shifted.symmetric_eigenvalues().amax());
    }
    let scale = if worst > 0.0 { curvature / worst } else { 0.0 };
    PeriodicPotential::new(raw.map(|v| v * scale)).unwrap()
}
