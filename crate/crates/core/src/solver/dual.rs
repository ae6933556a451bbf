//! Exact per-mode solution of the dual equation on the circle.

use rustfft::num_complex::Complex64;

use super::validate_epsilon;
use crate::error::{Error, Result};
use crate::exec;
use crate::torus_field::{StripField, TorusField, TorusGrid, derivative_multiplier, fft_nd};

/// `d^k/da^k [sinh(μa) / sinh(μ)]`, with the `μ → 0` limit `a`.
///
/// Written as `e^{μ(a-1)} · expm1(-2μa) / expm1(-2μ)` (and the cosh
/// analogue for odd `k`) so that no intermediate exceeds `O(μ^k)`.
pub fn sinh_ratio_derivative(mu: f64, a: f64, k: u32) -> f64 {
    if mu == 0.0 {
        return match k {
            0 => a,
            1 => 1.0,
            _ => 0.0,
        };
    }
    let scale = (mu * (a - 1.0)).exp();
    let denom = (-2.0 * mu).exp_m1();
    if k.is_multiple_of(2) {
        mu.powi(k as i32) * scale * ((-2.0 * mu * a).exp_m1() / denom)
    } else {
        // μ cosh(μa)/sinh(μ) = 2μ/(1 - e^{-2μ}) · e^{μ(a-1)} (1 + e^{-2μa}) / 2
        let lead = -mu / denom;
        mu.powi(k as i32 - 1) * lead * scale * (1.0 + (-2.0 * mu * a).exp())
    }
}

/// Solution of `f̌_ss + ε f̌_yy = 0` on `S¹ × [0,1]` with Dirichlet data,
/// stored by Fourier mode so that every derivative is evaluated exactly.
#[derive(Debug, Clone)]
pub struct HomogeneousDualSolution {
    grid: TorusGrid,
    epsilon: f64,
    /// Normalized Fourier coefficients of the data at `s = 0` and `s = 1`.
    c0: Vec<Complex64>,
    c1: Vec<Complex64>,
    mu: Vec<f64>,
}

impl HomogeneousDualSolution {
    pub fn new(bottom: &TorusField, top: &TorusField, epsilon: f64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        if bottom.grid() != top.grid() {
            return Err(Error::InvalidGrid("boundary data live on different grids".into()));
        }
        if bottom.dims() != 1 {
            return Err(Error::InvalidGrid(format!(
                "the dual solve is one-dimensional, got n={}",
                bottom.dims()
            )));
        }
        let grid = bottom.grid().clone();
        let n = grid.len();
        let norm = |f: &TorusField| f.spectrum().iter().map(|c| c / n as f64).collect::<Vec<_>>();
        let root = epsilon.sqrt();
        let mu = (0..n)
            .map(|i| 2.0 * std::f64::consts::PI * (TorusGrid::wavenumber(i, n).unsigned_abs() as f64) * root)
            .collect();
        Ok(Self {
            c0: norm(bottom),
            c1: norm(top),
            grid,
            epsilon,
            mu,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Fourier coefficients of `∂_s^k f̌(·, s)`.
    pub fn coefficients(&self, s: f64, k: u32) -> Vec<Complex64> {
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        self.mu
            .iter()
            .zip(self.c0.iter().zip(&self.c1))
            .map(|(&mu, (a0, a1))| {
                let w0 = sign * sinh_ratio_derivative(mu, 1.0 - s, k);
                let w1 = sinh_ratio_derivative(mu, s, k);
                a0 * w0 + a1 * w1
            })
            .collect()
    }

    /// `∂_y^m ∂_s^k f̌(·, s)` on the grid.
    pub fn slice(&self, s: f64, m: u32, k: u32) -> TorusField {
        let n = self.grid.len();
        let mut c: Vec<Complex64> = self
            .coefficients(s, k)
            .into_iter()
            .enumerate()
            .map(|(i, c)| c * derivative_multiplier(i, n, m))
            .collect();
        fft_nd(&mut c, self.grid.sizes(), true);
        TorusField::new(self.grid.clone(), c.into_iter().map(|z| z.re).collect())
            .expect("grid length is preserved")
    }

    /// `∂_y^m ∂_s^k f̌` on `intervals + 1` equispaced levels.
    pub fn strip(&self, intervals: usize, m: u32, k: u32) -> Result<StripField> {
        if intervals == 0 {
            return Err(Error::InvalidArgument("strip needs at least one interval".into()));
        }
        let slices = exec::map_range(intervals + 1, |l| self.slice(l as f64 / intervals as f64, m, k));
        StripField::new(slices)
    }

    /// Sup-norm over nodes and levels of `∂_s² f̌ + ε ∂_y² f̌`, both terms exact.
    pub fn residual(&self, intervals: usize) -> Result<f64> {
        let ss = self.strip(intervals, 0, 2)?;
        let yy = self.strip(intervals, 2, 0)?;
        Ok(ss.zip_map(&yy, |a, b| a + self.epsilon * b).sup_norm())
    }
}

/// Solution of the inhomogeneous dual equation `f_ss + ε(1 + f_yy) = 0`,
/// held as `f = f̌ - ε s²/2` with `f̌` homogeneous.
#[derive(Debug, Clone)]
pub struct DualLaplaceSolution {
    homogeneous: HomogeneousDualSolution,
}

impl DualLaplaceSolution {
    pub fn homogeneous(&self) -> &HomogeneousDualSolution {
        &self.homogeneous
    }

    pub fn epsilon(&self) -> f64 {
        self.homogeneous.epsilon
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.homogeneous.grid
    }

    /// `∂_s^k f(·, s)`.
    pub fn slice(&self, s: f64, k: u32) -> TorusField {
        let eps = self.epsilon();
        let shift = match k {
            0 => -0.5 * eps * s * s,
            1 => -eps * s,
            2 => -eps,
            _ => 0.0,
        };
        self.homogeneous.slice(s, 0, k).map(|v| v + shift)
    }

    pub fn strip(&self, intervals: usize) -> Result<StripField> {
        if intervals == 0 {
            return Err(Error::InvalidArgument("strip needs at least one interval".into()));
        }
        StripField::new(exec::map_range(intervals + 1, |l| self.slice(l as f64 / intervals as f64, 0)))
    }

    /// Sup-norm of `f_ss + ε(1 + f_yy)` with exact s- and y-derivatives.
    pub fn residual(&self, intervals: usize) -> Result<f64> {
        let eps = self.epsilon();
        let worst = exec::map_range(intervals + 1, |l| {
            let s = l as f64 / intervals as f64;
            let ss = self.slice(s, 2);
            let yy = self.homogeneous.slice(s, 2, 0);
            ss.zip_map(&yy, |a, b| a + eps * (1.0 + b)).sup_norm()
        });
        Ok(worst.into_iter().fold(0.0, f64::max))
    }
}

/// Solves `f_ss + ε(1 + f_yy) = 0` with `f(·,0) = f0`, `f(·,1) = f1` through
/// `f̌ = f + ε s²/2`, which has data `f0` and `f1 + ε/2`.
pub fn solve_dual_laplace(f0: &TorusField, f1: &TorusField, epsilon: f64) -> Result<DualLaplaceSolution> {
    validate_epsilon(epsilon)?;
    let top = f1.map(|v| v + 0.5 * epsilon);
    Ok(DualLaplaceSolution {
        homogeneous: HomogeneousDualSolution::new(f0, &top, epsilon)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ratio_matches_naive_form() {
        for &mu in &[1e-6f64, 0.3, 2.0, 20.0] {
            for &a in &[0.0f64, 0.25, 0.7, 1.0] {
                let naive = (mu * a).sinh() / mu.sinh();
                assert!((sinh_ratio_derivative(mu, a, 0) - naive).abs() < 1e-13 * naive.max(1e-300).max(1.0));
                let d1 = mu * (mu * a).cosh() / mu.sinh();
                assert!((sinh_ratio_derivative(mu, a, 1) - d1).abs() < 1e-12 * d1.max(1.0));
                assert!((sinh_ratio_derivative(mu, a, 2) - mu * mu * naive).abs() < 1e-12 * (mu * mu).max(1.0));
            }
        }
    }

    #[test]
    fn no_overflow_for_large_mu() {
        let v = sinh_ratio_derivative(5000.0, 0.999, 3);
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(sinh_ratio_derivative(5000.0, 0.5, 0), 0.0);
        assert_eq!(sinh_ratio_derivative(5000.0, 1.0, 0), 1.0);
    }

    #[test]
    fn single_mode_closed_form() {
        let g = TorusGrid::new(&[16]).unwrap();
        let eps = 0.1;
        let zero = TorusField::constant(&g, 0.0);
        let top = TorusField::from_fn(&g, |y| (2.0 * PI * y[0]).cos());
        let h = HomogeneousDualSolution::new(&zero, &top, eps).unwrap();
        let mu = 2.0 * PI * eps.sqrt();
        for s in [0.0, 0.3, 1.0] {
            let slice = h.slice(s, 0, 0);
            for (j, y) in g.nodes().enumerate() {
                let want = (2.0 * PI * y[0]).cos() * (mu * s).sinh() / mu.sinh();
                assert!((slice.values()[j] - want).abs() < 1e-14);
            }
        }
        assert!(h.residual(8).unwrap() < 1e-12);
    }

    #[test]
    fn constant_mode_is_linear() {
        let g = TorusGrid::new(&[8]).unwrap();
        let h = HomogeneousDualSolution::new(&TorusField::constant(&g, 0.0), &TorusField::constant(&g, 0.7), 0.5)
            .unwrap();
        assert!((h.slice(0.4, 0, 0).values()[3] - 0.28).abs() < 1e-15);
        assert!((h.slice(0.4, 0, 1).values()[3] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn gauge_shift_gives_quadratic() {
        let g = TorusGrid::new(&[8]).unwrap();
        let eps = 0.25;
        let f0 = TorusField::constant(&g, 0.0);
        let f1 = TorusField::constant(&g, -0.5 * eps);
        let sol = solve_dual_laplace(&f0, &f1, eps).unwrap();
        let strip = sol.strip(4).unwrap();
        for l in 0..=4 {
            let s = strip.level(l);
            assert!((strip.at(l, 2) + 0.5 * eps * s * s).abs() < 1e-15);
        }
        assert!(sol.residual(4).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let g = TorusGrid::new(&[8]).unwrap();
        let z = TorusField::constant(&g, 0.0);
        for eps in [0.0, -0.1, 1.5, f64::NAN, f64::INFINITY] {
            assert!(solve_dual_laplace(&z, &z, eps).is_err());
        }
        assert!(solve_dual_laplace(&z, &z, 1.0).is_ok());
    }
}
