//! Damped Newton on the centered finite-difference discretization of
//! `u_tt (1 + u_xx) - u_xt² = ε` with both boundary slices held fixed.
//!
//! Unknowns are the interior levels, slice after slice. Inside a slice the
//! periodic nodes are interleaved from both ends (`0, N-1, 1, N-2, ...`) so
//! that x-neighbours, including the wrap-around pair, are at most two
//! positions apart and the Jacobian is banded with half-width `N + 2`.

use super::banded::BandMatrix;
use super::{BoundaryData, validate_epsilon};
use crate::error::{Error, Result};
use crate::torus_field::{StripField, TorusField};

pub const FD_RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const FD_MAX_NEWTON_STEPS: usize = 50;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone)]
pub struct FdSolution {
    pub u: StripField,
    pub newton_steps: usize,
    /// Sup-norm of the discrete residual at the returned iterate.
    pub residual: f64,
}

struct Layout {
    n: usize,
    m: usize,
    hx: f64,
    ht: f64,
}

impl Layout {
    fn position(&self, j: usize) -> usize {
        if j < self.n / 2 {
            2 * j
        } else {
            2 * (self.n - 1 - j) + 1
        }
    }

    /// Unknown index of node `j` on interior level `k ∈ 1..m`.
    fn index(&self, k: usize, j: usize) -> usize {
        (k - 1) * self.n + self.position(j)
    }

    fn unknowns(&self) -> usize {
        (self.m - 1) * self.n
    }
}

/// Local second differences at `(k, j)`: `(u_tt, u_xx, u_xt)`.
fn stencil(levels: &[Vec<f64>], lay: &Layout, k: usize, j: usize) -> (f64, f64, f64) {
    let n = lay.n;
    let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
    let (up, mid, dn) = (&levels[k + 1], &levels[k], &levels[k - 1]);
    let utt = (up[j] - 2.0 * mid[j] + dn[j]) / (lay.ht * lay.ht);
    let uxx = (mid[jp] - 2.0 * mid[j] + mid[jm]) / (lay.hx * lay.hx);
    let uxt = (up[jp] - up[jm] - dn[jp] + dn[jm]) / (4.0 * lay.hx * lay.ht);
    (utt, uxx, uxt)
}

fn residual(levels: &[Vec<f64>], lay: &Layout, epsilon: f64) -> Vec<f64> {
    let mut r = vec![0.0; lay.unknowns()];
    for k in 1..lay.m {
        for j in 0..lay.n {
            let (utt, uxx, uxt) = stencil(levels, lay, k, j);
            r[lay.index(k, j)] = utt * (1.0 + uxx) - uxt * uxt - epsilon;
        }
    }
    r
}

fn jacobian(levels: &[Vec<f64>], lay: &Layout) -> BandMatrix {
    let n = lay.n;
    let band = n + 2;
    let mut jac = BandMatrix::zeros(lay.unknowns(), band, band);
    let (ht2, hx2, hxt) = (lay.ht * lay.ht, lay.hx * lay.hx, 4.0 * lay.hx * lay.ht);
    for k in 1..lay.m {
        for j in 0..n {
            let row = lay.index(k, j);
            let (utt, uxx, uxt) = stencil(levels, lay, k, j);
            let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
            let a = 1.0 + uxx;
            let mut put = |kk: usize, jj: usize, v: f64| {
                if kk >= 1 && kk < lay.m {
                    jac.add(row, lay.index(kk, jj), v);
                }
            };
            put(k, j, -2.0 * a / ht2 - 2.0 * utt / hx2);
            put(k + 1, j, a / ht2);
            put(k - 1, j, a / ht2);
            put(k, jp, utt / hx2);
            put(k, jm, utt / hx2);
            let c = 2.0 * uxt / hxt;
            put(k + 1, jp, -c);
            put(k + 1, jm, c);
            put(k - 1, jp, c);
            put(k - 1, jm, -c);
        }
    }
    jac
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min_margin(levels: &[Vec<f64>], lay: &Layout) -> f64 {
    let mut worst = f64::INFINITY;
    for mid in levels {
        for j in 0..lay.n {
            let (jm, jp) = ((j + lay.n - 1) % lay.n, (j + 1) % lay.n);
            worst = worst.min(1.0 + (mid[jp] - 2.0 * mid[j] + mid[jm]) / (lay.hx * lay.hx));
        }
    }
    worst
}

fn apply(levels: &mut [Vec<f64>], lay: &Layout, delta: &[f64], scale: f64) {
    for k in 1..lay.m {
        for j in 0..lay.n {
            levels[k][j] += scale * delta[lay.index(k, j)];
        }
    }
}

/// Discrete residual `u_tt(1+u_xx) - u_xt² - ε` at the interior levels of
/// `u`, centered differences in both variables.
pub fn fd_residual(u: &StripField, epsilon: f64) -> Result<f64> {
    if u.grid().dims() != 1 || u.intervals() < 2 {
        return Err(Error::InvalidArgument("need an n=1 strip with at least 3 levels".into()));
    }
    let lay = Layout {
        n: u.grid().len(),
        m: u.intervals(),
        hx: 1.0 / u.grid().len() as f64,
        ht: u.dt(),
    };
    let levels: Vec<Vec<f64>> = u.slices().iter().map(|s| s.values().to_vec()).collect();
    Ok(sup(&residual(&levels, &lay, epsilon)))
}

/// Newton solve of the discrete 1+1 equation on the boundary grid with
/// `intervals` levels in t, seeded by `(1-t)u0 + t u1 + ε t(t-1)/2`.
pub fn fd_reference_solver(b: &BoundaryData, epsilon: f64, intervals: usize) -> Result<FdSolution> {
    validate_epsilon(epsilon)?;
    if intervals < 2 {
        return Err(Error::InvalidArgument(format!(
            "the FD oracle needs at least 2 intervals in t, got {intervals}"
        )));
    }
    let grid = b.grid().clone();
    let lay = Layout {
        n: grid.len(),
        m: intervals,
        hx: 1.0 / grid.len() as f64,
        ht: 1.0 / intervals as f64,
    };
    let (u0, u1) = (b.u0.values(), b.u1.values());
    let mut levels: Vec<Vec<f64>> = (0..=intervals)
        .map(|k| {
            let t = k as f64 * lay.ht;
            (0..lay.n)
                .map(|j| (1.0 - t) * u0[j] + t * u1[j] + 0.5 * epsilon * t * (t - 1.0))
                .collect()
        })
        .collect();

    let mut r = residual(&levels, &lay, epsilon);
    let mut norm = sup(&r);
    let mut step = 0;
    while norm > FD_RESIDUAL_TOLERANCE {
        if step == FD_MAX_NEWTON_STEPS {
            return Err(Error::ConvergenceFailure {
                what: "finite-difference Newton",
                iterations: step,
                residual: norm,
            });
        }
        step += 1;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = jacobian(&levels, &lay).factor()?.solve(&rhs);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            apply(&mut levels, &lay, &delta, scale);
            let trial = residual(&levels, &lay, epsilon);
            let trial_norm = sup(&trial);
            if trial_norm < norm {
                r = trial;
                norm = trial_norm;
                accepted = true;
                break;
            }
            apply(&mut levels, &lay, &delta, -scale);
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::ConvergenceFailure {
                what: "finite-difference Newton line search",
                iterations: step,
                residual: norm,
            });
        }
        let margin = min_margin(&levels, &lay);
        if !(margin > 0.0) {
            return Err(Error::ConvexityLost { step, margin });
        }
    }

    let slices = levels
        .into_iter()
        .map(|v| TorusField::new(grid.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    Ok(FdSolution {
        u: StripField::new(slices)?,
        newton_steps: step,
        residual: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::torus_field::{PeriodicPotential, TorusGrid};

    fn constant_boundary(n: usize, c0: f64, c1: f64) -> BoundaryData {
        let g = TorusGrid::new(&[n]).unwrap();
        BoundaryData::new(
            PeriodicPotential::new(TorusField::constant(&g, c0)).unwrap(),
            PeriodicPotential::new(TorusField::constant(&g, c1)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn interleaved_positions_are_a_permutation() {
        let lay = Layout { n: 10, m: 4, hx: 0.1, ht: 0.25 };
        let mut seen: Vec<usize> = (0..10).map(|j| lay.position(j)).collect();
        seen.sort();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        for j in 0..10 {
            let d = lay.position(j).abs_diff(lay.position((j + 1) % 10));
            assert!(d <= 2);
        }
    }

    #[test]
    fn quadratic_solutions_are_exact() {
        let eps = 0.3;
        let b = constant_boundary(16, 0.2, 0.2);
        let sol = fd_reference_solver(&b, eps, 12).unwrap();
        for k in 0..=12 {
            let t = sol.u.level(k);
            assert!((sol.u.at(k, 5) - (0.2 + 0.5 * eps * t * (t - 1.0))).abs() < 1e-10);
        }
        let b = constant_boundary(16, 0.0, 0.5 * eps);
        let sol = fd_reference_solver(&b, eps, 12).unwrap();
        for k in 0..=12 {
            let t = sol.u.level(k);
            assert!((sol.u.at(k, 0) - 0.5 * eps * t * t).abs() < 1e-10);
        }
    }

    #[test]
    fn cosine_boundary_converges() {
        let g = TorusGrid::new(&[32]).unwrap();
        let p = cases::cosine_potential(&g, 0.1).unwrap();
        let b = BoundaryData::new(p.clone(), p).unwrap();
        let sol = fd_reference_solver(&b, 0.1, 32).unwrap();
        assert!(sol.residual <= FD_RESIDUAL_TOLERANCE);
        assert!(fd_residual(&sol.u, 0.1).unwrap() <= FD_RESIDUAL_TOLERANCE);
        assert!(sol.newton_steps < 15);
    }
}
