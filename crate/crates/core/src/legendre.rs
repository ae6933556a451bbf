//! The partial Legendre change of variables `y = ∇u(x) + x`, its inverse,
//! and the conjugate potential `f(y) = -½|x - y|² - u(x)`.
//!
//! `∇u(x) + x` is the gradient of the proper strictly convex function
//! `u + ½|x|²`, so it is a bijection of `Rⁿ` commuting with integer shifts.
//! [`invert_map`] returns the unique preimage in `Rⁿ`; no reduction modulo
//! the lattice is applied, so `invert_map(u, y + e_i) = invert_map(u, y) + e_i`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg;
use crate::torus_field::{PeriodicPotential, StripField, TorusField, TorusGrid, hessian_margin, io};

/// Residual tolerance `|∇u(x) + x - y|` accepted by [`invert_map`].
pub const INVERSION_TOLERANCE: f64 = 1e-12;
pub const MAX_INVERSION_ITERATIONS: usize = 100;

/// A potential, its conjugate on a y-grid of the same sizes, the tabulated
/// inverse map and the metric determinants on both sides.
#[derive(Debug, Clone)]
pub struct TransformPair {
    pub u: PeriodicPotential,
    pub f: PeriodicPotential,
    /// `x(y_j)` per y-node, unreduced real coordinates.
    pub x_of_y: Vec<Vec<f64>>,
    /// `det(D²u + I)` at the x-nodes.
    pub det_g: Vec<f64>,
    /// `det(D²f + I)` at the y-nodes.
    pub det_h: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PairManifest {
    pub n: usize,
    #[serde(rename = "N")]
    pub sizes: Vec<usize>,
    pub margin_u: f64,
    pub margin_f: f64,
}

impl TransformPair {
    pub fn grid(&self) -> &TorusGrid {
        self.u.grid()
    }

    pub fn manifest(&self) -> PairManifest {
        PairManifest {
            n: self.grid().dims(),
            sizes: self.grid().sizes().to_vec(),
            margin_u: self.u.margin(),
            margin_f: self.f.margin(),
        }
    }

    /// Component `axis` of `x(y) - y` as a periodic field on the y-grid.
    pub fn displacement(&self, axis: usize) -> TorusField {
        let grid = self.f.grid();
        let values = (0..grid.len())
            .map(|j| self.x_of_y[j][axis] - grid.node(j)[axis])
            .collect();
        TorusField::new(grid.clone(), values).expect("one value per node")
    }

    /// `det(D²u + I)` interpolated at each mapped point `x(y_j)`.
    pub fn det_g_at_mapped(&self) -> Vec<f64> {
        exec::map_range(self.x_of_y.len(), |j| {
            linalg::det(&self.u.partials(&self.x_of_y[j]).hessian_plus_identity())
        })
    }

    /// `max_j |det g(x(y_j)) · det h(y_j) - 1|`.
    pub fn reciprocity_error(&self) -> f64 {
        self.det_g_at_mapped()
            .iter()
            .zip(&self.det_h)
            .map(|(g, h)| (g * h - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `∂x/∂y - (D²u + I)⁻¹(x(y))` over the y-nodes, with
    /// `∂x/∂y` from spectral derivatives of the tabulated map.
    pub fn jacobian_error(&self) -> Result<f64> {
        let n = self.grid().dims();
        let mut dx = vec![vec![None; n]; n];
        for (a, row) in dx.iter_mut().enumerate() {
            let d = self.displacement(a);
            for (b, slot) in row.iter_mut().enumerate() {
                *slot = Some(d.partial(b, 1)?);
            }
        }
        let errs = exec::map_range(self.x_of_y.len(), |j| {
            let g = self.u.partials(&self.x_of_y[j]).hessian_plus_identity();
            let ginv = linalg::inverse(&g).expect("positive definite");
            let mut worst: f64 = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let jac = dx[a][b].as_ref().unwrap().values()[j] + if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((jac - ginv[(a, b)]).abs());
                }
            }
            worst
        });
        Ok(errs.into_iter().fold(0.0, f64::max))
    }
}

/// `y(x) = ∇u(x) + x` at every x-node, one vector per node.
pub fn forward_map(u: &PeriodicPotential) -> Result<Vec<Vec<f64>>> {
    ensure_convex(u)?;
    let n = u.dims();
    let grads = (0..n)
        .map(|a| u.partial(a, 1))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..u.grid().len())
        .map(|j| {
            let x = u.grid().node(j);
            (0..n).map(|a| grads[a].values()[j] + x[a]).collect()
        })
        .collect())
}

/// The unique `x ∈ Rⁿ` with `∇u(x) + x = y`.
///
/// In one dimension the map is strictly increasing with slope at least the
/// margin; the root is bracketed, bisected to a narrow interval and polished
/// by safeguarded Newton. In higher dimensions damped Newton on `∇v(x) = y`
/// (`v = u + ½|x|²`) is seeded at `x = y` and the step is halved until the
/// residual decreases.
pub fn invert_map(u: &PeriodicPotential, y: &[f64]) -> Result<Vec<f64>> {
    ensure_convex(u)?;
    if y.len() != u.dims() {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates for a {}-dimensional potential",
            y.len(),
            u.dims()
        )));
    }
    if u.dims() == 1 {
        invert_1d(u, y[0]).map(|x| vec![x])
    } else {
        invert_newton(u, y)
    }
}

fn ensure_convex(u: &PeriodicPotential) -> Result<()> {
    if u.margin() > 0.0 {
        Ok(())
    } else {
        Err(Error::NotConvex { margin: u.margin() })
    }
}

fn invert_1d(u: &PeriodicPotential, y: f64) -> Result<f64> {
    let phi = |x: f64| x + u.eval_derivative(&[x], &[1]) - y;
    let mut iterations = 0;
    // The gradient of a periodic function with 1 + u_xx > 0 has oscillation
    // below one period, so [y - 1, y + 1] brackets almost always; widen if not.
    let (mut lo, mut hi) = (y - 1.0, y + 1.0);
    let (mut flo, mut fhi) = (phi(lo), phi(hi));
    while flo > 0.0 || fhi < 0.0 {
        iterations += 1;
        if iterations > MAX_INVERSION_ITERATIONS {
            return Err(Error::ConvergenceFailure {
                what: "inverse map bracketing",
                iterations,
                residual: flo.abs().max(fhi.abs()),
            });
        }
        if flo > 0.0 {
            lo -= 1.0;
            flo = phi(lo);
        }
        if fhi < 0.0 {
            hi += 1.0;
            fhi = phi(hi);
        }
    }
    while hi - lo > 1e-3 && iterations < MAX_INVERSION_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let fm = phi(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut best = (x, f64::INFINITY);
    while iterations < MAX_INVERSION_ITERATIONS {
        iterations += 1;
        let p = u.partials(&[x]);
        let r = x + p.grad[0] - y;
        if r.abs() < best.1 {
            best = (x, r.abs());
        }
        if r.abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
            break;
        }
        if r < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        let mut next = x - r / (1.0 + p.hess[0][0]);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            break;
        }
        x = next;
    }
    if best.1 <= INVERSION_TOLERANCE {
        Ok(best.0)
    } else {
        Err(Error::ConvergenceFailure {
            what: "inverse map",
            iterations,
            residual: best.1,
        })
    }
}

fn invert_newton(u: &PeriodicPotential, y: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    let residual = |x: &DVector<f64>| -> DVector<f64> {
        let p = u.partials(x.as_slice());
        DVector::from_fn(n, |a, _| p.grad[a] + x[a] - y[a])
    };
    let mut x = DVector::from_column_slice(y);
    let mut r = residual(&x);
    let mut rnorm = r.amax();
    let mut iterations = 0;
    while iterations < MAX_INVERSION_ITERATIONS {
        if rnorm <= 4.0 * f64::EPSILON * y.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
            break;
        }
        iterations += 1;
        let jac: DMatrix<f64> = u.partials(x.as_slice()).hessian_plus_identity();
        let step = match jac.clone().lu().solve(&r) {
            Some(s) => s,
            None => break,
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &x - &step * lambda;
            let rt = residual(&trial);
            let tn = rt.amax();
            if tn < rnorm {
                x = trial;
                r = rt;
                rnorm = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if rnorm <= INVERSION_TOLERANCE {
        Ok(x.iter().copied().collect())
    } else {
        Err(Error::ConvergenceFailure {
            what: "inverse map",
            iterations,
            residual: rnorm,
        })
    }
}

/// Conjugate potential on the uniform y-grid of the same sizes.
pub fn partial_transform(u: &PeriodicPotential) -> Result<TransformPair> {
    ensure_convex(u)?;
    let grid = u.grid().clone();
    let solved = exec::try_map_range(grid.len(), |j| {
        let y = grid.node(j);
        let x = invert_map(u, &y)?;
        let dist2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        let fy = -0.5 * dist2 - u.interpolate(&x);
        Ok::<_, Error>((x, fy))
    })?;
    let (x_of_y, fvals): (Vec<_>, Vec<_>) = solved.into_iter().unzip();
    let f_field = TorusField::new(grid.clone(), fvals)?;
    let f = PeriodicPotential::new(f_field).map_err(|e| match e {
        Error::NotConvex { margin } => Error::InvariantViolation(format!(
            "conjugate lost convexity (margin {margin:.3e}); grid too coarse for this potential"
        )),
        other => other,
    })?;
    let det_g = u.hessian_plus_identity().iter().map(linalg::det).collect();
    let det_h = f.hessian_plus_identity().iter().map(linalg::det).collect();
    Ok(TransformPair {
        u: u.clone(),
        f,
        x_of_y,
        det_g,
        det_h,
    })
}

/// Writes `u.csv`, `f.csv`, `det_g.csv`, `det_h.csv`, one `x_of_y_<k>.csv`
/// per axis and `manifest.json` into `dir`.
pub fn write_pair_bundle(dir: &Path, pair: &TransformPair) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let (xg, yg) = (pair.u.grid(), pair.f.grid());
    let put = |name: String, field: &TorusField| io::write_atomic(&dir.join(name), io::field_to_string(field).as_bytes());
    put("u.csv".into(), pair.u.field())?;
    put("f.csv".into(), pair.f.field())?;
    put("det_g.csv".into(), &TorusField::new(xg.clone(), pair.det_g.clone())?)?;
    put("det_h.csv".into(), &TorusField::new(yg.clone(), pair.det_h.clone())?)?;
    for k in 0..yg.dims() {
        let values = pair.x_of_y.iter().map(|x| x[k]).collect();
        put(format!("x_of_y_{k}.csv"), &TorusField::new(yg.clone(), values)?)?;
    }
    let manifest = serde_json::to_string_pretty(&pair.manifest())? + "\n";
    io::write_atomic(&dir.join("manifest.json"), manifest.as_bytes())
}

/// Recovers the potential from its conjugate. The transform is an
/// involution, so this is the conjugate of `pair.f`.
pub fn inverse_transform(pair: &TransformPair) -> Result<PeriodicPotential> {
    Ok(partial_transform(&pair.f)?.f)
}

/// Transforms a strip slice by slice (`s = t`). Each level must be strictly
/// convex in `x`.
pub fn partial_transform_strip(u: &StripField) -> Result<Vec<TransformPair>> {
    let potentials = u
        .slices()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let margin = hessian_margin(s);
            if margin > 0.0 {
                PeriodicPotential::new(s.clone())
            } else {
                Err(Error::SliceNotConvex { slice: k, margin })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    exec::try_map_range(potentials.len(), |k| partial_transform(&potentials[k]))
}

/// Strip of the conjugates from [`partial_transform_strip`].
pub fn conjugate_strip(pairs: &[TransformPair]) -> Result<StripField> {
    StripField::new(pairs.iter().map(|p| p.f.field().clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(n: usize, a: f64) -> PeriodicPotential {
        let g = TorusGrid::new(&[n]).unwrap();
        PeriodicPotential::from_fn(&g, |x| -(a / (2.0 * PI)) * (2.0 * PI * x[0]).cos()).unwrap()
    }

    /// Independent root of `x + a sin(2πx) = y` by pure bisection.
    fn bisect(a: f64, y: f64) -> f64 {
        let (mut lo, mut hi) = (y - 1.0, y + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + a * (2.0 * PI * mid).sin() < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn forward_map_examples() {
        let g = TorusGrid::new(&[16]).unwrap();
        let zero = PeriodicPotential::new(TorusField::constant(&g, 0.0)).unwrap();
        for (j, y) in forward_map(&zero).unwrap().iter().enumerate() {
            assert_eq!(y[0], g.node(j)[0]);
        }
        let u = cosine(16, 0.1);
        for (j, y) in forward_map(&u).unwrap().iter().enumerate() {
            let x = g.node(j)[0];
            assert!((y[0] - (x + 0.1 * (2.0 * PI * x).sin())).abs() < 1e-14);
        }
        let g2 = TorusGrid::new(&[16, 8]).unwrap();
        let u2 = PeriodicPotential::from_fn(&g2, |x| {
            -(0.05 / (2.0 * PI)) * ((2.0 * PI * x[0]).cos() + (2.0 * PI * x[1]).cos())
        })
        .unwrap();
        for (j, y) in forward_map(&u2).unwrap().iter().enumerate() {
            let x = g2.node(j);
            for a in 0..2 {
                assert!((y[a] - (x[a] + 0.05 * (2.0 * PI * x[a]).sin())).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn invert_examples() {
        let u = cosine(32, 0.1);
        assert!((invert_map(&u, &[0.5]).unwrap()[0] - 0.5).abs() < 1e-14);
        let x = invert_map(&u, &[0.25]).unwrap()[0];
        assert!((x - bisect(0.1, 0.25)).abs() < 1e-12);
        let zero = PeriodicPotential::new(TorusField::constant(u.grid(), 0.0)).unwrap();
        assert!((invert_map(&zero, &[0.731]).unwrap()[0] - 0.731).abs() < 1e-15);
    }

    #[test]
    fn invert_rejects_wrong_dimension() {
        let u = cosine(16, 0.1);
        assert!(matches!(invert_map(&u, &[0.1, 0.2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn shift_equivariance_2d() {
        let g = TorusGrid::new(&[16, 16]).unwrap();
        let u = PeriodicPotential::from_fn(&g, |x| {
            0.01 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos() + 0.005 * (2.0 * PI * (x[0] - x[1])).cos()
        })
        .unwrap();
        let y = [0.3, 0.71];
        let x = invert_map(&u, &y).unwrap();
        for axis in 0..2 {
            let mut ys = y;
            ys[axis] += 1.0;
            let xs = invert_map(&u, &ys).unwrap();
            for a in 0..2 {
                let shift = if a == axis { 1.0 } else { 0.0 };
                assert!((xs[a] - x[a] - shift).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_of_constant() {
        let g = TorusGrid::new(&[8, 8]).unwrap();
        let u = PeriodicPotential::new(TorusField::constant(&g, 0.3)).unwrap();
        let pair = partial_transform(&u).unwrap();
        assert!(pair.f.values().iter().all(|v| (v + 0.3).abs() < 1e-15));
        for (j, x) in pair.x_of_y.iter().enumerate() {
            assert_eq!(x, &g.node(j));
        }
        let back = inverse_transform(&pair).unwrap();
        assert!(back.values().iter().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn transform_matches_bisection_oracle() {
        let u = cosine(64, 0.1);
        let pair = partial_transform(&u).unwrap();
        for (j, fy) in pair.f.values().iter().enumerate() {
            let y = j as f64 / 64.0;
            let x = bisect(0.1, y);
            let want = -0.5 * (x - y) * (x - y) + (0.1 / (2.0 * PI)) * (2.0 * PI * x).cos();
            assert!((fy - want).abs() < 1e-11, "node {j}: {fy} vs {want}");
        }
    }

    #[test]
    fn strip_transform_detects_bad_slice() {
        let g = TorusGrid::new(&[16]).unwrap();
        let u = StripField::from_fn(&g, 4, |x, t| -(t * 0.3 / (2.0 * PI)) * (2.0 * PI * x[0]).cos()).unwrap();
        match partial_transform_strip(&u) {
            Err(Error::SliceNotConvex { slice, .. }) => assert_eq!(slice, 3),
            other => panic!("expected SliceNotConvex, got {other:?}"),
        }
    }
}
