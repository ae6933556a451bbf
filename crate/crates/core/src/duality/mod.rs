//! Residual operators for the identities satisfied by a strip potential
//! `u(x,t)` and its slicewise conjugate `f(y,s)`.
//!
//! x/y-derivatives are spectral, t/s-derivatives are second-order finite
//! differences ([`crate::fd`]). `K = det(D²_{x,t}u + I_x)` is computed on the
//! u-side and carried to `(y,s)` by interpolation at the mapped points, so
//! the dual equation is a genuine cross-check rather than a tautology.

mod report;
mod symbol;

pub use report::{IdentityEntry, LaplaceDiagnostic, VerifyReport, verify_report};
pub use symbol::{
    DualSide, OperatorDerivatives, SYMBOL_AGREEMENT_TOLERANCE, SymbolValue, linearized_symbol, ma_operator_derivatives,
    primal_symbol,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec;
use crate::fd::Scheme;
use crate::legendre::{TransformPair, conjugate_strip, partial_transform_strip};
use crate::linalg;
use crate::torus_field::{Partials, StripField, TorusField, TorusGrid};

/// A strip potential, its conjugate and the quantities shared by the
/// identity checks.
#[derive(Debug, Clone)]
pub struct StripTransform {
    pub u: StripField,
    pub f: StripField,
    /// Per-level transform pairs; `pairs[k].x_of_y` tabulates `x(y, s_k)`.
    pub pairs: Vec<TransformPair>,
    /// `K = det(D²_{x,t}u + I_x)` at the u-nodes.
    pub k: StripField,
    /// `K` at the mapped points `(x(y,s), s)`, on the y-grid.
    pub k_mapped: StripField,
    /// `det(D²_{y,s}f + I_y)` at the y-nodes.
    pub k_tilde: StripField,
    u_t: StripField,
    u_tt: StripField,
    f_s: StripField,
    f_ss: StripField,
}

impl StripTransform {
    pub fn build(u: StripField) -> Result<Self> {
        if u.intervals() < 3 {
            return Err(Error::InvalidArgument(format!(
                "identity checks need at least 4 levels, got {}",
                u.intervals() + 1
            )));
        }
        let pairs = partial_transform_strip(&u)?;
        let f = conjugate_strip(&pairs)?;
        let k = ma_operator(&u)?;
        let u_t = u.t_derivative(1, Scheme::Second)?;
        let u_tt = u.t_derivative(2, Scheme::Second)?;
        let f_s = f.t_derivative(1, Scheme::Second)?;
        let f_ss = f.t_derivative(2, Scheme::Second)?;
        let mut st = Self {
            k_mapped: k.clone(),
            k_tilde: k.clone(),
            u,
            f,
            pairs,
            k,
            u_t,
            u_tt,
            f_s,
            f_ss,
        };
        st.k_mapped = st.pull_to_y(&st.k)?;
        st.k_tilde = st.compute_k_tilde()?;
        Ok(st)
    }

    pub fn dims(&self) -> usize {
        self.u.grid().dims()
    }

    pub fn grid(&self) -> &TorusGrid {
        self.u.grid()
    }

    pub fn levels(&self) -> usize {
        self.u.slices().len()
    }

    /// Mapped point `x(y_j, s_k)`.
    pub fn mapped_point(&self, k: usize, j: usize) -> &[f64] {
        &self.pairs[k].x_of_y[j]
    }

    /// Evaluates a u-side strip at the mapped points, giving a y-side strip.
    pub fn pull_to_y(&self, field: &StripField) -> Result<StripField> {
        let slices = exec::map_range(self.levels(), |k| {
            let vals = field.slice(k).sample_at(&self.pairs[k].x_of_y);
            TorusField::new(self.f.grid().clone(), vals)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        StripField::new(slices)
    }

    /// Partials of a u-side strip at every mapped point, `[level][node]`.
    pub fn partials_at_mapped(&self, field: &StripField) -> Vec<Vec<Partials>> {
        exec::map_range(self.levels(), |k| {
            let slice = field.slice(k);
            self.pairs[k].x_of_y.iter().map(|x| slice.partials(x)).collect()
        })
    }

    /// Component `axis` of `x(y,s) - y`, periodic in `y`.
    pub fn displacement(&self, axis: usize) -> Result<StripField> {
        StripField::new(self.pairs.iter().map(|p| p.displacement(axis)).collect())
    }

    pub fn u_t(&self) -> &StripField {
        &self.u_t
    }

    pub fn u_tt(&self) -> &StripField {
        &self.u_tt
    }

    pub fn f_s(&self) -> &StripField {
        &self.f_s
    }

    pub fn f_ss(&self) -> &StripField {
        &self.f_ss
    }

    /// `f_{s y_a}` for each axis.
    fn f_sy(&self) -> Result<Vec<StripField>> {
        (0..self.dims())
            .map(|a| self.f_s.x_derivative(&unit(self.dims(), a)))
            .collect()
    }

    fn compute_k_tilde(&self) -> Result<StripField> {
        let n = self.dims();
        let f_sy = self.f_sy()?;
        let slices = exec::try_map_range(self.levels(), |k| {
            let hs = self.f.slice(k).hessian_plus_identity();
            let vals = hs
                .iter()
                .enumerate()
                .map(|(j, h)| {
                    let mut m = DMatrix::zeros(n + 1, n + 1);
                    m[(0, 0)] = self.f_ss.at(k, j);
                    for a in 0..n {
                        let v = f_sy[a].at(k, j);
                        m[(0, a + 1)] = v;
                        m[(a + 1, 0)] = v;
                        for b in 0..n {
                            m[(a + 1, b + 1)] = h[(a, b)];
                        }
                    }
                    linalg::det(&m)
                })
                .collect();
            TorusField::new(self.f.grid().clone(), vals)
        })?;
        StripField::new(slices)
    }
}

pub(crate) fn unit(n: usize, axis: usize) -> Vec<i32> {
    let mut e = vec![0; n];
    e[axis] = 1;
    e
}

fn pair_index(n: usize, a: usize, b: usize) -> Vec<i32> {
    let mut e = vec![0; n];
    e[a] += 1;
    e[b] += 1;
    e
}

/// `det(D²_{x,t}u + I_x)` at every node: the `(n+1)×(n+1)` matrix with
/// corner `u_tt`, border `u_{t x_j}` and block `u_{x_j x_k} + δ_{jk}`.
pub fn ma_operator(u: &StripField) -> Result<StripField> {
    let n = u.grid().dims();
    let u_t = u.t_derivative(1, Scheme::Second)?;
    let u_tt = u.t_derivative(2, Scheme::Second)?;
    let u_tx = (0..n)
        .map(|a| u_t.x_derivative(&unit(n, a)))
        .collect::<Result<Vec<_>>>()?;
    let mut u_xx = vec![vec![None; n]; n];
    for a in 0..n {
        for b in a..n {
            u_xx[a][b] = Some(u.x_derivative(&pair_index(n, a, b))?);
        }
    }
    let levels = u.slices().len();
    let slices = exec::try_map_range(levels, |k| {
        let vals = (0..u.grid().len())
            .map(|j| {
                let mut m = DMatrix::zeros(n + 1, n + 1);
                m[(0, 0)] = u_tt.at(k, j);
                for a in 0..n {
                    m[(0, a + 1)] = u_tx[a].at(k, j);
                    m[(a + 1, 0)] = u_tx[a].at(k, j);
                    for b in 0..n {
                        let (lo, hi) = (a.min(b), a.max(b));
                        let v = u_xx[lo][hi].as_ref().unwrap().at(k, j);
                        m[(a + 1, b + 1)] = v + if a == b { 1.0 } else { 0.0 };
                    }
                }
                linalg::det(&m)
            })
            .collect();
        TorusField::new(u.grid().clone(), vals)
    })?;
    StripField::new(slices)
}

/// `f_ss + K det(D²_y f + I)` at every y-node; `k` must already live on the
/// y-side (see [`StripTransform::k_mapped`]).
pub fn dual_ma_operator(f: &StripField, k: &StripField) -> Result<StripField> {
    if f.slices().len() != k.slices().len() || f.grid() != k.grid() {
        return Err(Error::InvalidArgument("f and K must share grid and levels".into()));
    }
    let f_ss = f.t_derivative(2, Scheme::Second)?;
    let slices = exec::map_range(f.slices().len(), |level| {
        let hs = f.slice(level).hessian_plus_identity();
        let vals = hs
            .iter()
            .enumerate()
            .map(|(j, h)| f_ss.at(level, j) + k.at(level, j) * linalg::det(h))
            .collect();
        TorusField::new(f.grid().clone(), vals)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    StripField::new(slices)
}

/// Sup-norms of `∂_{y_j}u_t + ∂_s x_j` (max over j), `∂_s u_t - K/det g`
/// and `f_s + u_t`, with u-side quantities taken at the mapped points.
pub fn check_transform4(st: &StripTransform) -> Result<[f64; 3]> {
    let n = st.dims();
    let ut_y = st.pull_to_y(st.u_t())?;
    let mut first: f64 = 0.0;
    for a in 0..n {
        let lhs = ut_y.x_derivative(&unit(n, a))?;
        let xs = st.displacement(a)?.t_derivative(1, Scheme::Second)?;
        first = first.max(lhs.zip_map(&xs, |l, r| l + r).sup_norm());
    }
    let ds_ut = ut_y.t_derivative(1, Scheme::Second)?;
    let det_g: Vec<Vec<f64>> = exec::map_range(st.levels(), |k| st.pairs[k].det_g_at_mapped());
    let mut second: f64 = 0.0;
    for (k, dg) in det_g.iter().enumerate() {
        for (j, g) in dg.iter().enumerate() {
            second = second.max((ds_ut.at(k, j) - st.k_mapped.at(k, j) / g).abs());
        }
    }
    let third = st.f_s().zip_map(&ut_y, |fs, ut| fs + ut).sup_norm();
    Ok([first, second, third])
}

/// Sup-norms of `u_{t x_j} + f_{s y_k} h^{kj}` and
/// `u_tt + f_ss - f_{s y_j} f_{s y_k} h^{jk}`.
pub fn check_transform5(st: &StripTransform) -> Result<[f64; 2]> {
    let n = st.dims();
    let f_sy = st.f_sy()?;
    let ut_partials = st.partials_at_mapped(st.u_t());
    let utt_y = st.pull_to_y(st.u_tt())?;
    let per_level = exec::map_range(st.levels(), |k| {
        let hs = st.f.slice(k).hessian_plus_identity();
        let mut worst = [0.0f64; 2];
        for (j, h) in hs.iter().enumerate() {
            let hinv = linalg::inverse(h).expect("conjugate is strictly convex");
            let fsy = DVector::from_fn(n, |a, _| f_sy[a].at(k, j));
            let raised = &hinv * &fsy;
            for a in 0..n {
                worst[0] = worst[0].max((ut_partials[k][j].grad[a] + raised[a]).abs());
            }
            let rhs = -st.f_ss().at(k, j) + fsy.dot(&raised);
            worst[1] = worst[1].max((utt_y.at(k, j) - rhs).abs());
        }
        worst
    });
    Ok(per_level
        .into_iter()
        .fold([0.0, 0.0], |acc, w| [acc[0].max(w[0]), acc[1].max(w[1])]))
}

/// The bordered matrix assembled from dual data at one y-node, next to the
/// directly computed `D²_{x,t}u + I_x` at the mapped point, both expressed
/// in the eigenbasis of `h = D²_y f + I`.
#[derive(Debug, Clone)]
pub struct DualHessian {
    pub assembled: DMatrix<f64>,
    pub direct: DMatrix<f64>,
    /// Eigenvalues of `h`, ascending.
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl DualHessian {
    pub fn mismatch(&self) -> f64 {
        (&self.assembled - &self.direct).abs().max()
    }
}

/// Assembles `D²_{x,t}u + I_x` from dual-side quantities at `(y_node, s_level)`:
/// corner `-K̃ / det h`, border `-f̂_{s y_i} / λ_i`, block `diag(1/λ_i)`,
/// where `λ_i` and the hats refer to the eigenbasis of `h`.
pub fn assemble_dual_hessian(st: &StripTransform, level: usize, node: usize) -> Result<DualHessian> {
    let n = st.dims();
    if level >= st.levels() || node >= st.f.grid().len() {
        return Err(Error::InvalidArgument(format!(
            "point (level {level}, node {node}) outside the strip"
        )));
    }
    let f_sy = st.f_sy()?;
    let h = &st.f.slice(level).hessian_plus_identity()[node];
    let ut_p = st.u_t().slice(level).partials(st.mapped_point(level, node));
    let u_p = st.u.slice(level).partials(st.mapped_point(level, node));
    let utt = st.u_tt().slice(level).interpolate(st.mapped_point(level, node));
    Ok(bordered_from_parts(
        h,
        &DVector::from_fn(n, |a, _| f_sy[a].at(level, node)),
        st.k_tilde.at(level, node),
        utt,
        &ut_p,
        &u_p,
    ))
}

fn bordered_from_parts(
    h: &DMatrix<f64>,
    f_sy: &DVector<f64>,
    k_tilde: f64,
    u_tt: f64,
    ut_partials: &Partials,
    u_partials: &Partials,
) -> DualHessian {
    let n = h.nrows();
    let (lambda, q) = linalg::sym_eigen_sorted(h);
    let det_h: f64 = lambda.iter().product();
    let fhat = q.transpose() * f_sy;
    let mut assembled = DMatrix::zeros(n + 1, n + 1);
    assembled[(0, 0)] = -k_tilde / det_h;
    for i in 0..n {
        assembled[(0, i + 1)] = -fhat[i] / lambda[i];
        assembled[(i + 1, 0)] = -fhat[i] / lambda[i];
        assembled[(i + 1, i + 1)] = 1.0 / lambda[i];
    }
    let mut direct = DMatrix::zeros(n + 1, n + 1);
    direct[(0, 0)] = u_tt;
    let g = u_partials.hessian_plus_identity();
    for a in 0..n {
        direct[(0, a + 1)] = ut_partials.grad[a];
        direct[(a + 1, 0)] = ut_partials.grad[a];
        for b in 0..n {
            direct[(a + 1, b + 1)] = g[(a, b)];
        }
    }
    let mut p = DMatrix::identity(n + 1, n + 1);
    p.view_mut((1, 1), (n, n)).copy_from(&q);
    let direct = p.transpose() * direct * &p;
    DualHessian {
        assembled,
        direct,
        eigenvalues: lambda,
        eigenvectors: q,
    }
}

/// Max over all nodes of the matrix mismatch and of `|det(assembled) - K|`.
pub fn bordered_hessian_mismatch(st: &StripTransform) -> Result<(f64, f64)> {
    let n = st.dims();
    let f_sy = st.f_sy()?;
    let ut_partials = st.partials_at_mapped(st.u_t());
    let u_partials = st.partials_at_mapped(&st.u);
    let utt_y = st.pull_to_y(st.u_tt())?;
    let per_level = exec::map_range(st.levels(), |k| {
        let hs = st.f.slice(k).hessian_plus_identity();
        let mut worst = (0.0f64, 0.0f64);
        for (j, h) in hs.iter().enumerate() {
            let dh = bordered_from_parts(
                h,
                &DVector::from_fn(n, |a, _| f_sy[a].at(k, j)),
                st.k_tilde.at(k, j),
                utt_y.at(k, j),
                &ut_partials[k][j],
                &u_partials[k][j],
            );
            worst.0 = worst.0.max(dh.mismatch());
            worst.1 = worst.1.max((linalg::det(&dh.assembled) - st.k_mapped.at(k, j)).abs());
        }
        worst
    });
    Ok(per_level
        .into_iter()
        .fold((0.0, 0.0), |a, w| (a.0.max(w.0), a.1.max(w.1))))
}

/// `u_tt + Δu` at the u-nodes.
pub fn laplace_source(u: &StripField) -> Result<StripField> {
    let n = u.grid().dims();
    let mut k1 = u.t_derivative(2, Scheme::Second)?;
    for a in 0..n {
        let d = u.x_derivative(&pair_index(n, a, a))?;
        k1 = k1.zip_map(&d, |x, y| x + y);
    }
    Ok(k1)
}

/// Evaluates `K̃ + K₁ det g̃ - σ_{n-1}(g̃)` with `g̃ = D²_y f + I` and `K₁`
/// (u-side, e.g. from [`laplace_source`]) carried to the mapped points.
///
/// As written this residual equals `-n det g̃`, not zero: the trace of
/// `D²_{x,t}u + I_x` is `u_tt + Δu + n`. The diagnostic therefore also
/// reports the residual with `K₁` replaced by `K₁ + n`, which vanishes up to
/// discretization error.
pub fn hessian_laplace_residual(st: &StripTransform, k1: &StripField) -> Result<LaplaceDiagnostic> {
    let n = st.dims();
    let k1_y = st.pull_to_y(k1)?;
    let rows = exec::map_range(st.levels(), |k| {
        let hs = st.f.slice(k).hessian_plus_identity();
        hs.iter()
            .enumerate()
            .map(|(j, h)| {
                let (lambda, _) = linalg::sym_eigen_sorted(h);
                let lam: Vec<f64> = lambda.iter().copied().collect();
                let det_h = linalg::elementary_symmetric(&lam, n);
                let sigma = linalg::elementary_symmetric(&lam, n - 1);
                let kt = st.k_tilde.at(k, j);
                let raw = kt + k1_y.at(k, j) * det_h - sigma;
                let normalized = kt + (k1_y.at(k, j) + n as f64) * det_h - sigma;
                (raw, normalized)
            })
            .collect::<Vec<_>>()
    });
    let all: Vec<(f64, f64)> = rows.into_iter().flatten().collect();
    let count = all.len() as f64;
    Ok(LaplaceDiagnostic {
        sup_norm: all.iter().fold(0.0, |m, r| m.max(r.0.abs())),
        mean: all.iter().map(|r| r.0).sum::<f64>() / count,
        normalized_sup_norm: all.iter().fold(0.0, |m, r| m.max(r.1.abs())),
        trace_shift: n as f64,
    })
}

/// Sup-norms per component of `∂_s² x_j + ∂_{y_j}(K det(∂x/∂y))`.
pub fn rsw_residual(st: &StripTransform) -> Result<Vec<f64>> {
    let n = st.dims();
    let disp = (0..n).map(|a| st.displacement(a)).collect::<Result<Vec<_>>>()?;
    let mut jac = vec![vec![None; n]; n];
    for (a, row) in jac.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = Some(disp[a].x_derivative(&unit(n, b))?);
        }
    }
    let k_det = exec::map_range(st.levels(), |k| {
        let vals = (0..st.f.grid().len())
            .map(|j| {
                let m = DMatrix::from_fn(n, n, |a, b| {
                    jac[a][b].as_ref().unwrap().at(k, j) + if a == b { 1.0 } else { 0.0 }
                });
                st.k_mapped.at(k, j) * linalg::det(&m)
            })
            .collect();
        TorusField::new(st.f.grid().clone(), vals)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let k_det = StripField::new(k_det)?;
    (0..n)
        .map(|a| {
            let xss = disp[a].t_derivative(2, Scheme::Second)?;
            let dy = k_det.x_derivative(&unit(n, a))?;
            Ok(xss.zip_map(&dy, |p, q| p + q).sup_norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;

    #[test]
    fn ma_operator_examples() {
        let g = TorusGrid::new(&[16]).unwrap();
        let q = cases::quadratic_strip(&g, 8, 0.25).unwrap();
        let k = ma_operator(&q).unwrap();
        assert!(k.map(|v| v - 0.25).sup_norm() < 1e-12);
        let zero = StripField::from_fn(&g, 8, |_, _| 0.0).unwrap();
        assert!(ma_operator(&zero).unwrap().sup_norm() < 1e-15);
        let u = StripField::from_fn(&g, 8, |x, t| {
            0.5 * t * t + cases::cosine_value(0.1, x[0])
        })
        .unwrap();
        let k = ma_operator(&u).unwrap();
        for level in 0..=8 {
            for (j, x) in g.nodes().enumerate() {
                let want = 1.0 + 0.2 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x[0]).cos();
                assert!((k.at(level, j) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dual_operator_on_quadratic() {
        let g = TorusGrid::new(&[8]).unwrap();
        let f = StripField::from_fn(&g, 8, |_, s| -0.125 * s * s).unwrap();
        let k = StripField::from_fn(&g, 8, |_, _| 0.25).unwrap();
        assert!(dual_ma_operator(&f, &k).unwrap().sup_norm() < 1e-12);
        let z = StripField::from_fn(&g, 8, |_, _| 0.0).unwrap();
        assert_eq!(dual_ma_operator(&z, &z).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn closed_form_identities_vanish() {
        for dims in [1, 2] {
            let g = TorusGrid::cube(dims, 8).unwrap();
            let st = StripTransform::build(cases::quadratic_strip(&g, 6, 0.25).unwrap()).unwrap();
            assert!(check_transform4(&st).unwrap().iter().all(|&r| r < 1e-10));
            assert!(check_transform5(&st).unwrap().iter().all(|&r| r < 1e-10));
            let (m, d) = bordered_hessian_mismatch(&st).unwrap();
            assert!(m < 1e-10 && d < 1e-10);
            assert!(rsw_residual(&st).unwrap().iter().all(|&r| r < 1e-10));
            let dh = assemble_dual_hessian(&st, 3, 2).unwrap();
            assert!((dh.assembled[(0, 0)] - 0.25).abs() < 1e-12);
            assert!((dh.assembled[(1, 1)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn t_independent_potential() {
        let g = TorusGrid::new(&[16]).unwrap();
        let u = StripField::from_fn(&g, 6, |x, _| cases::cosine_value(0.1, x[0])).unwrap();
        let st = StripTransform::build(u).unwrap();
        assert!(st.k.sup_norm() < 1e-12);
        assert!(check_transform4(&st).unwrap().iter().all(|&r| r < 1e-10));
        assert!(check_transform5(&st).unwrap().iter().all(|&r| r < 1e-10));
        assert!(rsw_residual(&st).unwrap()[0] < 1e-10);
    }

    #[test]
    fn laplace_offsets() {
        let g = TorusGrid::new(&[8]).unwrap();
        let st = StripTransform::build(cases::quadratic_strip(&g, 6, 0.25).unwrap()).unwrap();
        let k1 = laplace_source(&st.u).unwrap();
        let d = hessian_laplace_residual(&st, &k1).unwrap();
        assert!((d.sup_norm - 1.0).abs() < 1e-12);
        assert!((d.mean + 1.0).abs() < 1e-12);
        assert!(d.normalized_sup_norm < 1e-12);

        let g2 = TorusGrid::cube(2, 8).unwrap();
        let zero = StripField::from_fn(&g2, 4, |_, _| 0.0).unwrap();
        let st = StripTransform::build(zero).unwrap();
        let k1 = laplace_source(&st.u).unwrap();
        let d = hessian_laplace_residual(&st, &k1).unwrap();
        assert!((d.mean + 2.0).abs() < 1e-12);
        assert!(d.normalized_sup_norm < 1e-12);
    }

    #[test]
    fn rejects_short_strip() {
        let g = TorusGrid::new(&[8]).unwrap();
        let u = StripField::from_fn(&g, 2, |_, _| 0.0).unwrap();
        assert!(StripTransform::build(u).is_err());
        assert!(assemble_dual_hessian(
            &StripTransform::build(StripField::from_fn(&g, 4, |_, _| 0.0).unwrap()).unwrap(),
            9,
            0
        )
        .is_err());
    }
}
