use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use rustfft::num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::linalg;

/// Real samples on a [`TorusGrid`] with a lazily computed discrete spectrum.
#[derive(Debug, Clone)]
pub struct TorusField {
    grid: TorusGrid,
    values: Vec<f64>,
    spectrum: OnceLock<Arc<Vec<Complex64>>>,
}

/// Value, gradient and Hessian of the trigonometric interpolant at a point.
/// Only the leading `dims` entries of `grad` and `hess` are meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub dims: usize,
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

impl Partials {
    pub fn hessian_plus_identity(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dims, self.dims, |a, b| {
            self.hess[a][b] + if a == b { 1.0 } else { 0.0 }
        })
    }

    pub fn gradient(&self) -> Vec<f64> {
        self.grad[..self.dims].to_vec()
    }
}

impl TorusField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples for grid {:?}, got {}",
                grid.len(),
                grid.sizes(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.nodes().map(|x| f(&x)).collect();
        Self {
            grid: grid.clone(),
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dims(&self) -> usize {
        self.grid.dims()
    }

    /// Unnormalized forward DFT of the samples, cached on first use.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut data: Vec<Complex64> =
                self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft_nd(&mut data, self.grid.sizes(), false);
            Arc::new(data)
        })
    }

    /// Exact derivative of the trigonometric interpolant at the nodes.
    pub fn derivative(&self, order: &[i32]) -> Result<TorusField> {
        if order.len() != self.dims() {
            return Err(Error::InvalidArgument(format!(
                "multi-index has {} components for a {}-dimensional field",
                order.len(),
                self.dims()
            )));
        }
        if order.iter().any(|&a| a < 0) {
            return Err(Error::InvalidArgument(format!(
                "derivative order {order:?} has a negative component"
            )));
        }
        if order.iter().all(|&a| a == 0) {
            return Ok(self.clone());
        }
        let sizes = self.grid.sizes();
        let multipliers: Vec<Vec<Complex64>> = sizes
            .iter()
            .zip(order)
            .map(|(&n, &a)| (0..n).map(|i| derivative_multiplier(i, n, a as u32)).collect())
            .collect();
        let mut data = self.spectrum().to_vec();
        for (flat, c) in data.iter_mut().enumerate() {
            let idx = self.grid.multi_index(flat);
            let mut m = Complex64::new(1.0, 0.0);
            for (axis, mult) in multipliers.iter().enumerate() {
                m *= mult[idx[axis]];
            }
            *c *= m;
        }
        fft_nd(&mut data, sizes, true);
        let scale = 1.0 / self.grid.len() as f64;
        let values = data.iter().map(|c| c.re * scale).collect();
        TorusField::new(self.grid.clone(), values)
    }

    /// Shorthand for the derivative along a single axis.
    pub fn partial(&self, axis: usize, order: i32) -> Result<TorusField> {
        let mut alpha = vec![0; self.dims()];
        alpha[axis] = order;
        self.derivative(&alpha)
    }

    /// Trigonometric interpolant at an arbitrary point (coordinates mod 1).
    pub fn interpolate(&self, point: &[f64]) -> f64 {
        self.eval_derivative(point, &[0, 0, 0])
    }

    /// `∂^order` of the interpolant at `point`, by direct Fourier summation.
    pub fn eval_derivative(&self, point: &[f64], order: &[usize]) -> f64 {
        let bases: Vec<Vec<Vec<Complex64>>> = (0..self.dims())
            .map(|a| {
                let mut per_order = vec![Vec::new(); order[a] + 1];
                per_order[order[a]] = basis(self.grid.sizes()[a], point[a], order[a] as u32);
                per_order
            })
            .collect();
        let table = contract(self.spectrum(), self.grid.sizes(), &bases, |_| true);
        table[0].1 / self.grid.len() as f64
    }

    /// Value, gradient and Hessian of the interpolant at `point`.
    pub fn partials(&self, point: &[f64]) -> Partials {
        let n = self.dims();
        let bases: Vec<Vec<Vec<Complex64>>> = (0..n)
            .map(|a| (0..=2).map(|r| basis(self.grid.sizes()[a], point[a], r)).collect())
            .collect();
        let table = contract(self.spectrum(), self.grid.sizes(), &bases, |o| {
            o.iter().sum::<usize>() <= 2
        });
        let scale = 1.0 / self.grid.len() as f64;
        let mut p = Partials {
            dims: n,
            value: 0.0,
            grad: [0.0; 3],
            hess: [[0.0; 3]; 3],
        };
        for (o, v) in table {
            let v = v * scale;
            let nz: Vec<usize> = (0..n).filter(|&a| o[a] > 0).collect();
            match (o.iter().sum::<usize>(), nz.as_slice()) {
                (0, _) => p.value = v,
                (1, &[a]) => p.grad[a] = v,
                (2, &[a]) => p.hess[a][a] = v,
                (2, &[a, b]) => {
                    p.hess[a][b] = v;
                    p.hess[b][a] = v;
                }
                _ => unreachable!(),
            }
        }
        p
    }

    pub fn sample_at(&self, points: &[Vec<f64>]) -> Vec<f64> {
        crate::exec::map_range(points.len(), |j| self.interpolate(&points[j]))
    }

    /// `D²u + I` at every node, from spectral second derivatives.
    pub fn hessian_plus_identity(&self) -> Vec<DMatrix<f64>> {
        let n = self.dims();
        let mut second = vec![vec![None; n]; n];
        for a in 0..n {
            for b in a..n {
                let mut alpha = vec![0; n];
                alpha[a] += 1;
                alpha[b] += 1;
                let d = self.derivative(&alpha).expect("valid multi-index");
                second[a][b] = Some(d);
            }
        }
        (0..self.grid.len())
            .map(|j| {
                DMatrix::from_fn(n, n, |a, b| {
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    let v = second[lo][hi].as_ref().unwrap().values[j];
                    v + if a == b { 1.0 } else { 0.0 }
                })
            })
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TorusField {
        TorusField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zip_map(&self, other: &TorusField, f: impl Fn(f64, f64) -> f64) -> TorusField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        TorusField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            spectrum: OnceLock::new(),
        }
    }

    /// Sup-norm of the difference of two fields on the same grid.
    pub fn distance(&self, other: &TorusField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Minimum over nodes of the smallest eigenvalue of `D²u + I`.
pub fn hessian_margin(u: &TorusField) -> f64 {
    u.hessian_plus_identity()
        .iter()
        .map(linalg::sym_min_eigenvalue)
        .fold(f64::INFINITY, f64::min)
}

/// Spectral multiplier of `d^order/dx^order` for FFT bin `i` of `n`.
pub(crate) fn derivative_multiplier(i: usize, n: usize, order: u32) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let k = TorusGrid::wavenumber(i, n);
    if 2 * k == n as i64 {
        if order % 2 == 1 {
            return Complex64::new(0.0, 0.0);
        }
        let sign = if (order / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        return Complex64::new(sign * (PI * n as f64).powi(order as i32), 0.0);
    }
    Complex64::new(0.0, 2.0 * PI * k as f64).powu(order)
}

/// Values of `d^order/dx^order` of each Fourier basis function at `x`,
/// ordered like the FFT bins. The Nyquist bin uses `cos(πN x)`.
fn basis(n: usize, x: f64, order: u32) -> Vec<Complex64> {
    let x = x - x.floor();
    let step = Complex64::from_polar(1.0, 2.0 * PI * x);
    let half = n / 2;
    // e^{2πikx} for k = 0..=n/2 by recurrence, re-anchored to bound drift.
    let mut powers = Vec::with_capacity(half + 1);
    let mut p = Complex64::new(1.0, 0.0);
    for k in 0..=half {
        if k % 16 == 0 {
            p = Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x);
        }
        powers.push(p);
        p *= step;
    }
    (0..n)
        .map(|i| {
            let k = TorusGrid::wavenumber(i, n);
            if k as usize == half {
                let nyq = PI * n as f64;
                let phase = nyq * x + order as f64 * PI / 2.0;
                Complex64::new(nyq.powi(order as i32) * phase.cos(), 0.0)
            } else {
                let e = if k >= 0 {
                    powers[k as usize]
                } else {
                    powers[(-k) as usize].conj()
                };
                e * Complex64::new(0.0, 2.0 * PI * k as f64).powu(order)
            }
        })
        .collect()
}

/// Contracts the spectrum against per-axis basis vectors, one axis at a
/// time from the last. `bases[axis][r]` holds the order-`r` basis (empty if
/// unused). Returns `(orders, Σ c_k Π b)` for every order tuple accepted by
/// `keep`; partial tuples are pruned with the same predicate applied to
/// their trailing orders, so `keep` must be monotone.
fn contract(
    spec: &[Complex64],
    sizes: &[usize],
    bases: &[Vec<Vec<Complex64>>],
    keep: impl Fn([usize; 3]) -> bool,
) -> Vec<([usize; 3], f64)> {
    let dims = sizes.len();
    let mut prefix = spec.len();
    let mut combos: Vec<[usize; 3]> = vec![[0; 3]];
    let mut cur: Vec<Complex64> = spec.to_vec();
    for axis in (0..dims).rev() {
        let n = sizes[axis];
        let next_prefix = prefix / n;
        let mut next_combos = Vec::new();
        let mut sources = Vec::new();
        for (r, b) in bases[axis].iter().enumerate() {
            if b.is_empty() {
                continue;
            }
            for (ci, c) in combos.iter().enumerate() {
                let mut o = *c;
                o[axis] = r;
                let mut probe = [0; 3];
                probe[axis..dims].copy_from_slice(&o[axis..dims]);
                if keep(probe) {
                    next_combos.push(o);
                    sources.push((r, ci));
                }
            }
        }
        let width = combos.len();
        let mut next = vec![Complex64::new(0.0, 0.0); next_prefix * next_combos.len()];
        for p in 0..next_prefix {
            for (slot, &(r, ci)) in sources.iter().enumerate() {
                let b = &bases[axis][r];
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, bi) in b.iter().enumerate() {
                    acc += cur[(p * n + i) * width + ci] * bi;
                }
                next[p * next_combos.len() + slot] = acc;
            }
        }
        prefix = next_prefix;
        combos = next_combos;
        cur = next;
    }
    combos.into_iter().zip(cur).map(|(o, v)| (o, v.re)).collect()
}

/// In-place n-dimensional DFT over row-major data. The inverse is
/// unnormalized.
pub(crate) fn fft_nd(data: &mut [Complex64], sizes: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total = data.len();
    let mut stride = total;
    for &n in sizes {
        stride /= n;
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let block = n * stride;
        for outer in 0..total / block {
            for inner in 0..stride {
                let base = outer * block + inner;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(&[n]).unwrap()
    }

    #[test]
    fn derivative_of_cosine() {
        let g = grid1(32);
        let u = TorusField::from_fn(&g, |x| (2.0 * PI * x[0]).cos());
        let d = u.derivative(&[1]).unwrap();
        for (j, x) in g.nodes().enumerate() {
            let want = -2.0 * PI * (2.0 * PI * x[0]).sin();
            assert!((d.values()[j] - want).abs() < 1e-12);
        }
        let u = TorusField::from_fn(&g, |x| (4.0 * PI * x[0]).cos());
        let d = u.derivative(&[2]).unwrap();
        for (j, x) in g.nodes().enumerate() {
            let want = -16.0 * PI * PI * (4.0 * PI * x[0]).cos();
            assert!((d.values()[j] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = TorusGrid::new(&[8, 12]).unwrap();
        let u = TorusField::constant(&g, 3.0);
        for alpha in [[1, 0], [0, 1], [2, 3], [1, 1]] {
            assert!(u.derivative(&alpha).unwrap().sup_norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_negative_order() {
        let u = TorusField::constant(&grid1(8), 1.0);
        assert!(matches!(u.derivative(&[-1]), Err(Error::InvalidArgument(_))));
        assert!(u.derivative(&[1, 0]).is_err());
    }

    #[test]
    fn nyquist_odd_derivative_zeroed() {
        let g = grid1(8);
        let u = TorusField::from_fn(&g, |x| (8.0 * PI * x[0]).cos());
        assert!(u.derivative(&[1]).unwrap().sup_norm() < 1e-12);
        let d2 = u.derivative(&[2]).unwrap();
        assert!((d2.values()[0] + 64.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn interpolation_examples() {
        let g = grid1(16);
        let u = TorusField::from_fn(&g, |x| (2.0 * PI * x[0]).cos());
        assert!((u.interpolate(&[0.125]) - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((u.interpolate(&[1.125]) - 0.5f64.sqrt()).abs() < 1e-14);
        let c = TorusField::constant(&TorusGrid::new(&[8, 8]).unwrap(), 3.0);
        assert!((c.interpolate(&[0.3721, -4.2]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_exact_on_nodes() {
        let g = TorusGrid::new(&[8, 10]).unwrap();
        let u = TorusField::from_fn(&g, |x| (x[0] * 7.1).sin() + x[1] * x[1]);
        for (j, x) in g.nodes().enumerate() {
            assert!((u.interpolate(&x) - u.values()[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn partials_match_spectral_derivatives_at_nodes() {
        let g = TorusGrid::new(&[16, 12]).unwrap();
        let u = TorusField::from_fn(&g, |x| {
            (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos() + 0.3 * (2.0 * PI * (x[0] + x[1])).cos()
        });
        let ux = u.derivative(&[1, 0]).unwrap();
        let uxy = u.derivative(&[1, 1]).unwrap();
        let uyy = u.derivative(&[0, 2]).unwrap();
        for j in [0, 5, 77, 191] {
            let p = u.partials(&g.node(j));
            assert!((p.value - u.values()[j]).abs() < 1e-12);
            assert!((p.grad[0] - ux.values()[j]).abs() < 1e-11);
            assert!((p.hess[0][1] - uxy.values()[j]).abs() < 1e-10);
            assert!((p.hess[1][1] - uyy.values()[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn margin_examples() {
        let g = grid1(32);
        assert_eq!(hessian_margin(&TorusField::constant(&g, 0.0)), 1.0);
        let u = TorusField::from_fn(&g, |x| -(0.1 / (2.0 * PI)) * (2.0 * PI * x[0]).cos());
        assert!((hessian_margin(&u) - (1.0 - 0.2 * PI)).abs() < 1e-12);
    }
}
