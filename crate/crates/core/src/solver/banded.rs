use crate::error::{Error, Result};

/// Square band matrix in row storage: row `i` keeps columns
/// `i - lower ..= i + upper`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, row: usize, col: usize) -> usize {
        debug_assert!(col + self.lower >= row && col <= row + self.upper, "({row},{col}) outside band");
        row * (self.lower + self.upper + 1) + (col + self.lower - row)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if col + self.lower < row || col > row + self.upper {
            return 0.0;
        }
        self.data[self.slot(row, col)]
    }

    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let s = self.slot(row, col);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization without pivoting; the band does not grow.
    /// Fails on a pivot below `1e-300` or relatively tiny compared with its row.
    pub fn factor(mut self) -> Result<BandLu> {
        for p in 0..self.n {
            let pivot = self.get(p, p);
            let row_scale = (p..=(p + self.upper).min(self.n - 1))
                .map(|j| self.get(p, j).abs())
                .fold(0.0, f64::max);
            if !(pivot.abs() > 1e-14 * row_scale) || pivot.abs() < 1e-300 {
                return Err(Error::InvariantViolation(format!(
                    "zero pivot at row {p} in banded LU"
                )));
            }
            let last_row = (p + self.lower).min(self.n - 1);
            let width = (p + self.upper).min(self.n - 1) - p;
            let pivot_start = self.slot(p, p) + 1;
            for r in p + 1..=last_row {
                let sr = self.slot(r, p);
                let factor = self.data[sr] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[sr] = factor;
                // row r from column p+1 lies after row p's segment in storage
                let (head, tail) = self.data.split_at_mut(sr + 1);
                let pivot_row = &head[pivot_start..pivot_start + width];
                for (dst, &v) in tail[..width].iter_mut().zip(pivot_row) {
                    *dst -= factor * v;
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = &self.m;
        let mut x = b.to_vec();
        for i in 0..m.n {
            let lo = i.saturating_sub(m.lower);
            let s: f64 = (lo..i).map(|j| m.get(i, j) * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..m.n).rev() {
            let hi = (i + m.upper).min(m.n - 1);
            let s: f64 = (i + 1..=hi).map(|j| m.get(i, j) * x[j]).sum();
            x[i] = (x[i] - s) / m.get(i, i);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, lo, up) = (40, 5, 3);
        let mut band = BandMatrix::zeros(n, lo, up);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(lo)..=(i + up).min(n - 1) {
                let v = if i == j { 10.0 } else { rng.random_range(-1.0..1.0) };
                band.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let want = dense.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        let ax = band.mul_vec(want.as_slice());
        assert!(ax.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-12));
        let got = band.factor().unwrap().solve(&b);
        for i in 0..n {
            assert!((got[i] - want[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        assert!(m.factor().is_err());
    }
}
