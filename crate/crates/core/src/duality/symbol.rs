use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance for agreement of the expanded and completed-square
/// forms of the symbol.
pub const SYMBOL_AGREEMENT_TOLERANCE: f64 = 1e-12;

/// First derivatives of an operator `F(D²_{x,t}u)` with respect to
/// `u_tt`, `u_{t x_j}` and `u_{x_j x_k}` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorDerivatives {
    pub d_tt: f64,
    pub d_tx: DVector<f64>,
    pub d_xx: DMatrix<f64>,
}

impl OperatorDerivatives {
    pub fn dims(&self) -> usize {
        self.d_tx.len()
    }
}

/// Dual-side data at the matched point: `f_{s y_j}` and `h^{jk}`, the
/// inverse of `D²_y f + I`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSide {
    pub f_sy: DVector<f64>,
    pub h_inv: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValue {
    pub sigma: f64,
    pub completed_square: f64,
    pub agree: bool,
}

/// Symbol of the linearized dual operator at `(τ, ξ)`.
///
/// With `a = ∂F/∂u_tt`, `b = ∂F/∂u_{tx}`, `C = ∂F/∂u_{xx}` and
/// `η = h^{-1} ξ`:
///
/// `σ = a τ² + (b_j - 2a f_{sy_j}) τ η_j + (a f_{sy_j} f_{sy_k} - b_j f_{sy_k} + C_{jk}) η_j η_k`
///
/// The quadratic term is contracted against `η`; contracted against `ξ`
/// the two forms disagree whenever `h ≠ I`.
pub fn linearized_symbol(d: &OperatorDerivatives, side: &DualSide, tau: f64, xi: &[f64]) -> Result<SymbolValue> {
    let n = d.dims();
    if !(d.d_tt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "∂F/∂u_tt must be positive, got {}",
            d.d_tt
        )));
    }
    if d.d_xx.shape() != (n, n) || side.f_sy.len() != n || side.h_inv.shape() != (n, n) || xi.len() != n {
        return Err(Error::InvalidArgument(format!("symbol inputs must all have dimension {n}")));
    }
    let a = d.d_tt;
    let xi = DVector::from_column_slice(xi);
    let eta = &side.h_inv * xi;
    let fs = &side.f_sy;
    let b_eta = d.d_tx.dot(&eta);
    let fs_eta = fs.dot(&eta);
    let c_eta = eta.dot(&(&d.d_xx * &eta));

    let linear = (b_eta - 2.0 * a * fs_eta) * tau;
    let quadratic = a * fs_eta * fs_eta - b_eta * fs_eta + c_eta;
    let sigma = a * tau * tau + linear + quadratic;

    let root = a.sqrt();
    let square = tau * root + (0.5 * b_eta - a * fs_eta) / root;
    let remainder = (4.0 * a * c_eta - b_eta * b_eta) / (4.0 * a);
    let completed_square = square * square + remainder;

    let scale = [a * tau * tau, linear, a * fs_eta * fs_eta, b_eta * fs_eta, c_eta, square * square, remainder]
        .iter()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(SymbolValue {
        sigma,
        completed_square,
        agree: (sigma - completed_square).abs() <= SYMBOL_AGREEMENT_TOLERANCE * scale,
    })
}

/// u-side symbol `a τ² + b·ξ τ + C ξ ξ`.
pub fn primal_symbol(d: &OperatorDerivatives, tau: f64, xi: &[f64]) -> f64 {
    let xi = DVector::from_column_slice(xi);
    d.d_tt * tau * tau + d.d_tx.dot(&xi) * tau + xi.dot(&(&d.d_xx * &xi))
}

/// Derivatives of `det(D²_{x,t}u + I_x)` given that matrix (index 0 is `t`).
/// These are its cofactors; the mixed entry appears twice in the symmetric
/// matrix, hence the factor 2.
pub fn ma_operator_derivatives(m: &DMatrix<f64>) -> Result<OperatorDerivatives> {
    let size = m.nrows();
    if size < 2 || m.ncols() != size {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix of size ≥ 2, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let cof = |r: usize, c: usize| {
        let minor = m.clone().remove_row(r).remove_column(c);
        let sign = if (r + c).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * linalg::det(&minor)
    };
    let n = size - 1;
    Ok(OperatorDerivatives {
        d_tt: cof(0, 0),
        d_tx: DVector::from_fn(n, |j, _| 2.0 * cof(0, j + 1)),
        d_xx: DMatrix::from_fn(n, n, |j, k| cof(j + 1, k + 1)),
    })
}
