//! Finite differences along the non-periodic `t`/`s` direction.
//!
//! Interior nodes use centered second-order stencils. The two end nodes
//! use one-sided closures one order higher (4 points for `d1`, 5 for `d2`)
//! when enough levels exist, and the 3- and 4-point second-order closures
//! otherwise, so the end rows never dominate the error. [`Scheme::Richardson`] combines steps `h` and
//! `2h` into the fourth-order centered stencil wherever both neighbours at
//! distance two exist.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Second,
    Richardson,
}

/// First derivative of equispaced samples with step `h`. Needs 3 samples.
pub fn d1(v: &[f64], h: f64, scheme: Scheme) -> Result<Vec<f64>> {
    let n = v.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "first derivative needs at least 3 levels, got {n}"
        )));
    }
    let m = n - 1;
    let mut out = vec![0.0; n];
    if n >= 4 {
        let closure = |a: f64, b: f64, c: f64, d: f64| (-11.0 * a + 18.0 * b - 9.0 * c + 2.0 * d) / (6.0 * h);
        out[0] = closure(v[0], v[1], v[2], v[3]);
        out[m] = -closure(v[m], v[m - 1], v[m - 2], v[m - 3]);
    } else {
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        out[m] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * h);
    }
    for k in 1..m {
        out[k] = if scheme == Scheme::Richardson && k >= 2 && k + 2 <= m {
            (8.0 * (v[k + 1] - v[k - 1]) - (v[k + 2] - v[k - 2])) / (12.0 * h)
        } else {
            (v[k + 1] - v[k - 1]) / (2.0 * h)
        };
    }
    Ok(out)
}

/// Second derivative of equispaced samples with step `h`. Needs 4 samples.
pub fn d2(v: &[f64], h: f64, scheme: Scheme) -> Result<Vec<f64>> {
    let n = v.len();
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "second derivative needs at least 4 levels, got {n}"
        )));
    }
    let m = n - 1;
    let h2 = h * h;
    let mut out = vec![0.0; n];
    if n >= 5 {
        let closure = |a: f64, b: f64, c: f64, d: f64, e: f64| {
            (35.0 * a - 104.0 * b + 114.0 * c - 56.0 * d + 11.0 * e) / (12.0 * h2)
        };
        out[0] = closure(v[0], v[1], v[2], v[3], v[4]);
        out[m] = closure(v[m], v[m - 1], v[m - 2], v[m - 3], v[m - 4]);
    } else {
        out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        out[m] = (2.0 * v[m] - 5.0 * v[m - 1] + 4.0 * v[m - 2] - v[m - 3]) / h2;
    }
    for k in 1..m {
        out[k] = if scheme == Scheme::Richardson && k >= 2 && k + 2 <= m {
            (-v[k + 2] + 16.0 * v[k + 1] - 30.0 * v[k] + 16.0 * v[k - 1] - v[k - 2]) / (12.0 * h2)
        } else {
            (v[k + 1] - 2.0 * v[k] + v[k - 1]) / h2
        };
    }
    Ok(out)
}
