use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    StripTransform, bordered_hessian_mismatch, check_transform4, check_transform5, dual_ma_operator,
    hessian_laplace_residual, laplace_source, rsw_residual,
};
use crate::error::Result;
use crate::torus_field::StripField;

/// Offsets of the Laplace-case identity `K̃ + K₁ det g̃ = σ_{n-1}(g̃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceDiagnostic {
    /// Sup-norm of the residual as written.
    pub sup_norm: f64,
    /// Mean of the residual as written.
    pub mean: f64,
    /// Sup-norm with `K₁` replaced by `K₁ + n`.
    pub normalized_sup_norm: f64,
    /// The shift `n` applied to `K₁`.
    pub trace_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityEntry {
    pub sup_norm: f64,
    pub grid: Vec<usize>,
    pub slices: usize,
    /// Coarse residual over fine residual, when a coarse strip was available.
    pub refinement_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
}

/// Identity name → entry, serialized as a flat JSON object in name order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VerifyReport(pub BTreeMap<String, IdentityEntry>);

impl VerifyReport {
    pub fn get(&self, name: &str) -> Option<&IdentityEntry> {
        self.0.get(name)
    }

    pub fn max_sup_norm(&self) -> f64 {
        self.0.values().map(|e| e.sup_norm).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

struct Residual {
    name: &'static str,
    value: f64,
    mean: Option<f64>,
}

fn residuals(u: &StripField) -> Result<Vec<Residual>> {
    let st = StripTransform::build(u.clone())?;
    let t4 = check_transform4(&st)?;
    let t5 = check_transform5(&st)?;
    let (bordered, det) = bordered_hessian_mismatch(&st)?;
    let rsw = rsw_residual(&st)?.into_iter().fold(0.0, f64::max);
    let laplace = hessian_laplace_residual(&st, &laplace_source(&st.u)?)?;
    let plain = |name, value| Residual { name, value, mean: None };
    Ok(vec![
        plain("dual_monge_ampere", dual_ma_operator(&st.f, &st.k_mapped)?.sup_norm()),
        plain("transform4_dy_ut", t4[0]),
        plain("transform4_ds_ut", t4[1]),
        plain("transform4_fs", t4[2]),
        plain("transform5_utx", t5[0]),
        plain("transform5_utt", t5[1]),
        plain("bordered_hessian", bordered),
        plain("bordered_determinant", det),
        plain("rsw_system", rsw),
        plain("laplace_trace_normalized", laplace.normalized_sup_norm),
        Residual {
            name: "laplace_as_printed",
            value: laplace.sup_norm,
            mean: Some(laplace.mean),
        },
    ])
}

/// Runs every identity check on `u`, and on `u` with every other level
/// dropped when `M` is even and the coarse strip still has 4 levels, to
/// report refinement ratios.
pub fn verify_report(u: &StripField) -> Result<VerifyReport> {
    let fine = residuals(u)?;
    let coarse = if u.intervals().is_multiple_of(2) && u.intervals() >= 6 {
        Some(residuals(&u.coarsen_levels(2)?)?)
    } else {
        None
    };
    let mut map = BTreeMap::new();
    for (i, r) in fine.into_iter().enumerate() {
        let ratio = coarse.as_ref().map(|c| c[i].value / r.value).filter(|v| v.is_finite());
        map.insert(
            r.name.to_string(),
            IdentityEntry {
                sup_norm: r.value,
                grid: u.grid().sizes().to_vec(),
                slices: u.intervals(),
                refinement_ratio: ratio,
                mean: r.mean,
            },
        );
    }
    Ok(VerifyReport(map))
}
