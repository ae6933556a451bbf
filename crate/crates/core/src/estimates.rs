//! Measured derivative norms, convexity margins and maximum-principle bounds
//! of 1+1 solutions, and ε-sweeps over them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::duality::StripTransform;
use crate::error::{Error, Result};
use crate::exec;
use crate::fd::Scheme;
use crate::solver::{BoundaryData, HomogeneousDualSolution, SolveOptions, solve_1p1, strip_margin};
use crate::torus_field::{StripField, TorusField, derivative_multiplier, fft_nd, io};

/// Highest total derivative order accepted by [`derivative_norms`].
pub const MAX_NORM_ORDER: usize = 4;
/// Slack in the maximum-principle and reduction comparisons.
pub const MAX_PRINCIPLE_TOLERANCE: f64 = 1e-10;
/// Allowed growth of a norm over its value at the largest ε.
pub const UNIFORMITY_FACTOR: f64 = 2.0;
/// Reference norms below this are treated as this value in ratios.
const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    /// Order in x.
    pub a: usize,
    /// Order in t.
    pub b: usize,
    /// `‖∂_x^a ∂_t^b u‖∞`; for `b ≥ 2` and known ε, `u_tt` comes from the equation.
    pub norm: f64,
    /// The pure finite-difference value when it differs in method from `norm`.
    pub norm_fd: Option<f64>,
}

/// `∂_x^a` of a strip, spectral.
fn dx(u: &StripField, a: usize) -> Result<StripField> {
    if a == 0 { Ok(u.clone()) } else { u.x_derivative(&[a as i32]) }
}

/// `∂_t^b` by Richardson-extrapolated differences, `b ≤ 4`.
fn dt(u: &StripField, b: usize) -> Result<StripField> {
    match b {
        0 => Ok(u.clone()),
        1 | 2 => u.t_derivative(b, Scheme::Richardson),
        _ => dt(&u.t_derivative(2, Scheme::Richardson)?, b - 2),
    }
}

/// Sup-norms of `∂_x^a ∂_t^b u` for `a + b ≤ n_max` on an n=1 strip.
///
/// With `epsilon` given, `u_tt` is replaced by `(ε + u_xt²)/(1 + u_xx)`
/// before further t-derivatives, and the FD-only value is kept alongside.
pub fn derivative_norms(u: &StripField, n_max: usize, epsilon: Option<f64>) -> Result<Vec<NormEntry>> {
    if n_max > MAX_NORM_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order {n_max} exceeds {MAX_NORM_ORDER}"
        )));
    }
    if u.grid().dims() != 1 {
        return Err(Error::InvalidGrid("derivative norms are defined for n=1 strips".into()));
    }
    let utt_eq = match epsilon {
        Some(eps) => {
            let uxt = dt(u, 1)?.x_derivative(&[1])?;
            let uxx = u.x_derivative(&[2])?;
            Some(uxt.zip_map(&uxx, |c, g| (eps + c * c) / (1.0 + g)))
        }
        None => None,
    };
    let mut out = Vec::new();
    for total in 0..=n_max {
        for b in 0..=total {
            let a = total - b;
            let fd = dx(&dt(u, b)?, a)?.sup_norm();
            let entry = match (&utt_eq, b >= 2) {
                (Some(e), true) => NormEntry {
                    a,
                    b,
                    norm: dx(&dt(e, b - 2)?, a)?.sup_norm(),
                    norm_fd: Some(fd),
                },
                _ => NormEntry { a, b, norm: fd, norm_fd: None },
            };
            out.push(entry);
        }
    }
    Ok(out)
}

/// Minimum of `1 + u_xx` over the strip.
pub fn convexity_margin(u: &StripField) -> Result<f64> {
    strip_margin(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleFlag {
    pub m: u32,
    pub k: u32,
    /// Sup over interior levels and nodes.
    pub interior: f64,
    /// Sup over the two boundary circles, located to machine precision.
    pub boundary: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub flags: Vec<MaxPrincipleFlag>,
    /// Sup of `∂_y^m ∂_s² f̌ + ε ∂_y^{m+2} f̌` over `m ≤ m_max` and all levels.
    pub reduction_residual: f64,
    pub reduction_holds: bool,
}

impl MaxPrincipleReport {
    pub fn all_hold(&self) -> bool {
        self.reduction_holds && self.flags.iter().all(|f| f.holds)
    }
}

/// Sup of `|g|` on the circle for a band-limited `g` given at the nodes:
/// dense sampling, then Newton on `g'` from the best sample.
fn circle_sup(g: &TorusField) -> f64 {
    let n = g.grid().len();
    let samples = 4 * n;
    let (mut best_y, mut best) = (0.0, 0.0f64);
    for i in 0..samples {
        let y = i as f64 / samples as f64;
        let v = g.interpolate(&[y]).abs();
        if v > best {
            best = v;
            best_y = y;
        }
    }
    let mut y = best_y;
    for _ in 0..20 {
        let d1 = g.eval_derivative(&[y], &[1]);
        let d2 = g.eval_derivative(&[y], &[2]);
        if d2 == 0.0 {
            break;
        }
        let step = (d1 / d2).clamp(-0.5 / samples as f64, 0.5 / samples as f64);
        y -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    best.max(g.interpolate(&[y]).abs())
}

/// Checks that `|∂_y^m ∂_s^k f̌|`, `k ∈ {0,1}`, `m ≤ m_max`, peaks on the
/// boundary, and the reduction `∂_s² = -ε ∂_y²` for `k ≥ 2`.
pub fn max_principle_check(fcheck: &HomogeneousDualSolution, m_max: u32, intervals: usize) -> Result<MaxPrincipleReport> {
    if intervals < 2 {
        return Err(Error::InvalidArgument("need at least one interior level".into()));
    }
    let eps = fcheck.epsilon();
    let pairs: Vec<(u32, u32)> = (0..=m_max).flat_map(|m| [(m, 0), (m, 1)]).collect();
    let flags = exec::map_range(pairs.len(), |i| {
        let (m, k) = pairs[i];
        let boundary = circle_sup(&fcheck.slice(0.0, m, k)).max(circle_sup(&fcheck.slice(1.0, m, k)));
        let interior = (1..intervals)
            .map(|l| fcheck.slice(l as f64 / intervals as f64, m, k).sup_norm())
            .fold(0.0, f64::max);
        MaxPrincipleFlag {
            m,
            k,
            interior,
            boundary,
            holds: interior <= boundary + MAX_PRINCIPLE_TOLERANCE,
        }
    });
    let n = fcheck.grid().len();
    let reduction = exec::map_range((m_max as usize + 1) * (intervals + 1), |i| {
        let m = (i / (intervals + 1)) as u32;
        let s = (i % (intervals + 1)) as f64 / intervals as f64;
        // difference formed per mode, then a single inverse transform
        let mut c: Vec<Complex64> = fcheck
            .coefficients(s, 2)
            .iter()
            .zip(fcheck.coefficients(s, 0))
            .enumerate()
            .map(|(j, (a, b))| a * derivative_multiplier(j, n, m) + eps * b * derivative_multiplier(j, n, m + 2))
            .collect();
        fft_nd(&mut c, fcheck.grid().sizes(), true);
        c.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max);
    Ok(MaxPrincipleReport {
        flags,
        reduction_residual: reduction,
        reduction_holds: reduction <= MAX_PRINCIPLE_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainResiduals {
    /// `∂_y x - 1/(1 + u_xx)`.
    pub dy_x: f64,
    /// `∂_s x + u_xt/(1 + u_xx)`.
    pub ds_x: f64,
    /// `∂_y² x + u_xxx/(1 + u_xx)³`, when requested.
    pub dyy_x: Option<f64>,
}

/// Compares derivatives of the tabulated map `x(y,s)` with the formulas in
/// terms of u at the mapped points (n=1).
pub fn chain_formula_check(st: &StripTransform, m_max: usize) -> Result<ChainResiduals> {
    if !(1..=2).contains(&m_max) {
        return Err(Error::InvalidArgument(format!("m_max must be 1 or 2, got {m_max}")));
    }
    if st.dims() != 1 {
        return Err(Error::InvalidGrid("chain formulas are checked for n=1".into()));
    }
    let disp = st.displacement(0)?;
    let xy = disp.x_derivative(&[1])?.map(|v| v + 1.0);
    let xs = disp.t_derivative(1, Scheme::Second)?;
    let u_at = st.partials_at_mapped(&st.u);
    let ut_at = st.partials_at_mapped(st.u_t());
    let mut res = ChainResiduals {
        dy_x: 0.0,
        ds_x: 0.0,
        dyy_x: None,
    };
    for (k, (u_row, ut_row)) in u_at.iter().zip(&ut_at).enumerate() {
        for (j, (p, q)) in u_row.iter().zip(ut_row).enumerate() {
            let g = 1.0 + p.hess[0][0];
            res.dy_x = res.dy_x.max((xy.at(k, j) - 1.0 / g).abs());
            res.ds_x = res.ds_x.max((xs.at(k, j) + q.grad[0] / g).abs());
        }
    }
    if m_max == 2 {
        let xyy = disp.x_derivative(&[2])?;
        let uxxx = st.u.x_derivative(&[3])?;
        let uxxx_at = st.pull_to_y(&uxxx)?;
        let mut worst: f64 = 0.0;
        for (k, u_row) in u_at.iter().enumerate() {
            for (j, p) in u_row.iter().enumerate() {
                let g = 1.0 + p.hess[0][0];
                worst = worst.max((xyy.at(k, j) + uxxx_at.at(k, j) / (g * g * g)).abs());
            }
        }
        res.dyy_x = Some(worst);
    }
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub norms: Vec<NormEntry>,
    pub margin: f64,
    pub residual_ma: f64,
    pub max_principle: MaxPrincipleReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub epsilon: f64,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub boundary_id: String,
    pub epsilons: Vec<f64>,
    pub lambda: f64,
    /// Successful solves, in the order of `epsilons`.
    pub entries: Vec<SweepEntry>,
    pub failures: Vec<SweepFailure>,
    /// Largest ratio of a norm to its value at the largest successful ε.
    pub factor: f64,
    /// No failures and `factor ≤ 2`.
    pub uniform: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub n_max: usize,
    pub m_max: u32,
    pub solve: SolveOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            n_max: 3,
            m_max: 4,
            solve: SolveOptions::default(),
        }
    }
}

/// Solves for every ε, measures norms, margins and maximum-principle flags,
/// and collects failures without stopping.
pub fn epsilon_sweep(b: &BoundaryData, boundary_id: &str, epsilons: &[f64], opts: &SweepOptions) -> Result<SweepReport> {
    if opts.n_max > MAX_NORM_ORDER {
        return Err(Error::InvalidArgument(format!(
            "derivative order {} exceeds {MAX_NORM_ORDER}",
            opts.n_max
        )));
    }
    let outcomes = exec::map_range(epsilons.len(), |i| {
        let eps = epsilons[i];
        let r = solve_1p1(b, eps, &opts.solve)?;
        let intervals = r.u.intervals();
        Ok::<_, Error>(SweepEntry {
            epsilon: eps,
            norms: derivative_norms(&r.u, opts.n_max, Some(eps))?,
            margin: r.margin_min,
            residual_ma: r.residual_ma,
            max_principle: max_principle_check(r.dual.homogeneous(), opts.m_max, intervals)?,
        })
    });
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (eps, outcome) in epsilons.iter().zip(outcomes) {
        match outcome {
            Ok(e) => entries.push(e),
            Err(err) => failures.push(SweepFailure {
                epsilon: *eps,
                kind: err.kind().to_string(),
                message: err.to_string(),
            }),
        }
    }
    let factor = uniformity_factor(&entries);
    Ok(SweepReport {
        boundary_id: boundary_id.to_string(),
        epsilons: epsilons.to_vec(),
        lambda: b.lambda,
        uniform: failures.is_empty() && factor <= UNIFORMITY_FACTOR,
        entries,
        failures,
        factor,
    })
}

fn uniformity_factor(entries: &[SweepEntry]) -> f64 {
    let Some(reference) = entries.iter().max_by(|x, y| x.epsilon.total_cmp(&y.epsilon)) else {
        return 0.0;
    };
    let base: BTreeMap<(usize, usize), f64> = reference.norms.iter().map(|n| ((n.a, n.b), n.norm)).collect();
    entries
        .iter()
        .flat_map(|e| e.norms.iter())
        .map(|n| n.norm / base[&(n.a, n.b)].max(NORM_FLOOR))
        .fold(0.0, f64::max)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    boundary_id: &'a str,
    uniform: bool,
    factor: f64,
    lambda: f64,
    epsilons: &'a [f64],
    max_principle: Vec<FlagRow>,
    failures: &'a [SweepFailure],
}

#[derive(Serialize)]
struct FlagRow {
    epsilon: f64,
    m: u32,
    k: u32,
    holds: bool,
}

impl SweepReport {
    pub fn norms_csv(&self) -> String {
        self.norm_rows(|n| Some(n.norm))
    }

    pub fn norms_fd_csv(&self) -> String {
        self.norm_rows(|n| n.norm_fd)
    }

    fn norm_rows(&self, pick: impl Fn(&NormEntry) -> Option<f64>) -> String {
        let mut s = String::from("epsilon,a,b,norm\n");
        for e in &self.entries {
            for n in &e.norms {
                if let Some(v) = pick(n) {
                    let _ = writeln!(s, "{},{},{},{}", io::format_value(e.epsilon), n.a, n.b, io::format_value(v));
                }
            }
        }
        s
    }

    pub fn margins_csv(&self) -> String {
        let mut s = String::from("epsilon,margin\n");
        for e in &self.entries {
            let _ = writeln!(s, "{},{}", io::format_value(e.epsilon), io::format_value(e.margin));
        }
        s
    }

    pub fn summary_json(&self) -> String {
        let summary = SweepSummary {
            boundary_id: &self.boundary_id,
            uniform: self.uniform,
            factor: self.factor,
            lambda: self.lambda,
            epsilons: &self.epsilons,
            max_principle: self
                .entries
                .iter()
                .flat_map(|e| {
                    e.max_principle.flags.iter().map(move |f| FlagRow {
                        epsilon: e.epsilon,
                        m: f.m,
                        k: f.k,
                        holds: f.holds,
                    })
                })
                .collect(),
            failures: &self.failures,
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"
    }

    /// Writes `norms.csv`, `norms_fd.csv`, `margins.csv` and `summary.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        io::write_atomic(&dir.join("norms.csv"), self.norms_csv().as_bytes())?;
        io::write_atomic(&dir.join("norms_fd.csv"), self.norms_fd_csv().as_bytes())?;
        io::write_atomic(&dir.join("margins.csv"), self.margins_csv().as_bytes())?;
        io::write_atomic(&dir.join("summary.json"), self.summary_json().as_bytes())
    }
}
