//! Tangent and normal Milnor numbers by the double-limit schedule: at each
//! scheduled ε the quantity
//!
//! ```text
//! l(ε, s) = -(1/2π) [ ∫_{Σ_s^ε} Ω  -  ∫_{Σ_0^ε} Ω ]
//! ```
//!
//! is stepped down in s until consecutive values stabilise, then the ε-table
//! is extrapolated to 0 and snapped to integers. The minimal route recomputes
//! both numbers from ||B||² and B(e1,e2) ^ B(e1,e1); the Euler route checks
//! the strand-count identity against the Gauss-Bonnet χ.

use crate::braid::slice::SliceOptions;
use crate::error::{Error, Result};
use crate::geom::boundary::{gauss_bonnet_euler, EulerResult};
use crate::geom::quad::{integrate_family, FormKind, QuadOptions, Region};
use crate::geom::surface::surface_point;
use crate::germ::family::{Chart, SurfaceFamily};
use num_complex::Complex64;

/// Double-limit schedule: ε values (decreasing), s values per ε
/// (decreasing), the s-stabilisation threshold and the integer-snap radius.
#[derive(Debug, Clone)]
pub struct LimitSchedule {
    pub eps: Vec<f64>,
    pub s: Vec<f64>,
    pub stabilize_threshold: f64,
    pub snap_threshold: f64,
}

impl LimitSchedule {
    pub fn for_family(family: &SurfaceFamily) -> LimitSchedule {
        LimitSchedule {
            eps: family.eps_schedule.clone(),
            s: family.s_schedule.clone(),
            stabilize_threshold: 0.02,
            snap_threshold: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dec = |v: &[f64]| v.windows(2).all(|w| w[1] > 0.0 && w[1] < w[0]);
        if self.eps.is_empty() || self.s.is_empty() || !dec(&self.eps) || !dec(&self.s) {
            return Err(Error::Config(
                "schedules must be nonempty, positive, strictly decreasing".into(),
            ));
        }
        if self.eps[0] <= 0.0 || self.s[0] <= 0.0 {
            return Err(Error::Config("schedules must be positive".into()));
        }
        if self.stabilize_threshold <= 0.0 || self.snap_threshold <= 0.0 {
            return Err(Error::Config("thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the l(ε, s) table (both bundle forms plus quadrature errors).
#[derive(Debug, Clone, Copy)]
pub struct TableEntry {
    pub eps: f64,
    pub s: f64,
    pub l_t: f64,
    pub l_t_err: f64,
    pub l_n: f64,
    pub l_n_err: f64,
}

/// Stabilisation diagnostics per ε.
#[derive(Debug, Clone, Copy)]
pub struct EpsDiagnostics {
    pub eps: f64,
    pub l_t: f64,
    pub l_n: f64,
    pub stabilized: bool,
    pub last_delta: f64,
}

/// The extrapolated Milnor estimate with its full table.
#[derive(Debug, Clone)]
pub struct MilnorEstimate {
    pub mu_t_raw: f64,
    pub mu_n_raw: f64,
    pub mu_t: Option<i64>,
    pub mu_n: Option<i64>,
    pub table: Vec<TableEntry>,
    pub per_eps: Vec<EpsDiagnostics>,
    /// μ^T - (N - 1), the classical number; reported for single-branch
    /// families only
    pub classical: Option<f64>,
}

impl MilnorEstimate {
    pub fn require_snapped(&self) -> Result<(i64, i64)> {
        match (self.mu_t, self.mu_n) {
            (Some(t), Some(n)) => Ok((t, n)),
            _ => {
                let raw = if self.mu_t.is_none() { self.mu_t_raw } else { self.mu_n_raw };
                Err(Error::SnapFailure {
                    raw,
                    dist: (raw - raw.round()).abs(),
                    threshold: 0.1,
                })
            }
        }
    }
}

fn snap(raw: f64, threshold: f64) -> Option<i64> {
    let r = raw.round();
    if (raw - r).abs() < threshold {
        Some(r as i64)
    } else {
        None
    }
}

/// Geometric extrapolation of the ε-table (values ordered by decreasing ε).
/// With a clean geometric tail the limit is corrected by the ratio of the
/// last differences; otherwise the smallest-ε value stands.
pub(crate) fn extrapolate(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 1 {
        return values[0];
    }
    let d_last = values[n - 1] - values[n - 2];
    if d_last.abs() < 2e-3 * values[n - 1].abs().max(1.0) {
        return values[n - 1];
    }
    if n >= 3 {
        let d_prev = values[n - 2] - values[n - 3];
        if d_prev.abs() > 1e-14 {
            let rho = d_last / d_prev;
            if rho > 0.05 && rho < 0.75 {
                return values[n - 1] + d_last * rho / (1.0 - rho);
            }
        }
    }
    values[n - 1]
}

pub(crate) struct BundleTable {
    pub(crate) entries: Vec<TableEntry>,
    pub(crate) per_eps: Vec<EpsDiagnostics>,
}

/// Fill the l(ε, s) table for a pair of integrand components with the given
/// normalisations; stops stepping s once both columns stabilise.
pub(crate) fn fill_table(
    family: &SurfaceFamily,
    schedule: &LimitSchedule,
    qopts: &QuadOptions,
    forms: (FormKind, FormKind),
    scale: (f64, f64),
) -> Result<BundleTable> {
    let opts = qopts.clone().with_active(&[FormKind::Area, forms.0, forms.1]);
    let mut entries = Vec::new();
    let mut per_eps = Vec::new();
    for &eps in &schedule.eps {
        let base = integrate_family(family, 0.0, Region::Ball { eps }, &opts)?;
        let b0 = (base.value.get(forms.0), base.value.get(forms.1));
        let e0 = (base.error.get(forms.0), base.error.get(forms.1));
        let mut prev: Option<(f64, f64)> = None;
        let mut stabilized = false;
        let mut last_delta = f64::MAX;
        let mut held = (f64::NAN, f64::NAN);
        for &s in &schedule.s {
            let r = integrate_family(family, s, Region::Ball { eps }, &opts)?;
            let lt = scale.0 * (r.value.get(forms.0) - b0.0);
            let ln = scale.1 * (r.value.get(forms.1) - b0.1);
            let lt_err = scale.0.abs() * (r.error.get(forms.0) + e0.0);
            let ln_err = scale.1.abs() * (r.error.get(forms.1) + e0.1);
            entries.push(TableEntry { eps, s, l_t: lt, l_t_err: lt_err, l_n: ln, l_n_err: ln_err });
            held = (lt, ln);
            if let Some((pt, pn)) = prev {
                let delta = (lt - pt).abs().max((ln - pn).abs());
                last_delta = delta;
                if delta < schedule.stabilize_threshold {
                    stabilized = true;
                    break;
                }
            }
            prev = Some((lt, ln));
        }
        per_eps.push(EpsDiagnostics { eps, l_t: held.0, l_n: held.1, stabilized, last_delta });
    }
    Ok(BundleTable { entries, per_eps })
}

/// The tangent/normal Milnor numbers along the curvature route.
pub fn milnor_estimate(
    family: &SurfaceFamily,
    schedule: &LimitSchedule,
    qopts: &QuadOptions,
) -> Result<MilnorEstimate> {
    schedule.validate()?;
    let inv = -1.0 / std::f64::consts::TAU;
    let t = fill_table(family, schedule, qopts, (FormKind::OmegaT, FormKind::OmegaN), (inv, inv))?;
    let lt: Vec<f64> = t.per_eps.iter().map(|d| d.l_t).collect();
    let ln: Vec<f64> = t.per_eps.iter().map(|d| d.l_n).collect();
    let mu_t_raw = extrapolate(&lt);
    let mu_n_raw = extrapolate(&ln);
    let classical = if family.branch.branches.len() == 1 {
        Some(mu_t_raw - (family.branch.branches[0].winding as f64 - 1.0))
    } else {
        None
    };
    Ok(MilnorEstimate {
        mu_t_raw,
        mu_n_raw,
        mu_t: snap(mu_t_raw, schedule.snap_threshold),
        mu_n: snap(mu_n_raw, schedule.snap_threshold),
        table: t.entries,
        per_eps: t.per_eps,
        classical,
    })
}

/// Verify max |trace B| / ||B|| over sampled immersed points of Σ_s.
pub fn check_minimality(family: &SurfaceFamily, s: f64, tol: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for pt in sample_surface_points(family, s, 60)? {
        let tr = pt.sff.trace();
        let t = (tr[0] * tr[0] + tr[1] * tr[1]).sqrt();
        let scale = pt.sff.norm_sq().sqrt().max(1.0);
        worst = worst.max(t / scale);
    }
    if worst > tol {
        return Err(Error::NotMinimal { trace: worst, tol });
    }
    Ok(worst)
}

/// Independent recomputation of (μ^T, μ^N) from the minimal-surface
/// integrands ||B||²/4π and B(e1,e2)^B(e1,e1)/π.
pub fn minimal_milnor(
    family: &SurfaceFamily,
    schedule: &LimitSchedule,
    qopts: &QuadOptions,
) -> Result<MilnorEstimate> {
    schedule.validate()?;
    if !family.flags.minimal {
        return Err(Error::Config(format!(
            "family `{}` is not flagged minimal",
            family.name
        )));
    }
    check_minimality(family, schedule.s[schedule.s.len() / 2], 1e-7)?;
    let t = fill_table(
        family,
        schedule,
        qopts,
        (FormKind::NormB2, FormKind::MinN),
        (1.0 / (2.0 * std::f64::consts::TAU), 1.0 / std::f64::consts::PI),
    )?;
    let lt: Vec<f64> = t.per_eps.iter().map(|d| d.l_t).collect();
    let ln: Vec<f64> = t.per_eps.iter().map(|d| d.l_n).collect();
    let mu_t_raw = extrapolate(&lt);
    let mu_n_raw = extrapolate(&ln);
    Ok(MilnorEstimate {
        mu_t_raw,
        mu_n_raw,
        mu_t: snap(mu_t_raw, schedule.snap_threshold),
        mu_n: snap(mu_n_raw, schedule.snap_threshold),
        table: t.entries,
        per_eps: t.per_eps,
        classical: None,
    })
}

/// Report of the Euler-characteristic limit identity
/// Σ s_i (m_i + 1) - χ = μ^T.
#[derive(Debug, Clone)]
pub struct EulerLimitReport {
    pub strand_total: u32,
    pub euler: EulerResult,
    pub mu_t_raw: f64,
    /// Σ s_i (m_i + 1) - χ
    pub lhs: f64,
    pub holds: bool,
}

pub fn euler_limit_check(
    family: &SurfaceFamily,
    schedule: &LimitSchedule,
    estimate: &MilnorEstimate,
    qopts: &QuadOptions,
    sopts: &SliceOptions,
) -> Result<EulerLimitReport> {
    let eps = *schedule.eps.last().unwrap();
    let s = *schedule.s.last().unwrap();
    let euler = gauss_bonnet_euler(family, s, eps, qopts, sopts)?;
    let strand_total = family.branch.strand_total();
    let lhs = strand_total as f64 - euler.chi_raw;
    let holds = (lhs - estimate.mu_t_raw).abs() < 0.2;
    Ok(EulerLimitReport { strand_total, euler, mu_t_raw: estimate.mu_t_raw, lhs, holds })
}

/// Inequality μ^T >= |μ^N| together with the hypothesis the preset claims.
#[derive(Debug, Clone)]
pub struct Theorem1Report {
    pub mu_t: i64,
    pub mu_n: i64,
    pub holds: bool,
    pub hypothesis: &'static str,
}

pub fn theorem1_check(family: &SurfaceFamily, estimate: &MilnorEstimate) -> Result<Theorem1Report> {
    let (mu_t, mu_n) = estimate.require_snapped()?;
    let hypothesis = if family.flags.embedded {
        "embedded"
    } else if family.flags.minimal {
        "minimal"
    } else {
        "none"
    };
    Ok(Theorem1Report { mu_t, mu_n, holds: mu_t >= mu_n.abs(), hypothesis })
}

/// Deterministic sample of immersed surface points of Σ_s.
pub fn sample_surface_points(
    family: &SurfaceFamily,
    s: f64,
    per_chart: usize,
) -> Result<Vec<crate::geom::surface::SurfacePoint>> {
    let mut out = Vec::new();
    for chart in family.charts_at(s) {
        match chart {
            Chart::Explicit(c) => {
                let r_lo = c.domain.r_in.max(0.15 * c.domain.r_out);
                let r_hi = 0.85 * c.domain.r_out;
                let n_r = 4usize;
                let n_t = per_chart.div_ceil(n_r);
                for ir in 0..n_r {
                    let r = r_lo + (r_hi - r_lo) * (ir as f64 + 0.5) / n_r as f64;
                    for it in 0..n_t {
                        let th = std::f64::consts::TAU * (it as f64 + 0.41) / n_t as f64;
                        let jet = c.jet_unchecked(Complex64::from_polar(r, th), s);
                        if let Ok(sp) = surface_point(&jet, None) {
                            out.push(sp);
                        }
                    }
                }
            }
            Chart::Implicit(c) => {
                let disc = c.discriminant_points(s);
                let r_lo = 0.15 * c.base_domain.r_out;
                let r_hi = 0.8 * c.base_domain.r_out;
                let n_r = 4usize;
                let n_t = per_chart.div_ceil(n_r);
                for ir in 0..n_r {
                    let r = r_lo + (r_hi - r_lo) * (ir as f64 + 0.5) / n_r as f64;
                    for it in 0..n_t {
                        let th = std::f64::consts::TAU * (it as f64 + 0.17) / n_t as f64;
                        let b = Complex64::from_polar(r, th);
                        if disc.iter().any(|(d, _)| (b - d).norm() < 0.02) {
                            continue;
                        }
                        let Ok(roots) = c.fiber_roots(b, s, None) else { continue };
                        for w in roots {
                            let Ok(jet) = c.sheet_jet(b, w, s) else { continue };
                            if let Ok(sp) = surface_point(&jet, None) {
                                out.push(sp);
                            }
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Validation("no immersed sample points found".into()));
    }
    Ok(out)
}

/// Superminimality defect: max over samples of ||B(e1, J e2) - J_N B(e1, e2)||.
#[derive(Debug, Clone)]
pub struct SuperminimalReport {
    pub max_defect: f64,
    pub samples: usize,
    /// a near-zero defect (right superminimality) forces μ^T = -μ^N
    pub predicts_opposite: bool,
}

pub fn superminimality_defect(
    family: &SurfaceFamily,
    s: f64,
    per_chart: usize,
) -> Result<SuperminimalReport> {
    let pts = sample_surface_points(family, s, per_chart)?;
    let mut max_defect = 0.0f64;
    for sp in &pts {
        // B(e1, J e2) = -B(e1, e1); J_N B12 = (-B12[1], B12[0])
        let d0 = -sp.sff.b11[0] - (-sp.sff.b12[1]);
        let d1 = -sp.sff.b11[1] - sp.sff.b12[0];
        max_defect = max_defect.max((d0 * d0 + d1 * d1).sqrt());
    }
    Ok(SuperminimalReport {
        max_defect,
        samples: pts.len(),
        predicts_opposite: max_defect < 1e-8,
    })
}
