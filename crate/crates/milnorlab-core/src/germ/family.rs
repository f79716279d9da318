//! Surface families: charts plus branch data plus schedules, with the
//! validation pass that every loaded family goes through.

use num_complex::Complex64;

use crate::alg::{dot4, norm4, normalize4, scale4, sub4, V4};
use crate::error::{Error, Result};
use crate::germ::chart::{Domain, ExplicitChart, ImplicitChart, Jet2, LimitRole};

/// One branch through the singular point: `winding` is the leading winding
/// order N of the branched-disc normal form, `multiplicity` the number of
/// times the disc is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchSpec {
    pub winding: u32,
    pub multiplicity: u32,
}

impl BranchSpec {
    /// Branching order m = N - 1 (zero at smooth branches).
    pub fn branching_order(&self) -> u32 {
        self.winding - 1
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BranchData {
    pub branches: Vec<BranchSpec>,
}

impl BranchData {
    /// Total strand count Σ s_i (m_i + 1) of a small sphere slice of the
    /// limit surface.
    pub fn strand_total(&self) -> u32 {
        self.branches
            .iter()
            .map(|b| b.multiplicity * b.winding)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    pub holomorphic: bool,
    pub minimal: bool,
    pub in_r3: bool,
    pub embedded: bool,
}

impl Flags {
    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.holomorphic {
            v.push("holomorphic");
        }
        if self.minimal {
            v.push("minimal");
        }
        if self.in_r3 {
            v.push("contained_in_r3");
        }
        if self.embedded {
            v.push("embedded");
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    Explicit(ExplicitChart),
    Implicit(ImplicitChart),
}

impl Chart {
    pub fn name(&self) -> &str {
        match self {
            Chart::Explicit(c) => &c.name,
            Chart::Implicit(c) => &c.name,
        }
    }

    pub fn multiplicity(&self) -> u32 {
        match self {
            Chart::Explicit(c) => c.multiplicity,
            Chart::Implicit(c) => c.multiplicity,
        }
    }

    pub fn limit_role(&self) -> LimitRole {
        match self {
            Chart::Explicit(c) => c.limit,
            Chart::Implicit(c) => c.limit,
        }
    }

    pub fn active(&self, at_limit: bool) -> bool {
        self.limit_role().active(at_limit)
    }
}

/// A degeneration family of surface germs: smooth members Σ_s for scheduled
/// s > 0 and the limit surface Σ_0 at s = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFamily {
    pub name: String,
    pub flags: Flags,
    /// the singular point of the limit surface
    pub p: V4,
    pub s_schedule: Vec<f64>,
    pub eps_schedule: Vec<f64>,
    pub charts: Vec<Chart>,
    pub branch: BranchData,
}

impl SurfaceFamily {
    /// Charts active at parameter s (s = 0 selects the limit surface).
    pub fn charts_at(&self, s: f64) -> Vec<&Chart> {
        let at_limit = s == 0.0;
        self.charts.iter().filter(|c| c.active(at_limit)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_schedule.is_empty() || self.s_schedule.is_empty() {
            return Err(Error::Validation("empty schedule".into()));
        }
        for w in self.eps_schedule.windows(2) {
            if !(w[1] > 0.0 && w[1] < w[0]) {
                return Err(Error::Validation("eps schedule must be strictly decreasing and positive".into()));
            }
        }
        for w in self.s_schedule.windows(2) {
            if !(w[1] > 0.0 && w[1] < w[0]) {
                return Err(Error::Validation("s schedule must be strictly decreasing and positive".into()));
            }
        }
        if self.eps_schedule[0] <= 0.0 || self.s_schedule[0] <= 0.0 {
            return Err(Error::Validation("schedules must be positive".into()));
        }
        if self.charts_at(0.0).is_empty() || self.charts_at(self.s_schedule[0]).is_empty() {
            return Err(Error::Validation("family needs at least one chart at s = 0 and one at s != 0".into()));
        }
        let mut names: Vec<&str> = self.charts.iter().map(|c| c.name()).collect();
        names.sort();
        names.dedup();
        if names.len() != self.charts.len() {
            return Err(Error::Validation("chart names must be unique".into()));
        }
        if self.branch.branches.iter().any(|b| b.winding == 0 || b.multiplicity == 0) {
            return Err(Error::Validation("branch entries need N >= 1 and s >= 1".into()));
        }

        self.check_rank2()?;
        self.check_base_point()?;
        self.check_declared_branches()?;
        Ok(())
    }

    /// Rank-2 sampling check on every smooth member: the differential of each
    /// active chart must have rank 2 at sampled interior points. Sampling is
    /// over a graded polar grid that stays off the branch locus.
    fn check_rank2(&self) -> Result<()> {
        for &s in &self.s_schedule {
            for chart in self.charts_at(s) {
                match chart {
                    Chart::Explicit(c) => {
                        for z in sample_points(&c.domain) {
                            let jet = c.jet_unchecked(z, s);
                            rank2_at(&jet, &c.name, z)?;
                        }
                    }
                    Chart::Implicit(c) => {
                        let rho = c.rho_cut.unwrap_or(1e-3);
                        let disc = c.discriminant_points(s);
                        for b in sample_points(&c.base_domain) {
                            if disc.iter().any(|(d, _)| (b - d).norm() < 2.0 * rho) {
                                continue;
                            }
                            let roots = c.fiber_roots(b, s, None)?;
                            for (k, &w) in roots.iter().enumerate() {
                                let residual = c.eval_poly(b, w, s).norm();
                                if residual > 1e-10 {
                                    return Err(Error::Validation(format!(
                                        "sheet {k} of `{}` at {b}: |P| = {residual:.3e}",
                                        c.name
                                    )));
                                }
                                let jet = c.sheet_jet(b, w, s)?;
                                rank2_at(&jet, &c.name, b)?;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Every limit chart whose domain contains z = 0 must pass through p.
    fn check_base_point(&self) -> Result<()> {
        for chart in self.charts_at(0.0) {
            if let Chart::Explicit(c) = chart {
                if c.domain.r_in == 0.0 {
                    let f = c.value(Complex64::default(), 0.0);
                    let d = norm4(sub4(f, self.p));
                    if d > 1e-9 {
                        return Err(Error::Validation(format!(
                            "chart `{}` maps 0 to distance {d:.3e} from p",
                            c.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Compare declared branch data against leading-term detection on the
    /// explicit limit charts through p.
    fn check_declared_branches(&self) -> Result<()> {
        let mut detected: Vec<BranchSpec> = Vec::new();
        let mut all_explicit = true;
        for chart in self.charts_at(0.0) {
            match chart {
                Chart::Explicit(c) if c.domain.r_in == 0.0 => {
                    let b = detect_branch(c, self.p)?;
                    detected.push(BranchSpec {
                        winding: b.winding,
                        multiplicity: c.multiplicity,
                    });
                }
                Chart::Explicit(_) => {}
                Chart::Implicit(_) => all_explicit = false,
            }
        }
        if all_explicit && !detected.is_empty() {
            let mut a = detected.clone();
            let mut b = self.branch.branches.clone();
            let key = |x: &BranchSpec| (x.winding, x.multiplicity);
            a.sort_by_key(key);
            b.sort_by_key(key);
            if a != b {
                return Err(Error::Validation(format!(
                    "declared branches {:?} do not match detected {:?}",
                    self.branch.branches, a
                )));
            }
        }
        Ok(())
    }

    /// Oriented tangent-plane basis of the branch carried by `chart` at p,
    /// taken in the limit surface.
    pub fn branch_plane(&self, chart: &Chart) -> Result<(V4, V4)> {
        match chart {
            Chart::Explicit(c) => {
                let det = detect_branch(c, self.p)?;
                Ok((det.plane_u, det.plane_v))
            }
            Chart::Implicit(c) => {
                // tangent plane at a small base point extends continuously
                // across the branch point
                let b = Complex64::new(1e-4 * c.base_domain.r_out.max(1.0), 0.0);
                let jet = c.jet_at_sheet(b, 0, 0.0)?;
                let e1 = normalize4(jet.fx);
                let mut e2 = sub4(jet.fy, scale4(e1, dot4(jet.fy, e1)));
                e2 = normalize4(e2);
                Ok((e1, e2))
            }
        }
    }
}

fn rank2_at<T: std::fmt::Display>(jet: &Jet2, name: &str, at: T) -> Result<()> {
    let w = crate::alg::wedge(jet.fx, jet.fy);
    let wn = crate::alg::norm6(w);
    let scale = norm4(jet.fx) * norm4(jet.fy);
    if wn <= 1e-10 * scale.max(1e-30) {
        return Err(Error::Validation(format!(
            "differential of `{name}` drops rank at {at} (||fx ^ fy|| = {wn:.3e})"
        )));
    }
    Ok(())
}

fn sample_points(domain: &Domain) -> Vec<Complex64> {
    let r_lo = domain.r_in.max(1e-4 * domain.r_out);
    let mut out = Vec::new();
    for ir in 0..6 {
        // graded toward the inner radius
        let t = ((ir as f64 + 0.5) / 6.0).powi(2);
        let r = r_lo + (domain.r_out * 0.98 - r_lo) * t;
        for it in 0..10 {
            let th = 2.0 * std::f64::consts::PI * (it as f64 + 0.37) / 10.0;
            out.push(Complex64::from_polar(r, th));
        }
    }
    out
}

/// Result of leading-term detection at the origin of an explicit chart.
#[derive(Debug, Clone)]
pub struct DetectedBranch {
    /// winding order N of the leading term
    pub winding: u32,
    /// ratio between the in-plane radius and the out-of-plane remainder at
    /// the probe radius
    pub dominance: f64,
    /// positively oriented basis of the tangent plane at the branch point
    pub plane_u: V4,
    pub plane_v: V4,
}

/// Leading-term winding order of an explicit chart at z = 0 (the chart is
/// evaluated at s = 0). The probe loop sits at |z| = 1e-3 and the leading
/// plane must dominate the remainder by roughly a factor 1e3 there.
pub fn detect_branch(chart: &ExplicitChart, p: V4) -> Result<DetectedBranch> {
    let r0 = 1e-3_f64;
    if chart.domain.r_in > r0 || chart.domain.r_out < r0 {
        return Err(Error::Validation(format!(
            "chart `{}` domain does not contain the probe radius {r0}",
            chart.name
        )));
    }
    let m = 256;
    let loop_pts: Vec<V4> = (0..m)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            sub4(chart.value(Complex64::from_polar(r0, th), 0.0), p)
        })
        .collect();
    // covariance and its top-2 eigenvectors by power iteration
    let mut cov = [[0.0_f64; 4]; 4];
    for v in &loop_pts {
        for i in 0..4 {
            for j in 0..4 {
                cov[i][j] += v[i] * v[j];
            }
        }
    }
    let matvec = |m: &[[f64; 4]; 4], v: V4| -> V4 {
        std::array::from_fn(|i| (0..4).map(|j| m[i][j] * v[j]).sum())
    };
    let power = |m: &[[f64; 4]; 4]| -> V4 {
        let mut v = normalize4([1.0, 0.731, 0.517, 0.293]);
        for _ in 0..300 {
            let w = matvec(m, v);
            let n = norm4(w);
            if n < 1e-300 {
                return v;
            }
            v = scale4(w, 1.0 / n);
        }
        v
    };
    let u1 = power(&cov);
    let lam1 = dot4(matvec(&cov, u1), u1);
    let mut cov2 = cov;
    for i in 0..4 {
        for j in 0..4 {
            cov2[i][j] -= lam1 * u1[i] * u1[j];
        }
    }
    let mut u2 = power(&cov2);
    u2 = normalize4(sub4(u2, scale4(u1, dot4(u2, u1))));

    let mut min_inplane = f64::MAX;
    let mut max_resid = 0.0_f64;
    let mut total_angle = 0.0;
    let mut prev_angle: Option<f64> = None;
    for v in &loop_pts {
        let a = dot4(*v, u1);
        let b = dot4(*v, u2);
        let inplane = (a * a + b * b).sqrt();
        let resid = norm4(sub4(sub4(*v, scale4(u1, a)), scale4(u2, b)));
        min_inplane = min_inplane.min(inplane);
        max_resid = max_resid.max(resid);
        let ang = b.atan2(a);
        if let Some(pa) = prev_angle {
            let mut d = ang - pa;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total_angle += d;
        }
        prev_angle = Some(ang);
    }
    // close the loop
    {
        let first = loop_pts[0];
        let a = dot4(first, u1);
        let b = dot4(first, u2);
        let ang = b.atan2(a);
        let mut d = ang - prev_angle.unwrap();
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total_angle += d;
    }
    let dominance = if max_resid < 1e-14 * min_inplane.max(1e-30) {
        f64::INFINITY
    } else {
        min_inplane / max_resid
    };
    if min_inplane <= 0.0 || !(dominance >= 0.99e3) {
        return Err(Error::Validation(format!(
            "no leading term of normal form at z = 0 of `{}` (dominance {dominance:.3e})",
            chart.name
        )));
    }
    let turns = total_angle / (2.0 * std::f64::consts::PI);
    let n = turns.round();
    if (turns - n).abs() > 0.05 || n.abs() < 0.5 {
        return Err(Error::Validation(format!(
            "leading term of `{}` winds {turns:.4} times, not an integer",
            chart.name
        )));
    }
    let (u2, n) = if n < 0.0 {
        (scale4(u2, -1.0), -n)
    } else {
        (u2, n)
    };
    Ok(DetectedBranch {
        winding: n as u32,
        dominance,
        plane_u: u1,
        plane_v: u2,
    })
}
