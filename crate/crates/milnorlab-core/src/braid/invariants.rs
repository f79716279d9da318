//! Link invariants of sphere slices: the braid-axis criterion, linking
//! numbers by the Gauss double integral after stereographic projection, the
//! algebraic crossing number as the self-linking with the push-off framing,
//! and the Bennequin-type inequality checks.

use crate::alg::{cross3, det4, dot4, norm4, normalize4, scale4, sub4, V3, V4};
use crate::braid::slice::{resample_on_sphere, slice_with_nudge, SliceOptions, SphereSlice};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::geom::boundary::{gauss_bonnet_euler, pick_framing_field};
use crate::geom::quad::QuadOptions;
use crate::germ::family::SurfaceFamily;
use crate::milnor::MilnorEstimate;

/// Braid-axis diagnostics per the projection criterion: the great circle of
/// the given plane is an axis iff the projection onto the orthogonal
/// complement never vanishes and winds monotonically.
#[derive(Debug, Clone, Copy)]
pub struct AxisReport {
    /// min over vertices of x1² + x2² (projection onto the complement)
    pub min_norm2: f64,
    /// min over vertices of |x1 x2' - x2 x1'| (finite differences)
    pub min_rate: f64,
    /// true when the winding rate keeps one sign along every component
    pub monotone: bool,
    pub verdict: bool,
}

/// Apply the axis criterion for the great circle of `plane` (given by an
/// orthonormal oriented basis). Derivatives are finite differences along
/// the polyline.
pub fn axis_test(slice: &SphereSlice, p: V4, plane: (V4, V4)) -> AxisReport {
    // orthonormal basis of the complement of the plane
    let (u, v) = plane;
    let mut n1 = [0.0; 4];
    let mut best = -1.0;
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        let r = reject(reject(e, u), v);
        let rn = norm4(r);
        if rn > best {
            best = rn;
            n1 = r;
        }
    }
    let n1 = normalize4(n1);
    let mut n2 = [0.0; 4];
    let mut best = -1.0;
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        let r = reject(reject(reject(e, u), v), n1);
        let rn = norm4(r);
        if rn > best {
            best = rn;
            n2 = r;
        }
    }
    let n2 = normalize4(n2);

    let mut min_norm2 = f64::MAX;
    let mut min_rate = f64::MAX;
    let mut monotone = true;
    for comp in &slice.components {
        let m = comp.vertices.len();
        let xs: Vec<(f64, f64)> = comp
            .vertices
            .iter()
            .map(|vt| {
                let d = sub4(vt.pos, p);
                (dot4(d, n1), dot4(d, n2))
            })
            .collect();
        let mut sign = 0.0;
        for i in 0..m {
            let (x1, x2) = xs[i];
            min_norm2 = min_norm2.min(x1 * x1 + x2 * x2);
            let (p1, p2) = xs[(i + m - 1) % m];
            let (q1, q2) = xs[(i + 1) % m];
            let dx1 = 0.5 * (q1 - p1);
            let dx2 = 0.5 * (q2 - p2);
            let rate = x1 * dx2 - x2 * dx1;
            min_rate = min_rate.min(rate.abs());
            if rate != 0.0 {
                if sign == 0.0 {
                    sign = rate.signum();
                } else if sign != rate.signum() {
                    monotone = false;
                }
            }
        }
    }
    let eps = slice.eps;
    let norm_ok = min_norm2 > (1e-3 * eps) * (1e-3 * eps);
    // expected rate scale: |x|² · 2π / vertices per turn
    let n_avg = slice
        .components
        .iter()
        .map(|c| c.vertices.len())
        .max()
        .unwrap_or(1) as f64;
    let rate_ok = min_rate > 1e-3 * min_norm2.max(1e-300) * std::f64::consts::TAU / n_avg;
    AxisReport {
        min_norm2,
        min_rate,
        monotone,
        verdict: norm_ok && rate_ok && monotone,
    }
}

fn reject(v: V4, onto: V4) -> V4 {
    sub4(v, scale4(onto, dot4(v, onto)))
}

/// Raw and snapped linking value.
#[derive(Debug, Clone, Copy)]
pub struct Linking {
    pub raw: f64,
    pub snapped: Option<i64>,
}

/// Stereographic image of points of S(p, ε) from a pole chosen away from
/// both curves; the frame (b1, b2, b3) of the pole complement is oriented so
/// that the complex-oriented Hopf pair links positively.
struct Stereo {
    p: V4,
    eps: f64,
    pole: V4,
    frame: [V4; 3],
}

impl Stereo {
    fn project(&self, x: V4) -> V3 {
        let u = scale4(sub4(x, self.p), 1.0 / self.eps);
        let t = dot4(u, self.pole);
        let w = scale4(sub4(u, scale4(self.pole, t)), 1.0 / (1.0 - t));
        [
            dot4(w, self.frame[0]),
            dot4(w, self.frame[1]),
            dot4(w, self.frame[2]),
        ]
    }
}

fn stereo_for(curves: &[&[V4]], p: V4, eps: f64) -> Result<Stereo> {
    // deterministic candidate poles on the sphere
    let mut best: Option<(f64, V4)> = None;
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    for i in 0..240 {
        let t = (i as f64 + 0.5) / 240.0;
        let phi1 = (1.0 - 2.0 * t).acos();
        let phi2 = golden * i as f64;
        let phi3 = 2.399963 * (i as f64) * 0.618;
        let dir = normalize4([
            phi1.sin() * phi2.cos(),
            phi1.sin() * phi2.sin(),
            phi1.cos() * phi3.cos(),
            phi1.cos() * phi3.sin(),
        ]);
        let cand: V4 = std::array::from_fn(|k| p[k] + eps * dir[k]);
        let mut min_d = f64::MAX;
        for c in curves {
            for x in c.iter() {
                min_d = min_d.min(norm4(sub4(*x, cand)));
            }
        }
        if best.as_ref().map_or(true, |(b, _)| min_d > *b) {
            best = Some((min_d, dir));
        }
    }
    let (score, pole) = best.unwrap();
    if score < 0.05 * eps {
        return Err(Error::PoleTooClose { dist: score });
    }
    // orthonormal frame of pole-perp with det(pole, b1, b2, b3) = +1
    let mut frame = [[0.0; 4]; 3];
    let mut picked = 0;
    for i in 0..4 {
        if picked == 3 {
            break;
        }
        let mut e = [0.0; 4];
        e[i] = 1.0;
        let mut r = reject(e, pole);
        for b in frame.iter().take(picked) {
            r = reject(r, *b);
        }
        let rn = norm4(r);
        if rn > 1e-6 {
            frame[picked] = scale4(r, 1.0 / rn);
            picked += 1;
        }
    }
    if det4(pole, frame[0], frame[1], frame[2]) < 0.0 {
        frame[2] = scale4(frame[2], -1.0);
    }
    Ok(Stereo { p, eps, pole, frame })
}

/// Gauss linking integral of two closed polylines on S(p, ε), evaluated by
/// the midpoint double sum after stereographic projection.
pub fn gauss_linking(a: &[V4], b: &[V4], p: V4, eps: f64) -> Result<Linking> {
    // disjointness at the mesh scale
    let mesh = polyline_mesh(a).max(polyline_mesh(b));
    let mut min_d = f64::MAX;
    for x in a {
        for y in b {
            min_d = min_d.min(norm4(sub4(*x, *y)));
        }
    }
    if min_d < 3.0 * mesh {
        return Err(Error::PushOffCollision { dist: min_d });
    }
    let st = stereo_for(&[a, b], p, eps)?;
    let pa: Vec<V3> = a.iter().map(|x| st.project(*x)).collect();
    let pb: Vec<V3> = b.iter().map(|x| st.project(*x)).collect();
    let raw = gauss_double_sum(&pa, &pb);
    Ok(Linking { raw, snapped: snap_int(raw, 0.1) })
}

fn snap_int(raw: f64, threshold: f64) -> Option<i64> {
    let r = raw.round();
    ((raw - r).abs() < threshold).then_some(r as i64)
}

fn polyline_mesh(c: &[V4]) -> f64 {
    let m = c.len();
    (0..m)
        .map(|i| norm4(sub4(c[(i + 1) % m], c[i])))
        .fold(0.0, f64::max)
}

/// (1/4π) Σ_ij <(m_i - n_j), t_i × s_j> / |m_i - n_j|³ over segment
/// midpoints; blocks run in parallel with a fixed accumulation order.
pub fn gauss_double_sum(a: &[V3], b: &[V3]) -> f64 {
    let na = a.len();
    let nb = b.len();
    let mids_a: Vec<V3> = (0..na)
        .map(|i| mid3(a[i], a[(i + 1) % na]))
        .collect();
    let segs_a: Vec<V3> = (0..na)
        .map(|i| sub3v(a[(i + 1) % na], a[i]))
        .collect();
    let mids_b: Vec<V3> = (0..nb).map(|j| mid3(b[j], b[(j + 1) % nb])).collect();
    let segs_b: Vec<V3> = (0..nb).map(|j| sub3v(b[(j + 1) % nb], b[j])).collect();
    let rows: Vec<f64> = map_indexed(ExecMode::Auto, na, |i| {
        let mut acc = 0.0;
        for j in 0..nb {
            let r = sub3v(mids_a[i], mids_b[j]);
            let r2 = dot3v(r, r);
            let r3 = r2 * r2.sqrt();
            acc += dot3v(r, cross3(segs_a[i], segs_b[j])) / r3;
        }
        acc
    });
    rows.iter().sum::<f64>() / (4.0 * std::f64::consts::PI)
}

fn mid3(a: V3, b: V3) -> V3 {
    [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5, (a[2] + b[2]) * 0.5]
}

fn sub3v(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3v(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Braid invariants of a slice: strand count, per-component algebraic
/// crossing numbers e_i = lk(K_i, K̂_i), the pairwise linking matrix and the
/// total self-linking of the link with its push-off.
#[derive(Debug, Clone)]
pub struct BraidInvariants {
    pub strands: u32,
    pub e_raw: Vec<f64>,
    pub e: Vec<i64>,
    pub lk_raw: Vec<Vec<f64>>,
    pub lk: Vec<Vec<i64>>,
    pub e_total: i64,
    pub framing: V4,
    pub delta: f64,
    pub mesh: usize,
}

/// Compute crossing data with the push-off framing X (radially reprojected
/// onto the sphere). δ is halved once on collision.
pub fn crossing_number(
    slice: &SphereSlice,
    p: V4,
    x: V4,
    delta: f64,
    mesh: usize,
) -> Result<BraidInvariants> {
    let eps = slice.eps;
    let curves: Vec<Vec<V4>> = slice
        .components
        .iter()
        .map(|c| resample_on_sphere(&c.vertices, p, eps, mesh))
        .collect();
    let mut delta_used = delta;
    'attempt: for attempt in 0..2 {
        let push: Vec<Vec<V4>> = curves
            .iter()
            .map(|c| {
                c.iter()
                    .map(|q| {
                        let shifted: V4 = std::array::from_fn(|k| q[k] + delta_used * x[k]);
                        let d = sub4(shifted, p);
                        let dn = norm4(d);
                        std::array::from_fn(|k| p[k] + d[k] * eps / dn)
                    })
                    .collect()
            })
            .collect();
        // push-off must stay clear of the original link
        for (ci, c) in curves.iter().enumerate() {
            let mut min_d = f64::MAX;
            for q in &push[ci] {
                for v in c.iter() {
                    min_d = min_d.min(norm4(sub4(*q, *v)));
                }
            }
            if min_d < 0.05 * delta_used {
                if attempt == 0 {
                    delta_used *= 0.5;
                    continue 'attempt;
                }
                return Err(Error::PushOffCollision { dist: min_d });
            }
        }
        let n = curves.len();
        let mut e_raw = Vec::with_capacity(n);
        let mut e = Vec::with_capacity(n);
        for i in 0..n {
            let l = gauss_linking(&curves[i], &push[i], p, eps)?;
            e_raw.push(l.raw);
            e.push(l.snapped.ok_or(Error::SnapFailure {
                raw: l.raw,
                dist: (l.raw - l.raw.round()).abs(),
                threshold: 0.1,
            })?);
        }
        let mut lk_raw = vec![vec![0.0; n]; n];
        let mut lk = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let l = gauss_linking(&curves[i], &curves[j], p, eps)?;
                lk_raw[i][j] = l.raw;
                lk_raw[j][i] = l.raw;
                let v = l.snapped.ok_or(Error::SnapFailure {
                    raw: l.raw,
                    dist: (l.raw - l.raw.round()).abs(),
                    threshold: 0.1,
                })?;
                lk[i][j] = v;
                lk[j][i] = v;
            }
        }
        let mults: Vec<i64> = slice
            .components
            .iter()
            .map(|c| c.multiplicity as i64)
            .collect();
        let mut e_total = 0i64;
        for i in 0..n {
            e_total += mults[i] * mults[i] * e[i];
            for j in (i + 1)..n {
                e_total += 2 * mults[i] * mults[j] * lk[i][j];
            }
        }
        return Ok(BraidInvariants {
            strands: slice.strand_total(),
            e_raw,
            e,
            lk_raw,
            lk,
            e_total,
            framing: x,
            delta: delta_used,
            mesh,
        });
    }
    unreachable!()
}

/// Bennequin-style report at a fixed (s, ε): the slice inequality
/// χ <= n - e and the two-sided |e| <= -χ + n.
#[derive(Debug, Clone)]
pub struct BennequinReport {
    pub chi_raw: f64,
    pub strands: u32,
    pub e_total: i64,
    pub slice_inequality: bool,
    pub two_sided: bool,
    pub eps_used: f64,
}

pub fn bennequin_check(
    family: &SurfaceFamily,
    s: f64,
    eps: f64,
    qopts: &QuadOptions,
    sopts: &SliceOptions,
) -> Result<BennequinReport> {
    let euler = gauss_bonnet_euler(family, s, eps, qopts, sopts)?;
    let (slice, eps_used) = slice_with_nudge(family, s, euler.eps_used, sopts)?;
    let x = pick_framing_field(family, s, &slice)?;
    let inv = crossing_number(&slice, family.p, x, eps_used / 100.0, 720)?;
    let n = inv.strands as f64;
    let e = inv.e_total as f64;
    // χ is compared through its snapped value when available
    let chi = euler.chi.map(|c| c as f64).unwrap_or(euler.chi_raw);
    Ok(BennequinReport {
        chi_raw: euler.chi_raw,
        strands: inv.strands,
        e_total: inv.e_total,
        slice_inequality: chi <= n - e + 1e-9,
        two_sided: e.abs() <= -chi + n + 1e-9,
        eps_used,
    })
}

/// Comparison |μ^N| = |e(Γ^ε)| on the limit surface of a topologically
/// embedded family, with the empirical relative sign recorded.
#[derive(Debug, Clone)]
pub struct Prop2Report {
    pub mu_n: i64,
    pub e_limit: i64,
    pub equal_abs: bool,
    pub relative_sign: i64,
    pub eps_used: f64,
}

pub fn prop2_check(
    family: &SurfaceFamily,
    estimate: &MilnorEstimate,
    eps: f64,
    sopts: &SliceOptions,
) -> Result<Prop2Report> {
    if !family.flags.embedded {
        return Err(Error::Config(format!(
            "family `{}` is not flagged embedded; the crossing-number identity needs that",
            family.name
        )));
    }
    let (_, mu_n) = estimate.require_snapped()?;
    let (slice, eps_used) = slice_with_nudge(family, 0.0, eps, sopts)?;
    let x = pick_framing_field(family, 0.0, &slice)?;
    let inv = crossing_number(&slice, family.p, x, eps_used / 100.0, 720)?;
    let e = inv.e_total;
    let relative_sign = if mu_n == 0 || e == 0 {
        0
    } else {
        (mu_n.signum() * e.signum()) as i64
    };
    Ok(Prop2Report {
        mu_n,
        e_limit: e,
        equal_abs: mu_n.abs() == e.abs(),
        relative_sign,
        eps_used,
    })
}

/// The two reference circles of the complex coordinate planes, positively
/// oriented; their linking value calibrates every sign downstream.
pub fn hopf_reference_curves(n: usize) -> (Vec<V4>, Vec<V4>) {
    let c1 = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            [t.cos(), t.sin(), 0.0, 0.0]
        })
        .collect();
    let c2 = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            [0.0, 0.0, t.cos(), t.sin()]
        })
        .collect();
    (c1, c2)
}

/// Linking of the Hopf reference at the given mesh.
pub fn hopf_reference_linking(n: usize) -> Result<Linking> {
    let (c1, c2) = hopf_reference_curves(n);
    gauss_linking(&c1, &c2, [0.0; 4], 1.0)
}
