//! Tracing the link Σ_s ∩ S(p, ε): predictor-corrector continuation of the
//! level curves ||f - p|| = ε in each chart, oriented as the Stokes boundary
//! of {||f - p|| <= ε}.

use num_complex::Complex64;

use crate::alg::{norm4, sub4, V4};
use crate::error::{Error, Result};
use crate::germ::chart::{ExplicitChart, ImplicitChart};
use crate::germ::family::{Chart, SurfaceFamily};
use crate::germ::Jet2;

/// One traced vertex: ambient position plus its chart parameter (and the
/// fiber value for implicit charts).
#[derive(Debug, Clone, Copy)]
pub struct SliceVertex {
    pub pos: V4,
    pub param: Complex64,
    pub fiber: Option<Complex64>,
}

/// A closed oriented component of the slice; vertices form a ring (the edge
/// from the last back to the first closes the loop).
#[derive(Debug, Clone)]
pub struct SliceComponent {
    pub chart_index: usize,
    pub multiplicity: u32,
    pub vertices: Vec<SliceVertex>,
    /// winding of the component around the axis circle of its branch
    /// (projection onto the branch tangent plane)
    pub winding: i32,
}

/// The oriented link Σ_s ∩ S(p, ε) with braid-axis bookkeeping.
#[derive(Debug, Clone)]
pub struct SphereSlice {
    pub eps: f64,
    pub s: f64,
    pub components: Vec<SliceComponent>,
}

impl SphereSlice {
    /// Total strand count Σ multiplicity · |winding|.
    pub fn strand_total(&self) -> u32 {
        self.components
            .iter()
            .map(|c| c.multiplicity * c.winding.unsigned_abs())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct SliceOptions {
    /// target vertex spacing as a fraction of 2πε
    pub step_fraction: f64,
    /// seed rays per chart
    pub seed_rays: usize,
    pub max_steps: usize,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions {
            step_fraction: 1.0 / 1024.0,
            seed_rays: 96,
            max_steps: 400_000,
        }
    }
}

struct ExplicitLevel<'a> {
    chart: &'a ExplicitChart,
    p: V4,
    s: f64,
    eps2: f64,
}

impl<'a> ExplicitLevel<'a> {
    fn jet(&self, z: Complex64) -> Jet2 {
        self.chart.jet_unchecked(z, self.s)
    }

    /// level function, chart gradient and R^4 speed of the oriented tangent
    fn probe(&self, z: Complex64) -> (f64, [f64; 2], Jet2) {
        let jet = self.jet(z);
        let d = sub4(jet.f, self.p);
        let val = d.iter().map(|v| v * v).sum::<f64>() - self.eps2;
        let grad = [
            2.0 * (0..4).map(|k| d[k] * jet.fx[k]).sum::<f64>(),
            2.0 * (0..4).map(|k| d[k] * jet.fy[k]).sum::<f64>(),
        ];
        (val, grad, jet)
    }
}

fn trace_explicit(
    lvl: &ExplicitLevel,
    opts: &SliceOptions,
) -> Result<Vec<Vec<SliceVertex>>> {
    let dom = lvl.chart.domain;
    let eps = lvl.eps2.sqrt();
    // seeds from radial crossings
    let mut seeds: Vec<Complex64> = Vec::new();
    let scan: Vec<f64> = if dom.r_in > 1e-12 * dom.r_out {
        (0..=400)
            .map(|j| dom.r_in * (dom.r_out / dom.r_in).powf(j as f64 / 400.0))
            .collect()
    } else {
        (0..=400).map(|j| dom.r_out * (j as f64 / 400.0).powi(2)).collect()
    };
    for k in 0..opts.seed_rays {
        let th = std::f64::consts::TAU * (k as f64 + 0.13) / opts.seed_rays as f64;
        let e = Complex64::from_polar(1.0, th);
        let mut prev: Option<(f64, f64)> = None;
        for &r in &scan {
            let (v, _, _) = lvl.probe(e * r);
            if let Some((rp, vp)) = prev {
                if vp.signum() != v.signum() {
                    let mut a = rp;
                    let mut b = r;
                    let mut fa = vp;
                    for _ in 0..60 {
                        let m = 0.5 * (a + b);
                        let (fm, _, _) = lvl.probe(e * m);
                        if fa * fm <= 0.0 {
                            b = m;
                        } else {
                            a = m;
                            fa = fm;
                        }
                    }
                    seeds.push(e * (0.5 * (a + b)));
                }
            }
            prev = Some((r, v));
        }
    }

    let mut components: Vec<Vec<SliceVertex>> = Vec::new();
    let mut consumed = vec![false; seeds.len()];
    for i in 0..seeds.len() {
        if consumed[i] {
            continue;
        }
        consumed[i] = true;
        let start = seeds[i];
        let mut z = start;
        let mut verts: Vec<SliceVertex> = Vec::new();
        let mut chart_step_first = 0.0;
        let target = opts.step_fraction * std::f64::consts::TAU * eps;
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Trace(format!(
                    "component from seed {start} did not close after {} steps",
                    opts.max_steps
                )));
            }
            let (val, grad, jet) = lvl.probe(z);
            let gn = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
            let fx_n = norm4(jet.fx).max(norm4(jet.fy));
            if gn < 1e-7 * (2.0 * eps * fx_n).max(1e-300) {
                return Err(Error::TangentSlice {
                    eps,
                    msg: format!("|grad| = {gn:.3e} at z = {z}"),
                });
            }
            // Newton correction back to the level set
            let zc = Complex64::new(
                z.re - val * grad[0] / (gn * gn),
                z.im - val * grad[1] / (gn * gn),
            );
            z = zc;
            let (_, grad, jet) = lvl.probe(z);
            let w = [grad[1] / gn, -grad[0] / gn]; // rot90ccw of outward normal... see below
            // Stokes orientation: region {g <= eps²} on the left means the
            // tangent is rot90ccw(grad): (-grad_y, grad_x)
            let w = [-w[0], -w[1]];
            let dfw: V4 = std::array::from_fn(|k| jet.fx[k] * w[0] + jet.fy[k] * w[1]);
            let speed = norm4(dfw);
            let h_chart = (target / speed.max(1e-300)).min(0.2 * z.norm().max(1e-6));
            verts.push(SliceVertex { pos: jet.f, param: z, fiber: None });
            if verts.len() == 1 {
                chart_step_first = h_chart;
            }
            let znew = Complex64::new(z.re + h_chart * w[0], z.im + h_chart * w[1]);
            z = znew;
            if verts.len() > 8 {
                let d = (z - start).norm();
                if d < 1.5 * chart_step_first {
                    break;
                }
            }
        }
        // consume seeds lying on this component
        for (j, sd) in seeds.iter().enumerate() {
            if consumed[j] {
                continue;
            }
            let close = verts
                .iter()
                .any(|v| (v.param - sd).norm() < 4.0 * chart_step_first.max(1e-12));
            if close {
                consumed[j] = true;
            }
        }
        components.push(verts);
    }
    Ok(components)
}

struct ImplicitLevel<'a> {
    chart: &'a ImplicitChart,
    p: V4,
    s: f64,
    eps2: f64,
}

impl<'a> ImplicitLevel<'a> {
    fn pos(&self, b: Complex64, w: Complex64) -> V4 {
        if self.chart.base == crate::germ::Var::X {
            [b.re, b.im, w.re, w.im]
        } else {
            [w.re, w.im, b.re, b.im]
        }
    }

    /// constraint values and their gradients as rows over
    /// (re base, im base, re fiber, im fiber)
    fn constraints(&self, b: Complex64, w: Complex64) -> ([f64; 3], [[f64; 4]; 3]) {
        let pv = self.chart.eval_poly(b, w, self.s);
        let pb = self.chart.d_base(b, w, self.s);
        let pw = self.chart.d_fiber(b, w, self.s);
        let q = sub4(self.pos(b, w), self.p);
        let g = q.iter().map(|v| v * v).sum::<f64>() - self.eps2;
        let grad_re = [pb.re, -pb.im, pw.re, -pw.im];
        let grad_im = [pb.im, pb.re, pw.im, pw.re];
        let base_is_x = self.chart.base == crate::germ::Var::X;
        let grad_g = if base_is_x {
            [2.0 * q[0], 2.0 * q[1], 2.0 * q[2], 2.0 * q[3]]
        } else {
            [2.0 * q[2], 2.0 * q[3], 2.0 * q[0], 2.0 * q[1]]
        };
        ([pv.re, pv.im, g], [grad_re, grad_im, grad_g])
    }
}

fn cross4_rows(r1: [f64; 4], r2: [f64; 4], r3: [f64; 4]) -> [f64; 4] {
    let det3 = |c: [usize; 3]| -> f64 {
        r1[c[0]] * (r2[c[1]] * r3[c[2]] - r2[c[2]] * r3[c[1]])
            - r1[c[1]] * (r2[c[0]] * r3[c[2]] - r2[c[2]] * r3[c[0]])
            + r1[c[2]] * (r2[c[0]] * r3[c[1]] - r2[c[1]] * r3[c[0]])
    };
    [
        det3([1, 2, 3]),
        -det3([0, 2, 3]),
        det3([0, 1, 3]),
        -det3([0, 1, 2]),
    ]
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let co = |i: usize, j: usize| -> f64 {
        let r: Vec<usize> = (0..3).filter(|&k| k != i).collect();
        let c: Vec<usize> = (0..3).filter(|&k| k != j).collect();
        let m = a[r[0]][c[0]] * a[r[1]][c[1]] - a[r[0]][c[1]] * a[r[1]][c[0]];
        if (i + j) % 2 == 0 {
            m
        } else {
            -m
        }
    };
    let mut x = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            x[i] += co(j, i) * inv * b[j];
        }
    }
    Some(x)
}

fn trace_implicit(lvl: &ImplicitLevel, opts: &SliceOptions) -> Result<Vec<Vec<SliceVertex>>> {
    let eps = lvl.eps2.sqrt();
    let dom = lvl.chart.base_domain;
    // seeds: radial scan over the base disc, per sheet
    let mut seeds: Vec<(Complex64, Complex64)> = Vec::new();
    let scan: Vec<f64> = (1..=300).map(|j| dom.r_out * (j as f64 / 300.0).powi(2)).collect();
    for k in 0..opts.seed_rays {
        let th = std::f64::consts::TAU * (k as f64 + 0.29) / opts.seed_rays as f64;
        let e = Complex64::from_polar(1.0, th);
        let mut roots: Option<Vec<Complex64>> = None;
        let mut prev: Option<(f64, Vec<f64>, Vec<Complex64>)> = None;
        for &r in &scan {
            let b = e * r;
            let new = match lvl.chart.fiber_roots(b, lvl.s, roots.as_deref()) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let gvals: Vec<f64> = new
                .iter()
                .map(|w| {
                    let q = sub4(lvl.pos(b, *w), lvl.p);
                    q.iter().map(|v| v * v).sum::<f64>() - lvl.eps2
                })
                .collect();
            if let Some((rp, gp, rootp)) = &prev {
                for (kslot, g) in gvals.iter().enumerate() {
                    if kslot < gp.len() && gp[kslot].signum() != g.signum() {
                        // bisect along the ray with fiber continuation
                        let mut a = *rp;
                        let mut bb = r;
                        let mut wa = rootp[kslot];
                        let mut fa = gp[kslot];
                        for _ in 0..60 {
                            let m = 0.5 * (a + bb);
                            let bm = e * m;
                            let mut wm = wa;
                            for _ in 0..20 {
                                let pv = lvl.chart.eval_poly(bm, wm, lvl.s);
                                if pv.norm() < 1e-13 {
                                    break;
                                }
                                let dv = lvl.chart.d_fiber(bm, wm, lvl.s);
                                if dv.norm() < 1e-250 {
                                    break;
                                }
                                wm -= pv / dv;
                            }
                            let q = sub4(lvl.pos(bm, wm), lvl.p);
                            let fm = q.iter().map(|v| v * v).sum::<f64>() - lvl.eps2;
                            if fa * fm <= 0.0 {
                                bb = m;
                            } else {
                                a = m;
                                fa = fm;
                                wa = wm;
                            }
                        }
                        let bsol = e * (0.5 * (a + bb));
                        let mut wsol = wa;
                        for _ in 0..20 {
                            let pv = lvl.chart.eval_poly(bsol, wsol, lvl.s);
                            if pv.norm() < 1e-13 {
                                break;
                            }
                            wsol -= pv / lvl.chart.d_fiber(bsol, wsol, lvl.s);
                        }
                        // keep seeds away from the discriminant locus
                        if lvl.chart.d_fiber(bsol, wsol, lvl.s).norm() > 1e-5 {
                            seeds.push((bsol, wsol));
                        }
                    }
                }
            }
            prev = Some((r, gvals, new.clone()));
            roots = Some(new);
        }
    }

    let mut components: Vec<Vec<SliceVertex>> = Vec::new();
    let mut consumed = vec![false; seeds.len()];
    for i in 0..seeds.len() {
        if consumed[i] {
            continue;
        }
        consumed[i] = true;
        let (b0, w0) = seeds[i];
        // initial direction from the base-chart Stokes rule
        let jet0 = lvl.chart.sheet_jet(b0, w0, lvl.s)?;
        let d0 = sub4(jet0.f, lvl.p);
        let gx = 2.0 * (0..4).map(|k| d0[k] * jet0.fx[k]).sum::<f64>();
        let gy = 2.0 * (0..4).map(|k| d0[k] * jet0.fy[k]).sum::<f64>();
        let w_chart = [-gy, gx];
        let wprime = {
            let (w1, _) = lvl.chart.sheet_derivs(b0, w0, lvl.s)?;
            w1
        };
        let dir_base = Complex64::new(w_chart[0], w_chart[1]);
        let dir_fiber = wprime * dir_base;
        let mut dir = if lvl.chart.base == crate::germ::Var::X {
            [dir_base.re, dir_base.im, dir_fiber.re, dir_fiber.im]
        } else {
            [dir_fiber.re, dir_fiber.im, dir_base.re, dir_base.im]
        };
        let dn = (dir.iter().map(|v| v * v).sum::<f64>()).sqrt();
        dir = std::array::from_fn(|k| dir[k] / dn);

        let mut state = (b0, w0);
        let mut verts: Vec<SliceVertex> = Vec::new();
        let target = opts.step_fraction * std::f64::consts::TAU * eps;
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Trace(format!(
                    "implicit component from seed ({b0}, {w0}) did not close"
                )));
            }
            // correct to the constraint set
            let (mut b, mut w) = state;
            for _ in 0..8 {
                let (c, rows) = lvl.constraints(b, w);
                let cn = c.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
                if cn < 1e-12 {
                    break;
                }
                // least-norm Newton: delta = J^T (J J^T)^{-1} (-c)
                let mut jjt = [[0.0; 3]; 3];
                for a in 0..3 {
                    for bb in 0..3 {
                        jjt[a][bb] = (0..4).map(|k| rows[a][k] * rows[bb][k]).sum();
                    }
                }
                let rhs = [-c[0], -c[1], -c[2]];
                let Some(lam) = solve3(jjt, rhs) else { break };
                let mut delta = [0.0; 4];
                for k in 0..4 {
                    for a in 0..3 {
                        delta[k] += rows[a][k] * lam[a];
                    }
                }
                let (db, dw) = (
                    Complex64::new(delta[0], delta[1]),
                    Complex64::new(delta[2], delta[3]),
                );
                if lvl.chart.base == crate::germ::Var::X {
                    b += db;
                    w += dw;
                } else {
                    b += dw;
                    w += db;
                }
            }
            let (c, rows) = lvl.constraints(b, w);
            if c.iter().map(|v| v.abs()).fold(0.0_f64, f64::max) > 1e-8 {
                return Err(Error::Trace(format!(
                    "corrector stalled at base {b}, fiber {w}"
                )));
            }
            let t = cross4_rows(rows[0], rows[1], rows[2]);
            let tn = (t.iter().map(|v| v * v).sum::<f64>()).sqrt();
            if tn < 1e-12 {
                return Err(Error::TangentSlice {
                    eps,
                    msg: format!("degenerate tangent at base {b}"),
                });
            }
            let mut t: [f64; 4] = std::array::from_fn(|k| t[k] / tn);
            let dot: f64 = (0..4).map(|k| t[k] * dir[k]).sum();
            if dot < 0.0 {
                t = std::array::from_fn(|k| -t[k]);
            }
            dir = t;
            let pos = lvl.pos(b, w);
            verts.push(SliceVertex {
                pos,
                param: b,
                fiber: Some(w),
            });
            // step in ambient arc length (the state is the ambient point here)
            let h = target;
            let step4: [f64; 4] = std::array::from_fn(|k| h * t[k]);
            let (nb, nw) = if lvl.chart.base == crate::germ::Var::X {
                (
                    b + Complex64::new(step4[0], step4[1]),
                    w + Complex64::new(step4[2], step4[3]),
                )
            } else {
                (
                    b + Complex64::new(step4[2], step4[3]),
                    w + Complex64::new(step4[0], step4[1]),
                )
            };
            state = (nb, nw);
            if verts.len() > 8 {
                let d = norm4(sub4(lvl.pos(nb, nw), verts[0].pos));
                if d < 1.5 * target {
                    break;
                }
            }
        }
        for (j, (bs, ws)) in seeds.iter().enumerate() {
            if consumed[j] {
                continue;
            }
            let ps = lvl.pos(*bs, *ws);
            if verts.iter().any(|v| norm4(sub4(v.pos, ps)) < 6.0 * target) {
                consumed[j] = true;
            }
        }
        components.push(verts);
    }
    Ok(components)
}

/// Trace the slice Σ_s ∩ S(p, ε). The slice must be transverse; tangency is
/// reported so callers can nudge ε (generic radii).
pub fn slice_sphere(
    family: &SurfaceFamily,
    s: f64,
    eps: f64,
    opts: &SliceOptions,
) -> Result<SphereSlice> {
    let mut components = Vec::new();
    for (ci, chart) in family.charts.iter().enumerate() {
        if !chart.active(s == 0.0) {
            continue;
        }
        let traced = match chart {
            Chart::Explicit(c) => trace_explicit(
                &ExplicitLevel { chart: c, p: family.p, s, eps2: eps * eps },
                opts,
            )?,
            Chart::Implicit(c) => trace_implicit(
                &ImplicitLevel { chart: c, p: family.p, s, eps2: eps * eps },
                opts,
            )?,
        };
        let plane = family.branch_plane(chart)?;
        for verts in traced {
            let winding = winding_in_plane(&verts, family.p, plane);
            components.push(SliceComponent {
                chart_index: ci,
                multiplicity: chart.multiplicity(),
                vertices: verts,
                winding,
            });
        }
    }
    // on-sphere invariant
    for comp in &components {
        for v in &comp.vertices {
            let d = (norm4(sub4(v.pos, family.p)) - eps).abs();
            if d > 1e-8 * eps.max(1.0) {
                return Err(Error::Trace(format!(
                    "vertex off the sphere by {d:.3e}"
                )));
            }
        }
    }
    Ok(SphereSlice { eps, s, components })
}

/// Retry `slice_sphere` with +1% nudges of ε when the slice is tangent.
pub fn slice_with_nudge(
    family: &SurfaceFamily,
    s: f64,
    eps: f64,
    opts: &SliceOptions,
) -> Result<(SphereSlice, f64)> {
    let mut e = eps;
    let mut last_err = None;
    for _ in 0..4 {
        match slice_sphere(family, s, e, opts) {
            Ok(sl) => return Ok((sl, e)),
            Err(err @ Error::TangentSlice { .. }) => {
                last_err = Some(err);
                e *= 1.01;
            }
            Err(other) => return Err(other),
        }
    }
    Err(last_err.unwrap())
}

/// Winding number of the projection onto an oriented plane (u, v) centered
/// at p; this is the strand count of the component around the axis circle
/// lying in the orthogonal complement.
pub fn winding_in_plane(verts: &[SliceVertex], p: V4, plane: (V4, V4)) -> i32 {
    let (u, v) = plane;
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut first = 0.0;
    for vert in verts.iter() {
        let d = sub4(vert.pos, p);
        let a = crate::alg::dot4(d, u);
        let b = crate::alg::dot4(d, v);
        let ang = b.atan2(a);
        if let Some(pa) = prev {
            let mut step = ang - pa;
            while step > std::f64::consts::PI {
                step -= std::f64::consts::TAU;
            }
            while step < -std::f64::consts::PI {
                step += std::f64::consts::TAU;
            }
            total += step;
        } else {
            first = ang;
        }
        prev = Some(ang);
    }
    if let Some(pa) = prev {
        let mut step = first - pa;
        while step > std::f64::consts::PI {
            step -= std::f64::consts::TAU;
        }
        while step < -std::f64::consts::PI {
            step += std::f64::consts::TAU;
        }
        total += step;
    }
    (total / std::f64::consts::TAU).round() as i32
}

/// Resample a closed polyline to n vertices at uniform ambient arc length,
/// reprojected onto the sphere.
pub fn resample_on_sphere(verts: &[SliceVertex], p: V4, eps: f64, n: usize) -> Vec<V4> {
    let m = verts.len();
    let mut cum = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for i in 0..m {
        let a = verts[i].pos;
        let b = verts[(i + 1) % m].pos;
        acc += norm4(sub4(b, a));
        cum.push(acc);
    }
    let total = acc;
    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for k in 0..n {
        let target = total * k as f64 / n as f64;
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let a = verts[seg].pos;
        let b = verts[(seg + 1) % m].pos;
        let len = (cum[seg + 1] - cum[seg]).max(1e-300);
        let t = (target - cum[seg]) / len;
        let mut q: V4 = std::array::from_fn(|i| a[i] + t * (b[i] - a[i]));
        // project back onto the sphere
        let d = sub4(q, p);
        let dn = norm4(d);
        q = std::array::from_fn(|i| p[i] + d[i] * eps / dn);
        out.push(q);
    }
    out
}
