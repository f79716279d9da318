//! Pointwise geometry from an exact 2-jet: adapted frames, the second
//! fundamental form, the curvature 2-forms of the tangent and normal
//! bundles, and the Grassmannian lift with its derivative.
//!
//! The ambient space is flat R^4 throughout; the ambient-curvature terms of
//! the curvature formulas are kept as explicit zeros so the expressions match
//! their general form term by term.

use crate::alg::{
    add6, det4, dot4, dot6, norm4, normalize4, scale4, scale6, split_pm, sub4, sub6, wedge, L2,
    V3, V4,
};
use crate::error::{Error, Result};
use crate::germ::Jet2;

/// Ambient curvature terms <R^M(e1,e2)e1,e2> and <R^M(e1,e2)e3,e4>; zero in
/// flat R^4, kept as named hooks.
const AMBIENT_TT: f64 = 0.0;
const AMBIENT_NN: f64 = 0.0;

/// Orthonormal frame adapted to an immersed point: (e1, e2) positive basis
/// of the tangent plane, (e3, e4) of the normal plane, det(e1,e2,e3,e4) = +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptedFrame {
    pub e1: V4,
    pub e2: V4,
    pub e3: V4,
    pub e4: V4,
}

/// Second fundamental form coefficients over (e3, e4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondFundamentalForm {
    pub b11: [f64; 2],
    pub b12: [f64; 2],
    pub b22: [f64; 2],
}

impl SecondFundamentalForm {
    pub fn trace(&self) -> [f64; 2] {
        [self.b11[0] + self.b22[0], self.b11[1] + self.b22[1]]
    }

    pub fn norm_sq(&self) -> f64 {
        let n2 = |v: [f64; 2]| v[0] * v[0] + v[1] * v[1];
        n2(self.b11) + 2.0 * n2(self.b12) + n2(self.b22)
    }
}

/// Pointwise curvature data: the curvature 2-forms evaluated on (e1, e2),
/// the squared norm of B and the chart area density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub omega_t: f64,
    pub omega_n: f64,
    pub norm_b2: f64,
    pub area_density: f64,
}

/// The Grassmannian lift at a point: the unit tangent 2-vector, its split
/// into the Λ± unit spheres, chart derivatives and the degree/area densities.
#[derive(Debug, Clone, Copy)]
pub struct LiftSample {
    pub t: L2,
    pub tx: L2,
    pub ty: L2,
    pub jplus: V3,
    pub kminus: V3,
    /// pullback density (per chart dx dy) of the Λ⁺ degree form, oriented by
    /// the fiberwise complex structure
    pub a_density: f64,
    /// same for Λ⁻
    pub b_density: f64,
    /// area density of the lift in G₂⁺, horizontal flat + vertical from the
    /// embedding by unit simple 2-vectors
    pub lift_area_density: f64,
}

/// Everything the integrands need at one chart point.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub jet: Jet2,
    pub frame: AdaptedFrame,
    pub sff: SecondFundamentalForm,
    pub curv: CurvatureSample,
    pub lift: LiftSample,
    /// domain coefficients of the frame: e1 = alpha*fx, e2 = beta*fx + gamma*fy
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn cross4(a: V4, b: V4, c: V4) -> V4 {
    // vector d with <d, x> = det(x | a | b | c)
    let det3 = |r: [usize; 3]| -> f64 {
        a[r[0]] * (b[r[1]] * c[r[2]] - b[r[2]] * c[r[1]])
            - a[r[1]] * (b[r[0]] * c[r[2]] - b[r[2]] * c[r[0]])
            + a[r[2]] * (b[r[0]] * c[r[1]] - b[r[1]] * c[r[0]])
    };
    [
        det3([1, 2, 3]),
        -det3([0, 2, 3]),
        det3([0, 1, 3]),
        -det3([0, 1, 2]),
    ]
}

/// Build the adapted frame at an immersed jet. `hint` carries the normal
/// frame of a nearby point; when given, (e3, e4) are aligned with it so the
/// frame varies continuously along quadrature cells and traced curves.
pub fn adapted_frame(jet: &Jet2, hint: Option<(V4, V4)>) -> Result<AdaptedFrame> {
    let w = wedge(jet.fx, jet.fy);
    let wn = crate::alg::norm6(w);
    let scale = norm4(jet.fx) * norm4(jet.fy);
    if wn <= 1e-12 * scale.max(1e-300) || scale == 0.0 {
        return Err(Error::RankDeficient { wedge_norm: wn });
    }
    let e1 = normalize4(jet.fx);
    let e2 = normalize4(sub4(jet.fy, scale4(e1, dot4(jet.fy, e1))));

    let project_normal = |v: V4| -> V4 {
        let v = sub4(v, scale4(e1, dot4(v, e1)));
        sub4(v, scale4(e2, dot4(v, e2)))
    };

    let e3 = match hint {
        Some((h3, _)) => {
            let cand = project_normal(h3);
            let n = norm4(cand);
            if n > 1e-6 {
                scale4(cand, 1.0 / n)
            } else {
                deterministic_normal(&project_normal)
            }
        }
        None => deterministic_normal(&project_normal),
    };
    let mut e4 = normalize4(cross4(e1, e2, e3));
    if det4(e1, e2, e3, e4) < 0.0 {
        e4 = scale4(e4, -1.0);
    }
    Ok(AdaptedFrame { e1, e2, e3, e4 })
}

fn deterministic_normal(project_normal: &dyn Fn(V4) -> V4) -> V4 {
    let mut best = ([0.0; 4], -1.0);
    for i in 0..4 {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        let r = project_normal(v);
        let n = norm4(r);
        if n > best.1 {
            best = (r, n);
        }
    }
    scale4(best.0, 1.0 / best.1)
}

/// Second fundamental form in the given adapted frame.
pub fn second_fundamental_form(jet: &Jet2, frame: &AdaptedFrame) -> SecondFundamentalForm {
    let (alpha, beta, gamma) = frame_coefficients(jet, frame);
    let d2 = |u: [f64; 2], v: [f64; 2]| -> V4 {
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = u[0] * v[0] * jet.fxx[k]
                + (u[0] * v[1] + u[1] * v[0]) * jet.fxy[k]
                + u[1] * v[1] * jet.fyy[k];
        }
        out
    };
    let v1 = [alpha, 0.0];
    let v2 = [beta, gamma];
    let nproj = |v: V4| -> [f64; 2] { [dot4(v, frame.e3), dot4(v, frame.e4)] };
    SecondFundamentalForm {
        b11: nproj(d2(v1, v1)),
        b12: nproj(d2(v1, v2)),
        b22: nproj(d2(v2, v2)),
    }
}

/// Coefficients expressing the tangent frame in the chart basis:
/// e1 = alpha fx, e2 = beta fx + gamma fy.
pub fn frame_coefficients(jet: &Jet2, _frame: &AdaptedFrame) -> (f64, f64, f64) {
    let alpha = 1.0 / norm4(jet.fx);
    let e1 = scale4(jet.fx, alpha);
    let proj = dot4(jet.fy, e1);
    let nu = norm4(sub4(jet.fy, scale4(e1, proj)));
    (alpha, -proj * alpha / nu, 1.0 / nu)
}

fn wedge2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Curvature 2-forms evaluated on (e1, e2) from the second fundamental form:
/// Ω^T = -||B12||² + <B11, B22> and Ω^N = (B11 - B22) ^ B12, plus the flat
/// ambient terms.
pub fn curvature_sample(sff: &SecondFundamentalForm, area_density: f64) -> CurvatureSample {
    let omega_t = -dot2(sff.b12, sff.b12) + dot2(sff.b11, sff.b22) + AMBIENT_TT;
    let omega_n = wedge2(
        [sff.b11[0] - sff.b22[0], sff.b11[1] - sff.b22[1]],
        sff.b12,
    ) + AMBIENT_NN;
    CurvatureSample {
        omega_t,
        omega_n,
        norm_b2: sff.norm_sq(),
        area_density,
    }
}

/// Full pointwise data at an immersed jet.
pub fn surface_point(jet: &Jet2, hint: Option<(V4, V4)>) -> Result<SurfacePoint> {
    let frame = adapted_frame(jet, hint)?;
    let (alpha, beta, gamma) = frame_coefficients(jet, &frame);
    let sff = second_fundamental_form(jet, &frame);

    let w6 = wedge(jet.fx, jet.fy);
    let wn = crate::alg::norm6(w6);
    let t = scale6(w6, 1.0 / wn);
    let wx = add6(wedge(jet.fxx, jet.fy), wedge(jet.fx, jet.fxy));
    let wy = add6(wedge(jet.fxy, jet.fy), wedge(jet.fx, jet.fyy));
    let tx = scale6(sub6(wx, scale6(t, dot6(t, wx))), 1.0 / wn);
    let ty = scale6(sub6(wy, scale6(t, dot6(t, wy))), 1.0 / wn);
    let (jplus, kminus) = split_pm(t);
    let (jx, kx) = split_pm(tx);
    let (jy, ky) = split_pm(ty);
    // Degree densities with the fiberwise complex orientations of the two
    // sphere factors: the Λ⁺ factor carries the orientation opposite to the
    // round one, the Λ⁻ factor the round one.
    let a_density = -crate::grassmann::sphere_area_form(jplus, jx, jy);
    let b_density = crate::grassmann::sphere_area_form(kminus, kx, ky);
    let g11 = dot4(jet.fx, jet.fx) + dot6(tx, tx);
    let g12 = dot4(jet.fx, jet.fy) + dot6(tx, ty);
    let g22 = dot4(jet.fy, jet.fy) + dot6(ty, ty);
    let lift_area_density = (g11 * g22 - g12 * g12).max(0.0).sqrt();

    let curv = curvature_sample(&sff, wn);
    Ok(SurfacePoint {
        jet: *jet,
        frame,
        sff,
        curv,
        lift: LiftSample {
            t,
            tx,
            ty,
            jplus,
            kminus,
            a_density,
            b_density,
            lift_area_density,
        },
        alpha,
        beta,
        gamma,
    })
}

/// Rotation by +π/2 in the oriented tangent plane.
pub fn rotate_tangent(frame: &AdaptedFrame, v: V4) -> V4 {
    let a = dot4(v, frame.e1);
    let b = dot4(v, frame.e2);
    // e1 -> e2, e2 -> -e1
    sub4(scale4(frame.e2, a), scale4(frame.e1, b))
}

/// Rotation by +π/2 in the oriented normal plane.
pub fn rotate_normal(frame: &AdaptedFrame, v: V4) -> V4 {
    let a = dot4(v, frame.e3);
    let b = dot4(v, frame.e4);
    sub4(scale4(frame.e4, a), scale4(frame.e3, b))
}

/// Value of the normal connection form ω^N on the surface tangent vector
/// df(w), for the normal projection X^N of a fixed ambient vector X:
/// ω^N(u) = <∇^N_u X^N, J_N X^N> / ||X^N||².
///
/// Requires X^N != 0 at the point; returns the form value together with
/// ||X^N|| so callers can monitor the Lemma hypotheses.
pub fn normal_connection_form(jet: &Jet2, frame: &AdaptedFrame, w: [f64; 2], x: V4) -> (f64, f64) {
    // dP_T along w with P_T = Jm G^{-1} Jm^T, Jm = [fx fy]
    let jm = [jet.fx, jet.fy];
    let djm = [
        std::array::from_fn(|k| w[0] * jet.fxx[k] + w[1] * jet.fxy[k]),
        std::array::from_fn::<f64, 4, _>(|k| w[0] * jet.fxy[k] + w[1] * jet.fyy[k]),
    ];
    let g = [
        [dot4(jm[0], jm[0]), dot4(jm[0], jm[1])],
        [dot4(jm[1], jm[0]), dot4(jm[1], jm[1])],
    ];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let ginv = [
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ];
    let dg = [
        [
            2.0 * dot4(djm[0], jm[0]),
            dot4(djm[0], jm[1]) + dot4(jm[0], djm[1]),
        ],
        [
            dot4(djm[1], jm[0]) + dot4(jm[1], djm[0]),
            2.0 * dot4(djm[1], jm[1]),
        ],
    ];
    // dGinv = -Ginv dG Ginv
    let mut dginv = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    acc += ginv[i][a] * dg[a][b] * ginv[b][j];
                }
            }
            dginv[i][j] = -acc;
        }
    }
    // dP x = dJm Ginv Jm^T x + Jm dGinv Jm^T x + Jm Ginv dJm^T x
    let jt_x = [dot4(jm[0], x), dot4(jm[1], x)];
    let djt_x = [dot4(djm[0], x), dot4(djm[1], x)];
    let apply = |m: &[[f64; 2]; 2], v: [f64; 2]| -> [f64; 2] {
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    };
    let col = |cols: &[V4; 2], v: [f64; 2]| -> V4 {
        std::array::from_fn(|k| cols[0][k] * v[0] + cols[1][k] * v[1])
    };
    let term1 = col(&djm, apply(&ginv, jt_x));
    let term2 = col(&jm, apply(&dginv, jt_x));
    let term3 = col(&jm, apply(&ginv, djt_x));
    let dpx: V4 = std::array::from_fn(|k| term1[k] + term2[k] + term3[k]);

    let nproj = |v: V4| -> V4 {
        let v = sub4(v, scale4(frame.e1, dot4(v, frame.e1)));
        sub4(v, scale4(frame.e2, dot4(v, frame.e2)))
    };
    let xn = nproj(x);
    let xn_norm = norm4(xn);
    let dxn: V4 = scale4(dpx, -1.0);
    let nabla = nproj(dxn);
    let jxn = rotate_normal(frame, xn);
    let omega = dot4(nabla, jxn) / (xn_norm * xn_norm);
    (omega, xn_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::chart::{ChartMap, Domain, ExplicitChart, LimitRole};
    use crate::germ::expr::{Expr as E, Var};
    use num_complex::Complex64;

    fn chart_z_zsq() -> ExplicitChart {
        ExplicitChart::new(
            "c".into(),
            Domain::disc(1.0),
            ChartMap::TwoComplex([E::var(Var::Z), E::pow(E::var(Var::Z), 2)]),
            1,
            LimitRole::Both,
        )
    }

    #[test]
    fn flat_plane_frame_is_standard() {
        let c = ExplicitChart::new(
            "p".into(),
            Domain::disc(1.0),
            ChartMap::TwoComplex([E::var(Var::Z), E::num(0.0)]),
            1,
            LimitRole::Both,
        );
        let jet = c.jet(Complex64::default(), 0.0).unwrap();
        let fr = adapted_frame(&jet, None).unwrap();
        assert_eq!(fr.e1, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(fr.e2, [0.0, 1.0, 0.0, 0.0]);
        assert!((dot4(fr.e3, [0.0, 0.0, 1.0, 0.0]).abs() - 1.0).abs() < 1e-12
            || (dot4(fr.e3, [0.0, 0.0, 0.0, 1.0]).abs() - 1.0).abs() < 1e-12);
        assert!(det4(fr.e1, fr.e2, fr.e3, fr.e4) > 0.0);
        let sff = second_fundamental_form(&jet, &fr);
        assert_eq!(sff.norm_sq(), 0.0);
    }

    #[test]
    fn z_zsq_at_origin_matches_known_values() {
        let jet = chart_z_zsq().jet(Complex64::default(), 0.0).unwrap();
        let sp = surface_point(&jet, None).unwrap();
        // e3, e4 complete the first complex factor
        assert!((sp.frame.e3[2].abs() + sp.frame.e4[3].abs() - 2.0).abs() < 1e-12
            || (sp.frame.e3[3].abs() + sp.frame.e4[2].abs() - 2.0).abs() < 1e-12);
        // B11 = (2,0), B12 = (0,2), B22 = (-2,0) up to the (e3,e4) gauge;
        // gauge-invariant outputs are fixed:
        assert!((sp.curv.omega_t - (-8.0)).abs() < 1e-12);
        assert!((sp.curv.omega_n - 8.0).abs() < 1e-12);
        assert!((sp.curv.norm_b2 - 16.0).abs() < 1e-12);
        assert!((sp.curv.area_density - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_rotation_leaves_invariants() {
        let z = Complex64::new(0.21, -0.34);
        let jet = chart_z_zsq().jet(z, 0.0).unwrap();
        let fr = adapted_frame(&jet, None).unwrap();
        let base = second_fundamental_form(&jet, &fr);
        let c0 = curvature_sample(&base, 1.0);
        for k in 1..7 {
            let phi = 0.9 * k as f64;
            let (c, s) = (phi.cos(), phi.sin());
            let rot = AdaptedFrame {
                e1: fr.e1,
                e2: fr.e2,
                e3: std::array::from_fn(|i| c * fr.e3[i] + s * fr.e4[i]),
                e4: std::array::from_fn(|i| -s * fr.e3[i] + c * fr.e4[i]),
            };
            let sff = second_fundamental_form(&jet, &rot);
            let cs = curvature_sample(&sff, 1.0);
            assert!((cs.omega_t - c0.omega_t).abs() < 1e-10);
            assert!((cs.omega_n - c0.omega_n).abs() < 1e-10);
            assert!((cs.norm_b2 - c0.norm_b2).abs() < 1e-10);
        }
    }

    #[test]
    fn holomorphic_chart_has_constant_jplus_and_minimality() {
        for zv in [
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.45),
            Complex64::new(0.05, -0.6),
        ] {
            let jet = chart_z_zsq().jet(zv, 0.0).unwrap();
            let sp = surface_point(&jet, None).unwrap();
            let j = sp.lift.jplus;
            assert!((j[0] - 1.0).abs() < 1e-12 && j[1].abs() < 1e-12 && j[2].abs() < 1e-12);
            // trace-free B and the minimal identity Ω^T = -||B||²/2
            let tr = sp.sff.trace();
            assert!(tr[0].abs() < 1e-10 && tr[1].abs() < 1e-10);
            assert!((sp.curv.omega_t + 0.5 * sp.curv.norm_b2).abs() < 1e-10);
            // holomorphic identity Ω^N = -Ω^T
            assert!((sp.curv.omega_n + sp.curv.omega_t).abs() < 1e-10);
        }
    }

    #[test]
    fn degree_densities_match_curvature_combination() {
        // a = -(Ω^T + Ω^N) dA and b = (Ω^N - Ω^T) dA pointwise
        let charts = [
            ExplicitChart::new(
                "g".into(),
                Domain::disc(1.0),
                ChartMap::FourReal([
                    E::re(E::var(Var::Z)),
                    E::im(E::var(Var::Z)),
                    E::pow(E::re(E::var(Var::Z)), 2),
                    E::mul(E::re(E::var(Var::Z)), E::im(E::var(Var::Z))),
                ]),
                1,
                LimitRole::Both,
            ),
            chart_z_zsq(),
        ];
        for c in &charts {
            for zv in [Complex64::new(0.4, 0.2), Complex64::new(-0.3, 0.5)] {
                let jet = c.jet(zv, 0.0).unwrap();
                let sp = surface_point(&jet, None).unwrap();
                let da = sp.curv.area_density;
                let a_alt = -(sp.curv.omega_t + sp.curv.omega_n) * da;
                let b_alt = (sp.curv.omega_n - sp.curv.omega_t) * da;
                assert!((sp.lift.a_density - a_alt).abs() < 1e-9 * (1.0 + a_alt.abs()));
                assert!((sp.lift.b_density - b_alt).abs() < 1e-9 * (1.0 + b_alt.abs()));
            }
        }
    }
}
