//! The Λ± splitting of the Grassmannian of oriented 2-planes in R^4 as a
//! product of two unit spheres, the fiberwise complex structure on its
//! tangent spaces, pseudo-holomorphicity residuals of surface lifts, bubble
//! degrees and the lift-area bound.

use crate::alg::{
    cross3, det4, dot3, dot4, dot6, join_pm, norm3, norm4, normalize4, plane_basis, scale4,
    split_pm, sub4, wedge, L2, V3, V4,
};
use crate::error::{Error, Result};
use crate::geom::quad::{integrate_family, FormKind, QuadOptions, Region};
use crate::geom::surface::SurfacePoint;
use crate::germ::family::SurfaceFamily;
use crate::germ::Jet2;
use crate::milnor::LimitSchedule;

/// A point of the Grassmannian as a pair of unit vectors in the self-dual
/// and anti-self-dual coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrassmannPoint {
    pub jplus: V3,
    pub kminus: V3,
}

impl GrassmannPoint {
    /// The unit simple 2-vector (J + K)/√2 this point represents.
    pub fn two_vector(&self) -> L2 {
        join_pm(self.jplus, self.kminus)
    }
}

/// A vertical tangent vector at a Grassmann point: a pair of sphere tangents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalTangent {
    pub dj: V3,
    pub dk: V3,
}

/// The oriented tangent plane of an immersed jet as a Grassmann point.
pub fn lift_point(jet: &Jet2) -> Result<GrassmannPoint> {
    let w = wedge(jet.fx, jet.fy);
    let wn = crate::alg::norm6(w);
    let scale = norm4(jet.fx) * norm4(jet.fy);
    if wn <= 1e-12 * scale.max(1e-300) {
        return Err(Error::RankDeficient { wedge_norm: wn });
    }
    let t = crate::alg::scale6(w, 1.0 / wn);
    let (jplus, kminus) = split_pm(t);
    Ok(GrassmannPoint { jplus, kminus })
}

/// Area 2-form of the unit sphere evaluated on two tangent vectors at v:
/// <v, du × dv>. Shared by the degree densities and the fiber calibration.
pub fn sphere_area_form(v: V3, du: V3, dv: V3) -> f64 {
    dot3(v, cross3(du, dv))
}

/// The fiberwise complex structure on the vertical tangent space at a
/// Grassmann point, via the adapted-basis table
/// I P2 = -*P3, I *P2 = -P3, I P3 = *P2, I *P3 = P2
/// where P2 = e1^e3, P3 = e1^e4 for any adapted frame of the plane.
pub fn i_action(point: &GrassmannPoint, tangent: &VerticalTangent) -> Result<VerticalTangent> {
    let tj = dot3(tangent.dj, point.jplus);
    let tk = dot3(tangent.dk, point.kminus);
    let scale = norm3(tangent.dj).max(norm3(tangent.dk)).max(1e-300);
    if tj.abs() > 1e-8 * scale || tk.abs() > 1e-8 * scale {
        return Err(Error::VectorField(format!(
            "input is not tangent to the sphere factors (radial parts {tj:.3e}, {tk:.3e})"
        )));
    }
    let basis = adapted_vertical_basis(point)?;
    let dt = join_pm(tangent.dj, tangent.dk);
    let c: [f64; 4] = std::array::from_fn(|i| dot6(dt, basis[i]));
    // [P2, P3, *P2, *P3] -> I: P2 -> -*P3, P3 -> *P2, *P2 -> -P3, *P3 -> P2
    let mut out = [0.0; 6];
    for (i, &coef) in c.iter().enumerate() {
        let (target, sign) = match i {
            0 => (3, -1.0),
            1 => (2, 1.0),
            2 => (1, -1.0),
            _ => (0, 1.0),
        };
        for k in 0..6 {
            out[k] += sign * coef * basis[target][k];
        }
    }
    let (dj, dk) = split_pm(out);
    Ok(VerticalTangent { dj, dk })
}

/// Orthonormal basis [P2, P3, *P2, *P3] of the tangent space to the
/// Grassmannian at the plane of the point.
fn adapted_vertical_basis(point: &GrassmannPoint) -> Result<[L2; 4]> {
    let t = point.two_vector();
    let (e1, e2) = plane_basis(t);
    // complete to a positive orthonormal frame
    let reject = |v: V4, u: V4| sub4(v, scale4(u, dot4(v, u)));
    let mut e3 = [0.0; 4];
    let mut best = -1.0;
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        let r = reject(reject(e, e1), e2);
        let n = norm4(r);
        if n > best {
            best = n;
            e3 = r;
        }
    }
    let e3 = normalize4(e3);
    let mut e4 = [0.0; 4];
    let mut best = -1.0;
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        let r = reject(reject(reject(e, e1), e2), e3);
        let n = norm4(r);
        if n > best {
            best = n;
            e4 = r;
        }
    }
    let mut e4 = normalize4(e4);
    if det4(e1, e2, e3, e4) < 0.0 {
        e4 = scale4(e4, -1.0);
    }
    Ok([
        wedge(e1, e3),
        wedge(e1, e4),
        wedge(e4, e2),
        wedge(e2, e3),
    ])
}

/// Pointwise pseudo-holomorphicity residual ||∇_{e2} P - I ∇_{e1} P|| of the
/// lift, from exact jet derivatives of the tangent 2-vector.
pub fn es_residual_at(sp: &SurfacePoint) -> Result<f64> {
    let nabla1: L2 = std::array::from_fn(|k| sp.alpha * sp.lift.tx[k]);
    let nabla2: L2 =
        std::array::from_fn(|k| sp.beta * sp.lift.tx[k] + sp.gamma * sp.lift.ty[k]);
    let point = GrassmannPoint {
        jplus: sp.lift.jplus,
        kminus: sp.lift.kminus,
    };
    let (dj1, dk1) = split_pm(nabla1);
    let i1 = i_action(&point, &VerticalTangent { dj: dj1, dk: dk1 })?;
    let idt = join_pm(i1.dj, i1.dk);
    let mut acc = 0.0;
    for k in 0..6 {
        let d = nabla2[k] - idt[k];
        acc += d * d;
    }
    Ok(acc.sqrt())
}

/// Residual statistics over deterministic surface samples.
#[derive(Debug, Clone)]
pub struct EsReport {
    pub max_residual: f64,
    pub min_residual: f64,
    pub samples: usize,
}

pub fn es_residual(family: &SurfaceFamily, s: f64, per_chart: usize) -> Result<EsReport> {
    let pts = crate::milnor::sample_surface_points(family, s, per_chart)?;
    let mut max_r = 0.0f64;
    let mut min_r = f64::MAX;
    let mut n = 0usize;
    for sp in &pts {
        let r = es_residual_at(sp)?;
        max_r = max_r.max(r);
        min_r = min_r.min(r);
        n += 1;
    }
    Ok(EsReport { max_residual: max_r, min_residual: min_r, samples: n })
}

/// Bubble degrees (a, b): normalized concentration of the pullbacks of the
/// fiber area forms of the two sphere factors.
#[derive(Debug, Clone)]
pub struct DegreePair {
    pub a_raw: f64,
    pub b_raw: f64,
    pub a: Option<i64>,
    pub b: Option<i64>,
    /// nearest half-integers, for families outside the L²-bounded setting
    pub a_half: Option<f64>,
    pub b_half: Option<f64>,
    pub table: Vec<crate::milnor::TableEntry>,
}

pub fn bubble_degrees(
    family: &SurfaceFamily,
    schedule: &LimitSchedule,
    qopts: &QuadOptions,
) -> Result<DegreePair> {
    schedule.validate()?;
    let quarter = 1.0 / (2.0 * std::f64::consts::TAU);
    let t = crate::milnor::fill_table(
        family,
        schedule,
        qopts,
        (FormKind::AForm, FormKind::BForm),
        (quarter, quarter),
    )?;
    let la: Vec<f64> = t.per_eps.iter().map(|d| d.l_t).collect();
    let lb: Vec<f64> = t.per_eps.iter().map(|d| d.l_n).collect();
    let a_raw = crate::milnor::extrapolate(&la);
    let b_raw = crate::milnor::extrapolate(&lb);
    let snap_i = |v: f64| {
        let r = v.round();
        ((v - r).abs() < schedule.snap_threshold).then_some(r as i64)
    };
    let snap_half = |v: f64| {
        let r = (2.0 * v).round() / 2.0;
        ((v - r).abs() < schedule.snap_threshold).then_some(r)
    };
    Ok(DegreePair {
        a_raw,
        b_raw,
        a: snap_i(a_raw),
        b: snap_i(b_raw),
        a_half: snap_half(a_raw),
        b_half: snap_half(b_raw),
        table: t.entries,
    })
}

/// Fiber-degree calibration: the integral of the Λ⁻ pullback form over one
/// full sphere factor, which pins the normalization at exactly 1.
pub fn fiber_degree_calibration(n_theta: usize, n_phi: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n_theta {
        let th = std::f64::consts::PI * (i as f64 + 0.5) / n_theta as f64;
        for j in 0..n_phi {
            let ph = std::f64::consts::TAU * (j as f64 + 0.5) / n_phi as f64;
            let k = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let kth = [th.cos() * ph.cos(), th.cos() * ph.sin(), -th.sin()];
            let kph = [-th.sin() * ph.sin(), th.sin() * ph.cos(), 0.0];
            acc += sphere_area_form(k, kth, kph);
        }
    }
    acc * std::f64::consts::PI / n_theta as f64 * std::f64::consts::TAU / n_phi as f64
        / (4.0 * std::f64::consts::PI)
}

/// Both sides of the lift-area bound
/// area(Σ̃) <= area(Σ) + 2∫||B|| + 4∫||B||², asserted with 5% slack for the
/// metric normalization of the Grassmannian.
#[derive(Debug, Clone)]
pub struct LiftAreaReport {
    pub lift_area: f64,
    pub base_area: f64,
    pub int_norm_b: f64,
    pub int_norm_b2: f64,
    pub rhs: f64,
    pub holds: bool,
    pub converged: bool,
}

pub fn lift_area_check(
    family: &SurfaceFamily,
    s: f64,
    eps: f64,
    qopts: &QuadOptions,
) -> Result<LiftAreaReport> {
    // ||B||² can genuinely diverge at non-minimal singular points; it only
    // enlarges the right-hand side, so it does not drive refinement
    let opts = qopts
        .clone()
        .with_active(&[FormKind::Area, FormKind::NormB1, FormKind::LiftArea]);
    let r = integrate_family(family, s, Region::Ball { eps }, &opts)?;
    let lift_area = r.value.get(FormKind::LiftArea);
    let base_area = r.value.get(FormKind::Area);
    let int_norm_b = r.value.get(FormKind::NormB1);
    let int_norm_b2 = r.value.get(FormKind::NormB2);
    let rhs = base_area + 2.0 * int_norm_b + 4.0 * int_norm_b2;
    Ok(LiftAreaReport {
        lift_area,
        base_area,
        int_norm_b,
        int_norm_b2,
        rhs,
        holds: lift_area <= rhs * 1.05 + 1e-9,
        converged: r.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alg::{scale3, sub3};
    use crate::geom::surface::surface_point;
    use crate::germ::chart::{ChartMap, Domain, ExplicitChart, LimitRole};
    use crate::germ::expr::{Expr as E, Var};
    use num_complex::Complex64;

    #[test]
    fn plane_lift_is_basepoint() {
        let c = ExplicitChart::new(
            "p".into(),
            Domain::disc(1.0),
            ChartMap::TwoComplex([E::var(Var::Z), E::num(0.0)]),
            1,
            LimitRole::Both,
        );
        let jet = c.jet(Complex64::new(0.3, 0.2), 0.0).unwrap();
        let gp = lift_point(&jet).unwrap();
        assert!(norm3(sub3(gp.jplus, [1.0, 0.0, 0.0])) < 1e-12);
        assert!(norm3(sub3(gp.kminus, [1.0, 0.0, 0.0])) < 1e-12);
        // reconstruction round-trip
        let t = gp.two_vector();
        let w = wedge(jet.fx, jet.fy);
        let wn = crate::alg::norm6(w);
        for k in 0..6 {
            assert!((t[k] - w[k] / wn).abs() < 1e-12);
        }
    }

    #[test]
    fn i_action_squares_to_minus_one() {
        let gp = GrassmannPoint { jplus: [1.0, 0.0, 0.0], kminus: [1.0, 0.0, 0.0] };
        // random-ish tangent vectors orthogonal to the base points
        for seed in 0..20u32 {
            let a = (seed as f64 * 0.613).sin();
            let b = (seed as f64 * 1.27).cos();
            let t = VerticalTangent { dj: [0.0, a, b], dk: [0.0, b, -a] };
            let it = i_action(&gp, &t).unwrap();
            let iit = i_action(&gp, &it).unwrap();
            assert!(norm3(sub3(iit.dj, scale3(t.dj, -1.0))) < 1e-12);
            assert!(norm3(sub3(iit.dk, scale3(t.dk, -1.0))) < 1e-12);
            // the split factors stay split
            assert!(norm3(it.dj) - norm3(t.dj) < 1e-12);
            assert!(norm3(it.dk) - norm3(t.dk) < 1e-12);
        }
    }

    #[test]
    fn lemma8_table_on_the_standard_plane() {
        // at P = e1^e2 with the standard frame: I P2 = -*P3 etc.
        let gp = GrassmannPoint { jplus: [1.0, 0.0, 0.0], kminus: [1.0, 0.0, 0.0] };
        let e = |i: usize| -> V4 {
            let mut v = [0.0; 4];
            v[i] = 1.0;
            v
        };
        let p2 = wedge(e(0), e(2));
        let p3 = wedge(e(0), e(3));
        let sp2 = wedge(e(3), e(1));
        let sp3 = wedge(e(1), e(2));
        let check = |input: L2, expect: L2| {
            let (dj, dk) = split_pm(input);
            let out = i_action(&gp, &VerticalTangent { dj, dk }).unwrap();
            let got = join_pm(out.dj, out.dk);
            for k in 0..6 {
                assert!((got[k] - expect[k]).abs() < 1e-12, "{got:?} vs {expect:?}");
            }
        };
        check(p2, crate::alg::scale6(sp3, -1.0));
        check(sp2, crate::alg::scale6(p3, -1.0));
        check(p3, sp2);
        check(sp3, p2);
    }

    #[test]
    fn fiber_calibration_is_one() {
        let v = fiber_degree_calibration(256, 256);
        assert!((v - 1.0).abs() < 1e-4, "calibration = {v}");
    }

    #[test]
    fn holomorphic_residual_vanishes() {
        let c = ExplicitChart::new(
            "c".into(),
            Domain::disc(1.0),
            ChartMap::TwoComplex([E::var(Var::Z), E::pow(E::var(Var::Z), 2)]),
            1,
            LimitRole::Both,
        );
        for z in [Complex64::new(0.4, 0.1), Complex64::new(-0.2, 0.55)] {
            let sp = surface_point(&c.jet(z, 0.0).unwrap(), None).unwrap();
            let r = es_residual_at(&sp).unwrap();
            assert!(r < 1e-10, "residual {r}");
        }
    }
}
