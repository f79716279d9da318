//! Line integrals along the traced boundary ∂Σ_s^ε: geodesic curvature and
//! the normal connection form, plus the Gauss-Bonnet Euler-characteristic
//! estimate χ = (∫ Ω^T + ∮ k_g) / 2π.
//!
//! All curve data comes from exact jets: the boundary is a level curve of
//! g = ||f - p||², so its velocity field in chart coordinates is
//! rot90(∇g) and its acceleration follows from the chart 2-jet.


use crate::alg::{dot4, norm4, scale4, sub4, V4};
use crate::braid::slice::{slice_with_nudge, SliceComponent, SliceOptions, SphereSlice};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::geom::quad::{integrate_family, FormKind, QuadOptions, Region};
use crate::geom::surface::{adapted_frame, normal_connection_form, rotate_tangent};
use crate::germ::family::{Chart, SurfaceFamily};
use crate::germ::Jet2;

/// Jet at a slice vertex (explicit charts evaluate the map; implicit charts
/// use the stored fiber value).
pub fn vertex_jet(
    family: &SurfaceFamily,
    comp: &SliceComponent,
    k: usize,
    s: f64,
) -> Result<Jet2> {
    let v = &comp.vertices[k];
    match &family.charts[comp.chart_index] {
        Chart::Explicit(c) => Ok(c.jet_unchecked(v.param, s)),
        Chart::Implicit(c) => {
            let w = v.fiber.ok_or_else(|| {
                Error::Trace("implicit slice vertex without fiber value".into())
            })?;
            c.sheet_jet(v.param, w, s)
        }
    }
}

/// Curve data at a vertex: velocity field w = rot90(∇g) in chart
/// coordinates (the Stokes orientation of {g <= eps²}) and its derivative.
fn curve_field(jet: &Jet2, p: V4) -> ([f64; 2], [[f64; 2]; 2]) {
    let d = sub4(jet.f, p);
    let gx = 2.0 * dot4(d, jet.fx);
    let gy = 2.0 * dot4(d, jet.fy);
    // Hess g = 2 (G + sum_k d_k Hess f_k)
    let h11 = 2.0 * (dot4(jet.fx, jet.fx) + dot4(d, jet.fxx));
    let h12 = 2.0 * (dot4(jet.fx, jet.fy) + dot4(d, jet.fxy));
    let h22 = 2.0 * (dot4(jet.fy, jet.fy) + dot4(d, jet.fyy));
    // w = rot90ccw(grad) = (-gy, gx); Dw = rot90ccw(Hess)
    let w = [-gy, gx];
    let dw = [[-h12, -h22], [h11, h12]];
    (w, dw)
}

/// The boundary 1-forms integrated along a slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryForm {
    /// geodesic curvature times arc length
    GeodesicCurvature,
    /// connection form of the normal bundle w.r.t. the projection of a
    /// fixed ambient vector X
    NormalConnection { x: V4 },
}

/// Integrate a boundary form over every component of the slice (respecting
/// multiplicities). For the normal connection form the minimum of ||X^N||
/// over the boundary is returned as the second value; zero of X^N on the
/// boundary is an error (the index identity needs X^N != 0 there).
pub fn boundary_integral(
    family: &SurfaceFamily,
    s: f64,
    slice: &SphereSlice,
    form: BoundaryForm,
) -> Result<(f64, f64)> {
    let mut total = 0.0;
    let mut min_xn = f64::MAX;
    for comp in &slice.components {
        let n = comp.vertices.len();
        let rows: Vec<Result<(f64, f64)>> = map_indexed(crate::exec::ExecMode::Auto, n, |i| {
            let jet = vertex_jet(family, comp, i, s)?;
            let (w, dw) = curve_field(&jet, family.p);
            let wn = (w[0] * w[0] + w[1] * w[1]).sqrt();
            if wn < 1e-300 {
                return Err(Error::TangentSlice {
                    eps: slice.eps,
                    msg: "vanishing boundary velocity".into(),
                });
            }
            // chart arc length attached to this vertex (ring trapezoid)
            let prev = &comp.vertices[(i + n - 1) % n];
            let next = &comp.vertices[(i + 1) % n];
            let here = &comp.vertices[i];
            let dsigma = 0.5 * ((here.param - prev.param).norm() + (next.param - here.param).norm());
            let dt = dsigma / wn;
            match form {
                BoundaryForm::GeodesicCurvature => {
                    let frame = adapted_frame(&jet, None)?;
                    // gamma' = J_f w, gamma'' = H[w,w] + J_f (Dw w)
                    let gp: V4 = std::array::from_fn(|k| jet.fx[k] * w[0] + jet.fy[k] * w[1]);
                    let dww = [
                        dw[0][0] * w[0] + dw[0][1] * w[1],
                        dw[1][0] * w[0] + dw[1][1] * w[1],
                    ];
                    let gpp: V4 = std::array::from_fn(|k| {
                        jet.fxx[k] * w[0] * w[0]
                            + 2.0 * jet.fxy[k] * w[0] * w[1]
                            + jet.fyy[k] * w[1] * w[1]
                            + jet.fx[k] * dww[0]
                            + jet.fy[k] * dww[1]
                    });
                    let speed = norm4(gp);
                    let nu = rotate_tangent(&frame, scale4(gp, 1.0 / speed));
                    // ∮ k_g ds with ds = speed dt
                    Ok((dot4(gpp, nu) / speed * dt, f64::MAX))
                }
                BoundaryForm::NormalConnection { x } => {
                    let frame = adapted_frame(&jet, None)?;
                    let (omega, xn) = normal_connection_form(&jet, &frame, w, x);
                    Ok((omega * dt, xn))
                }
            }
        });
        let mut comp_total = 0.0;
        for r in rows {
            let (v, xn) = r?;
            comp_total += v;
            min_xn = min_xn.min(xn);
        }
        total += comp_total * comp.multiplicity as f64;
    }
    if let BoundaryForm::NormalConnection { .. } = form {
        if min_xn < 1e-6 {
            return Err(Error::VectorField(format!(
                "X^N vanishes on the boundary (min ||X^N|| = {min_xn:.3e})"
            )));
        }
    }
    Ok((total, min_xn))
}

/// Result of the Gauss-Bonnet Euler estimate.
#[derive(Debug, Clone, Copy)]
pub struct EulerResult {
    pub chi_raw: f64,
    pub chi: Option<i64>,
    pub omega_t: f64,
    pub kg: f64,
    /// ε actually used after genericity nudges
    pub eps_used: f64,
}

/// χ(Σ_s^ε) from the Gauss-Bonnet identity ∫ Ω^T - 2πχ = -∮ k_g; snapped to
/// the nearest integer when within 0.1 (raw value always reported).
pub fn gauss_bonnet_euler(
    family: &SurfaceFamily,
    s: f64,
    eps: f64,
    qopts: &QuadOptions,
    sopts: &SliceOptions,
) -> Result<EulerResult> {
    let (slice, eps_used) = slice_with_nudge(family, s, eps, sopts)?;
    let quad = integrate_family(
        family,
        s,
        Region::Ball { eps: eps_used },
        &qopts.clone().with_active(&[FormKind::Area, FormKind::OmegaT]),
    )?;
    let omega_t = quad.value.get(FormKind::OmegaT);
    let (kg, _) = boundary_integral(family, s, &slice, BoundaryForm::GeodesicCurvature)?;
    let chi_raw = (omega_t + kg) / std::f64::consts::TAU;
    let snapped = chi_raw.round();
    let chi = if (chi_raw - snapped).abs() < 0.1 {
        Some(snapped as i64)
    } else {
        None
    };
    Ok(EulerResult { chi_raw, chi, omega_t, kg, eps_used })
}

/// Pick an ambient vector usable as the framing field X: nowhere tangent to
/// the slice surface along the boundary, with a healthy normal part.
pub fn pick_framing_field(
    family: &SurfaceFamily,
    s: f64,
    slice: &SphereSlice,
) -> Result<V4> {
    let candidates: [V4; 7] = [
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.5, 0.5, -0.5, 0.5],
        [0.5, -0.5, 0.5, 0.5],
        [0.36, 0.48, 0.6, -0.52],
    ];
    'cand: for cand in candidates {
        let x = scale4(cand, 1.0 / norm4(cand));
        let mut min_rel = f64::MAX;
        for comp in &slice.components {
            for k in (0..comp.vertices.len()).step_by(7) {
                let jet = vertex_jet(family, comp, k, s)?;
                let frame = adapted_frame(&jet, None)?;
                let xn = {
                    let a = dot4(x, frame.e1);
                    let b = dot4(x, frame.e2);
                    let xt: V4 = std::array::from_fn(|i| a * frame.e1[i] + b * frame.e2[i]);
                    norm4(sub4(x, xt))
                };
                min_rel = min_rel.min(xn);
                if xn < 0.2 {
                    continue 'cand;
                }
            }
        }
        if min_rel < f64::MAX {
            return Ok(x);
        }
    }
    Err(Error::VectorField(
        "no candidate framing vector keeps a normal part along the slice".into(),
    ))
}
