//! Charts of a surface family: explicit maps of an annulus into R^4 given by
//! polynomial expressions, and implicit plane curves {P(x, y, s) = 0} in
//! C^2 ≅ R^4 traced sheet by sheet over a base disc.
//!
//! All derivatives are symbolic-then-numeric: a chart precomputes the
//! expression trees of its first and second partials once, so 2-jets are
//! exact to rounding at every evaluation point.
//!
//! Orientation convention: C^2 ≅ R^4 by (c1, c2) ↦ (re c1, im c1, re c2,
//! im c2); the standard basis in this order is positively oriented. All signs
//! downstream refer to this single convention.

use num_complex::Complex64;

use crate::alg::V4;
use crate::error::{Error, Result};
use crate::germ::expr::{Expr, Var};

/// Annular chart domain {r_in <= |z| <= r_out}; r_in = 0 gives a disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub r_in: f64,
    pub r_out: f64,
}

impl Domain {
    pub fn disc(r: f64) -> Domain {
        Domain { r_in: 0.0, r_out: r }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        let slack = 1e-9 * self.r_out.max(1.0);
        r >= self.r_in - slack && r <= self.r_out + slack
    }
}

/// Whether a chart belongs to the smooth members, to the limit surface, or
/// to both. Families whose limit surface needs extra components (for example
/// a node degenerating to two planes) declare limit-only charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimitRole {
    #[default]
    Both,
    /// chart exists only at s = 0
    LimitOnly,
    /// chart exists only for s != 0
    SmoothOnly,
}

impl LimitRole {
    pub fn active(self, at_limit: bool) -> bool {
        match self {
            LimitRole::Both => true,
            LimitRole::LimitOnly => at_limit,
            LimitRole::SmoothOnly => !at_limit,
        }
    }
}

/// Exact 2-jet of a chart map at one parameter point: value, first and
/// second partials in the chart coordinates z = x + iy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub f: V4,
    pub fx: V4,
    pub fy: V4,
    pub fxx: V4,
    pub fxy: V4,
    pub fyy: V4,
}

/// The map of an explicit chart as declared: either two complex coordinate
/// functions or four real ones.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartMap {
    TwoComplex([Expr; 2]),
    FourReal([Expr; 4]),
}

#[derive(Debug, Clone)]
struct CoordDerivs {
    v: Expr,
    vx: Expr,
    vy: Expr,
    vxx: Expr,
    vxy: Expr,
    vyy: Expr,
}

impl CoordDerivs {
    fn build(v: Expr) -> CoordDerivs {
        let vx = v.d_real(false);
        let vy = v.d_real(true);
        CoordDerivs {
            vxx: vx.d_real(false),
            vxy: vx.d_real(true),
            vyy: vy.d_real(true),
            vx,
            vy,
            v,
        }
    }
}

/// An explicit chart mapping an annulus into R^4.
#[derive(Debug, Clone)]
pub struct ExplicitChart {
    pub name: String,
    pub domain: Domain,
    pub map: ChartMap,
    pub multiplicity: u32,
    pub limit: LimitRole,
    coords: [CoordDerivs; 4],
}

impl PartialEq for ExplicitChart {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.domain == other.domain
            && self.map == other.map
            && self.multiplicity == other.multiplicity
            && self.limit == other.limit
    }
}

impl ExplicitChart {
    pub fn new(
        name: String,
        domain: Domain,
        map: ChartMap,
        multiplicity: u32,
        limit: LimitRole,
    ) -> ExplicitChart {
        // Each real coordinate is the real part of a complex expression:
        // re(c) and im(c) = re(-i*c) for complex pairs, identity for real maps.
        let coords: [CoordDerivs; 4] = match &map {
            ChartMap::TwoComplex([c1, c2]) => {
                let minus_i = Expr::neg(Expr::ImagUnit);
                [
                    CoordDerivs::build(c1.clone()),
                    CoordDerivs::build(Expr::mul(minus_i.clone(), c1.clone())),
                    CoordDerivs::build(c2.clone()),
                    CoordDerivs::build(Expr::mul(minus_i, c2.clone())),
                ]
            }
            ChartMap::FourReal(rs) => {
                [
                    CoordDerivs::build(rs[0].clone()),
                    CoordDerivs::build(rs[1].clone()),
                    CoordDerivs::build(rs[2].clone()),
                    CoordDerivs::build(rs[3].clone()),
                ]
            }
        };
        ExplicitChart { name, domain, map, multiplicity, limit, coords }
    }

    /// Exact 2-jet at z for family parameter s.
    pub fn jet(&self, z: Complex64, s: f64) -> Result<Jet2> {
        if !self.domain.contains(z) {
            return Err(Error::OutsideDomain {
                radius: z.norm(),
                lo: self.domain.r_in,
                hi: self.domain.r_out,
            });
        }
        Ok(self.jet_unchecked(z, s))
    }

    /// Jet evaluation without the domain test (quadrature nodes are
    /// constructed inside the domain already).
    pub fn jet_unchecked(&self, z: Complex64, s: f64) -> Jet2 {
        let mut f = [0.0; 4];
        let mut fx = [0.0; 4];
        let mut fy = [0.0; 4];
        let mut fxx = [0.0; 4];
        let mut fxy = [0.0; 4];
        let mut fyy = [0.0; 4];
        for k in 0..4 {
            let c = &self.coords[k];
            f[k] = c.v.eval_chart(z, s).re;
            fx[k] = c.vx.eval_chart(z, s).re;
            fy[k] = c.vy.eval_chart(z, s).re;
            fxx[k] = c.vxx.eval_chart(z, s).re;
            fxy[k] = c.vxy.eval_chart(z, s).re;
            fyy[k] = c.vyy.eval_chart(z, s).re;
        }
        Jet2 { f, fx, fy, fxx, fxy, fyy }
    }

    /// Map value only.
    pub fn value(&self, z: Complex64, s: f64) -> V4 {
        let mut f = [0.0; 4];
        for k in 0..4 {
            f[k] = self.coords[k].v.eval_chart(z, s).re;
        }
        f
    }
}

/// Roots of a complex-coefficient polynomial by the Durand-Kerner iteration.
/// `seeds`, when given, are used as initial guesses (continuation).
pub fn poly_roots(coeffs: &[Complex64], seeds: Option<&[Complex64]>) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    let lead = coeffs[n];
    if lead.norm() < 1e-300 {
        return Err(Error::RootFind("leading coefficient vanishes".into()));
    }
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let radius = 1.0
        + monic[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
    let mut w: Vec<Complex64> = match seeds {
        Some(sd) if sd.len() == n => {
            let mut v = sd.to_vec();
            // split near-duplicate seeds so the iteration denominators stay alive
            for j in 0..n {
                for k in 0..j {
                    if (v[j] - v[k]).norm() < 1e-9 * radius {
                        v[j] += Complex64::new(1e-8 * radius, 2e-8 * radius);
                    }
                }
            }
            v
        }
        _ => {
            let rot = Complex64::new(0.4, 0.9);
            let mut acc = Complex64::new(1.0, 0.0);
            (0..n)
                .map(|_| {
                    acc *= rot;
                    acc * radius
                })
                .collect()
        }
    };
    let eval = |x: Complex64| -> Complex64 {
        let mut p = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::default();
        for c in &monic {
            acc += c * p;
            p *= x;
        }
        acc
    };
    let tol = 1e-14 * radius.max(1.0);
    // multiple roots converge linearly and stall on rounding; a small
    // residual is as good as a small step there
    let res_tol = 1e-11 * radius.max(1.0).powi(n as i32);
    for _ in 0..300 {
        let mut delta_max = 0.0_f64;
        for j in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for k in 0..n {
                if k != j {
                    denom *= w[j] - w[k];
                }
            }
            if denom.norm() < 1e-280 {
                w[j] += Complex64::new(1e-8 * radius, 2e-8 * radius);
                continue;
            }
            let step = eval(w[j]) / denom;
            w[j] -= step;
            delta_max = delta_max.max(step.norm());
        }
        if delta_max < tol {
            return Ok(w);
        }
        if delta_max < 1e-6 * radius.max(1.0) && w.iter().all(|&x| eval(x).norm() < res_tol) {
            return Ok(w);
        }
    }
    if w.iter().all(|&x| eval(x).norm() < 1e-8 * radius.max(1.0)) {
        return Ok(w);
    }
    Err(Error::RootFind(format!("Durand-Kerner did not converge for degree {n}")))
}

/// An implicit plane-curve chart {P(x, y, s) = 0} with a marked base
/// variable; the other variable is solved per sheet.
#[derive(Debug, Clone)]
pub struct ImplicitChart {
    pub name: String,
    pub poly: Expr,
    pub base: Var,
    pub sheets: u32,
    pub base_domain: Domain,
    /// Excluded-disc radius around discriminant points; `None` defers to the
    /// caller default (eps / 50).
    pub rho_cut: Option<f64>,
    pub multiplicity: u32,
    pub limit: LimitRole,
    fiber_coeffs: Vec<Expr>,
    p_b: Expr,
    p_w: Expr,
    p_bb: Expr,
    p_bw: Expr,
    p_ww: Expr,
}

impl PartialEq for ImplicitChart {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.poly == other.poly
            && self.base == other.base
            && self.sheets == other.sheets
            && self.base_domain == other.base_domain
            && self.rho_cut == other.rho_cut
            && self.multiplicity == other.multiplicity
            && self.limit == other.limit
    }
}

impl ImplicitChart {
    pub fn new(
        name: String,
        poly: Expr,
        base: Var,
        sheets: u32,
        base_domain: Domain,
        rho_cut: Option<f64>,
        multiplicity: u32,
        limit: LimitRole,
    ) -> Result<ImplicitChart> {
        let fiber = match base {
            Var::X => Var::Y,
            Var::Y => Var::X,
            _ => return Err(Error::Validation("implicit base variable must be x or y".into())),
        };
        let fiber_coeffs = poly
            .poly_in(fiber)
            .map_err(Error::Validation)?;
        if fiber_coeffs.len() as u32 != sheets + 1 {
            return Err(Error::Validation(format!(
                "declared {} sheets but P has degree {} in {}",
                sheets,
                fiber_coeffs.len() - 1,
                fiber.name()
            )));
        }
        let p_b = poly.d_complex(base);
        let p_w = poly.d_complex(fiber);
        Ok(ImplicitChart {
            p_bb: p_b.d_complex(base),
            p_bw: p_b.d_complex(fiber),
            p_ww: p_w.d_complex(fiber),
            p_b,
            p_w,
            name,
            poly,
            base,
            sheets,
            base_domain,
            rho_cut,
            multiplicity,
            limit,
            fiber_coeffs,
        })
    }

    pub fn fiber_var(&self) -> Var {
        if self.base == Var::X {
            Var::Y
        } else {
            Var::X
        }
    }

    fn xy(&self, b: Complex64, w: Complex64) -> (Complex64, Complex64) {
        if self.base == Var::X {
            (b, w)
        } else {
            (w, b)
        }
    }

    pub fn eval_poly(&self, b: Complex64, w: Complex64, s: f64) -> Complex64 {
        let (x, y) = self.xy(b, w);
        self.poly.eval_curve(x, y, s)
    }

    pub fn d_fiber(&self, b: Complex64, w: Complex64, s: f64) -> Complex64 {
        let (x, y) = self.xy(b, w);
        self.p_w.eval_curve(x, y, s)
    }

    pub fn d_base(&self, b: Complex64, w: Complex64, s: f64) -> Complex64 {
        let (x, y) = self.xy(b, w);
        self.p_b.eval_curve(x, y, s)
    }

    pub fn d2_fiber(&self, b: Complex64, w: Complex64, s: f64) -> Complex64 {
        let (x, y) = self.xy(b, w);
        self.p_ww.eval_curve(x, y, s)
    }

    /// All fiber solutions over a base point, Newton-polished; sorted by
    /// descending (re, im) when no seeds are given.
    pub fn fiber_roots(
        &self,
        b: Complex64,
        s: f64,
        seeds: Option<&[Complex64]>,
    ) -> Result<Vec<Complex64>> {
        let (x0, y0) = (Complex64::default(), Complex64::default());
        let coeffs: Vec<Complex64> = self
            .fiber_coeffs
            .iter()
            .map(|c| {
                let (x, y) = if self.base == Var::X { (b, y0) } else { (x0, b) };
                c.eval_curve(x, y, s)
            })
            .collect();
        let mut roots = poly_roots(&coeffs, seeds)?;
        if seeds.is_none() {
            roots.sort_by(|a, c| {
                c.re.partial_cmp(&a.re)
                    .unwrap()
                    .then(c.im.partial_cmp(&a.im).unwrap())
            });
        }
        // polish with Newton on P itself
        for w in roots.iter_mut() {
            for _ in 0..3 {
                let pw = self.d_fiber(b, *w, s);
                if pw.norm() < 1e-280 {
                    break;
                }
                *w -= self.eval_poly(b, *w, s) / pw;
            }
        }
        Ok(roots)
    }

    /// Complex derivatives w' and w'' of the local sheet through (b, w).
    pub fn sheet_derivs(&self, b: Complex64, w: Complex64, s: f64) -> Result<(Complex64, Complex64)> {
        let (x, y) = self.xy(b, w);
        let pw = self.p_w.eval_curve(x, y, s);
        if pw.norm() < 1e-12 {
            return Err(Error::RootFind(format!(
                "sheet not locally solvable: |dP/d{}| = {:.3e}",
                self.fiber_var().name(),
                pw.norm()
            )));
        }
        let pb = self.p_b.eval_curve(x, y, s);
        let pbb = self.p_bb.eval_curve(x, y, s);
        let pbw = self.p_bw.eval_curve(x, y, s);
        let pww = self.p_ww.eval_curve(x, y, s);
        let w1 = -pb / pw;
        let w2 = -(pbb + 2.0 * pbw * w1 + pww * w1 * w1) / pw;
        Ok((w1, w2))
    }

    /// Exact 2-jet of the sheet through (b, w), embedded in R^4 via
    /// (x, y) ↦ (re x, im x, re y, im y).
    pub fn sheet_jet(&self, b: Complex64, w: Complex64, s: f64) -> Result<Jet2> {
        let (w1, w2) = self.sheet_derivs(b, w, s)?;
        let (x, y) = self.xy(b, w);
        let f = [x.re, x.im, y.re, y.im];
        // The chart parameter is the base variable; holomorphy gives the
        // y-direction derivatives as multiplication by i.
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::default());
        let pack = |db: Complex64, dw: Complex64| -> V4 {
            if self.base == Var::X {
                [db.re, db.im, dw.re, dw.im]
            } else {
                [dw.re, dw.im, db.re, db.im]
            }
        };
        let i = Complex64::new(0.0, 1.0);
        Ok(Jet2 {
            f,
            fx: pack(one, w1),
            fy: pack(i, i * w1),
            fxx: pack(zero, w2),
            fxy: pack(zero, i * w2),
            fyy: pack(zero, -w2),
        })
    }

    /// Exact 2-jet of the curve parametrized by the fiber variable through
    /// (b, w); regular exactly where the base parametrization degenerates.
    pub fn fiber_param_jet(&self, b: Complex64, w: Complex64, s: f64) -> Result<Jet2> {
        let (x, y) = self.xy(b, w);
        let pb = self.p_b.eval_curve(x, y, s);
        if pb.norm() < 1e-12 {
            return Err(Error::RootFind(format!(
                "fiber parametrization not solvable: |dP/d{}| = {:.3e}",
                self.base.name(),
                pb.norm()
            )));
        }
        let pw = self.p_w.eval_curve(x, y, s);
        let pbb = self.p_bb.eval_curve(x, y, s);
        let pbw = self.p_bw.eval_curve(x, y, s);
        let pww = self.p_ww.eval_curve(x, y, s);
        let b1 = -pw / pb;
        let b2 = -(pww + 2.0 * pbw * b1 + pbb * b1 * b1) / pb;
        let f = [x.re, x.im, y.re, y.im];
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::default());
        let pack = |dbase: Complex64, dfib: Complex64| -> V4 {
            if self.base == Var::X {
                [dbase.re, dbase.im, dfib.re, dfib.im]
            } else {
                [dfib.re, dfib.im, dbase.re, dbase.im]
            }
        };
        let i = Complex64::new(0.0, 1.0);
        Ok(Jet2 {
            f,
            fx: pack(b1, one),
            fy: pack(i * b1, i),
            fxx: pack(b2, zero),
            fxy: pack(i * b2, zero),
            fyy: pack(-b2, zero),
        })
    }

    /// Jet of sheet `sheet` over base point `b` (sheets ordered by
    /// descending (re, im) of the fiber value at `b`).
    pub fn jet_at_sheet(&self, b: Complex64, sheet: usize, s: f64) -> Result<Jet2> {
        if !self.base_domain.contains(b) {
            return Err(Error::OutsideDomain {
                radius: b.norm(),
                lo: self.base_domain.r_in,
                hi: self.base_domain.r_out,
            });
        }
        let roots = self.fiber_roots(b, s, None)?;
        let w = *roots.get(sheet).ok_or_else(|| {
            Error::Validation(format!("sheet index {sheet} out of range {}", roots.len()))
        })?;
        self.sheet_jet(b, w, s)
    }

    /// Discriminant points of the base projection: solutions of
    /// {P = 0, dP/dfiber = 0} over the base domain (with a small margin).
    pub fn discriminant_points(&self, s: f64) -> Vec<(Complex64, Complex64)> {
        let mut found: Vec<(Complex64, Complex64)> = Vec::new();
        let r_max = self.base_domain.r_out * 1.05;
        let n_r = 14;
        let n_t = 24;
        // Newton on F = (P, P_w) in the two complex unknowns (b, w).
        let mut try_seed = |b0: Complex64, w0: Complex64| {
            let mut b = b0;
            let mut w = w0;
            for _ in 0..60 {
                let (x, y) = self.xy(b, w);
                let p = self.poly.eval_curve(x, y, s);
                let q = self.p_w.eval_curve(x, y, s);
                if p.norm() + q.norm() < 1e-13 {
                    break;
                }
                let a11 = self.p_b.eval_curve(x, y, s);
                let a12 = self.p_w.eval_curve(x, y, s);
                let a21 = self.p_bw.eval_curve(x, y, s);
                let a22 = self.p_ww.eval_curve(x, y, s);
                let det = a11 * a22 - a12 * a21;
                if det.norm() < 1e-16 {
                    return;
                }
                let db = (p * a22 - q * a12) / det;
                let dw = (a11 * q - a21 * p) / det;
                b -= db;
                w -= dw;
                if b.norm() > 4.0 * r_max.max(1.0) {
                    return;
                }
            }
            let (x, y) = self.xy(b, w);
            let res = self.poly.eval_curve(x, y, s).norm() + self.p_w.eval_curve(x, y, s).norm();
            if res < 1e-10 && b.norm() <= r_max {
                if !found.iter().any(|(bb, _)| (bb - b).norm() < 1e-7 * r_max.max(1.0)) {
                    found.push((b, w));
                }
            }
        };
        for ir in 0..n_r {
            let r = r_max * (ir as f64 + 0.5) / n_r as f64;
            for it in 0..n_t {
                let th = 2.0 * std::f64::consts::PI * (it as f64 + 0.3) / n_t as f64;
                let b0 = Complex64::from_polar(r, th);
                // seed the fiber value with each root of dP/dfiber(b0, ·)
                if let Ok(coeffs) = self.fiber_coeff_values(b0, s) {
                    let dcoeffs: Vec<Complex64> = coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(k, c)| c * k as f64)
                        .collect();
                    if dcoeffs.len() > 1 {
                        if let Ok(ws) = poly_roots(&dcoeffs, None) {
                            for w0 in ws {
                                try_seed(b0, w0);
                            }
                        }
                    } else if dcoeffs.len() == 1 {
                        // linear fiber dependence: no discriminant
                    }
                }
            }
        }
        found.sort_by(|a, b| {
            a.0.re
                .partial_cmp(&b.0.re)
                .unwrap()
                .then(a.0.im.partial_cmp(&b.0.im).unwrap())
        });
        found
    }

    fn fiber_coeff_values(&self, b: Complex64, s: f64) -> Result<Vec<Complex64>> {
        Ok(self
            .fiber_coeffs
            .iter()
            .map(|c| {
                let (x, y) = if self.base == Var::X {
                    (b, Complex64::default())
                } else {
                    (Complex64::default(), b)
                };
                c.eval_curve(x, y, s)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::expr::Expr as E;

    fn quadric() -> ImplicitChart {
        // y^2 - x^2 - s
        let p = E::sub(
            E::pow(E::var(Var::Y), 2),
            E::add(E::pow(E::var(Var::X), 2), E::var(Var::S)),
        );
        ImplicitChart::new(
            "q".into(),
            p,
            Var::X,
            2,
            Domain::disc(2.0),
            None,
            1,
            LimitRole::Both,
        )
        .unwrap()
    }

    #[test]
    fn quadric_sheet_zero_is_positive_root() {
        let c = quadric();
        let b = Complex64::new(1.0, 0.0);
        let jet = c.jet_at_sheet(b, 0, 0.01).unwrap();
        let y = (1.0f64 + 0.01).sqrt();
        assert!((jet.f[2] - y).abs() < 1e-12);
        // dy/dx = x/y
        assert!((jet.fx[2] - 1.0 / y).abs() < 1e-12);
    }

    #[test]
    fn quadric_sheets_are_opposite() {
        // y^2 - x^3 - s with s = 0.001, x = 0.5
        let p = E::sub(
            E::pow(E::var(Var::Y), 2),
            E::add(E::pow(E::var(Var::X), 3), E::var(Var::S)),
        );
        let c = ImplicitChart::new(
            "c".into(),
            p,
            Var::X,
            2,
            Domain::disc(2.0),
            None,
            1,
            LimitRole::Both,
        )
        .unwrap();
        let b = Complex64::new(0.5, 0.0);
        let r = c.fiber_roots(b, 0.001, None).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + r[1]).norm() < 1e-12);
    }

    #[test]
    fn cusp_discriminants_are_cube_roots() {
        let p = E::sub(
            E::pow(E::var(Var::Y), 2),
            E::add(E::pow(E::var(Var::X), 3), E::var(Var::S)),
        );
        let c = ImplicitChart::new(
            "c".into(),
            p,
            Var::X,
            2,
            Domain::disc(0.8),
            None,
            1,
            LimitRole::Both,
        )
        .unwrap();
        let s = 1e-3;
        let d = c.discriminant_points(s);
        assert_eq!(d.len(), 3);
        for (b, _) in d {
            assert!((b.powu(3) + s).norm() < 1e-9);
        }
    }

    #[test]
    fn explicit_jet_of_z_squared_cubed() {
        // chart (z^2, z^3): check second derivatives at a generic point
        let c = ExplicitChart::new(
            "c".into(),
            Domain::disc(1.0),
            ChartMap::TwoComplex([E::pow(E::var(Var::Z), 2), E::pow(E::var(Var::Z), 3)]),
            1,
            LimitRole::Both,
        );
        let z = Complex64::new(0.1, 0.0);
        let j = c.jet(z, 0.0).unwrap();
        // f1 + i f2 = z^2: fxx = re(2), fyy = -2 in first coordinate
        assert!((j.fxx[0] - 2.0).abs() < 1e-14);
        assert!((j.fyy[0] + 2.0).abs() < 1e-14);
        assert!((j.fxy[1] - 2.0).abs() < 1e-14);
        // f3 + i f4 = z^3: fxx = re(6z)
        assert!((j.fxx[2] - 0.6).abs() < 1e-14);
    }
}
