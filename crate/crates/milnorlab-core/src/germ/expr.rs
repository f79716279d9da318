//! Polynomial expression trees over the chart coordinate `z`, its conjugate
//! `zb`, the family parameter `s` and the imaginary unit, with symbolic
//! partial derivatives. Implicit plane curves use the same AST over the
//! complex variables `x`, `y` and `s`.
//!
//! Evaluation is complex-valued; the four real coordinates of a chart map are
//! recovered as real parts downstream. Derivative trees are simplified on
//! construction so that exact 2-jets stay cheap to evaluate.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    /// chart coordinate z = x + iy
    Z,
    /// complex conjugate of z
    Zb,
    /// family parameter (real scalar)
    S,
    /// base variable of an implicit plane curve
    X,
    /// fiber variable of an implicit plane curve
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::Z => "z",
            Var::Zb => "zb",
            Var::S => "s",
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

/// Expression tree. Sub-expressions are shared (`Arc`) so symbolic
/// differentiation of large charts stays compact.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    ImagUnit,
    Var(Var),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, u32),
    Re(Arc<Expr>),
    Im(Arc<Expr>),
}

const I: Complex64 = Complex64::new(0.0, 1.0);

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    /// Constant-fold the expression if it contains no variables.
    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Num(v) => Some(Complex64::new(*v, 0.0)),
            Expr::ImagUnit => Some(I),
            Expr::Var(_) => None,
            Expr::Add(a, b) => Some(a.as_const()? + b.as_const()?),
            Expr::Sub(a, b) => Some(a.as_const()? - b.as_const()?),
            Expr::Mul(a, b) => Some(a.as_const()? * b.as_const()?),
            Expr::Div(a, b) => Some(a.as_const()? / b.as_const()?),
            Expr::Pow(a, n) => Some(a.as_const()?.powu(*n)),
            Expr::Re(a) => Some(Complex64::new(a.as_const()?.re, 0.0)),
            Expr::Im(a) => Some(Complex64::new(a.as_const()?.im, 0.0)),
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) | Expr::ImagUnit => false,
            Expr::Var(w) => *w == v,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(v) || b.depends_on(v)
            }
            Expr::Pow(a, _) | Expr::Re(a) | Expr::Im(a) => a.depends_on(v),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    // Simplifying constructors, used when building derivative trees.

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
            return Expr::Num(x + y);
        }
        Expr::Add(Arc::new(a), Arc::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
            return Expr::Num(x - y);
        }
        Expr::Sub(Arc::new(a), Arc::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::Num(0.0);
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
            return Expr::Num(x * y);
        }
        Expr::Mul(Arc::new(a), Arc::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return Expr::Num(0.0);
        }
        if b.is_one() {
            return a;
        }
        Expr::Div(Arc::new(a), Arc::new(b))
    }

    pub fn pow(a: Expr, n: u32) -> Expr {
        match n {
            0 => Expr::Num(1.0),
            1 => a,
            _ => Expr::Pow(Arc::new(a), n),
        }
    }

    pub fn re(a: Expr) -> Expr {
        Expr::Re(Arc::new(a))
    }

    pub fn im(a: Expr) -> Expr {
        Expr::Im(Arc::new(a))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::sub(Expr::Num(0.0), a)
    }

    /// Evaluate with explicit values for every variable kind.
    pub fn eval(&self, z: Complex64, s: f64, x: Complex64, y: Complex64) -> Complex64 {
        match self {
            Expr::Num(v) => Complex64::new(*v, 0.0),
            Expr::ImagUnit => I,
            Expr::Var(Var::Z) => z,
            Expr::Var(Var::Zb) => z.conj(),
            Expr::Var(Var::S) => Complex64::new(s, 0.0),
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Add(a, b) => a.eval(z, s, x, y) + b.eval(z, s, x, y),
            Expr::Sub(a, b) => a.eval(z, s, x, y) - b.eval(z, s, x, y),
            Expr::Mul(a, b) => a.eval(z, s, x, y) * b.eval(z, s, x, y),
            Expr::Div(a, b) => a.eval(z, s, x, y) / b.eval(z, s, x, y),
            Expr::Pow(a, n) => a.eval(z, s, x, y).powu(*n),
            Expr::Re(a) => Complex64::new(a.eval(z, s, x, y).re, 0.0),
            Expr::Im(a) => Complex64::new(a.eval(z, s, x, y).im, 0.0),
        }
    }

    /// Evaluate a chart expression (variables z, zb, s).
    pub fn eval_chart(&self, z: Complex64, s: f64) -> Complex64 {
        self.eval(z, s, Complex64::default(), Complex64::default())
    }

    /// Evaluate an implicit-curve expression (variables x, y, s).
    pub fn eval_curve(&self, x: Complex64, y: Complex64, s: f64) -> Complex64 {
        self.eval(Complex64::default(), s, x, y)
    }

    /// Real partial derivative with respect to x or y where z = x + iy.
    /// dz/dx = 1, dz/dy = i, dzb/dx = 1, dzb/dy = -i; re and im commute with
    /// real partials.
    pub fn d_real(&self, wrt_y: bool) -> Expr {
        match self {
            Expr::Num(_) | Expr::ImagUnit | Expr::Var(Var::S) => Expr::Num(0.0),
            Expr::Var(Var::Z) => {
                if wrt_y {
                    Expr::ImagUnit
                } else {
                    Expr::Num(1.0)
                }
            }
            Expr::Var(Var::Zb) => {
                if wrt_y {
                    Expr::neg(Expr::ImagUnit)
                } else {
                    Expr::Num(1.0)
                }
            }
            Expr::Var(v @ (Var::X | Var::Y)) => {
                panic!("real partials are for chart expressions; found `{}`", v.name())
            }
            Expr::Add(a, b) => Expr::add(a.d_real(wrt_y), b.d_real(wrt_y)),
            Expr::Sub(a, b) => Expr::sub(a.d_real(wrt_y), b.d_real(wrt_y)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.d_real(wrt_y), (**b).clone()),
                Expr::mul((**a).clone(), b.d_real(wrt_y)),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.d_real(wrt_y), (**b).clone()),
                    Expr::mul((**a).clone(), b.d_real(wrt_y)),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::Num(*n as f64), Expr::pow((**a).clone(), n - 1)),
                a.d_real(wrt_y),
            ),
            Expr::Re(a) => Expr::re(a.d_real(wrt_y)),
            Expr::Im(a) => Expr::im(a.d_real(wrt_y)),
        }
    }

    /// Complex-formal derivative with respect to one of the variables
    /// (implicit curves are holomorphic polynomials, so x and y are treated
    /// as independent complex variables).
    pub fn d_complex(&self, v: Var) -> Expr {
        match self {
            Expr::Num(_) | Expr::ImagUnit => Expr::Num(0.0),
            Expr::Var(w) => Expr::Num(if *w == v { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => Expr::add(a.d_complex(v), b.d_complex(v)),
            Expr::Sub(a, b) => Expr::sub(a.d_complex(v), b.d_complex(v)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.d_complex(v), (**b).clone()),
                Expr::mul((**a).clone(), b.d_complex(v)),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.d_complex(v), (**b).clone()),
                    Expr::mul((**a).clone(), b.d_complex(v)),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Pow(a, n) => Expr::mul(
                Expr::mul(Expr::Num(*n as f64), Expr::pow((**a).clone(), n - 1)),
                a.d_complex(v),
            ),
            Expr::Re(_) | Expr::Im(_) => {
                panic!("re/im are not allowed in implicit curve polynomials")
            }
        }
    }

    /// Coefficients of the expression as a polynomial in `v`, lowest degree
    /// first. Fails if `v` occurs inside a divisor or under re/im.
    pub fn poly_in(&self, v: Var) -> Result<Vec<Expr>, String> {
        fn conv(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
            let mut out = vec![Expr::Num(0.0); a.len() + b.len() - 1];
            for (i, ca) in a.iter().enumerate() {
                for (j, cb) in b.iter().enumerate() {
                    let term = Expr::mul(ca.clone(), cb.clone());
                    let cur = out[i + j].clone();
                    out[i + j] = Expr::add(cur, term);
                }
            }
            out
        }
        fn pad_zip(a: Vec<Expr>, b: Vec<Expr>, sub: bool) -> Vec<Expr> {
            let n = a.len().max(b.len());
            (0..n)
                .map(|k| {
                    let x = a.get(k).cloned().unwrap_or(Expr::Num(0.0));
                    let y = b.get(k).cloned().unwrap_or(Expr::Num(0.0));
                    if sub {
                        Expr::sub(x, y)
                    } else {
                        Expr::add(x, y)
                    }
                })
                .collect()
        }
        let trim = |mut v: Vec<Expr>| -> Vec<Expr> {
            while v.len() > 1 && v.last().map(|e| e.is_zero()).unwrap_or(false) {
                v.pop();
            }
            v
        };
        match self {
            Expr::Var(w) if *w == v => Ok(vec![Expr::Num(0.0), Expr::Num(1.0)]),
            Expr::Num(_) | Expr::ImagUnit | Expr::Var(_) => Ok(vec![self.clone()]),
            Expr::Add(a, b) => Ok(trim(pad_zip(a.poly_in(v)?, b.poly_in(v)?, false))),
            Expr::Sub(a, b) => Ok(trim(pad_zip(a.poly_in(v)?, b.poly_in(v)?, true))),
            Expr::Mul(a, b) => Ok(trim(conv(&a.poly_in(v)?, &b.poly_in(v)?))),
            Expr::Div(a, b) => {
                if b.depends_on(v) {
                    return Err(format!("division by an expression containing {}", v.name()));
                }
                Ok(a.poly_in(v)?
                    .into_iter()
                    .map(|c| Expr::div(c, (**b).clone()))
                    .collect())
            }
            Expr::Pow(a, n) => {
                let base = a.poly_in(v)?;
                let mut acc = vec![Expr::Num(1.0)];
                for _ in 0..*n {
                    acc = conv(&acc, &base);
                }
                Ok(trim(acc))
            }
            Expr::Re(_) | Expr::Im(_) => Err("re/im are not allowed in implicit curve polynomials".into()),
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Pow(..) => 3,
        _ => 4,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if prec(e) < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    // Negative literals are not in the grammar; print a form
                    // that reparses to an equal value.
                    write!(f, "(0 - {})", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::ImagUnit => write!(f, "i"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 4)
            }
            Expr::Pow(a, n) => {
                wrap(f, a, 4)?;
                write!(f, "^{n}")
            }
            Expr::Re(a) => write!(f, "re({a})"),
            Expr::Im(a) => write!(f, "im({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Expr {
        Expr::var(Var::Z)
    }

    #[test]
    fn derivative_of_z_squared() {
        // d/dx z^2 = 2z, d/dy z^2 = 2iz
        let e = Expr::pow(z(), 2);
        let ex = e.d_real(false);
        let ey = e.d_real(true);
        let at = Complex64::new(0.3, -0.7);
        assert!((ex.eval_chart(at, 0.0) - 2.0 * at).norm() < 1e-15);
        assert!((ey.eval_chart(at, 0.0) - 2.0 * I * at).norm() < 1e-15);
    }

    #[test]
    fn mixed_partials_commute() {
        let e = Expr::mul(
            Expr::pow(z(), 3),
            Expr::add(Expr::var(Var::Zb), Expr::mul(Expr::var(Var::S), z())),
        );
        let dxy = e.d_real(false).d_real(true);
        let dyx = e.d_real(true).d_real(false);
        let at = Complex64::new(0.4, 0.2);
        let a = dxy.eval_chart(at, 0.7);
        let b = dyx.eval_chart(at, 0.7);
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn poly_in_y_extracts_coefficients() {
        // y^2 - x^3 - s  ->  [-x^3 - s, 0, 1]
        let p = Expr::sub(
            Expr::pow(Expr::var(Var::Y), 2),
            Expr::add(Expr::pow(Expr::var(Var::X), 3), Expr::var(Var::S)),
        );
        let coeffs = p.poly_in(Var::Y).unwrap();
        assert_eq!(coeffs.len(), 3);
        let x = Complex64::new(0.5, 0.1);
        let c0 = coeffs[0].eval_curve(x, Complex64::default(), 0.01);
        assert!((c0 - (-(x.powu(3)) - 0.01)).norm() < 1e-15);
        let c2 = coeffs[2].eval_curve(x, Complex64::default(), 0.01);
        assert!((c2 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
