//! Small fixed-size linear algebra used throughout: vectors in R^4, exterior
//! 2-vectors in the coordinate order (e12, e13, e14, e23, e24, e34), the
//! Hodge star and the orthonormal bases of the self-dual and anti-self-dual
//! subspaces.

pub type V4 = [f64; 4];
pub type V3 = [f64; 3];
/// A 2-vector on R^4 in coordinates (e12, e13, e14, e23, e24, e34).
pub type L2 = [f64; 6];

pub fn add4(a: V4, b: V4) -> V4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn sub4(a: V4, b: V4) -> V4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn scale4(a: V4, t: f64) -> V4 {
    [a[0] * t, a[1] * t, a[2] * t, a[3] * t]
}

pub fn dot4(a: V4, b: V4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn norm4(a: V4) -> f64 {
    dot4(a, a).sqrt()
}

pub fn normalize4(a: V4) -> V4 {
    let n = norm4(a);
    scale4(a, 1.0 / n)
}

pub fn dot3(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: V3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn cross3(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub3(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(a: V3, t: f64) -> V3 {
    [a[0] * t, a[1] * t, a[2] * t]
}

/// Determinant of the 4x4 matrix with the given columns.
pub fn det4(c0: V4, c1: V4, c2: V4, c3: V4) -> f64 {
    let m = [c0, c1, c2, c3];
    let minor = |r: [usize; 3], c: [usize; 3]| -> f64 {
        m[c[0]][r[0]] * (m[c[1]][r[1]] * m[c[2]][r[2]] - m[c[1]][r[2]] * m[c[2]][r[1]])
            - m[c[1]][r[0]] * (m[c[0]][r[1]] * m[c[2]][r[2]] - m[c[0]][r[2]] * m[c[2]][r[1]])
            + m[c[2]][r[0]] * (m[c[0]][r[1]] * m[c[1]][r[2]] - m[c[0]][r[2]] * m[c[1]][r[1]])
    };
    m[0][0] * minor([1, 2, 3], [1, 2, 3]) - m[1][0] * minor([1, 2, 3], [0, 2, 3])
        + m[2][0] * minor([1, 2, 3], [0, 1, 3])
        - m[3][0] * minor([1, 2, 3], [0, 1, 2])
}

pub fn wedge(u: V4, v: V4) -> L2 {
    [
        u[0] * v[1] - u[1] * v[0],
        u[0] * v[2] - u[2] * v[0],
        u[0] * v[3] - u[3] * v[0],
        u[1] * v[2] - u[2] * v[1],
        u[1] * v[3] - u[3] * v[1],
        u[2] * v[3] - u[3] * v[2],
    ]
}

pub fn dot6(a: L2, b: L2) -> f64 {
    (0..6).map(|i| a[i] * b[i]).sum()
}

pub fn norm6(a: L2) -> f64 {
    dot6(a, a).sqrt()
}

pub fn add6(a: L2, b: L2) -> L2 {
    std::array::from_fn(|i| a[i] + b[i])
}

pub fn sub6(a: L2, b: L2) -> L2 {
    std::array::from_fn(|i| a[i] - b[i])
}

pub fn scale6(a: L2, t: f64) -> L2 {
    std::array::from_fn(|i| a[i] * t)
}

/// Hodge star on 2-vectors, standard orientation e1^e2^e3^e4.
pub fn star(a: L2) -> L2 {
    [a[5], -a[4], a[3], a[2], -a[1], a[0]]
}

/// Projection of a 2-vector onto the self-dual / anti-self-dual coordinates.
///
/// For a unit simple 2-vector T the returned triples are the unit vectors
/// J in Λ⁺ and K in Λ⁻ of the splitting T = (J + K)/√2, expressed in the
/// orthonormal bases
/// ω₁⁺ = (e12+e34)/√2, ω₂⁺ = (e13+e42)/√2, ω₃⁺ = (e14+e23)/√2 and
/// ω₁⁻ = (e12−e34)/√2, ω₂⁻ = (e13−e42)/√2, ω₃⁻ = (e14−e23)/√2.
pub fn split_pm(t: L2) -> (V3, V3) {
    let j = [t[0] + t[5], t[1] - t[4], t[2] + t[3]];
    let k = [t[0] - t[5], t[1] + t[4], t[2] - t[3]];
    (j, k)
}

/// Inverse of [`split_pm`]: rebuild the 2-vector (J + K)/√2 from the ω± coordinates.
pub fn join_pm(j: V3, k: V3) -> L2 {
    [
        (j[0] + k[0]) / 2.0,
        (j[1] + k[1]) / 2.0,
        (j[2] + k[2]) / 2.0,
        (j[2] - k[2]) / 2.0,
        (k[1] - j[1]) / 2.0,
        (j[0] - k[0]) / 2.0,
    ]
}

/// Extract a positively oriented orthonormal basis (a, b) of the plane of a
/// unit simple 2-vector, so that a ^ b reproduces the input.
pub fn plane_basis(t: L2) -> (V4, V4) {
    // The matrix A v = t·v (A_{ij} = t_{ij}) rotates the plane by -pi/2 and
    // kills the orthogonal complement after squaring: A^2 = -proj_plane.
    let a_mat = |v: V4| -> V4 {
        [
            t[0] * v[1] + t[1] * v[2] + t[2] * v[3],
            -t[0] * v[0] + t[3] * v[2] + t[4] * v[3],
            -t[1] * v[0] - t[3] * v[1] + t[5] * v[3],
            -t[2] * v[0] - t[4] * v[1] - t[5] * v[2],
        ]
    };
    // Seed with the coordinate axis that projects best onto the plane.
    let mut best: Option<(f64, V4)> = None;
    for i in 0..4 {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        let proj = scale4(a_mat(a_mat(v)), -1.0);
        let n = norm4(proj);
        if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
            best = Some((n, proj));
        }
    }
    let (_, p) = best.unwrap();
    let a = normalize4(p);
    let b = scale4(a_mat(a), -1.0);
    (a, normalize4(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_is_involutive_and_splits() {
        let u = [0.3, -1.2, 0.5, 2.0];
        let v = [1.0, 0.4, -0.7, 0.1];
        let w = wedge(u, v);
        assert!(norm6(sub6(star(star(w)), w)) < 1e-14);
        let (j, k) = split_pm(w);
        let back = join_pm(j, k);
        assert!(norm6(sub6(back, w)) < 1e-14);
    }

    #[test]
    fn plane_basis_reconstructs() {
        let u = normalize4([0.2, 0.9, -0.1, 0.3]);
        let mut v = [1.0, -0.2, 0.5, 0.8];
        let d = dot4(v, u);
        v = sub4(v, scale4(u, d));
        let v = normalize4(v);
        let t = wedge(u, v);
        let (a, b) = plane_basis(t);
        assert!(norm6(sub6(wedge(a, b), t)) < 1e-12);
        assert!(dot4(a, b).abs() < 1e-12);
    }
}
