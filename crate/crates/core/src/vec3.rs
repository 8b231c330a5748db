//! Minimal fixed-size vector helpers for frequency-space points.

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(k: f64, a: Vec3) -> Vec3 {
    [k * a[0], k * a[1], k * a[2]]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal pair spanning the plane perpendicular to the unit vector `n`.
///
/// The first vector is the projection of the coordinate axis along which `n`
/// has its smallest component, so the frame is a deterministic function of `n`.
pub fn perpendicular_frame(n: Vec3) -> (Vec3, Vec3) {
    let mut axis = 0;
    for k in 1..3 {
        if n[k].abs() < n[axis].abs() {
            axis = k;
        }
    }
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let e1 = sub(a, scale(n[axis], n));
    let e1 = scale(1.0 / norm(e1), e1);
    let e2 = cross(n, e1);
    (e1, e2)
}

pub type Mat3 = [[f64; 3]; 3];

/// Eigenvalues of a symmetric 3×3 matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(m: Mat3) -> Vec3 {
    let mut a = m;
    for _ in 0..64 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        let diag = a[0][0].powi(2) + a[1][1].powi(2) + a[2][2].powi(2);
        if off <= 1e-30 * diag || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * c;
            let mut b = a;
            for k in 0..3 {
                b[k][p] = c * a[k][p] - sn * a[k][q];
                b[k][q] = sn * a[k][p] + c * a[k][q];
            }
            let mut r = b;
            for k in 0..3 {
                r[p][k] = c * b[p][k] - sn * b[q][k];
                r[q][k] = sn * b[p][k] + c * b[q][k];
            }
            r[p][q] = 0.0;
            r[q][p] = 0.0;
            a = r;
        }
    }
    [a[0][0], a[1][1], a[2][2]]
}
