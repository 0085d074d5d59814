//! Fixed-size 3×3 matrix helpers for pointwise kinematics.

pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

pub fn add(a: &Mat3, b: &Mat3) -> Mat3 {
    lin(1.0, a, 1.0, b)
}

pub fn sub(a: &Mat3, b: &Mat3) -> Mat3 {
    lin(1.0, a, -1.0, b)
}

/// `α a + β b`
pub fn lin(alpha: f64, a: &Mat3, beta: f64, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = alpha * a[i][j] + beta * b[i][j];
        }
    }
    c
}

pub fn scale(a: &Mat3, s: f64) -> Mat3 {
    lin(s, a, 0.0, a)
}

pub fn trace(a: &Mat3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

/// `tr(a b)`
pub fn trace_mul(a: &Mat3, b: &Mat3) -> f64 {
    let mut t = 0.0;
    for i in 0..3 {
        for k in 0..3 {
            t += a[i][k] * b[k][i];
        }
    }
    t
}

pub fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn max_abs(a: &Mat3) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}
