//! Banded direct solvers for the per-mode vertical systems.

use num_complex::Complex64;

use crate::error::{FsiError, Result};

pub type C3 = [[Complex64; 3]; 3];
pub type V3 = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Thomas algorithm for a real tridiagonal matrix with a complex right-hand
/// side. `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [Complex64]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return Err(FsiError::Solver("zero pivot in tridiagonal solve".into()));
    }
    c[0] = sup[0] / piv;
    rhs[0] /= piv;
    for k in 1..n {
        piv = diag[k] - sub[k] * c[k - 1];
        if piv == 0.0 || !piv.is_finite() {
            return Err(FsiError::Solver("zero pivot in tridiagonal solve".into()));
        }
        if k + 1 < n {
            c[k] = sup[k] / piv;
        }
        let prev = rhs[k - 1];
        rhs[k] = (rhs[k] - prev * sub[k]) / piv;
    }
    for k in (0..n - 1).rev() {
        let next = rhs[k + 1];
        rhs[k] -= next * c[k];
    }
    Ok(())
}

pub fn zero3() -> C3 {
    [[ZERO; 3]; 3]
}

pub fn mat_mul(a: &C3, b: &C3) -> C3 {
    let mut c = zero3();
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

pub fn mat_vec(a: &C3, x: &V3) -> V3 {
    let mut y = [ZERO; 3];
    for i in 0..3 {
        y[i] = a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2];
    }
    y
}

/// Solve `m X = B` for three right-hand-side columns by Gaussian elimination
/// with partial pivoting.
pub fn solve3_multi<const K: usize>(m: &C3, b: &[V3; K]) -> Result<[V3; K]> {
    let mut a = *m;
    let mut x = *b;
    let scale = a.iter().flatten().fold(0.0_f64, |s, z| s.max(z.norm()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap_or(col);
        if a[piv][col].norm() <= 1e-300_f64.max(1e-15 * scale) {
            return Err(FsiError::Solver("singular 3x3 block".into()));
        }
        a.swap(col, piv);
        for rhs in x.iter_mut() {
            rhs.swap(col, piv);
        }
        let inv = 1.0 / a[col][col];
        for row in col + 1..3 {
            let f = a[row][col] * inv;
            if f == ZERO {
                continue;
            }
            for c in col..3 {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
            for rhs in x.iter_mut() {
                let v = rhs[col];
                rhs[row] -= f * v;
            }
        }
    }
    for rhs in x.iter_mut() {
        for row in (0..3).rev() {
            let mut s = rhs[row];
            for c in row + 1..3 {
                s -= a[row][c] * rhs[c];
            }
            rhs[row] = s / a[row][row];
        }
    }
    Ok(x)
}

pub fn solve3(m: &C3, b: &V3) -> Result<V3> {
    Ok(solve3_multi(m, &[*b])?[0])
}

fn columns(m: &C3) -> [V3; 3] {
    [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]]
}

fn from_columns(c: &[V3; 3]) -> C3 {
    let mut m = zero3();
    for (j, col) in c.iter().enumerate() {
        for i in 0..3 {
            m[i][j] = col[i];
        }
    }
    m
}

/// Block Thomas algorithm for a block-tridiagonal system with 3×3 blocks.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_block_tridiagonal(lower: &[C3], diag: &[C3], upper: &[C3], rhs: &mut [V3]) -> Result<()> {
    let n = diag.len();
    let mut cp: Vec<C3> = Vec::with_capacity(n);
    let mut m = diag[0];
    for k in 0..n {
        if k > 0 {
            let lc = mat_mul(&lower[k], &cp[k - 1]);
            m = diag[k];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] -= lc[i][j];
                }
            }
            let ld = mat_vec(&lower[k], &rhs[k - 1]);
            for i in 0..3 {
                rhs[k][i] -= ld[i];
            }
        }
        if k + 1 < n {
            let sol = solve3_multi(&m, &[rhs[k], columns(&upper[k])[0], columns(&upper[k])[1], columns(&upper[k])[2]])?;
            rhs[k] = sol[0];
            cp.push(from_columns(&[sol[1], sol[2], sol[3]]));
        } else {
            rhs[k] = solve3(&m, &rhs[k])?;
        }
    }
    for k in (0..n - 1).rev() {
        let cx = mat_vec(&cp[k], &rhs[k + 1]);
        for i in 0..3 {
            rhs[k][i] -= cx[i];
        }
    }
    Ok(())
}
