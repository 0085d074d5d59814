//! In-plane Fourier transforms with per-length cached plans.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use parking_lot::RwLock;
use rustfft::{Fft, FftPlanner};

type PlanCache = RwLock<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

static PLANS: Lazy<PlanCache> = Lazy::new(|| RwLock::new(HashMap::new()));

pub fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    if let Some(p) = PLANS.read().get(&(len, inverse)) {
        return Arc::clone(p);
    }
    let mut planner = FftPlanner::new();
    let p = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
    PLANS.write().entry((len, inverse)).or_insert(p).clone()
}

/// Unnormalized in-place transform.
pub fn fft(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// Unnormalized 2D transform of an `n1 × n2` array stored row-major.
pub fn fft2_complex(buf: &mut [Complex64], n1: usize, n2: usize, inverse: bool) {
    let rows = plan(n2, inverse);
    for row in buf.chunks_exact_mut(n2) {
        rows.process(row);
    }
    let cols = plan(n1, inverse);
    let mut col = vec![Complex64::new(0.0, 0.0); n1];
    for j in 0..n2 {
        for i in 0..n1 {
            col[i] = buf[i * n2 + j];
        }
        cols.process(&mut col);
        for i in 0..n1 {
            buf[i * n2 + j] = col[i];
        }
    }
}

/// Forward (unnormalized) 2D transform of a real plane.
pub fn fft2(real: &[f64], n1: usize, n2: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft2_complex(&mut buf, n1, n2, false);
    buf
}

/// Inverse 2D transform normalized by `1/(n1 n2)`, keeping the real part.
pub fn ifft2_real(mut spec: Vec<Complex64>, n1: usize, n2: usize) -> Vec<f64> {
    fft2_complex(&mut spec, n1, n2, true);
    let s = 1.0 / (n1 * n2) as f64;
    spec.into_iter().map(|c| c.re * s).collect()
}

/// Signed wavenumber of FFT bin `i` of length `n`; the Nyquist bin maps to `n/2`.
pub fn wavenumber(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Wavenumber used for differentiation: the Nyquist bin is zeroed so that
/// derivatives of real fields stay real.
pub fn deriv_wavenumber(i: usize, n: usize) -> f64 {
    if n % 2 == 0 && i == n / 2 {
        0.0
    } else {
        wavenumber(i, n)
    }
}

/// Derivative wavenumbers `(k1, k2)` of every in-plane mode, row-major.
pub fn mode_wavenumbers(n1: usize, n2: usize) -> Vec<(f64, f64)> {
    (0..n1).flat_map(|i| (0..n2).map(move |j| (deriv_wavenumber(i, n1), deriv_wavenumber(j, n2)))).collect()
}

/// Per-level 2D transforms of every component: `out[c][k * n1 * n2 + q]`.
pub fn field_to_modes(f: &crate::field::Field) -> Vec<Vec<Complex64>> {
    let g = &f.grid;
    let np = g.plane_len();
    (0..f.comps())
        .map(|c| {
            let data = f.comp(c);
            let mut out = Vec::with_capacity(data.len());
            for k in 0..g.nz {
                out.extend(fft2(&data[k * np..(k + 1) * np], g.n1, g.n2));
            }
            out
        })
        .collect()
}

/// Inverse of [`field_to_modes`].
pub fn modes_to_field(
    grid: crate::geometry::SlabGrid,
    modes: Vec<Vec<Complex64>>,
) -> crate::error::Result<crate::field::Field> {
    let np = grid.plane_len();
    let comps = modes
        .into_iter()
        .map(|m| {
            let mut out = Vec::with_capacity(m.len());
            for level in m.chunks_exact(np) {
                out.extend(ifft2_real(level.to_vec(), grid.n1, grid.n2));
            }
            out
        })
        .collect();
    crate::field::Field::from_components(grid, comps)
}
