//! Discrete spatial and space-time Sobolev norms.
//!
//! Spatial norms extend a slab evenly across both vertical ends to a torus of
//! period `2 (nz - 1) dz`, take the full 3D DFT and weight every mode by
//! `(1 + |ξ|²)^s`. At `s = 0` this is exactly the trapezoid-in-`y3` grid
//! L² norm. Planes use the 2D DFT.
//!
//! Fractional time norms apply a Hann window (scaled to unit mean square) and
//! zero-pad to four times the track length before the temporal DFT.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::field::{Field, Pair, TimeTrack};
use crate::spectral::{fft, fft2, wavenumber};

/// Recorded with every report that contains a fractional time norm.
pub const WINDOW_DESCRIPTION: &str = "hann window scaled by sqrt(8/3), zero-padded to 4x track length";

const ZERO_PAD: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeOrder {
    pub r: f64,
    pub s: f64,
}

impl SpaceTimeOrder {
    pub fn new(r: f64, s: f64) -> Result<Self> {
        check_order("time order r", r)?;
        check_order("space order s", s)?;
        Ok(SpaceTimeOrder { r, s })
    }

    /// Parabolic order `K^s = H^{s/2, s}`.
    pub fn k(s: f64) -> Result<Self> {
        SpaceTimeOrder::new(0.5 * s, s)
    }
}

fn check_order(name: &str, s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(FsiError::InvalidParameter(format!("{name} must be a finite nonnegative real, got {s}")));
    }
    Ok(())
}

/// Normalized spatial Fourier coefficients of every component, with
/// `Σ |c|² = ‖f‖²_{L²}` and `|ξ|²` per mode.
#[derive(Clone, Debug)]
pub struct SpectralCoeffs {
    pub xi2: Vec<f64>,
    pub comps: Vec<Vec<Complex64>>,
}

impl SpectralCoeffs {
    pub fn norm_sq(&self, s: f64) -> f64 {
        let weights = symbol_weights(&self.xi2, s);
        let mut acc = 0.0;
        for c in &self.comps {
            for (w, z) in weights.iter().zip(c) {
                acc += w * z.norm_sqr();
            }
        }
        acc
    }
}

fn symbol_weights(xi2: &[f64], s: f64) -> Vec<f64> {
    if s == 0.0 {
        vec![1.0; xi2.len()]
    } else {
        xi2.iter().map(|x| (1.0 + x).powf(s)).collect()
    }
}

/// `|ξ|²` for every mode of the (reflected) transform of a field on `grid`.
fn mode_symbols(f: &Field) -> Vec<f64> {
    let g = &f.grid;
    let (n1, n2) = (g.n1, g.n2);
    let inplane: Vec<f64> = (0..n1)
        .flat_map(|i| (0..n2).map(move |j| wavenumber(i, n1).powi(2) + wavenumber(j, n2).powi(2)))
        .collect();
    if g.is_plane() || g.nz == 1 {
        return inplane;
    }
    let p = 2 * (g.nz - 1);
    let base = 2.0 * std::f64::consts::PI / (p as f64 * g.dz);
    let mut out = Vec::with_capacity(p * inplane.len());
    for m in 0..p {
        let k3 = base * wavenumber(m, p);
        out.extend(inplane.iter().map(|x| x + k3 * k3));
    }
    out
}

pub fn spectral_coefficients(f: &Field) -> SpectralCoeffs {
    let g = &f.grid;
    let (n1, n2) = (g.n1, g.n2);
    let np = n1 * n2;
    let xi2 = mode_symbols(f);
    let comps = (0..f.comps())
        .map(|c| {
            let data = f.comp(c);
            if g.is_plane() || g.nz == 1 {
                let scale = (g.cell_area() / np as f64).sqrt();
                return fft2(&data[..np], n1, n2).into_iter().map(|z| z * scale).collect();
            }
            let nz = g.nz;
            let p = 2 * (nz - 1);
            let levels: Vec<Vec<Complex64>> = (0..nz).map(|k| fft2(&data[k * np..(k + 1) * np], n1, n2)).collect();
            let mut out = vec![Complex64::new(0.0, 0.0); p * np];
            let mut col = vec![Complex64::new(0.0, 0.0); p];
            let scale = (g.cell_area() * g.dz / (2.0 * (np * p) as f64)).sqrt();
            for q in 0..np {
                for (m, slot) in col.iter_mut().enumerate() {
                    let k = if m < nz { m } else { p - m };
                    *slot = levels[k][q];
                }
                fft(&mut col, false);
                for (m, z) in col.iter().enumerate() {
                    out[m * np + q] = z * scale;
                }
            }
            out
        })
        .collect();
    SpectralCoeffs { xi2, comps }
}

pub fn sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    check_order("Sobolev order s", s)?;
    Ok(spectral_coefficients(f).norm_sq(s).sqrt())
}

/// Trapezoid-in-`y3`, rectangle-in-plane L² norm.
pub fn grid_l2_norm(f: &Field) -> f64 {
    let g = &f.grid;
    let np = g.plane_len();
    let n = f.npts();
    let mut acc = 0.0;
    for c in 0..f.comps() {
        for k in 0..g.nz {
            let w = g.z_weight(k);
            let row = &f.data[c * n + k * np..c * n + (k + 1) * np];
            acc += w * row.iter().map(|v| v * v).sum::<f64>();
        }
    }
    (acc * g.cell_area()).sqrt()
}

fn check_track(track: &TimeTrack) -> Result<()> {
    if track.len() < 4 {
        return Err(FsiError::Shape(format!("space-time norms need at least 4 samples, got {}", track.len())));
    }
    Ok(())
}

fn trapezoid(dt: f64, values: &[f64]) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    dt * (inner + 0.5 * (values[0] + values[n - 1]))
}

fn hann(n: usize) -> Vec<f64> {
    let scale = (8.0_f64 / 3.0).sqrt();
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| scale * 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / denom).cos()))
        .collect()
}

/// Per-sample spectral coefficients, computed in parallel and kept in order.
fn track_coefficients(track: &TimeTrack) -> Vec<SpectralCoeffs> {
    track.samples.par_iter().map(spectral_coefficients).collect()
}

/// Windowed temporal spectrum: pairs `(τ_m, E_m)` with
/// `E_m = dt / P · Σ_modes (1 + |ξ|²)^s |Ĉ_m|²`.
fn time_spectrum(coeffs: &[SpectralCoeffs], dt: f64, s: f64) -> Vec<(f64, f64)> {
    let n = coeffs.len();
    let p = ZERO_PAD * n;
    let window = hann(n);
    let weights = symbol_weights(&coeffs[0].xi2, s);
    let mut energy = vec![0.0; p];
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    for c in 0..coeffs[0].comps.len() {
        for (q, w) in weights.iter().enumerate() {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (t, sc) in coeffs.iter().enumerate() {
                buf[t] = sc.comps[c][q] * window[t];
            }
            fft(&mut buf, false);
            for (e, z) in energy.iter_mut().zip(&buf) {
                *e += w * z.norm_sqr();
            }
        }
    }
    let base = 2.0 * std::f64::consts::PI / (p as f64 * dt);
    energy
        .into_iter()
        .enumerate()
        .map(|(m, e)| (base * wavenumber(m, p), e * dt / p as f64))
        .collect()
}

/// `‖track‖_{L²_t H^s_x}` by the trapezoid rule in time.
pub fn l2_time_hs(track: &TimeTrack, s: f64) -> Result<f64> {
    check_order("space order s", s)?;
    let per: Vec<f64> = track.samples.par_iter().map(|f| spectral_coefficients(f).norm_sq(s)).collect();
    Ok(trapezoid(track.dt, &per).sqrt())
}

/// Windowed norm with the product symbol `(1 + τ²)^r (1 + |ξ|²)^s`.
pub fn mixed_norm(track: &TimeTrack, r: f64, s: f64) -> Result<f64> {
    let order = SpaceTimeOrder::new(r, s)?;
    check_track(track)?;
    let spec = time_spectrum(&track_coefficients(track), track.dt, order.s);
    Ok(spec.iter().map(|(tau, e)| (1.0 + tau * tau).powf(order.r) * e).sum::<f64>().sqrt())
}

/// `H^{r,s}` norm: windowed time part with symbol `(1 + τ²)^r − 1` plus the
/// full `L²_t H^s_x` part, so that `(0, 0)` is the plain space-time L² norm.
pub fn spacetime_norm(track: &TimeTrack, order: SpaceTimeOrder) -> Result<f64> {
    SpaceTimeOrder::new(order.r, order.s)?;
    check_track(track)?;
    let coeffs = track_coefficients(track);
    let per: Vec<f64> = coeffs.iter().map(|c| c.norm_sq(order.s)).collect();
    let space = trapezoid(track.dt, &per);
    let time = if order.r == 0.0 {
        0.0
    } else {
        time_spectrum(&coeffs, track.dt, 0.0)
            .iter()
            .map(|(tau, e)| ((1.0 + tau * tau).powf(order.r) - 1.0) * e)
            .sum::<f64>()
    };
    Ok((time + space).sqrt())
}

/// `K^s = H^{s/2, s}`.
pub fn k_norm(track: &TimeTrack, s: f64) -> Result<f64> {
    spacetime_norm(track, SpaceTimeOrder::k(s)?)
}

/// Plain L²((0,T) × Ω) quadrature norm of a track.
pub fn l2_spacetime_quadrature(track: &TimeTrack) -> f64 {
    let per: Vec<f64> = track.samples.iter().map(|f| grid_l2_norm(f).powi(2)).collect();
    trapezoid(track.dt, &per).sqrt()
}

fn combine(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

pub fn pair_sobolev_norm(f: &Pair<Field>, s: f64) -> Result<f64> {
    Ok(combine(sobolev_norm(&f.lower, s)?, sobolev_norm(&f.upper, s)?))
}

pub fn pair_spacetime_norm(t: &Pair<TimeTrack>, order: SpaceTimeOrder) -> Result<f64> {
    Ok(combine(spacetime_norm(&t.lower, order)?, spacetime_norm(&t.upper, order)?))
}

pub fn pair_k_norm(t: &Pair<TimeTrack>, s: f64) -> Result<f64> {
    Ok(combine(k_norm(&t.lower, s)?, k_norm(&t.upper, s)?))
}

pub fn pair_mixed_norm(t: &Pair<TimeTrack>, r: f64, s: f64) -> Result<f64> {
    Ok(combine(mixed_norm(&t.lower, r, s)?, mixed_norm(&t.upper, r, s)?))
}

pub fn pair_l2_time_hs(t: &Pair<TimeTrack>, s: f64) -> Result<f64> {
    Ok(combine(l2_time_hs(&t.lower, s)?, l2_time_hs(&t.upper, s)?))
}
