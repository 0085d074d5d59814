//! Direct-summation evaluation of the discrete norms, independent of the FFT
//! code paths.

#![allow(dead_code)]

use std::f64::consts::PI;

use fsi_core::{Field, TimeTrack};
use num_complex::Complex64;

fn signed(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// `(|ξ|², coefficient per component)` of every mode, by direct sums over
/// the evenly reflected grid.
pub fn dense_coeffs(f: &Field) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let g = f.grid;
    let (n1, n2) = (g.n1, g.n2);
    let np = n1 * n2;
    let planar = g.is_plane() || g.nz == 1;
    let p = if planar { 1 } else { 2 * (g.nz - 1) };
    let scale = if planar { (g.cell_area() / np as f64).sqrt() } else { (g.cell_area() * g.dz / (2.0 * (np * p) as f64)).sqrt() };
    let level = |m: usize| if m < g.nz { m } else { p - m };
    let mut xi2 = Vec::with_capacity(p * np);
    let mut comps = vec![Vec::with_capacity(p * np); f.comps()];
    for c3 in 0..p {
        let k3 = if planar { 0.0 } else { 2.0 * PI * signed(c3, p) / (p as f64 * g.dz) };
        for a in 0..n1 {
            for b in 0..n2 {
                xi2.push(signed(a, n1).powi(2) + signed(b, n2).powi(2) + k3 * k3);
                for (c, out) in comps.iter_mut().enumerate() {
                    let data = f.comp(c);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in 0..p {
                        for i in 0..n1 {
                            for j in 0..n2 {
                                let phase = -2.0
                                    * PI
                                    * ((a * i) as f64 / n1 as f64 + (b * j) as f64 / n2 as f64 + (c3 * m) as f64 / p as f64);
                                acc += Complex64::from_polar(data[level(m) * np + i * n2 + j], phase);
                            }
                        }
                    }
                    out.push(acc * scale);
                }
            }
        }
    }
    (xi2, comps)
}

pub fn dense_sobolev_sq(f: &Field, s: f64) -> f64 {
    let (xi2, comps) = dense_coeffs(f);
    comps.iter().map(|c| c.iter().zip(&xi2).map(|(z, x)| (1.0 + x).powf(s) * z.norm_sqr()).sum::<f64>()).sum()
}

fn trapezoid(dt: f64, v: &[f64]) -> f64 {
    let n = v.len();
    dt * (v[1..n - 1].iter().sum::<f64>() + 0.5 * (v[0] + v[n - 1]))
}

pub fn dense_l2_time_hs(t: &TimeTrack, s: f64) -> f64 {
    let per: Vec<f64> = t.samples.iter().map(|f| dense_sobolev_sq(f, s)).collect();
    trapezoid(t.dt, &per).sqrt()
}

/// `(τ_m, E_m)` of the Hann-windowed, four-times zero-padded track with
/// spatial weight `(1 + |ξ|²)^s`.
pub fn dense_time_spectrum(t: &TimeTrack, s: f64) -> Vec<(f64, f64)> {
    let n = t.len();
    let p = 4 * n;
    let win: Vec<f64> =
        (0..n).map(|i| (8.0f64 / 3.0).sqrt() * 0.5 * (1.0 - (2.0 * PI * i as f64 / (n - 1) as f64).cos())).collect();
    let coeffs: Vec<(Vec<f64>, Vec<Vec<Complex64>>)> = t.samples.iter().map(dense_coeffs).collect();
    let xi2 = &coeffs[0].0;
    (0..p)
        .map(|m| {
            let mut e = 0.0;
            for c in 0..coeffs[0].1.len() {
                for (q, x) in xi2.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, (_, cc)) in coeffs.iter().enumerate() {
                        acc += cc[c][q] * win[k] * Complex64::from_polar(1.0, -2.0 * PI * (m * k) as f64 / p as f64);
                    }
                    e += (1.0 + x).powf(s) * acc.norm_sqr();
                }
            }
            (2.0 * PI * signed(m, p) / (p as f64 * t.dt), e * t.dt / p as f64)
        })
        .collect()
}

pub fn dense_spacetime(t: &TimeTrack, r: f64, s: f64) -> f64 {
    let time: f64 = if r == 0.0 {
        0.0
    } else {
        dense_time_spectrum(t, 0.0).iter().map(|(tau, e)| ((1.0 + tau * tau).powf(r) - 1.0) * e).sum()
    };
    (time + dense_l2_time_hs(t, s).powi(2)).sqrt()
}

pub fn dense_mixed(t: &TimeTrack, r: f64, s: f64) -> f64 {
    dense_time_spectrum(t, s).iter().map(|(tau, e)| (1.0 + tau * tau).powf(r) * e).sum::<f64>().sqrt()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
