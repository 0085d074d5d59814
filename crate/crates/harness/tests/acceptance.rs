//! Acceptance checks 1 to 11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use fsi_core::fsi::terms::{boundary_terms, interior_terms, TermInputs};
use fsi_core::fsi::*;
use fsi_core::geometry::{build_geometry, ChannelGeometry, Domain, SlabGrid};
use fsi_core::inequality::*;
use fsi_core::kinematics::*;
use fsi_core::lame::Viscosities;
use fsi_core::wave::{run_wave, wave_energy};
use fsi_core::{Field, Pair, Rank, TimeTrack};
use fsi_harness::config::RunMode;
use fsi_harness::mms::{decay_suite, slope, spatial_study, temporal_study};
use fsi_harness::{run, RunConfig, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

type M3 = [[f64; 3]; 3];

fn mat_mul(a: &M3, b: &M3) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn mat_axpy(a: &M3, s: f64, b: &M3) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + s * b[i][j]))
}

const I3: M3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn lower(n: usize, m: usize) -> SlabGrid {
    build_geometry(1.0, 2.0, 3.0, n, n, m, 8, 8).unwrap().lower()
}

/// Low in-plane modes times quadratics in `y3`, with an analytic gradient.
struct SmoothVelocity {
    terms: Vec<(usize, [f64; 2], f64, [f64; 3])>,
}

impl SmoothVelocity {
    fn random(rng: &mut ChaCha8Rng, amp: f64) -> Self {
        let terms = (0..6)
            .map(|i| {
                (
                    i % 3,
                    [rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64],
                    rng.gen_range(0.0..std::f64::consts::TAU),
                    [amp * rng.gen_range(-1.0..1.0), amp * rng.gen_range(-1.0..1.0), amp * rng.gen_range(-1.0..1.0)],
                )
            })
            .collect();
        SmoothVelocity { terms }
    }

    fn value(&self, y: [f64; 3]) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (c, k, ph, q) in &self.terms {
            v[*c] += (k[0] * y[0] + k[1] * y[1] + ph).cos() * (q[0] + q[1] * y[2] + q[2] * y[2] * y[2]);
        }
        v
    }

    /// `G[j][m] = ∂_m v_j`
    fn gradient(&self, y: [f64; 3]) -> M3 {
        let mut g = [[0.0; 3]; 3];
        for (c, k, ph, q) in &self.terms {
            let arg = k[0] * y[0] + k[1] * y[1] + ph;
            let z = q[0] + q[1] * y[2] + q[2] * y[2] * y[2];
            g[*c][0] -= k[0] * arg.sin() * z;
            g[*c][1] -= k[1] * arg.sin() * z;
            g[*c][2] += arg.cos() * (q[1] + 2.0 * q[2] * y[2]);
        }
        g
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = lower(8, 8);
    let (dt, steps) = (1e-3, 200);
    let mut worst = 0.0_f64;
    for f in [|y: [f64; 3]| [0.7 * y[2], 0.0, 0.0], |y: [f64; 3]| [0.0, 0.0, -0.8 * y[2]]] {
        let track = TimeTrack::constant(&Field::vector_from_fn(g, f), dt, steps).unwrap();
        let k = kinematics(&track).unwrap();
        let rep = kinematic_consistency(&k.eta, &k.a, &k.j).unwrap();
        worst = worst.max(rep.inverse_residual).max(rep.jacobian_residual);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let v = SmoothVelocity::random(&mut rng, 0.3);
    let window = 0.4;
    let (mut dts, mut inv, mut jac) = (Vec::new(), Vec::new(), Vec::new());
    for level in 0..4 {
        let steps = 4 << level;
        let dt = window / steps as f64;
        let g = lower(8, 4 << level);
        let track = TimeTrack::from_fn(dt, steps, |t| {
            let f = (2.0 * t).sin() + 0.5;
            Field::vector_from_fn(g, |y| v.value(y).map(|x| x * f))
        })
        .unwrap();
        let k = kinematics(&track).unwrap();
        let rep = kinematic_consistency(&k.eta, &k.a, &k.j).unwrap();
        dts.push(dt);
        inv.push(rep.inverse_residual);
        jac.push(rep.jacobian_residual);
    }
    let (pi, pj) = (slope(&dts, &inv), slope(&dts, &jac));
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-8 && pi >= 2.0 && pj >= 2.0 && secs < 10.0,
        format!("steady max residual {worst:.2e} (<= 1e-8); order a*grad(eta)-I {pi:.3}, J-det {pj:.3} (>= 2); {secs:.1} s (< 10 s)"),
    )
}

/// RK4 of `a' = −a G a`, `R' = R tr(a G)` with `substeps` per sample.
fn density_oracle(g: &M3, r0: f64, dt: f64, steps: usize, substeps: usize) -> Vec<f64> {
    let h = dt / substeps as f64;
    let f = |a: &M3, r: f64| {
        let ag = mat_mul(a, g);
        let da = mat_mul(&ag, a).map(|row| row.map(|x| -x));
        (da, r * (ag[0][0] + ag[1][1] + ag[2][2]))
    };
    let (mut a, mut r) = (I3, r0);
    let mut out = vec![r];
    for _ in 0..steps {
        for _ in 0..substeps {
            let (ka1, kr1) = f(&a, r);
            let (ka2, kr2) = f(&mat_axpy(&a, 0.5 * h, &ka1), r + 0.5 * h * kr1);
            let (ka3, kr3) = f(&mat_axpy(&a, 0.5 * h, &ka2), r + 0.5 * h * kr2);
            let (ka4, kr4) = f(&mat_axpy(&a, h, &ka3), r + h * kr3);
            let sum: M3 = std::array::from_fn(|i| std::array::from_fn(|j| ka1[i][j] + 2.0 * ka2[i][j] + 2.0 * ka3[i][j] + ka4[i][j]));
            a = mat_axpy(&a, h / 6.0, &sum);
            r += h / 6.0 * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4);
        }
        out.push(r);
    }
    out
}

fn criterion_2() -> Outcome {
    let g = lower(8, 8);
    let (dt, steps) = (2.5e-4, 400);
    let mut worst_pi = 0.0_f64;
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = SmoothVelocity::random(&mut rng, 0.4);
        let track = TimeTrack::constant(&Field::vector_from_fn(g, |y| v.value(y)), dt, steps).unwrap();
        let r0 = Field::scalar_from_fn(g, |y| 1.0 + 0.3 * (y[0] + y[1]).sin() * y[2]);
        let a = integrate_inverse_gradient(&track).unwrap();
        let r = density_closed_form(&r0, &track, Some(&a)).unwrap();
        for (p, y) in g.points().enumerate() {
            let want = density_oracle(&v.gradient(y), r0.data[p], dt, steps, 4);
            for (n, w) in want.iter().enumerate() {
                worst_pi = worst_pi.max((r.samples[n].data[p] - w).abs());
            }
        }
    }
    let alpha = 0.9;
    let track = TimeTrack::constant(&Field::vector_from_fn(g, |y| [0.0, 0.0, -alpha * y[2]]), 0.01, 50).unwrap();
    let r0 = Field::scalar_from_fn(g, |y| 1.0 + 0.2 * y[0].cos());
    let r = density_closed_form(&r0, &track, None).unwrap();
    let mut worst_lambda = 0.0_f64;
    for (n, s) in r.samples.iter().enumerate() {
        let decay = (-alpha * 0.01 * n as f64).exp();
        for (x, x0) in s.data.iter().zip(&r0.data) {
            worst_lambda = worst_lambda.max((x - x0 * decay).abs());
        }
    }
    check(
        worst_pi <= 1e-8 && worst_lambda <= 1e-12,
        format!("pi vs RK4 {worst_pi:.2e} (<= 1e-8); lambda vs R0 exp(-at) {worst_lambda:.2e} (<= 1e-12)"),
    )
}

fn wave_geometry(m: usize) -> ChannelGeometry {
    build_geometry(1.0, 2.0, 3.0, 4, 4, 8, 8, m).unwrap()
}

fn zero_psi(g: &ChannelGeometry, dt: f64, steps: usize) -> Pair<TimeTrack> {
    let (lo, up) = g.interface_planes();
    Pair::new(
        TimeTrack::constant(&Field::zeros(lo, Rank::Vector), dt, steps).unwrap(),
        TimeTrack::constant(&Field::zeros(up, Rank::Vector), dt, steps).unwrap(),
    )
}

fn eigenmode(g: &ChannelGeometry, k: f64, k1: f64, k2: f64, comp: usize) -> Field {
    let d = g.l2 - g.l1;
    Field::vector_from_fn(g.elastic(), |y| {
        let mut v = [0.0; 3];
        v[comp] = (k * PI * (y[2] - g.l1) / d).sin() * (k1 * y[0] + k2 * y[1]).cos();
        v
    })
}

/// Angular frequency from a least-squares fit of zero-crossing times.
fn zero_crossing_frequency(values: &[f64], dt: f64) -> f64 {
    let mut times = Vec::new();
    for (n, w) in values.windows(2).enumerate() {
        if w[0] != 0.0 && w[0].signum() != w[1].signum() {
            times.push(dt * (n as f64 + w[0] / (w[0] - w[1])));
        }
    }
    let m = times.len() as f64;
    let mx = (m - 1.0) / 2.0;
    let my = times.iter().sum::<f64>() / m;
    let cov: f64 = times.iter().enumerate().map(|(i, t)| (i as f64 - mx) * (t - my)).sum();
    let var: f64 = (0..times.len()).map(|i| (i as f64 - mx).powi(2)).sum();
    PI / (cov / var)
}

fn eigenmode_error(m: usize) -> f64 {
    let g = wave_geometry(m);
    let omega = PI / (g.l2 - g.l1);
    let dt = 2.0 * PI / omega / (100 * m / 16) as f64;
    let steps = 300 * m / 16;
    let w0 = eigenmode(&g, 1.0, 0.0, 0.0, 0);
    let z = Field::zeros(g.elastic(), Rank::Vector);
    let run = run_wave(&w0, &z, &zero_psi(&g, dt, steps)).unwrap();
    let probe = m / 2 * 16;
    let values: Vec<f64> = run.states.iter().map(|s| s.w.data[probe]).collect();
    (zero_crossing_frequency(&values, dt) / omega - 1.0).abs()
}

fn criterion_3() -> Outcome {
    let errs: Vec<f64> = [8, 16, 32].iter().map(|&m| eigenmode_error(m)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    let g = wave_geometry(16);
    let omega = PI / (g.l2 - g.l1);
    let dt = 2.0 * PI / omega / 100.0;
    let mut w0 = eigenmode(&g, 1.0, 0.0, 0.0, 0);
    w0.axpy(0.5, &eigenmode(&g, 3.0, 1.0, -1.0, 2));
    let w1 = Field::vector_from_fn(g.elastic(), |y| {
        let s = ((y[2] - g.l1) * PI).sin();
        [0.0, s * y[0].cos(), 0.3 * s * (2.0 * y[1]).sin()]
    });
    let run = run_wave(&w0, &w1, &zero_psi(&g, dt, 1000)).unwrap();
    let e0 = wave_energy(&run.states[0]);
    let drift = run.states.iter().map(|s| (wave_energy(s) - e0).abs()).fold(0.0, f64::max) / e0;
    check(
        errs[1] <= 0.02 && orders.iter().all(|&p| p > 1.8 && p < 2.3) && drift <= 1e-10,
        format!(
            "frequency error {:.3}% at 16 points (<= 2%); orders {:.3}, {:.3} (~2); energy drift {drift:.2e} over 10 periods (<= 1e-10)",
            100.0 * errs[1],
            orders[0],
            orders[1]
        ),
    )
}

fn criterion_4() -> Outcome {
    let geo = build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8).unwrap();
    let visc = Viscosities::new(1.0, 0.5).unwrap();
    let space = spatial_study(&geo, visc, &[8, 16, 32, 64]).unwrap();
    let time = temporal_study(&geo, visc, 0.5, &[10, 20, 40, 80]).unwrap();
    let decay = decay_suite(&geo, 50, 2024).unwrap();
    let violations: usize = decay.iter().map(|d| d.violations).sum();
    let (ps, pt) = (space.fitted_order, time.fitted_order);
    check(
        ps >= 1.95 && (pt - 1.0).abs() <= 0.1 && violations == 0 && decay.len() == 50,
        format!("spatial order {ps:.3} (>= 1.95); temporal order {pt:.3} (1 +- 0.1); L2 growth in {violations} steps over 50 runs (0)"),
    )
}

/// Direct O(n²) spectral derivative along one in-plane axis, Nyquist zeroed.
fn dft_derivative(g: &SlabGrid, u: &[f64], axis: usize) -> Vec<f64> {
    let (n1, n2) = (g.n1, g.n2);
    let n = if axis == 0 { n1 } else { n2 };
    let wave = |m: usize| -> f64 {
        if 2 * m == n {
            0.0
        } else if 2 * m < n {
            m as f64
        } else {
            m as f64 - n as f64
        }
    };
    let mut out = vec![0.0; u.len()];
    for k in 0..g.nz {
        for a in 0..(if axis == 0 { n2 } else { n1 }) {
            let idx = |t: usize| if axis == 0 { g.index(k, t, a) } else { g.index(k, a, t) };
            for x in 0..n {
                let yx = 2.0 * PI * x as f64 / n as f64;
                let mut acc = 0.0;
                for m in 0..n {
                    let km = wave(m);
                    let (mut re, mut im) = (0.0, 0.0);
                    for t in 0..n {
                        let yt = 2.0 * PI * t as f64 / n as f64;
                        re += u[idx(t)] * (km * yt).cos();
                        im -= u[idx(t)] * (km * yt).sin();
                    }
                    let (c, s) = ((km * yx).cos(), (km * yx).sin());
                    acc += km * (-(im * c) - re * s);
                }
                out[idx(x)] = acc / n as f64;
            }
        }
    }
    out
}

fn fd_vertical(g: &SlabGrid, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    let h = g.dz;
    let top = g.nz - 1;
    for i in 0..g.n1 {
        for j in 0..g.n2 {
            let f = |k: usize| u[g.index(k, i, j)];
            out[g.index(0, i, j)] = (-1.5 * f(0) + 2.0 * f(1) - 0.5 * f(2)) / h;
            for k in 1..top {
                out[g.index(k, i, j)] = 0.5 * (f(k + 1) - f(k - 1)) / h;
            }
            out[g.index(top, i, j)] = (1.5 * f(top) - 2.0 * f(top - 1) + 0.5 * f(top - 2)) / h;
        }
    }
    out
}

fn d(g: &SlabGrid, u: &[f64], axis: usize) -> Vec<f64> {
    if axis == 2 {
        fd_vertical(g, u)
    } else {
        dft_derivative(g, u, axis)
    }
}

struct TermSample {
    grid: SlabGrid,
    v: [Vec<f64>; 3],
    b: [[Vec<f64>; 3]; 3],
    j: Vec<f64>,
    r: Vec<f64>,
}

fn term_sample(rng: &mut ChaCha8Rng, domain: Domain) -> TermSample {
    let geo = build_geometry(1.0, 1.7, 2.6, 6, 8, 6, 6, 6).unwrap();
    let grid = geo.slab(domain).unwrap();
    let n = grid.len();
    let mut field = |amp: f64, base: f64| -> Vec<f64> { (0..n).map(|_| base + amp * rng.gen_range(-1.0..1.0)).collect() };
    let v = [field(0.3, 0.0), field(0.3, 0.0), field(0.3, 0.0)];
    let b = std::array::from_fn(|_| std::array::from_fn(|_| field(0.05, 0.0)));
    let j = field(0.05, 1.0);
    let r = field(0.2, 1.0);
    TermSample { grid, v, b, j, r }
}

type Terms = Vec<[Vec<f64>; 3]>;

/// Every I and K term from the index formulas, point by point.
fn term_oracle(s: &TermSample, lam: f64, mu: f64) -> (Terms, Terms) {
    let g = &s.grid;
    let n = g.len();
    let gv: Vec<Vec<Vec<f64>>> = (0..3).map(|j| (0..3).map(|m| d(g, &s.v[j], m)).collect()).collect();
    let mut sm = vec![vec![vec![0.0; n]; 3]; 3];
    let mut em = vec![vec![vec![0.0; n]; 3]; 3];
    let mut dd = vec![0.0; n];
    let mut div = vec![0.0; n];
    for p in 0..n {
        for j in 0..3 {
            for k in 0..3 {
                let mut acc = 0.0;
                for m in 0..3 {
                    acc += s.b[m][k][p] * gv[j][m][p] + s.b[m][j][p] * gv[k][m][p];
                }
                sm[j][k][p] = acc;
                em[j][k][p] = gv[j][k][p] + gv[k][j][p];
            }
            for m in 0..3 {
                dd[p] += s.b[m][j][p] * gv[j][m][p];
            }
            div[p] += gv[j][j][p];
        }
    }
    let dsm: Vec<Vec<Vec<Vec<f64>>>> =
        (0..3).map(|j| (0..3).map(|l| (0..3).map(|k| d(g, &sm[j][l], k)).collect()).collect()).collect();
    let dem: Vec<Vec<Vec<Vec<f64>>>> =
        (0..3).map(|j| (0..3).map(|l| (0..3).map(|k| d(g, &em[j][l], k)).collect()).collect()).collect();
    let ddd: Vec<Vec<f64>> = (0..3).map(|k| d(g, &dd, k)).collect();
    let ddiv: Vec<Vec<f64>> = (0..3).map(|k| d(g, &div, k)).collect();
    let rinv: Vec<f64> = s.r.iter().map(|x| 1.0 / x).collect();
    let drinv: Vec<Vec<f64>> = (0..3).map(|k| d(g, &rinv, k)).collect();

    let mut it: Terms = (0..8).map(|_| std::array::from_fn(|_| vec![0.0; n])).collect();
    for p in 0..n {
        let r = s.r[p];
        for j in 0..3 {
            for k in 0..3 {
                it[0][j][p] += lam * r * dsm[j][k][k][p];
                for l in 0..3 {
                    it[1][j][p] += lam * r * s.b[k][l][p] * dsm[j][l][k][p];
                    it[2][j][p] += lam * r * s.b[k][l][p] * dem[j][l][k][p];
                }
                it[4][j][p] += mu * r * s.b[k][j][p] * ddd[k][p];
                it[5][j][p] += mu * r * s.b[k][j][p] * ddiv[k][p];
                it[6][j][p] -= r * s.b[k][j][p] * drinv[k][p];
            }
            it[3][j][p] = mu * r * ddd[j][p];
            it[7][j][p] = -r * drinv[j][p];
        }
    }

    let (level, nu) = match g.domain {
        Domain::FluidLower => (g.nz - 1, -1.0),
        _ => (0, 1.0),
    };
    let np = g.plane_len();
    let nuv = [0.0, 0.0, nu];
    let mut kt: Terms = (0..11).map(|_| std::array::from_fn(|_| vec![0.0; np])).collect();
    for q in 0..np {
        let p = level * np + q;
        let (jj, ri) = (s.j[p], rinv[p]);
        for j in 0..3 {
            for k in 0..3 {
                let nk = nuv[k];
                kt[0][j][q] += lam * (1.0 - jj) * em[j][k][p] * nk;
                kt[3][j][q] += jj * s.b[k][j][p] * ri * nk;
                kt[5][j][q] -= lam * jj * sm[j][k][p] * nk;
                kt[7][j][q] -= mu * jj * s.b[k][j][p] * dd[p] * nk;
                kt[9][j][q] -= mu * jj * s.b[k][j][p] * div[p] * nk;
                for l in 0..3 {
                    kt[2][j][q] -= lam * jj * s.b[k][l][p] * sm[j][l][p] * nk;
                    kt[6][j][q] -= lam * jj * s.b[k][l][p] * em[j][l][p] * nk;
                }
            }
            kt[1][j][q] = mu * (1.0 - jj) * div[p] * nuv[j];
            kt[4][j][q] = (jj - 1.0) * ri * nuv[j];
            kt[8][j][q] = -mu * jj * dd[p] * nuv[j];
            kt[10][j][q] = ri * nuv[j];
        }
    }
    (it, kt)
}

fn worst_term_error(fields: &[Field], oracle: &Terms, worst: &mut [f64]) {
    for (t, (f, o)) in fields.iter().zip(oracle).enumerate() {
        for c in 0..3 {
            for (a, e) in f.comp(c).iter().zip(&o[c]) {
                worst[t] = worst[t].max((a - e).abs());
            }
        }
    }
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let visc = Viscosities::new(1.3, 0.7).unwrap();
    let mut worst_i = [0.0_f64; 8];
    let mut worst_k = [0.0_f64; 11];
    for case in 0..20 {
        let domain = if case % 2 == 0 { Domain::FluidLower } else { Domain::FluidUpper };
        let s = term_sample(&mut rng, domain);
        let g = s.grid;
        let v = Field::from_components(g, s.v.to_vec()).unwrap();
        let b = Field::from_components(g, s.b.iter().flat_map(|row| row.iter().cloned()).collect()).unwrap();
        let j = Field::from_data(g, Rank::Scalar, s.j.clone()).unwrap();
        let r = Field::from_data(g, Rank::Scalar, s.r.clone()).unwrap();
        let inp = TermInputs { vbar: &v, b: &b, j: &j, r: &r, visc };
        let (oi, ok) = term_oracle(&s, visc.lambda, visc.mu);
        worst_term_error(&interior_terms(&inp).unwrap(), &oi, &mut worst_i);
        worst_term_error(&boundary_terms(&inp).unwrap(), &ok, &mut worst_k);
    }
    let wi = worst_i.iter().cloned().fold(0.0, f64::max);
    let wk = worst_k.iter().cloned().fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    check(
        wi <= 1e-10 && wk <= 1e-10 && secs < 30.0,
        format!("max |I1..I8 - oracle| {wi:.2e}, max |K1..K11 - oracle| {wk:.2e} over 20 instances (<= 1e-10); {secs:.1} s (< 30 s)"),
    )
}

fn fsi_geometry() -> ChannelGeometry {
    build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8).unwrap()
}

fn small_data() -> FsiData {
    let g = fsi_geometry();
    let visc = Viscosities::new(1.0, 0.5).unwrap();
    let (v0, w1, r0) = crafted_compatible_triple(&g, visc, 0.05).unwrap();
    FsiData::new(g, visc, v0, r0, w1, ExternalLoads::zero(&g)).unwrap()
}

fn window_cfg(t: f64) -> IterationConfig {
    IterationConfig { t_final: t, dt: t / 8.0, ..Default::default() }
}

fn identity_kinematics(v: &TimeTrack) -> KinematicTrack {
    let g = v.grid();
    let n = v.steps();
    let zero_b = Field::zeros(g, Rank::Tensor);
    let a = Field::tensor_from_fn(g, |_| I3);
    KinematicTrack {
        eta: FlowMap { displacement: TimeTrack::constant(&Field::zeros(g, Rank::Vector), v.dt, n).unwrap() },
        a: TimeTrack::constant(&a, v.dt, n).unwrap(),
        b: TimeTrack::constant(&zero_b, v.dt, n).unwrap(),
        j: TimeTrack::constant(&Field::constant(g, 1.0), v.dt, n).unwrap(),
    }
}

fn criterion_6() -> Outcome {
    let data = small_data();
    let c = window_cfg(0.1);
    let mut worst = 0.0_f64;
    let mut size = f64::INFINITY;
    for shape in [0, 1] {
        let v = perturbed_iterate(&c, &data, 0.02, shape).unwrap();
        let lam = lambda_step(&c, &data, &v).unwrap();
        let kin = Pair::new(identity_kinematics(&v.lower), identity_kinematics(&v.upper));
        let pi = pi_step_with_kinematics(&c, &data, &v, kin).unwrap();
        for (a, b) in lam.vbar.iter().zip(pi.vbar.iter()) {
            worst = worst.max(a.sub(b).unwrap().max_abs());
            size = size.min(a.max_abs());
        }
    }
    check(worst <= 1e-12 && size > 1e-3, format!("sup |pi - lambda| with b = 0, J = 1: {worst:.2e} (<= 1e-12)"))
}

fn criterion_7() -> Outcome {
    let data = small_data();
    let mut parts = Vec::new();
    let mut ok = true;
    for mode in [Mode::Lambda, Mode::Pi] {
        let tab = contraction_study(mode, &window_cfg(0.1), &data, &[0.2, 0.1, 0.05], 0.01).unwrap();
        let factors: Vec<f64> = tab.rows.iter().map(|r| r.factor.unwrap_or(f64::NAN)).collect();
        ok &= tab.strictly_decreasing && factors.iter().all(|&f| f < 1.0);
        let c = window_cfg(0.05);
        let (_, rep) = run_fixed_point(mode, &c, &data, false).unwrap();
        let interior = rep.residuals.map_or(f64::INFINITY, |r| r.interior());
        ok &= rep.converged && interior <= 10.0 * c.tol;
        parts.push(format!(
            "{mode:?} factors {:.3}/{:.3}/{:.3} at T0 = 0.2, 0.1, 0.05 (< 1, decreasing), interior residual {interior:.2e} (<= {:.0e})",
            factors[0],
            factors[1],
            factors[2],
            10.0 * c.tol
        ));
    }
    check(ok, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let rows = symbol_suite(&shipped_symbol_matrix(), 100).unwrap();
    let violations: usize = rows.iter().map(|r| r.check.violations).sum();
    let points = rows.iter().map(|r| r.check.points).min().unwrap_or(0);
    let halved_min = rows.iter().map(|r| r.halved.violations).min().unwrap_or(0);
    check(
        violations == 0 && points == 10_000 && halved_min > 0,
        format!("{} tuples: {violations} violations on {points} held-out points each (0); halved C_eps fewest violations {halved_min} (> 0)", rows.len()),
    )
}

fn criterion_9() -> Outcome {
    let p = TraceParams::new(1.0, 0.5).unwrap();
    let geo = |n: usize| build_geometry(1.0, 2.0, 3.0, n, n, n, n, n).unwrap();
    let coarse = trace_suite(geo(8).lower(), 0.5, 16, 100, 11, p).unwrap();
    let fine = trace_suite(geo(16).lower(), 0.5, 32, 100, 11, p).unwrap();
    let (a, b) = (coarse.max_ratio.unwrap_or(f64::NAN), fine.max_ratio.unwrap_or(f64::NAN));
    let change = b / a - 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = geo(8).lower();
    let mut scaling = 0.0_f64;
    for _ in 0..5 {
        let u = BandLimited::random(&mut rng, 3).track(g, 0.5, 16).unwrap();
        let base = verify_trace_inequality(&u, p).unwrap().ratio.unwrap();
        for c in [-3.0, 1e-4, 250.0] {
            let r = verify_trace_inequality(&u.scaled(c), p).unwrap().ratio.unwrap();
            scaling = scaling.max((r / base - 1.0).abs());
        }
    }
    check(
        a.is_finite() && b.is_finite() && change.abs() <= 0.2 && scaling <= 1e-10,
        format!("max ratio {a:.4} -> {b:.4} under refinement ({:+.2}%, within 20%); scaling defect {scaling:.2e} (<= 1e-10)", 100.0 * change),
    )
}

fn criterion_10() -> Outcome {
    let g = fsi_geometry();
    let visc = Viscosities::new(1.3, 0.6).unwrap();
    let none = InitialLoads { f: None, h: None };
    let run = |v0: &Pair<Field>, w1: &Field, r0: &Pair<Field>| {
        check_compatibility(v0, w1, r0, visc, none, CompatThresholds::default()).unwrap()
    };
    let (v0, w1, r0) = crafted_compatible_triple(&g, visc, 0.05).unwrap();
    let base = run(&v0, &w1, &r0);
    let clean = base.residuals.iter().cloned().fold(0.0, f64::max);

    let mut cases = Vec::new();
    let d0 = 0.02;
    let w1b = &w1 + &Field::vector_from_fn(g.elastic(), |y| [0.0, d0 * y[0].cos(), 0.0]);
    cases.push((0, d0, run(&v0, &w1b, &r0)));

    let d1 = 3e-3;
    let mut v0b = v0.clone();
    v0b.lower = &v0.lower + &Field::vector_from_fn(g.lower(), |_| [0.0, d1, 0.0]);
    let w1c = &w1 + &Field::vector_from_fn(g.elastic(), |y| [0.0, d1 * (g.l2 - y[2]) / (g.l2 - g.l1), 0.0]);
    cases.push((1, d1, run(&v0b, &w1c, &r0)));

    let d2 = 0.07;
    let mut r0b = r0.clone();
    r0b.upper = r0.upper.map(|r| 1.0 / (1.0 / r + d2));
    cases.push((2, d2, run(&v0, &w1, &r0b)));

    let d3 = 0.04;
    let lo = g.lower();
    let bump = Field::scalar_from_fn(lo, |y| if y[2] <= 2.0 * lo.dz + 1e-12 { d3 * y[0].sin() } else { 0.0 });
    let mut r0c = r0.clone();
    r0c.lower = (&r0.lower.map(|r| 1.0 / r) + &bump).map(|x| 1.0 / x);
    cases.push((3, d3, run(&v0, &w1, &r0c)));

    let mut ok = base.all_passed() && clean <= 1e-10;
    let mut parts = vec![format!("crafted triple max residual {clean:.2e} (<= 1e-10)")];
    for (which, injected, rep) in cases {
        let rel = (rep.residuals[which] / injected - 1.0).abs();
        let others = (0..4).filter(|&i| i != which).map(|i| rep.residuals[i]).fold(0.0, f64::max);
        ok &= rep.failures() == vec![which] && rel <= 0.01 && others <= 1e-10;
        parts.push(format!("condition {} residual/injected - 1 = {rel:.1e}", which + 1));
    }
    check(ok, parts.join("; ") + " (<= 1%)")
}

fn criterion_11() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut compared = 0;
    let mut differing = Vec::new();
    let mut base = RunConfig::default();
    base.lab.trace_tracks = 20;
    base.lab.hidden_runs = 10;
    base.lab.refine = false;
    base.mms.decay_runs = 10;
    for (mode, files) in [
        (RunMode::Pi, &["norms.csv", "iterations.csv"][..]),
        (RunMode::Lambda, &["norms.csv", "iterations.csv"][..]),
        (RunMode::Lemmas, &["symbol.csv", "trace.csv", "hidden.csv"][..]),
        (RunMode::Compat, &["compat.csv"][..]),
        (RunMode::Contraction, &["contraction.csv"][..]),
        (RunMode::Mms, &["mms_space.csv", "mms_time.csv", "l2_decay.csv"][..]),
    ] {
        let dirs: Vec<_> = (0..2)
            .map(|i| {
                let dir = root.path().join(format!("{mode:?}-{i}"));
                let cfg = RunConfig { mode, output_dir: dir.clone(), ..base.clone() };
                run(&cfg, &RunOptions::default()).unwrap();
                dir
            })
            .collect();
        for f in files {
            let (a, b) = (std::fs::read(dirs[0].join(f)).unwrap(), std::fs::read(dirs[1].join(f)).unwrap());
            compared += 1;
            if a != b || a.is_empty() {
                differing.push(format!("{mode:?}/{f}"));
            }
        }
    }
    check(differing.is_empty(), format!("{compared} CSV pairs from 6 modes, {} differ {differing:?} (0)", differing.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("kinematic identities", criterion_1),
        ("density closed form", criterion_2),
        ("wave solver", criterion_3),
        ("Lame MMS and L2 decay", criterion_4),
        ("I/K term assembly", criterion_5),
        ("lambda/pi consistency", criterion_6),
        ("discrete contraction", criterion_7),
        ("symbol inequality", criterion_8),
        ("trace inequality suite", criterion_9),
        ("compatibility checker", criterion_10),
        ("determinism", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|p| label.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label}: {detail} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
