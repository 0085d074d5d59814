use fsi_core::lame::*;
use fsi_core::norms::grid_l2_norm;
use fsi_core::ops::boundary_trace;
use fsi_core::{build_geometry, Domain, Field, Rank, SlabGrid, TimeTrack};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn term(k1: f64, k2: f64, phase: f64, vertical: VerticalProfile) -> SeparableTerm {
    SeparableTerm { k1, k2, phase, vertical }
}

fn visc() -> Viscosities {
    Viscosities::new(1.0, 0.5).unwrap()
}

fn mms_error(u: &SeparableSolution, m: usize, dt: f64, steps: usize) -> f64 {
    let g = build_geometry(1.0, 2.0, 3.0, 8, 8, m, 8, 8).unwrap().lower();
    let r = Field::scalar_from_fn(g, |y| 1.0 + 0.3 * y[0].cos() * (1.0 + y[2]).sin());
    let (f, h) = manufactured_forcing(u, g, &r, visc(), dt, steps).unwrap();
    let exact = manufactured_track(u, g, dt, steps).unwrap();
    let prob = LameProblem::new(TimeTrack::constant(&r, dt, steps).unwrap(), f, h, exact.first().clone(), visc()).unwrap();
    let sol = LameSolver::new(g, visc(), TimeScheme::BackwardEuler).unwrap().solve(&prob).unwrap();
    sol.sub(&exact).unwrap().max_abs()
}

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    cov / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

#[test]
fn manufactured_solution_spatial_order() {
    // Linear in time, so backward Euler is exact in t and the error is spatial.
    let u = SeparableSolution {
        time: TimeProfile::Linear,
        comps: [
            vec![term(1.0, 0.0, 0.0, VerticalProfile::Sin { freq: 1.3, shift: 0.0 })],
            vec![
                term(0.0, 1.0, 0.4, VerticalProfile::Sin { freq: 0.9, shift: 0.0 }),
                term(1.0, 1.0, 0.0, VerticalProfile::Poly(vec![0.0, 0.0, 1.0])),
            ],
            vec![term(1.0, -1.0, 0.2, VerticalProfile::Poly(vec![0.0, 1.0, 0.5]))],
        ],
    };
    let ms = [8, 16, 32, 64];
    let errs: Vec<f64> = ms.iter().map(|&m| mms_error(&u, m, 0.01, 10)).collect();
    let hs: Vec<f64> = ms.iter().map(|&m| 1.0 / m as f64).collect();
    assert!(errs[0] < 1e-2);
    let p = slope(&hs, &errs);
    assert!(p >= 1.95, "{errs:?} slope {p}");
}

#[test]
fn manufactured_solution_temporal_order() {
    // Quadratic in y3 and constant in-plane, so the spatial error vanishes.
    let u = SeparableSolution {
        time: TimeProfile::Exp(1.0),
        comps: [
            vec![term(0.0, 0.0, 0.0, VerticalProfile::Poly(vec![0.0, 1.0, -0.3]))],
            vec![],
            vec![term(0.0, 0.0, 0.0, VerticalProfile::Poly(vec![0.0, 0.5, 0.2]))],
        ],
    };
    let runs = [(0.05, 10), (0.025, 20), (0.0125, 40), (0.00625, 80)];
    let errs: Vec<f64> = runs.iter().map(|&(dt, n)| mms_error(&u, 8, dt, n)).collect();
    let p = slope(&runs.map(|r| r.0), &errs);
    assert!((p - 1.0).abs() <= 0.1, "{errs:?} slope {p}");
}

#[test]
fn zero_manufactured_solution_has_zero_data() {
    let g = build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8).unwrap().upper();
    let u = SeparableSolution { time: TimeProfile::Constant, comps: [vec![], vec![], vec![]] };
    let (f, h) = manufactured_forcing(&u, g, &Field::constant(g, 1.3), visc(), 0.1, 3).unwrap();
    assert_eq!(f.max_abs() + h.max_abs(), 0.0);
}

fn random_u0(rng: &mut ChaCha8Rng, g: SlabGrid) -> Field {
    let (_, outer) = slab_planes(&g).unwrap();
    let wall = g.level_of(outer).unwrap();
    let (n, np) = (g.len(), g.plane_len());
    let mut data: Vec<f64> = (0..3 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for c in 0..3 {
        data[c * n + wall * np..c * n + (wall + 1) * np].iter_mut().for_each(|x| *x = 0.0);
    }
    Field::from_data(g, Rank::Vector, data).unwrap()
}

#[test]
fn homogeneous_l2_norm_never_increases() {
    let geo = build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    for run in 0..50 {
        let g = if run % 2 == 0 { geo.lower() } else { geo.upper() };
        let v = Viscosities::new(rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)).unwrap();
        let dt = rng.gen_range(0.001..0.1);
        let prob = LameProblem::homogeneous(random_u0(&mut rng, g), rng.gen_range(0.5..2.0), v, dt, 20).unwrap();
        let u = LameSolver::new(g, v, TimeScheme::BackwardEuler).unwrap().solve(&prob).unwrap();
        let norms: Vec<f64> = u.samples.iter().map(grid_l2_norm).collect();
        violations += norms.windows(2).filter(|w| w[1] > w[0]).count();
    }
    assert_eq!(violations, 0);
}

fn random_problem(rng: &mut ChaCha8Rng, g: SlabGrid, dt: f64, steps: usize) -> LameProblem {
    let (gamma, _) = slab_planes(&g).unwrap();
    let plane = g.plane_grid(gamma, g.level_of(gamma).unwrap());
    let u0 = random_u0(rng, g);
    let mut rand = |grid: SlabGrid| {
        Field::from_data(grid, Rank::Vector, (0..3 * grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    };
    let (fa, fb, ha) = (rand(g), rand(g), rand(plane));
    let f = TimeTrack::from_fn(dt, steps, |t| &fa.scaled(1.0 - t) + &fb.scaled(t)).unwrap();
    let h = TimeTrack::from_fn(dt, steps, |t| ha.scaled((3.0 * t).cos())).unwrap();
    let r = TimeTrack::from_fn(dt, steps, |t| Field::scalar_from_fn(g, |y| 1.0 + 0.3 * (y[0] + t).sin() * y[2].cos())).unwrap();
    LameProblem::new(r, f, h, u0, visc()).unwrap()
}

#[test]
fn residual_of_the_discrete_solution() {
    let g = build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8).unwrap().lower();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let prob = random_problem(&mut rng, g, 0.02, 10);
    let u = LameSolver::new(g, visc(), TimeScheme::BackwardEuler).unwrap().solve(&prob).unwrap();
    let res = lame_residual(&u, &prob).unwrap();
    assert!(res.interior <= 1e-10 && res.interface <= 1e-10 && res.dirichlet == 0.0, "{res:?}");

    let noise: Vec<Field> = (0..u.len()).map(|_| random_u0(&mut rng, g)).collect();
    let noisy = |eps: f64| TimeTrack::new(u.dt, u.samples.iter().zip(&noise).map(|(s, z)| &s.clone() + &z.scaled(eps)).collect()).unwrap();
    let r1 = lame_residual(&noisy(1e-3), &prob).unwrap();
    let r2 = lame_residual(&noisy(2e-3), &prob).unwrap();
    assert!((r2.interior / r1.interior - 2.0).abs() < 1e-3);

    let mut bad = u.clone();
    let wall = g.level_of(Domain::OuterBottom).unwrap();
    let np = g.plane_len();
    for s in bad.samples.iter_mut().skip(1) {
        s.data[wall * np..(wall + 1) * np].iter_mut().for_each(|x| *x = 0.25);
    }
    let injected = (u.duration() * g.cell_area() * np as f64).sqrt() * 0.25;
    let d = lame_residual(&bad, &prob).unwrap().dirichlet;
    assert!((d / injected - 1.0).abs() < 1e-12, "{d} vs {injected}");
    assert_eq!(boundary_trace(u.last(), Domain::OuterBottom).unwrap().max_abs(), 0.0);
}

#[test]
fn dissipation_and_maximal_regularity_diagnostics_are_bounded() {
    let geo = build_geometry(1.0, 2.0, 3.0, 8, 8, 8, 8, 8).unwrap();
    let g = geo.lower();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut korn = Vec::new();
    let mut maxreg = Vec::new();
    for _ in 0..8 {
        let prob = LameProblem::homogeneous(random_u0(&mut rng, g), 1.0, visc(), 0.02, 10).unwrap();
        let u = LameSolver::new(g, visc(), TimeScheme::BackwardEuler).unwrap().solve(&prob).unwrap();
        korn.push(symmetric_gradient_dissipation(&u, &prob.r).unwrap() / grid_l2_norm(&prob.u0).powi(2));

        let mut forced = random_problem(&mut rng, g, 0.02, 10);
        forced.u0 = Field::zeros(g, Rank::Vector);
        forced.h = forced.h.scaled(0.0);
        let u = LameSolver::new(g, visc(), TimeScheme::BackwardEuler).unwrap().solve(&forced).unwrap();
        maxreg.push(maximal_regularity_ratio(&u, &forced.f).unwrap().unwrap());
    }
    assert!(korn.iter().chain(&maxreg).all(|x| x.is_finite() && *x > 0.0));
    let spread = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread(&korn) < 10.0 && spread(&maxreg) < 10.0, "{korn:?} {maxreg:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solve_is_linear_in_the_data(seed in 0u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = build_geometry(1.0, 2.0, 3.0, 4, 6, 6, 6, 6).unwrap().upper();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p1 = random_problem(&mut rng, g, 0.05, 4);
        let mut p2 = random_problem(&mut rng, g, 0.05, 4);
        p2.r = p1.r.clone();
        let comb = |x: &TimeTrack, y: &TimeTrack| x.scaled(a).add(&y.scaled(b)).unwrap();
        let p = LameProblem::new(
            p1.r.clone(),
            comb(&p1.f, &p2.f),
            comb(&p1.h, &p2.h),
            &p1.u0.scaled(a) + &p2.u0.scaled(b),
            visc(),
        ).unwrap();
        let solver = LameSolver::new(g, visc(), TimeScheme::BackwardEuler).unwrap();
        let (u1, u2, u) = (solver.solve(&p1).unwrap(), solver.solve(&p2).unwrap(), solver.solve(&p).unwrap());
        let scale = 1.0 + u1.max_abs() + u2.max_abs();
        prop_assert!(u.sub(&comb(&u1, &u2)).unwrap().max_abs() <= 1e-10 * scale * (1.0 + a.abs() + b.abs()));
    }
}
