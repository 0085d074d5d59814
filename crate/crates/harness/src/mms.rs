//! Manufactured-solution convergence studies and the randomized L² decay
//! check for the Lamé solver.

use fsi_core::geometry::{ChannelGeometry, SlabGrid};
use fsi_core::lame::{
    manufactured_forcing, manufactured_track, slab_planes, LameProblem, LameSolver, SeparableSolution, SeparableTerm,
    TimeProfile, TimeScheme, VerticalProfile, Viscosities,
};
use fsi_core::norms::grid_l2_norm;
use fsi_core::{build_geometry, Field, Rank, Result, TimeTrack};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Step and count of the spatial study; the solution is linear in time so
/// backward Euler adds no time error.
pub const SPACE_DT: f64 = 0.01;
pub const SPACE_STEPS: usize = 10;
pub const DECAY_STEPS: usize = 20;

fn term(k1: f64, k2: f64, phase: f64, vertical: VerticalProfile) -> SeparableTerm {
    SeparableTerm { k1, k2, phase, vertical }
}

/// Smooth in all variables, linear in time.
pub fn spatial_solution() -> SeparableSolution {
    SeparableSolution {
        time: TimeProfile::Linear,
        comps: [
            vec![term(1.0, 0.0, 0.0, VerticalProfile::Sin { freq: 1.3, shift: 0.0 })],
            vec![
                term(0.0, 1.0, 0.4, VerticalProfile::Sin { freq: 0.9, shift: 0.0 }),
                term(1.0, 1.0, 0.0, VerticalProfile::Poly(vec![0.0, 0.0, 1.0])),
            ],
            vec![term(1.0, -1.0, 0.2, VerticalProfile::Poly(vec![0.0, 1.0, 0.5]))],
        ],
    }
}

/// Constant in-plane and quadratic in `y3`, so the discretization in space
/// is exact and only the time error remains.
pub fn temporal_solution() -> SeparableSolution {
    SeparableSolution {
        time: TimeProfile::Exp(1.0),
        comps: [
            vec![term(0.0, 0.0, 0.0, VerticalProfile::Poly(vec![0.0, 1.0, -0.3]))],
            vec![],
            vec![term(0.0, 0.0, 0.0, VerticalProfile::Poly(vec![0.0, 0.5, 0.2]))],
        ],
    }
}

pub fn mms_density(g: SlabGrid) -> Field {
    Field::scalar_from_fn(g, |y| 1.0 + 0.3 * y[0].cos() * (1.0 + y[2]).sin())
}

/// Max-norm error of the backward Euler solution against `u`.
pub fn mms_error(u: &SeparableSolution, g: SlabGrid, visc: Viscosities, dt: f64, steps: usize) -> Result<f64> {
    let r = mms_density(g);
    let (f, h) = manufactured_forcing(u, g, &r, visc, dt, steps)?;
    let exact = manufactured_track(u, g, dt, steps)?;
    let prob = LameProblem::new(TimeTrack::constant(&r, dt, steps)?, f, h, exact.first().clone(), visc)?;
    let sol = LameSolver::new(g, visc, TimeScheme::BackwardEuler)?.solve(&prob)?;
    Ok(sol.sub(&exact)?.max_abs())
}

/// Least-squares slope of `log err` against `log h`.
pub fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    cov / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    /// Vertical spacing or time step.
    pub h: f64,
    pub count: usize,
    pub max_error: f64,
    /// Order against the previous row.
    pub order: Option<f64>,
}

fn rows(hs: &[f64], counts: &[usize], errs: &[f64]) -> Vec<StudyRow> {
    (0..errs.len())
        .map(|i| StudyRow {
            h: hs[i],
            count: counts[i],
            max_error: errs[i],
            order: (i > 0).then(|| (errs[i - 1] / errs[i]).ln() / (hs[i - 1] / hs[i]).ln()),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub rows: Vec<StudyRow>,
    pub fitted_order: f64,
}

/// Lower fluid slab of `base` with `m` vertical intervals, for each `m`.
pub fn spatial_study(base: &ChannelGeometry, visc: Viscosities, levels: &[usize]) -> Result<Study> {
    let u = spatial_solution();
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for &m in levels {
        let g = build_geometry(base.l1, base.l2, base.l3, base.n1, base.n2, m, base.m_up, base.m_el)?.lower();
        hs.push(g.dz);
        errs.push(mms_error(&u, g, visc, SPACE_DT, SPACE_STEPS)?);
    }
    Ok(Study { rows: rows(&hs, levels, &errs), fitted_order: slope(&hs, &errs) })
}

/// Step counts over a fixed window on the lower fluid slab of `base`.
pub fn temporal_study(base: &ChannelGeometry, visc: Viscosities, window: f64, steps: &[usize]) -> Result<Study> {
    let u = temporal_solution();
    let g = base.lower();
    let hs: Vec<f64> = steps.iter().map(|&n| window / n as f64).collect();
    let errs = hs.iter().zip(steps).map(|(&dt, &n)| mms_error(&u, g, visc, dt, n)).collect::<Result<Vec<_>>>()?;
    Ok(Study { rows: rows(&hs, steps, &errs), fitted_order: slope(&hs, &errs) })
}

/// Random field vanishing on the outer wall of its slab.
pub fn random_wall_field(rng: &mut ChaCha8Rng, g: SlabGrid) -> Result<Field> {
    let (_, outer) = slab_planes(&g)?;
    let wall = g.level_of(outer).expect("outer wall level");
    let (n, np) = (g.len(), g.plane_len());
    let mut data: Vec<f64> = (0..3 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for c in 0..3 {
        data[c * n + wall * np..c * n + (wall + 1) * np].iter_mut().for_each(|x| *x = 0.0);
    }
    Field::from_data(g, Rank::Vector, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRun {
    pub run: usize,
    pub upper: bool,
    pub lambda: f64,
    pub mu: f64,
    pub r: f64,
    pub dt: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// Steps where the grid L² norm grew.
    pub violations: usize,
}

/// Homogeneous problems (`f = h = 0`, constant `R`) with random data,
/// alternating between the two fluid slabs.
pub fn decay_suite(geometry: &ChannelGeometry, runs: usize, seed: u64) -> Result<Vec<DecayRun>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..runs)
        .map(|run| {
            let upper = run % 2 == 1;
            let g = if upper { geometry.upper() } else { geometry.lower() };
            let visc = Viscosities::new(rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0))?;
            let dt = rng.gen_range(0.001..0.1);
            let u0 = random_wall_field(&mut rng, g)?;
            let r = rng.gen_range(0.5..2.0);
            let prob = LameProblem::homogeneous(u0, r, visc, dt, DECAY_STEPS)?;
            let u = LameSolver::new(g, visc, TimeScheme::BackwardEuler)?.solve(&prob)?;
            let norms: Vec<f64> = u.samples.iter().map(grid_l2_norm).collect();
            Ok(DecayRun {
                run,
                upper,
                lambda: visc.lambda,
                mu: visc.mu,
                r,
                dt,
                initial_norm: norms[0],
                final_norm: *norms.last().expect("samples"),
                violations: norms.windows(2).filter(|w| w[1] > w[0]).count(),
            })
        })
        .collect()
}
