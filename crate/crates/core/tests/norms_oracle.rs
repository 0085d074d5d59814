mod common;

use common::*;
use fsi_core::norms::*;
use fsi_core::ops::boundary_trace;
use fsi_core::{build_geometry, Domain, Field, Rank, SlabGrid, TimeTrack};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grids() -> Vec<SlabGrid> {
    let g = build_geometry(1.0, 1.6, 2.5, 4, 6, 6, 4, 6).unwrap();
    vec![g.lower(), g.elastic(), g.upper(), g.plane(Domain::InterfaceUpper).unwrap()]
}

fn random_field(rng: &mut ChaCha8Rng, grid: SlabGrid, rank: Rank) -> Field {
    let n = grid.len() * rank.comps();
    Field::from_data(grid, rank, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn random_track(rng: &mut ChaCha8Rng, grid: SlabGrid, len: usize) -> TimeTrack {
    let base = random_field(rng, grid, Rank::Vector);
    let drift = random_field(rng, grid, Rank::Vector);
    TimeTrack::from_fn(0.05, len - 1, |t| {
        let mut f = base.scaled((3.0 * t).cos());
        f.axpy(t * t, &drift);
        f
    })
    .unwrap()
}

#[test]
fn sobolev_norm_matches_direct_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for g in grids() {
        for rank in [Rank::Scalar, Rank::Vector] {
            let f = random_field(&mut rng, g, rank);
            for s in [0.0, 0.5, 1.0, 2.25, 3.5] {
                let got = sobolev_norm(&f, s).unwrap();
                let want = dense_sobolev_sq(&f, s).sqrt();
                assert!(rel_err(got, want) <= 1e-10, "{:?} s={s}: {got} vs {want}", g.domain);
            }
        }
    }
}

#[test]
fn track_norms_match_direct_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in grids() {
        let t = random_track(&mut rng, g, 7);
        for (r, s) in [(0.0, 0.0), (0.5, 0.0), (0.75, 1.5), (1.125, 2.25)] {
            let st = spacetime_norm(&t, SpaceTimeOrder::new(r, s).unwrap()).unwrap();
            assert!(rel_err(st, dense_spacetime(&t, r, s)) <= 1e-10, "{:?} ({r},{s})", g.domain);
            let mx = mixed_norm(&t, r, s).unwrap();
            assert!(rel_err(mx, dense_mixed(&t, r, s)) <= 1e-10);
        }
        for s in [0.0, 1.5, 3.0] {
            assert!(rel_err(l2_time_hs(&t, s).unwrap(), dense_l2_time_hs(&t, s)) <= 1e-10);
        }
    }
}

#[test]
fn zero_order_spacetime_is_quadrature_l2() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = grids()[0];
    let t = random_track(&mut rng, g, 9);
    let st = spacetime_norm(&t, SpaceTimeOrder::new(0.0, 0.0).unwrap()).unwrap();
    assert!(rel_err(st, l2_spacetime_quadrature(&t)) <= 1e-12);
    let tr = t.try_map(|f| boundary_trace(f, Domain::InterfaceLower)).unwrap();
    let st = spacetime_norm(&tr, SpaceTimeOrder::new(0.0, 0.0).unwrap()).unwrap();
    assert!(rel_err(st, l2_spacetime_quadrature(&tr)) <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norms_are_absolutely_homogeneous(seed in 0u64..1000, c in -5.0f64..5.0, s in 0.0f64..3.0, r in 0.0f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grids()[(seed % 4) as usize];
        let t = random_track(&mut rng, g, 6);
        let o = SpaceTimeOrder::new(r, s).unwrap();
        let a = spacetime_norm(&t.scaled(c), o).unwrap();
        let b = c.abs() * spacetime_norm(&t, o).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-12));
        let f = t.first();
        let a = sobolev_norm(&f.scaled(c), s).unwrap();
        let b = c.abs() * sobolev_norm(f, s).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-12));
    }

    #[test]
    fn norms_satisfy_the_triangle_inequality(seed in 0u64..1000, s in 0.0f64..3.0, r in 0.0f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grids()[(seed % 4) as usize];
        let (t, u) = (random_track(&mut rng, g, 6), random_track(&mut rng, g, 6));
        let o = SpaceTimeOrder::new(r, s).unwrap();
        let sum = spacetime_norm(&t.add(&u).unwrap(), o).unwrap();
        prop_assert!(sum <= spacetime_norm(&t, o).unwrap() + spacetime_norm(&u, o).unwrap() + 1e-12);
        let sum = mixed_norm(&t.add(&u).unwrap(), r, s).unwrap();
        prop_assert!(sum <= mixed_norm(&t, r, s).unwrap() + mixed_norm(&u, r, s).unwrap() + 1e-12);
    }

    #[test]
    fn norms_increase_with_order(seed in 0u64..1000, s in 0.0f64..3.0, ds in 0.0f64..1.0, r in 0.0f64..1.5, dr in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grids()[(seed % 4) as usize];
        let t = random_track(&mut rng, g, 6);
        let f = t.last();
        prop_assert!(sobolev_norm(f, s).unwrap() <= sobolev_norm(f, s + ds).unwrap() * (1.0 + 1e-12));
        let lo = spacetime_norm(&t, SpaceTimeOrder::new(r, s).unwrap()).unwrap();
        let hi = spacetime_norm(&t, SpaceTimeOrder::new(r + dr, s + ds).unwrap()).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
        prop_assert!(mixed_norm(&t, r, s).unwrap() <= mixed_norm(&t, r + dr, s + ds).unwrap() * (1.0 + 1e-12));
    }
}
