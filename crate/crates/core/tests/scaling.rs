mod common;

use graphon_core::cut::{cut_size, d_box_exact};
use graphon_core::models::ws_graphon;
use graphon_core::rng::{rng_from_seed, stream_rng};
use graphon_core::sampler::{concentration_experiment, sample_digraphon, sample_simple, scale_and_sample};
use graphon_core::scaling::{blowup_k, fractional_blowup, fractional_counts, fractional_source, split_node};
use graphon_core::{CutConfig, Digraphon, ScalePlan, WeightedGraph, WsParams};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn plan_for_eleven_to_sixty_four() {
    let plan = ScalePlan::from_spread(11, 64, 1.0).unwrap();
    assert_eq!((plan.k, plan.m), (5, 9));
    let want = (55.0 - 9.0) * 9.0 / (55.0 * 64.0);
    assert!((plan.bound - want).abs() <= 1e-15);
    assert_eq!(fractional_counts(11, 64).unwrap().iter().sum::<usize>(), 64);
    assert!(ScalePlan::from_spread(11, 10, 1.0).is_err());
}

#[test]
fn sample_edge_count_matches_density() {
    let n = 16;
    let g = WeightedGraph::uniform((0..n * n).map(|k| if k / n == k % n { 0.0 } else { 0.5 }).collect(), true).unwrap();
    let trials = 400;
    let mean = (0..trials).map(|t| sample_simple(&g, t).edge_count() as f64).sum::<f64>() / trials as f64;
    let sd = (120.0 * 0.25 / trials as f64).sqrt();
    assert!((mean - 60.0).abs() <= 3.0 * sd, "{mean}");
}

#[test]
fn scaled_ws_edge_count() {
    let ws = ws_graphon(WsParams::new(0.4, 0.75).unwrap(), 32).unwrap().to_weighted().unwrap();
    let (big, _) = fractional_blowup(&ws, 64).unwrap();
    let pairs = (0..64).flat_map(|i| ((i + 1)..64).map(move |j| (i, j)));
    let (expect, var) = pairs.fold((0.0, 0.0), |(e, v), (i, j)| {
        let b = big.beta(i, j);
        (e + b, v + b * (1.0 - b))
    });
    let trials = 200;
    let mean = (0..trials)
        .map(|t| scale_and_sample(&ws, 64, t).unwrap().0.edge_count() as f64)
        .sum::<f64>()
        / trials as f64;
    assert!((mean - expect).abs() <= 3.0 * (var / trials as f64).sqrt(), "{mean} vs {expect}");
}

#[test]
fn mean_adjacency_converges() {
    let mut rng = rng_from_seed(6);
    for sym in [true, false] {
        let g = common::random_uniform(7, sym, &mut rng);
        let trials = 4000;
        let mut mean = vec![0.0; 49];
        for t in 0..trials {
            let s = sample_simple(&g, t).to_weighted(g.alpha().to_vec()).unwrap();
            for (m, b) in mean.iter_mut().zip(s.beta_matrix()) {
                *m += b / trials as f64;
            }
        }
        for (k, (&m, &b)) in mean.iter().zip(g.beta_matrix()).enumerate() {
            let sd = (b * (1.0 - b) / trials as f64).sqrt();
            assert!((m - b).abs() <= 5.0 * sd + 1e-12, "entry {k}: {m} vs {b}");
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    let g = common::random_uniform(12, true, &mut rng_from_seed(2));
    assert_eq!(sample_simple(&g, 5), sample_simple(&g, 5));
    assert_ne!(sample_simple(&g, 5), sample_simple(&g, 6));
    assert_eq!(scale_and_sample(&g, 29, 1).unwrap(), scale_and_sample(&g, 29, 1).unwrap());
}

#[test]
fn directed_samples_follow_categories() {
    let n = 5;
    let cat = |i: usize, j: usize| (i + 2 * j) % 4;
    let mut w = vec![vec![0.0; n * n]; 4];
    for i in 0..n {
        w[0][i * n + i] = 1.0;
        for j in (i + 1)..n {
            let c = cat(i, j);
            w[c][i * n + j] = 1.0;
            // the reverse pair sees the directions swapped
            w[[0, 2, 1, 3][c]][j * n + i] = 1.0;
        }
    }
    let [w00, w01, w10, w11] = <[Vec<f64>; 4]>::try_from(w).unwrap();
    let d = Digraphon::new(n, w00, w01, w10, w11, vec![0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
    let s = sample_digraphon(&d, 3);
    for i in 0..n {
        assert_eq!(s.adj[i * n + i], i % 2 == 1);
        for j in (i + 1)..n {
            let c = cat(i, j);
            assert_eq!(s.adj[i * n + j], c == 1 || c == 3, "{i}->{j}");
            assert_eq!(s.adj[j * n + i], c == 2 || c == 3, "{j}->{i}");
        }
    }

    let half = vec![0.25; n * n];
    let d = Digraphon::new(n, half.clone(), half.clone(), half.clone(), half, vec![0.5; n]).unwrap();
    let trials = 4000;
    let (mut fwd, mut loops) = (0.0, 0.0);
    for t in 0..trials {
        let s = sample_digraphon(&d, t);
        fwd += s.adj[1] as u8 as f64;
        loops += s.adj[0] as u8 as f64;
    }
    let sd = (0.25 / trials as f64).sqrt();
    assert!((fwd / trials as f64 - 0.5).abs() <= 5.0 * sd);
    assert!((loops / trials as f64 - 0.5).abs() <= 5.0 * sd);
}

#[test]
fn large_samples_concentrate() {
    let n = 256;
    let g = ws_graphon(WsParams::new(0.4, 0.75).unwrap(), n).unwrap().to_weighted().unwrap();
    let cfg = CutConfig { restarts: 4, ..CutConfig::default() };
    let report = concentration_experiment(&g, 50, 1, &cfg).unwrap();
    assert!(!report.exact);
    assert_eq!(report.violations, 0, "{:?}", report.distances);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blowups_compose(seed: u64, n in 1usize..6, a in 1usize..4, b in 1usize..4) {
        let g = common::random_weighted(n, seed % 2 == 0, &mut rng_from_seed(seed));
        let twice = blowup_k(&blowup_k(&g, a).unwrap(), b).unwrap();
        let once = blowup_k(&g, a * b).unwrap();
        prop_assert_eq!(twice.beta_matrix(), once.beta_matrix());
        for (x, y) in twice.alpha().iter().zip(once.alpha()) {
            prop_assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn blowups_stay_at_distance_zero_from_splits(seed: u64, n in 1usize..5, k in 2usize..4) {
        let g = common::random_uniform(n, true, &mut rng_from_seed(seed));
        let big = blowup_k(&g, k).unwrap();
        let mut split = g.clone();
        for i in (0..n).rev() {
            split = split_node(&split, i, k).unwrap();
        }
        prop_assert!(d_box_exact(&big, &split, &CutConfig::default()).unwrap().value <= 1e-15);
    }

    #[test]
    fn plan_bound_vanishes_exactly_when_divisible(n in 1usize..40, extra in 0usize..100, spread in 0.01f64..1.0) {
        let plan = ScalePlan::from_spread(n, n + extra, spread).unwrap();
        prop_assert_eq!(plan.k * n + plan.m, n + extra);
        prop_assert!(plan.m < n);
        prop_assert_eq!(plan.bound == 0.0, plan.m == 0);
        prop_assert!(plan.bound >= 0.0);
    }

    #[test]
    fn splitting_preserves_coarse_cuts(seed: u64, n in 2usize..7, k in 2usize..4, mask: u8) {
        let mut rng = rng_from_seed(seed);
        let g = common::random_weighted(n, rng.random_bool(0.5), &mut rng);
        let i = rng.random_range(0..n);
        let s = split_node(&g, i, k).unwrap();
        let lift = |v: usize| -> Vec<usize> {
            if v < i { vec![v] } else if v == i { (i..i + k).collect() } else { vec![v + k - 1] }
        };
        let side: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let rest: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 0).collect();
        let up = |vs: &[usize]| -> Vec<usize> { vs.iter().flat_map(|&v| lift(v)).collect() };
        let coarse = cut_size(&side, &rest, &g).unwrap();
        let fine = cut_size(&up(&side), &up(&rest), &s).unwrap();
        prop_assert!((coarse - fine).abs() <= 1e-12);
    }

    #[test]
    fn fractional_blowup_is_uniform(seed: u64, n in 1usize..8, extra in 0usize..20) {
        let mut rng = stream_rng(seed, 0);
        let g = common::random_uniform(n, rng.random_bool(0.5), &mut rng);
        let target = n + extra;
        let (big, plan) = fractional_blowup(&g, target).unwrap();
        prop_assert_eq!(big.n(), target);
        prop_assert!(big.alpha().iter().all(|&a| (a - 1.0 / target as f64).abs() <= 1e-15));
        let src = fractional_source(n, target).unwrap();
        for a in 0..target {
            for b in 0..target {
                let want = if src[a] == src[b] { 0.0 } else { g.beta(src[a], src[b]) };
                prop_assert_eq!(big.beta(a, b), want);
            }
        }
        prop_assert!(plan.bound <= plan.beta_spread / 4.0 + 1e-15);
    }
}
