mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stadion::clusterers::ClustererConfig;
use stadion::dataset::{gen_synthetic, Dataset, GeneratorSpec};
use stadion::perturbation::{calibrate_eps_max, default_grid, perturb, EpsilonGrid, NoiseSpec};
use stadion::stability::StabilityParams;

fn dataset(seed: u64, n: usize, p: usize) -> Dataset {
    common::gaussian_rows(&mut ChaCha8Rng::seed_from_u64(seed), n, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn uniform_shift_is_bounded(seed in any::<u64>(), eps in 0.0f64..3.0, n in 1usize..200, p in 1usize..5) {
        let x = dataset(seed, n, p);
        let before = x.clone();
        let y = perturb(&x, &NoiseSpec::uniform(eps), seed ^ 5).unwrap().data;
        prop_assert_eq!(&x, &before);
        for (a, b) in x.values().iter().zip(y.values()) {
            prop_assert!((b - a).abs() <= eps);
        }
    }

    #[test]
    fn seeds_determine_the_draw(seed in any::<u64>(), eps in 0.01f64..2.0) {
        let x = dataset(seed, 30, 2);
        for spec in [NoiseSpec::uniform(eps), NoiseSpec::gaussian(eps), NoiseSpec::bootstrap()] {
            let a = perturb(&x, &spec, seed).unwrap();
            prop_assert_eq!(&a, &perturb(&x, &spec, seed).unwrap());
            prop_assert_ne!(a, perturb(&x, &spec, seed.wrapping_add(1)).unwrap());
        }
    }

    #[test]
    fn linear_grids_are_strictly_increasing(eps_max in 0.01f64..50.0, m in 2usize..60) {
        let g = EpsilonGrid::linear(eps_max, m).unwrap();
        prop_assert_eq!(g.len(), m);
        prop_assert_eq!(g.values()[0], 0.0);
        prop_assert_eq!(g.eps_max(), eps_max);
        prop_assert!(g.values().windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn zero_noise_is_the_identity() {
    let x = dataset(1, 50, 3);
    for spec in [NoiseSpec::uniform(0.0), NoiseSpec::gaussian(0.0)] {
        assert_eq!(perturb(&x, &spec, 9).unwrap().data, x);
    }
    assert!(perturb(&x, &NoiseSpec::uniform(-0.1), 9).is_err());
}

#[test]
fn uniform_noise_has_zero_mean() {
    let n = 10_000;
    let x = Dataset::from_flat(n, 2, vec![0.0; 2 * n]).unwrap();
    let eps = 0.5;
    let bound = 3.0 * eps / (3.0 * n as f64).sqrt();
    for seed in 0..5 {
        let y = perturb(&x, &NoiseSpec::uniform(eps), seed).unwrap().data;
        for j in 0..2 {
            let mean = y.column(j).iter().sum::<f64>() / n as f64;
            assert!(mean.abs() < bound, "seed {seed} column {j}: {mean}");
        }
    }
}

#[test]
fn bootstrap_rows_come_from_the_input() {
    let x = dataset(2, 40, 2);
    let b = perturb(&x, &NoiseSpec::bootstrap(), 3).unwrap();
    let idx = b.indices.unwrap();
    assert_eq!(idx.len(), 40);
    for (i, &src) in idx.iter().enumerate() {
        assert_eq!(b.data.row(i), x.row(src));
    }
}

#[test]
fn grid_examples() {
    let g = default_grid(2, 21, None).unwrap();
    assert_eq!(g.len(), 21);
    assert!((g.eps_max() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(default_grid(1, 2, None).unwrap().values(), &[0.0, 1.0]);
    assert_eq!(
        default_grid(5, 4, Some(3.0)).unwrap().values(),
        &[0.0, 1.0, 2.0, 3.0]
    );
    assert!(default_grid(2, 1, None).is_err());
    assert!(EpsilonGrid::new(vec![0.0, 1.0, 1.0]).is_err());
    assert!(EpsilonGrid::new(vec![0.5, 1.0]).is_err());
}

fn quick_params(seed: u64) -> StabilityParams {
    StabilityParams {
        d: 4,
        omega: (2..=5).collect(),
        seed,
        threads: Some(1),
        ..Default::default()
    }
}

#[test]
fn calibration_on_one_gaussian_stops_at_the_first_step() {
    for seed in 0..3 {
        let x = gen_synthetic(&GeneratorSpec::single_gaussian(2, 300), seed)
            .unwrap()
            .data
            .standardize()
            .unwrap();
        let alg = ClustererConfig::kmeans(seed).with_runs(5);
        let c = calibrate_eps_max(&alg, &x, 6, &quick_params(seed), 11).unwrap();
        assert!(c.found);
        let first = 2.0 * 2f64.sqrt() / 20.0;
        assert!(
            (c.eps_max - first).abs() < 1e-12,
            "seed {seed}: {}",
            c.eps_max
        );
    }
}

#[test]
fn calibration_on_blobs_lies_beyond_the_clustered_regime() {
    for seed in 0..3 {
        let x = gen_synthetic(&GeneratorSpec::three_blobs(300), seed)
            .unwrap()
            .data
            .standardize()
            .unwrap();
        let alg = ClustererConfig::kmeans(seed).with_runs(5);
        let c = calibrate_eps_max(&alg, &x, 6, &quick_params(seed), 11).unwrap();
        let grid = c.paths.grid.values();
        let three_best: Vec<f64> = (1..grid.len())
            .filter(|&i| {
                let s = c.paths.paths[2].stadion[i];
                c.paths
                    .paths
                    .iter()
                    .enumerate()
                    .all(|(k, p)| k == 2 || s > p.stadion[i])
            })
            .map(|i| grid[i])
            .collect();
        assert!(!three_best.is_empty(), "seed {seed}");
        assert!(
            three_best.iter().all(|&e| e < c.eps_max),
            "seed {seed}: {three_best:?} vs {}",
            c.eps_max
        );
    }
}

#[test]
fn calibration_needs_two_candidates() {
    let x = dataset(0, 30, 2);
    assert!(calibrate_eps_max(&ClustererConfig::kmeans(0), &x, 1, &quick_params(0), 5).is_err());
}
