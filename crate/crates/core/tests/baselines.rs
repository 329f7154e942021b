mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stadion::baselines::{internal_index, select_k_by_index, IndexId};
use stadion::clusterers::ClustererConfig;
use stadion::dataset::{gen_synthetic, Dataset, GeneratorSpec};
use stadion::partitions::Partition;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn clustered(seed: u64, n: usize, k: usize) -> (Dataset, Partition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = common::random_labels(&mut rng, n, k);
    let noise = common::gaussian_rows(&mut rng, n, 2);
    let rows: Vec<[f64; 2]> = noise
        .rows()
        .zip(&labels)
        .map(|(r, &l)| [r[0] + 4.0 * l as f64, r[1] - 3.0 * (l % 2) as f64])
        .collect();
    (
        Dataset::from_rows(&rows).unwrap(),
        common::partition(&labels).canonical(),
    )
}

fn defined(id: IndexId, x: &Dataset, p: &Partition) -> Option<f64> {
    internal_index(id, x, p).ok().filter(|v| v.is_finite())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn indices_ignore_relabeling_and_rotation(seed in any::<u64>(), n in 12usize..80, k in 2usize..5, angle in 0.0f64..6.28) {
        let (x, p) = clustered(seed, n, k);
        prop_assume!(p.n_nonempty() >= 2);
        let top = p.k() - 1;
        let renamed = Partition::from_labels(p.labels().iter().map(|&l| top - l).collect()).unwrap();
        let (s, c) = angle.sin_cos();
        let rotated: Vec<[f64; 2]> = x.rows().map(|r| [c * r[0] - s * r[1], s * r[0] + c * r[1]]).collect();
        let rotated = Dataset::from_rows(&rotated).unwrap();
        for id in IndexId::ALL {
            let Some(base) = defined(id, &x, &p) else { continue };
            prop_assert!(close(base, defined(id, &x, &renamed).unwrap(), 1e-12), "{} relabel", id);
            prop_assert!(close(base, defined(id, &rotated, &p).unwrap(), 1e-9), "{} rotation", id);
        }
    }

    #[test]
    fn size_weighted_indices_ignore_duplication(seed in any::<u64>(), n in 8usize..40, k in 2usize..4) {
        let (x, p) = clustered(seed, n, k);
        prop_assume!(p.n_nonempty() >= 2);
        let rows: Vec<&[f64]> = x.rows().chain(x.rows()).collect();
        let doubled = Dataset::from_rows(&rows).unwrap();
        let labels: Vec<usize> = p.labels().iter().chain(p.labels()).copied().collect();
        let dp = common::partition(&labels);
        // Silhouette and Calinski–Harabasz carry N − 1 and N − K terms, so
        // they change under duplication by construction.
        for id in IndexId::ALL.into_iter().filter(|id| !matches!(id, IndexId::Silhouette | IndexId::CalinskiHarabasz)) {
            let Some(base) = defined(id, &x, &p) else { continue };
            prop_assert!(close(base, defined(id, &doubled, &dp).unwrap(), 1e-9), "{}", id);
        }
    }

    #[test]
    fn silhouette_in_range_and_dunn_positive(seed in any::<u64>(), n in 6usize..60, k in 2usize..5) {
        let (x, p) = clustered(seed, n, k);
        prop_assume!(p.n_nonempty() >= 2);
        let s = internal_index(IndexId::Silhouette, &x, &p).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s));
        prop_assert!(internal_index(IndexId::Dunn, &x, &p).unwrap() > 0.0);
    }
}

#[test]
fn random_labels_on_one_gaussian_have_flat_silhouette() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let x = common::gaussian_rows(&mut rng, 200, 2);
        let p = common::partition(&common::random_labels(&mut rng, 200, 3));
        let s = internal_index(IndexId::Silhouette, &x, &p).unwrap();
        assert!(s.abs() < 0.15, "{s}");
    }
}

#[test]
fn silhouette_picks_three_blobs() {
    for seed in 0..5 {
        let data = gen_synthetic(&GeneratorSpec::three_blobs(300), seed).unwrap();
        let x = data.data.standardize().unwrap();
        let k = select_k_by_index(
            IndexId::Silhouette,
            &ClustererConfig::kmeans(seed).with_runs(10),
            &x,
            8,
        )
        .unwrap();
        assert_eq!(k, 3, "seed {seed}");
    }
}

#[test]
fn davies_bouldin_picks_four_square_blobs() {
    let spec = GeneratorSpec::balanced_blobs(
        vec![
            vec![0.0, 0.0],
            vec![8.0, 0.0],
            vec![0.0, 8.0],
            vec![8.0, 8.0],
        ],
        1.0,
        400,
    );
    for seed in 0..5 {
        let x = gen_synthetic(&spec, seed)
            .unwrap()
            .data
            .standardize()
            .unwrap();
        let k = select_k_by_index(
            IndexId::DaviesBouldin,
            &ClustererConfig::kmeans(seed).with_runs(10),
            &x,
            8,
        )
        .unwrap();
        assert_eq!(k, 4, "seed {seed}");
    }
}

#[test]
fn k_max_one_is_rejected() {
    let x = gen_synthetic(&GeneratorSpec::three_blobs(30), 0)
        .unwrap()
        .data;
    for id in IndexId::ALL {
        assert!(select_k_by_index(id, &ClustererConfig::kmeans(0), &x, 1).is_err());
        assert!(internal_index(id, &x, &Partition::trivial(30).unwrap()).is_err());
    }
}
