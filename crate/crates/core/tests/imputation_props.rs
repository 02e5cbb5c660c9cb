mod common;

use common::{random_sparse_rows, to_cells};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparsim::{Imputer, MiceConfig, SparseMatrix};

fn imputers(seed: u64) -> [Imputer; 3] {
    [
        Imputer::Mean,
        Imputer::Knn { k: 3 },
        Imputer::Mice(MiceConfig {
            n_imputations: 2,
            n_iterations: 3,
            rng_seed: seed,
            noise: true,
        }),
    ]
}

fn matrix(rows: &[Vec<Option<f64>>]) -> SparseMatrix {
    SparseMatrix::from_rows(rows.iter().map(|r| to_cells(r)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn observed_cells_pass_through(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_sparse_rows(&mut rng);
        let m = matrix(&rows);
        for imp in imputers(seed) {
            let out = imp.impute(&m).unwrap();
            for (i, row) in rows.iter().enumerate() {
                for (j, cell) in row.iter().enumerate() {
                    let v = out.get(i, j);
                    prop_assert!(v.is_finite());
                    if let Some(x) = cell {
                        prop_assert_eq!(v.to_bits(), x.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn mean_fill_keeps_column_means(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_sparse_rows(&mut rng);
        let out = Imputer::Mean.impute(&matrix(&rows)).unwrap();
        for j in 0..rows[0].len() {
            let observed: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            let before = observed.iter().sum::<f64>() / observed.len() as f64;
            let after = (0..rows.len()).map(|i| out.get(i, j)).sum::<f64>() / rows.len() as f64;
            prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0));
        }
    }

    #[test]
    fn knn_stays_within_column_range(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_sparse_rows(&mut rng);
        let out = Imputer::Knn { k: 2 }.impute(&matrix(&rows)).unwrap();
        for j in 0..rows[0].len() {
            let observed: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            let lo = observed.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = observed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for i in 0..rows.len() {
                prop_assert!(out.get(i, j) >= lo - 1e-9 && out.get(i, j) <= hi + 1e-9);
            }
        }
    }
}

#[test]
fn mice_repeats_exactly_for_a_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for _ in 0..20 {
        let m = matrix(&random_sparse_rows(&mut rng));
        let cfg = MiceConfig {
            n_imputations: 3,
            n_iterations: 4,
            rng_seed: 42,
            noise: true,
        };
        let a = Imputer::Mice(cfg).impute(&m).unwrap();
        let b = Imputer::Mice(cfg).impute(&m).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn fully_missing_column_is_rejected() {
    let m = matrix(&[vec![Some(1.0), None], vec![Some(2.0), None]]);
    for imp in imputers(0) {
        assert!(imp.impute(&m).is_err(), "{imp}");
    }
}
