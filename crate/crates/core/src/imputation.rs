//! Mean, KNN and MICE imputation of sparse matrices.
//!
//! Every imputer copies observed cells through untouched and fills only the
//! missing ones. A column with no observed values is always an error.

use std::collections::BTreeSet;
use std::fmt;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::SparseMatrix;
use crate::error::{Result, SparsimError};

/// Dense matrix produced by an imputer. Same shape and labels as its source.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputedMatrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    values: Vec<f64>,
    provenance: String,
    warnings: Vec<String>,
}

impl ImputedMatrix {
    /// Wraps an already complete matrix. Fails if any cell is missing.
    pub fn from_complete(m: &SparseMatrix) -> Result<Self> {
        let mut values = Vec::with_capacity(m.n_rows() * m.n_cols());
        for (i, row) in m.rows().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                values.push(cell.value().ok_or_else(|| {
                    SparsimError::Validation(format!(
                        "cell ({}, {}) is missing",
                        m.row_labels()[i],
                        m.col_labels()[j]
                    ))
                })?);
            }
        }
        Ok(ImputedMatrix {
            row_labels: m.row_labels().to_vec(),
            col_labels: m.col_labels().to_vec(),
            values,
            provenance: "none".into(),
            warnings: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.n_cols();
        &self.values[row * n..(row + 1) * n]
    }

    /// Imputer name and parameters, e.g. `knn(k=4)`.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiceConfig {
    pub n_imputations: usize,
    pub n_iterations: usize,
    pub rng_seed: u64,
    pub noise: bool,
}

impl Default for MiceConfig {
    fn default() -> Self {
        MiceConfig {
            n_imputations: 5,
            n_iterations: 10,
            rng_seed: 0,
            noise: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Imputer {
    Mean,
    Knn { k: usize },
    Mice(MiceConfig),
}

impl Imputer {
    pub fn impute(&self, m: &SparseMatrix) -> Result<ImputedMatrix> {
        match *self {
            Imputer::Mean => impute_mean(m),
            Imputer::Knn { k } => impute_knn(m, k),
            Imputer::Mice(cfg) => impute_mice(m, &cfg),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Imputer::Mean => "mean",
            Imputer::Knn { .. } => "knn",
            Imputer::Mice(_) => "mice",
        }
    }
}

impl fmt::Display for Imputer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Imputer::Mean => write!(f, "mean"),
            Imputer::Knn { k } => write!(f, "knn(k={k})"),
            Imputer::Mice(c) => write!(
                f,
                "mice(m={},iters={},seed={},noise={})",
                c.n_imputations, c.n_iterations, c.rng_seed, c.noise
            ),
        }
    }
}

/// Means of the observed values per column; errors on a fully missing column.
fn column_means(m: &SparseMatrix) -> Result<Vec<f64>> {
    (0..m.n_cols())
        .map(|j| {
            let (sum, count) = m
                .observed_in_column(j)
                .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
            if count == 0 {
                Err(SparsimError::EmptyColumn(m.col_labels()[j].clone()))
            } else {
                Ok(sum / count as f64)
            }
        })
        .collect()
}

/// Source values with missing cells filled by `fill(row, col)`.
fn fill_missing(m: &SparseMatrix, mut fill: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(m.n_rows() * m.n_cols());
    for i in 0..m.n_rows() {
        for j in 0..m.n_cols() {
            values.push(m.get(i, j).value().unwrap_or_else(|| fill(i, j)));
        }
    }
    values
}

fn finish(
    m: &SparseMatrix,
    values: Vec<f64>,
    provenance: String,
    warnings: BTreeSet<String>,
) -> ImputedMatrix {
    const LOG_LIMIT: usize = 5;
    for w in warnings.iter().take(LOG_LIMIT) {
        warn!("{provenance}: {w}");
    }
    if warnings.len() > LOG_LIMIT {
        warn!(
            "{provenance}: {} further warnings (see ImputedMatrix::warnings)",
            warnings.len() - LOG_LIMIT
        );
        for w in warnings.iter().skip(LOG_LIMIT) {
            debug!("{provenance}: {w}");
        }
    }
    ImputedMatrix {
        row_labels: m.row_labels().to_vec(),
        col_labels: m.col_labels().to_vec(),
        values,
        provenance,
        warnings: warnings.into_iter().collect(),
    }
}

pub fn impute_mean(m: &SparseMatrix) -> Result<ImputedMatrix> {
    let means = column_means(m)?;
    let values = fill_missing(m, |_, j| means[j]);
    Ok(finish(
        m,
        values,
        Imputer::Mean.to_string(),
        BTreeSet::new(),
    ))
}

/// Pairwise-complete Euclidean distance rescaled by sqrt(n_cols / n_shared).
/// `None` when the rows share no observed column.
fn partial_distance(m: &SparseMatrix, a: usize, b: usize) -> Option<f64> {
    let mut sq = 0.0;
    let mut shared = 0usize;
    for (x, y) in m.row(a).iter().zip(m.row(b)) {
        if let (Some(x), Some(y)) = (x.value(), y.value()) {
            sq += (x - y) * (x - y);
            shared += 1;
        }
    }
    (shared > 0).then(|| (sq * m.n_cols() as f64 / shared as f64).sqrt())
}

pub fn impute_knn(m: &SparseMatrix, k: usize) -> Result<ImputedMatrix> {
    if k == 0 {
        return Err(SparsimError::InvalidArgument("knn k must be >= 1".into()));
    }
    let means = column_means(m)?;
    let n = m.n_rows();

    // Per row: the filled (column, value) cells and any warnings.
    type RowFill = (Vec<(usize, f64)>, Vec<String>);
    let per_row: Vec<RowFill> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut fills = Vec::new();
            let mut warnings = Vec::new();
            let missing: Vec<usize> = (0..m.n_cols())
                .filter(|&j| m.get(i, j).is_missing())
                .collect();
            if missing.is_empty() {
                return (fills, warnings);
            }
            let mut neighbours: Vec<(f64, usize)> = (0..n)
                .filter(|&r| r != i)
                .filter_map(|r| partial_distance(m, i, r).map(|d| (d, r)))
                .collect();
            neighbours.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for j in missing {
                let donors: Vec<f64> = neighbours
                    .iter()
                    .filter_map(|&(_, r)| m.get(r, j).value())
                    .take(k)
                    .collect();
                let value = if donors.is_empty() {
                    warnings.push(format!(
                        "no eligible neighbour for ({}, {}); used column mean",
                        m.row_labels()[i],
                        m.col_labels()[j]
                    ));
                    means[j]
                } else {
                    donors.iter().sum::<f64>() / donors.len() as f64
                };
                fills.push((j, value));
            }
            (fills, warnings)
        })
        .collect();

    let mut values = fill_missing(m, |_, _| f64::NAN);
    let mut warnings = BTreeSet::new();
    let n_cols = m.n_cols();
    for (i, (fills, w)) in per_row.into_iter().enumerate() {
        for (j, v) in fills {
            values[i * n_cols + j] = v;
        }
        warnings.extend(w);
    }
    Ok(finish(m, values, Imputer::Knn { k }.to_string(), warnings))
}

struct OlsFit {
    coef: DVector<f64>,
    residual_sd: f64,
    rank_deficient: bool,
}

/// Least squares via SVD; the pseudo-inverse gives the minimum-norm solution
/// when the design is rank deficient.
fn ols(design: &DMatrix<f64>, target: &DVector<f64>) -> OlsFit {
    let (n, p) = design.shape();
    let svd = design.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = max_sv * n.max(p) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let coef = svd.solve(target, eps).unwrap_or_else(|_| DVector::zeros(p));
    let residuals = target - design * &coef;
    let dof = n.saturating_sub(rank);
    let residual_sd = if dof > 0 {
        (residuals.norm_squared() / dof as f64).sqrt()
    } else {
        0.0
    };
    OlsFit {
        coef,
        residual_sd,
        rank_deficient: rank < p,
    }
}

fn mice_chain(
    m: &SparseMatrix,
    means: &[f64],
    cfg: &MiceConfig,
    chain: usize,
) -> (Vec<f64>, BTreeSet<String>) {
    let (n, p) = (m.n_rows(), m.n_cols());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(chain as u64);
    let mut current = fill_missing(m, |_, j| means[j]);
    let mut warnings = BTreeSet::new();

    let incomplete: Vec<usize> = (0..p)
        .filter(|&j| (0..n).any(|i| m.get(i, j).is_missing()))
        .collect();

    for _ in 0..cfg.n_iterations {
        for &j in &incomplete {
            let observed: Vec<usize> = (0..n).filter(|&i| !m.get(i, j).is_missing()).collect();
            let missing: Vec<usize> = (0..n).filter(|&i| m.get(i, j).is_missing()).collect();
            let predictors: Vec<usize> = (0..p).filter(|&c| c != j).collect();
            let features = |cur: &[f64], i: usize| -> Vec<f64> {
                std::iter::once(1.0)
                    .chain(predictors.iter().map(|&c| cur[i * p + c]))
                    .collect()
            };
            let design = DMatrix::from_row_iterator(
                observed.len(),
                predictors.len() + 1,
                observed.iter().flat_map(|&i| features(&current, i)),
            );
            let target = DVector::from_iterator(
                observed.len(),
                observed.iter().map(|&i| current[i * p + j]),
            );
            let fit = ols(&design, &target);
            if fit.rank_deficient {
                warnings.insert(format!(
                    "rank-deficient regression for column {}; used minimum-norm solution",
                    m.col_labels()[j]
                ));
            }
            let noise = (cfg.noise && fit.residual_sd > 0.0)
                .then(|| Normal::new(0.0, fit.residual_sd).expect("finite sd"));
            let predictions: Vec<f64> = missing
                .iter()
                .map(|&i| {
                    features(&current, i)
                        .iter()
                        .zip(fit.coef.iter())
                        .map(|(x, b)| x * b)
                        .sum()
                })
                .collect();
            for (&i, pred) in missing.iter().zip(predictions) {
                let eps = noise.as_ref().map_or(0.0, |d| d.sample(&mut rng));
                current[i * p + j] = pred + eps;
            }
        }
    }
    (current, warnings)
}

/// Chained-equation imputation averaged over `n_imputations` independent
/// chains. Deterministic for a fixed seed.
pub fn impute_mice(m: &SparseMatrix, cfg: &MiceConfig) -> Result<ImputedMatrix> {
    if cfg.n_imputations == 0 || cfg.n_iterations == 0 {
        return Err(SparsimError::InvalidArgument(
            "mice needs at least one imputation and one iteration".into(),
        ));
    }
    if m.n_cols() < 2 {
        return Err(SparsimError::InvalidArgument(
            "mice needs at least two columns".into(),
        ));
    }
    let means = column_means(m)?;
    let chains: Vec<(Vec<f64>, BTreeSet<String>)> = (0..cfg.n_imputations)
        .into_par_iter()
        .map(|c| mice_chain(m, &means, cfg, c))
        .collect();

    let p = m.n_cols();
    let count = chains.len() as f64;
    let values = fill_missing(m, |i, j| {
        chains.iter().map(|(v, _)| v[i * p + j]).sum::<f64>() / count
    });
    let warnings = chains.into_iter().flat_map(|(_, w)| w).collect();
    Ok(finish(m, values, Imputer::Mice(*cfg).to_string(), warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Cell;

    fn c(v: f64) -> Cell {
        Cell::observed(v)
    }
    const NA: Cell = Cell::MISSING;

    #[test]
    fn mean_fills_column_mean() {
        let m = SparseMatrix::from_rows(vec![vec![c(1.0)], vec![NA], vec![c(3.0)]]).unwrap();
        let out = impute_mean(&m).unwrap();
        assert_eq!(out.row(1), &[2.0]);
        assert_eq!(out.row(0), &[1.0]);
        assert_eq!(out.row(2), &[3.0]);
    }

    #[test]
    fn fully_observed_is_unchanged() {
        let m = SparseMatrix::from_rows(vec![
            vec![c(1.5), c(-2.0)],
            vec![c(0.1), c(7.0)],
            vec![c(3.3), c(0.0)],
        ])
        .unwrap();
        let expected = ImputedMatrix::from_complete(&m).unwrap();
        for imputer in [
            Imputer::Mean,
            Imputer::Knn { k: 2 },
            Imputer::Mice(MiceConfig::default()),
        ] {
            let out = imputer.impute(&m).unwrap();
            for i in 0..3 {
                assert_eq!(out.row(i), expected.row(i), "{imputer}");
            }
        }
    }

    #[test]
    fn empty_column_is_an_error_everywhere() {
        let m = SparseMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["t0".into(), "t1".into()],
            vec![vec![c(1.0), NA], vec![c(2.0), NA]],
        )
        .unwrap();
        for imputer in [
            Imputer::Mean,
            Imputer::Knn { k: 1 },
            Imputer::Mice(MiceConfig::default()),
        ] {
            let err = imputer.impute(&m).unwrap_err();
            assert_eq!(err.to_string(), "column t1 has no observed values");
        }
    }

    #[test]
    fn knn_uses_nearest_on_shared_columns() {
        let m = SparseMatrix::from_rows(vec![
            vec![c(1.0), c(1.0)],
            vec![c(1.0), NA],
            vec![c(9.0), c(9.0)],
        ])
        .unwrap();
        let out = impute_knn(&m, 1).unwrap();
        assert_eq!(out.row(1), &[1.0, 1.0]);
    }

    #[test]
    fn knn_averages_k_neighbours() {
        let m = SparseMatrix::from_rows(vec![
            vec![c(0.0), c(2.0)],
            vec![c(0.0), c(4.0)],
            vec![c(0.0), NA],
        ])
        .unwrap();
        let out = impute_knn(&m, 2).unwrap();
        assert_eq!(out.get(2, 1), 3.0);
    }

    #[test]
    fn knn_skips_donors_missing_the_target() {
        // r1 is nearest but also lacks column 1, so r2 donates.
        let m = SparseMatrix::from_rows(vec![
            vec![c(0.0), NA],
            vec![c(0.0), NA],
            vec![c(5.0), c(7.0)],
        ])
        .unwrap();
        let out = impute_knn(&m, 1).unwrap();
        assert_eq!(out.get(0, 1), 7.0);
        assert_eq!(out.get(1, 1), 7.0);
    }

    #[test]
    fn knn_without_shared_columns_falls_back_to_mean() {
        let m = SparseMatrix::from_rows(vec![vec![c(1.0), NA], vec![NA, c(4.0)], vec![NA, c(6.0)]])
            .unwrap();
        let out = impute_knn(&m, 3).unwrap();
        assert_eq!(out.get(0, 1), 5.0);
        assert!(!out.warnings().is_empty());
    }

    #[test]
    fn knn_rejects_zero_k() {
        let m = SparseMatrix::from_rows(vec![vec![c(1.0)]]).unwrap();
        assert!(impute_knn(&m, 0).is_err());
    }

    #[test]
    fn mice_recovers_exact_linear_relation() {
        let rows: Vec<Vec<Cell>> = (0..20)
            .map(|i| {
                let x = i as f64 * 0.5 - 3.0;
                let y = if [3, 8, 15].contains(&i) {
                    NA
                } else {
                    c(2.0 * x)
                };
                vec![c(x), y]
            })
            .collect();
        let m = SparseMatrix::from_rows(rows).unwrap();
        let cfg = MiceConfig {
            noise: false,
            ..MiceConfig::default()
        };
        let out = impute_mice(&m, &cfg).unwrap();
        for i in [3, 8, 15] {
            let x = m.get(i, 0).value().unwrap();
            assert!((out.get(i, 1) - 2.0 * x).abs() < 1e-6, "row {i}");
        }
    }

    #[test]
    fn mice_is_deterministic_per_seed() {
        let rows: Vec<Vec<Cell>> = (0..12)
            .map(|i| {
                let x = (i * 7 % 5) as f64;
                let y = (i * 3 % 4) as f64 + 0.5 * x;
                vec![
                    if i % 4 == 0 { NA } else { c(x) },
                    if i % 3 == 1 { NA } else { c(y) },
                    c(i as f64),
                ]
            })
            .collect();
        let m = SparseMatrix::from_rows(rows).unwrap();
        let cfg = MiceConfig {
            rng_seed: 42,
            ..MiceConfig::default()
        };
        let a = impute_mice(&m, &cfg).unwrap();
        let b = impute_mice(&m, &cfg).unwrap();
        assert_eq!(a, b);

        let quiet = |seed| MiceConfig {
            rng_seed: seed,
            noise: false,
            ..MiceConfig::default()
        };
        assert_eq!(
            impute_mice(&m, &quiet(1)).unwrap().values,
            impute_mice(&m, &quiet(2)).unwrap().values
        );
    }

    #[test]
    fn mice_flags_rank_deficiency() {
        // Column 2 duplicates column 1, so the design is singular.
        let rows: Vec<Vec<Cell>> = (0..8)
            .map(|i| {
                let x = i as f64;
                vec![if i == 2 { NA } else { c(x * 0.3 + 1.0) }, c(x), c(x)]
            })
            .collect();
        let m = SparseMatrix::from_rows(rows).unwrap();
        let out = impute_mice(&m, &MiceConfig::default()).unwrap();
        assert!(out.warnings().iter().any(|w| w.contains("rank-deficient")));
        assert!((out.get(2, 0) - 1.6).abs() < 1e-9);
    }

    #[test]
    fn mice_rejects_bad_config() {
        let m = SparseMatrix::from_rows(vec![vec![c(1.0), c(2.0)]]).unwrap();
        let bad = MiceConfig {
            n_imputations: 0,
            ..MiceConfig::default()
        };
        assert!(impute_mice(&m, &bad).is_err());
        let one_col = SparseMatrix::from_rows(vec![vec![c(1.0)]]).unwrap();
        assert!(impute_mice(&one_col, &MiceConfig::default()).is_err());
    }
}
