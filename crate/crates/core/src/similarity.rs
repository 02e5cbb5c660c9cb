//! Pairwise similarity: the three-part weighted similarity on raw sparse
//! rows, and the cosine / Euclidean / Canberra / Spearman baselines on
//! imputed rows.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, SparseMatrix};
use crate::error::{Result, SparsimError};
use crate::fmt_f64;
use crate::imputation::ImputedMatrix;

/// Component scores of the weighted similarity together with the position
/// counts they were derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSimilarity {
    /// Agreement over positions observed in both vectors.
    pub s_num: f64,
    /// Share of positions missing in both vectors.
    pub s_nan: f64,
    /// Minus the share of positions missing in exactly one vector.
    pub s_non: f64,
    pub total: f64,
    pub n_shared: usize,
    pub c_nan: usize,
    pub c_non: usize,
    pub len: usize,
}

/// Similarity of the jointly observed sub-vectors. Implementations must
/// return a value in [-1, 1].
pub trait NumericCore {
    /// Called with sub-vectors of length >= 2.
    fn vector(&self, a: &[f64], b: &[f64]) -> f64;
    /// Called when exactly one position is observed in both vectors.
    fn scalar(&self, a: f64, b: f64) -> f64;
}

/// Cosine on vectors; on scalars `sign(ab) * min(|a|,|b|) / max(|a|,|b|)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CosineCore;

impl NumericCore for CosineCore {
    fn vector(&self, a: &[f64], b: &[f64]) -> f64 {
        let (dot, na2, nb2) = dot_norms(a, b);
        match (na2 == 0.0, nb2 == 0.0) {
            (true, true) => 1.0,
            (true, false) | (false, true) => 0.0,
            _ => (dot / (na2 * nb2).sqrt()).clamp(-1.0, 1.0),
        }
    }

    fn scalar(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
        if hi == 0.0 {
            1.0
        } else if lo == 0.0 {
            0.0
        } else {
            (a * b).signum() * lo / hi
        }
    }
}

fn dot_norms(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    a.iter()
        .zip(b)
        .fold((0.0, 0.0, 0.0), |(d, x, y), (&p, &q)| {
            (d + p * q, x + p * p, y + q * q)
        })
}

/// Weighted similarity of two equal-length sparse vectors with the cosine core.
pub fn weighted_similarity(v1: &[Cell], v2: &[Cell]) -> Result<WeightedSimilarity> {
    weighted_similarity_with(&CosineCore, v1, v2)
}

pub fn weighted_similarity_with<C: NumericCore + ?Sized>(
    core: &C,
    v1: &[Cell],
    v2: &[Cell],
) -> Result<WeightedSimilarity> {
    if v1.len() != v2.len() {
        return Err(SparsimError::DimensionMismatch {
            left: v1.len(),
            right: v2.len(),
        });
    }
    if v1.is_empty() {
        return Err(SparsimError::InvalidArgument(
            "vectors must be non-empty".into(),
        ));
    }
    let len = v1.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut c_nan = 0usize;
    let mut c_non = 0usize;
    for (x, y) in v1.iter().zip(v2) {
        match (x.value(), y.value()) {
            (Some(x), Some(y)) => {
                a.push(x);
                b.push(y);
            }
            (None, None) => c_nan += 1,
            _ => c_non += 1,
        }
    }
    let n_shared = a.len();
    let agreement = match n_shared {
        0 => 0.0,
        1 => core.scalar(a[0], b[0]),
        _ => core.vector(&a, &b),
    };
    // `n_shared * agreement` stays within [-n_shared, n_shared] under
    // rounding, so the total cannot leave [-1, 1].
    let part_one = n_shared as f64 * agreement;
    let lenf = len as f64;
    Ok(WeightedSimilarity {
        s_num: part_one / lenf,
        s_nan: c_nan as f64 / lenf,
        s_non: -(c_non as f64) / lenf,
        total: (part_one + c_nan as f64 - c_non as f64) / lenf,
        n_shared,
        c_nan,
        c_non,
        len,
    })
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(SparsimError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(SparsimError::InvalidArgument(
            "vectors must be non-empty".into(),
        ));
    }
    Ok(())
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    let (dot, na2, nb2) = dot_norms(a, b);
    if na2 == 0.0 || nb2 == 0.0 {
        return Err(SparsimError::Undefined(
            "cosine of a zero-norm vector".into(),
        ));
    }
    Ok((dot / (na2 * nb2).sqrt()).clamp(-1.0, 1.0))
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Canberra distance; a term with both entries zero contributes 0.
pub fn canberra(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| {
            let den = x.abs() + y.abs();
            if den == 0.0 {
                0.0
            } else {
                (x - y).abs() / den
            }
        })
        .sum())
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    if a.len() < 2 {
        return Err(SparsimError::InvalidArgument(
            "spearman needs at least two observations".into(),
        ));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        let (dx, dy) = (x - mean, y - mean);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(SparsimError::Undefined(
            "undefined correlation: constant vector".into(),
        ));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityMethod {
    Weighted,
    Cosine,
    Euclidean,
    Canberra,
    Spearman,
}

type DenseFn = fn(&[f64], &[f64]) -> Result<f64>;

impl SimilarityMethod {
    pub const ALL: [SimilarityMethod; 5] = [
        SimilarityMethod::Weighted,
        SimilarityMethod::Cosine,
        SimilarityMethod::Euclidean,
        SimilarityMethod::Canberra,
        SimilarityMethod::Spearman,
    ];

    pub const BASELINES: [SimilarityMethod; 4] = [
        SimilarityMethod::Cosine,
        SimilarityMethod::Euclidean,
        SimilarityMethod::Canberra,
        SimilarityMethod::Spearman,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityMethod::Weighted => "weighted",
            SimilarityMethod::Cosine => "cosine",
            SimilarityMethod::Euclidean => "euclidean",
            SimilarityMethod::Canberra => "canberra",
            SimilarityMethod::Spearman => "spearman",
        }
    }

    pub fn strength_order(self) -> StrengthOrder {
        match self {
            SimilarityMethod::Euclidean | SimilarityMethod::Canberra => {
                StrengthOrder::LowerIsStronger
            }
            _ => StrengthOrder::HigherIsStronger,
        }
    }

    fn dense_fn(self) -> Option<DenseFn> {
        match self {
            SimilarityMethod::Weighted => None,
            SimilarityMethod::Cosine => Some(cosine),
            SimilarityMethod::Euclidean => Some(euclidean),
            SimilarityMethod::Canberra => Some(canberra),
            SimilarityMethod::Spearman => Some(spearman),
        }
    }
}

impl fmt::Display for SimilarityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimilarityMethod {
    type Err = SparsimError;

    fn from_str(s: &str) -> Result<Self> {
        SimilarityMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                SparsimError::InvalidArgument(format!("unknown similarity method {s:?}"))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrengthOrder {
    HigherIsStronger,
    LowerIsStronger,
}

/// Symmetric entity × entity matrix of similarities or distances.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    order: StrengthOrder,
}

impl SimilarityMatrix {
    /// Builds from a full square grid; checks shape, finiteness and symmetry.
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>, order: StrengthOrder) -> Result<Self> {
        let n = labels.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(SparsimError::Validation(
                "similarity matrix must be square".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                if !values[i][j].is_finite() || values[i][j] != values[j][i] {
                    return Err(SparsimError::Validation(format!(
                        "entry ({i}, {j}) is not finite or not symmetric"
                    )));
                }
            }
        }
        Ok(SimilarityMatrix {
            labels,
            values: values.into_iter().flatten().collect(),
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn strength_order(&self) -> StrengthOrder {
        self.order
    }

    /// CSV with a header row and a first column of labels.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend(self.labels.iter().cloned());
        wtr.write_record(&header)?;
        for (i, label) in self.labels.iter().enumerate() {
            let mut rec = vec![label.clone()];
            rec.extend((0..self.len()).map(|j| fmt_f64(self.get(i, j))));
            wtr.write_record(&rec)?;
        }
        wtr.flush()
            .map_err(|e| SparsimError::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Input accepted by [`pairwise_matrix`].
#[derive(Debug, Clone, Copy)]
pub enum MatrixInput<'a> {
    Sparse(&'a SparseMatrix),
    Imputed(&'a ImputedMatrix),
}

fn assemble(
    labels: &[String],
    order: StrengthOrder,
    diagonal: f64,
    pair: impl Fn(usize, usize) -> Result<f64> + Sync,
) -> Result<SimilarityMatrix> {
    let n = labels.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| pair(i, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut values = vec![diagonal; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(SimilarityMatrix {
        labels: labels.to_vec(),
        values,
        order,
    })
}

/// Similarity (or distance) between every pair of rows. The weighted method
/// takes a sparse matrix; baselines take an imputed one.
pub fn pairwise_matrix(
    input: MatrixInput<'_>,
    method: SimilarityMethod,
) -> Result<SimilarityMatrix> {
    let order = method.strength_order();
    let diagonal = match order {
        StrengthOrder::HigherIsStronger => 1.0,
        StrengthOrder::LowerIsStronger => 0.0,
    };
    match (input, method.dense_fn()) {
        (MatrixInput::Sparse(m), None) => assemble(m.row_labels(), order, diagonal, |i, j| {
            weighted_similarity(m.row(i), m.row(j)).map(|w| w.total)
        }),
        (MatrixInput::Imputed(m), Some(f)) => assemble(m.row_labels(), order, diagonal, |i, j| {
            f(m.row(i), m.row(j))
        }),
        (MatrixInput::Sparse(_), Some(_)) => Err(SparsimError::InvalidArgument(format!(
            "{method} similarity requires an imputed matrix"
        ))),
        (MatrixInput::Imputed(_), None) => Err(SparsimError::InvalidArgument(
            "weighted similarity takes the raw sparse matrix, not an imputed one".into(),
        )),
    }
}
