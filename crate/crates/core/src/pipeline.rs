//! End-to-end runs: load, optionally impute, compute pairwise similarity,
//! keep the top-K edges, detect communities and score them. A grid run
//! repeats this for the weighted similarity and every baseline/imputer pair
//! at several edge counts and records which configuration wins each metric.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{girvan_newman, Partition};
use crate::dataset::{MissingTokens, SparseMatrix};
use crate::error::{Result, SparsimError};
use crate::fmt_f64;
use crate::graph::{build_topk, Graph};
use crate::imputation::{ImputedMatrix, Imputer, MiceConfig};
use crate::metrics::{full_report, Metric, MetricsReport};
use crate::similarity::{pairwise_matrix, MatrixInput, SimilarityMatrix, SimilarityMethod};

pub const DEFAULT_TOP_K: [usize; 3] = [100, 600, 1200];
pub const DEFAULT_COMMUNITIES: usize = 5;
pub const DEFAULT_KNN_K: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub missing_tokens: MissingTokens,
    pub similarity: SimilarityMethod,
    /// Required for baselines, must be `None` for the weighted similarity.
    pub imputer: Option<Imputer>,
    pub top_k: usize,
    pub target_communities: usize,
    /// Keep nodes without retained edges in community detection and metrics.
    pub keep_isolated: bool,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(
        input: impl Into<PathBuf>,
        similarity: SimilarityMethod,
        imputer: Option<Imputer>,
    ) -> Self {
        RunConfig {
            input: input.into(),
            missing_tokens: MissingTokens::default(),
            similarity,
            imputer,
            top_k: DEFAULT_TOP_K[0],
            target_communities: DEFAULT_COMMUNITIES,
            keep_isolated: false,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.similarity, &self.imputer) {
            (SimilarityMethod::Weighted, Some(i)) => Err(SparsimError::Config(format!(
                "weighted similarity works on the raw sparse matrix; imputer {} is not allowed",
                i.name()
            ))),
            (m, None) if m != SimilarityMethod::Weighted => Err(SparsimError::Config(format!(
                "{m} similarity needs an imputer (mean, knn or mice)"
            ))),
            _ if self.top_k == 0 => Err(SparsimError::Config("top-k must be positive".into())),
            _ if self.target_communities == 0 => Err(SparsimError::Config(
                "target communities must be positive".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Everything one (similarity, imputer, k) configuration produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dataset_digest: String,
    pub similarity: SimilarityMethod,
    pub imputer: Option<Imputer>,
    pub top_k: usize,
    pub target_communities: usize,
    /// Top-K graph over every entity.
    pub graph: Graph,
    /// Graph the communities were detected on (isolated nodes dropped
    /// unless `keep_isolated`).
    pub detection_graph: Graph,
    pub partition: Partition,
    pub report: MetricsReport,
    pub imputation_warnings: Vec<String>,
}

/// Serialized form of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsArtifact {
    pub dataset_sha256: String,
    pub similarity: SimilarityMethod,
    pub imputer: Option<Imputer>,
    pub top_k: usize,
    pub target_communities: usize,
    pub edge_removals: usize,
    pub isolated_nodes: Vec<String>,
    pub imputation_warnings: usize,
    pub report: MetricsReport,
}

impl RunOutput {
    pub fn isolated_nodes(&self) -> Vec<String> {
        (0..self.graph.n_nodes())
            .filter(|&u| self.graph.degree(u) == 0)
            .map(|u| self.graph.label(u).to_string())
            .collect()
    }

    pub fn artifact(&self) -> MetricsArtifact {
        MetricsArtifact {
            dataset_sha256: self.dataset_digest.clone(),
            similarity: self.similarity,
            imputer: self.imputer,
            top_k: self.top_k,
            target_communities: self.target_communities,
            edge_removals: self.partition.removals(),
            isolated_nodes: self.isolated_nodes(),
            imputation_warnings: self.imputation_warnings.len(),
            report: self.report.clone(),
        }
    }

    /// Writes `edges.csv`, `partition.csv`, `graph.dot` and `metrics.json`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| SparsimError::io(dir, e))?;
        self.graph
            .write_edges_csv(create(&dir.join("edges.csv"))?)?;
        self.partition
            .write_csv(&self.detection_graph, create(&dir.join("partition.csv"))?)?;
        self.graph.write_dot(
            create(&dir.join("graph.dot"))?,
            Some((&self.detection_graph, &self.partition)),
            Some(&format!("dataset sha256 {}", self.dataset_digest)),
        )?;
        let path = dir.join("metrics.json");
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &self.artifact())?;
        writeln!(w).map_err(|e| SparsimError::io(&path, e))?;
        w.flush().map_err(|e| SparsimError::io(&path, e))?;
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| SparsimError::io(path, e))
}

/// Graph, communities and metrics for a precomputed similarity matrix.
fn detect_and_score(
    sim: &SimilarityMatrix,
    top_k: usize,
    target: usize,
    keep_isolated: bool,
) -> Result<(Graph, Graph, Partition, MetricsReport)> {
    let graph = build_topk(sim, top_k)?;
    let detection_graph = if keep_isolated {
        graph.clone()
    } else {
        graph.without_isolated().0
    };
    let partition = girvan_newman(&detection_graph, target)?;
    let report = full_report(&detection_graph, &partition)?;
    Ok((graph, detection_graph, partition, report))
}

fn similarity_for(
    matrix: &SparseMatrix,
    method: SimilarityMethod,
    imputer: Option<&Imputer>,
) -> Result<(SimilarityMatrix, Vec<String>)> {
    match imputer {
        None => Ok((
            pairwise_matrix(MatrixInput::Sparse(matrix), method)?,
            Vec::new(),
        )),
        Some(imp) => {
            let imputed: ImputedMatrix = imp.impute(matrix)?;
            let sim = pairwise_matrix(MatrixInput::Imputed(&imputed), method)?;
            Ok((sim, imputed.warnings().to_vec()))
        }
    }
}

/// Runs one configuration on an already loaded matrix.
pub fn run_on_matrix(matrix: &SparseMatrix, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (sim, warnings) = similarity_for(matrix, cfg.similarity, cfg.imputer.as_ref())?;
    let (graph, detection_graph, partition, report) =
        detect_and_score(&sim, cfg.top_k, cfg.target_communities, cfg.keep_isolated)?;
    Ok(RunOutput {
        dataset_digest: matrix.digest(),
        similarity: cfg.similarity,
        imputer: cfg.imputer,
        top_k: cfg.top_k,
        target_communities: cfg.target_communities,
        graph,
        detection_graph,
        partition,
        report,
        imputation_warnings: warnings,
    })
}

/// Loads the input, runs the configuration and writes artifacts when an
/// output directory is set. Config errors surface before any loading.
pub fn run_single(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let matrix = SparseMatrix::load_csv(&cfg.input, &cfg.missing_tokens)?;
    let out = run_on_matrix(&matrix, cfg)?;
    if let Some(dir) = &cfg.out_dir {
        out.write_artifacts(dir)?;
    }
    Ok(out)
}

/// Which imputers a grid pairs with each baseline similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImputerKind {
    Mean,
    Knn,
    Mice,
}

impl ImputerKind {
    pub const ALL: [ImputerKind; 3] = [ImputerKind::Mean, ImputerKind::Knn, ImputerKind::Mice];

    pub fn as_str(self) -> &'static str {
        match self {
            ImputerKind::Mean => "mean",
            ImputerKind::Knn => "knn",
            ImputerKind::Mice => "mice",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub input: PathBuf,
    pub missing_tokens: MissingTokens,
    pub top_k: Vec<usize>,
    pub target_communities: usize,
    pub baselines: Vec<SimilarityMethod>,
    pub imputers: Vec<ImputerKind>,
    pub knn_k: usize,
    /// Chain count, iterations and noise flag; the seed is taken from
    /// `mice_seeds`.
    pub mice: MiceConfig,
    /// One MICE cell per seed; winners are decided by majority vote.
    pub mice_seeds: Vec<u64>,
    pub keep_isolated: bool,
    pub out_dir: Option<PathBuf>,
}

impl GridConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        GridConfig {
            input: input.into(),
            missing_tokens: MissingTokens::default(),
            top_k: DEFAULT_TOP_K.to_vec(),
            target_communities: DEFAULT_COMMUNITIES,
            baselines: SimilarityMethod::BASELINES.to_vec(),
            imputers: ImputerKind::ALL.to_vec(),
            knn_k: DEFAULT_KNN_K,
            mice: MiceConfig::default(),
            mice_seeds: vec![MiceConfig::default().rng_seed],
            keep_isolated: false,
            out_dir: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.top_k.is_empty() || self.top_k.contains(&0) {
            return Err(SparsimError::Config("top-k values must be positive".into()));
        }
        if self.imputers.contains(&ImputerKind::Mice) && self.mice_seeds.is_empty() {
            return Err(SparsimError::Config("mice needs at least one seed".into()));
        }
        if self.baselines.contains(&SimilarityMethod::Weighted) {
            return Err(SparsimError::Config(
                "the weighted similarity is always part of the grid; list only baselines".into(),
            ));
        }
        Ok(())
    }

    /// Imputation configurations in grid order.
    fn imputer_variants(&self) -> Vec<(ImputerKind, Imputer, Option<u64>)> {
        let mut out = Vec::new();
        for &kind in &self.imputers {
            match kind {
                ImputerKind::Mean => out.push((kind, Imputer::Mean, None)),
                ImputerKind::Knn => out.push((kind, Imputer::Knn { k: self.knn_k }, None)),
                ImputerKind::Mice => {
                    for &seed in &self.mice_seeds {
                        let cfg = MiceConfig {
                            rng_seed: seed,
                            ..self.mice
                        };
                        out.push((kind, Imputer::Mice(cfg), Some(seed)));
                    }
                }
            }
        }
        out
    }
}

/// A (similarity, imputer) pair, independent of seed and edge count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub similarity: SimilarityMethod,
    pub imputer: Option<ImputerKind>,
}

impl Configuration {
    pub const WEIGHTED: Configuration = Configuration {
        similarity: SimilarityMethod::Weighted,
        imputer: None,
    };

    pub fn name(&self) -> String {
        match self.imputer {
            None => self.similarity.to_string(),
            Some(i) => format!("{}_{}", self.similarity, i.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub configuration: Configuration,
    pub mice_seed: Option<u64>,
    pub top_k: usize,
    pub n_communities: usize,
    pub edge_removals: usize,
    pub isolated_nodes: usize,
    pub report: MetricsReport,
}

impl GridCell {
    pub fn dir_name(&self) -> String {
        match self.mice_seed {
            None => self.configuration.name(),
            Some(s) => format!("{}_seed{}", self.configuration.name(), s),
        }
    }
}

/// Weighted similarity against the strongest competitor on one metric at
/// one edge count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVerdict {
    pub top_k: usize,
    pub metric: Metric,
    pub higher_is_better: bool,
    pub weighted_value: f64,
    /// Competitor with the best representative value (median over MICE
    /// seeds).
    pub best_competitor: String,
    pub best_competitor_value: f64,
    /// Weighted is at least as good as every competitor, with MICE
    /// comparisons decided by majority vote over seeds.
    pub weighted_is_best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGrid {
    pub dataset_sha256: String,
    pub cells: Vec<GridCell>,
    pub verdicts: Vec<MetricVerdict>,
}

fn at_least_as_good(metric: Metric, a: f64, b: f64) -> bool {
    if metric.higher_is_better() {
        a >= b
    } else {
        a <= b
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

impl ComparisonGrid {
    pub fn cells_for(&self, top_k: usize) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(move |c| c.top_k == top_k)
    }

    pub fn verdicts_for(&self, top_k: usize) -> impl Iterator<Item = &MetricVerdict> {
        self.verdicts.iter().filter(move |v| v.top_k == top_k)
    }

    pub fn verdict(&self, top_k: usize, metric: Metric) -> Option<&MetricVerdict> {
        self.verdicts
            .iter()
            .find(|v| v.top_k == top_k && v.metric == metric)
    }

    fn compute_verdicts(cells: &[GridCell]) -> Vec<MetricVerdict> {
        let mut ks: Vec<usize> = cells.iter().map(|c| c.top_k).collect();
        ks.sort_unstable();
        ks.dedup();
        let mut out = Vec::new();
        for k in ks {
            let Some(weighted) = cells
                .iter()
                .find(|c| c.top_k == k && c.configuration == Configuration::WEIGHTED)
            else {
                continue;
            };
            let mut competitors: BTreeMap<Configuration, Vec<&GridCell>> = BTreeMap::new();
            for c in cells
                .iter()
                .filter(|c| c.top_k == k && c.configuration != Configuration::WEIGHTED)
            {
                competitors.entry(c.configuration).or_default().push(c);
            }
            for metric in Metric::ALL {
                let wv = weighted.report.value(metric);
                let mut best: Option<(String, f64)> = None;
                let mut weighted_is_best = true;
                for (conf, runs) in &competitors {
                    let values: Vec<f64> = runs.iter().map(|c| c.report.value(metric)).collect();
                    let wins = values
                        .iter()
                        .filter(|&&v| at_least_as_good(metric, wv, v))
                        .count();
                    if wins * 2 <= values.len() {
                        weighted_is_best = false;
                    }
                    let rep = median(values);
                    if best
                        .as_ref()
                        .is_none_or(|(_, b)| !at_least_as_good(metric, *b, rep))
                    {
                        best = Some((conf.name(), rep));
                    }
                }
                let (best_competitor, best_competitor_value) =
                    best.unwrap_or_else(|| ("none".into(), f64::NAN));
                out.push(MetricVerdict {
                    top_k: k,
                    metric,
                    higher_is_better: metric.higher_is_better(),
                    weighted_value: wv,
                    best_competitor,
                    best_competitor_value,
                    weighted_is_best,
                });
            }
        }
        out
    }

    /// Long format: `top_k,similarity,imputer,mice_seed,metric,community_id,value`.
    pub fn write_long_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "top_k",
            "similarity",
            "imputer",
            "mice_seed",
            "metric",
            "community_id",
            "value",
        ])?;
        for cell in &self.cells {
            let k = cell.top_k.to_string();
            let sim = cell.configuration.similarity.as_str();
            let imp = cell
                .configuration
                .imputer
                .map_or("none", ImputerKind::as_str);
            let seed = cell.mice_seed.map(|s| s.to_string()).unwrap_or_default();
            for (metric, community, value) in cell.report.long_rows() {
                wtr.write_record([k.as_str(), sim, imp, &seed, &metric, &community, &value])?;
            }
        }
        wtr.flush()
            .map_err(|e| SparsimError::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn write_verdicts_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record([
            "top_k",
            "metric",
            "higher_is_better",
            "weighted_value",
            "best_competitor",
            "best_competitor_value",
            "weighted_is_best",
        ])?;
        for v in &self.verdicts {
            wtr.write_record([
                v.top_k.to_string(),
                v.metric.name().to_string(),
                v.higher_is_better.to_string(),
                fmt_f64(v.weighted_value),
                v.best_competitor.clone(),
                fmt_f64(v.best_competitor_value),
                v.weighted_is_best.to_string(),
            ])?;
        }
        wtr.flush()
            .map_err(|e| SparsimError::io("<csv writer>", e))?;
        Ok(())
    }
}

struct Job {
    configuration: Configuration,
    imputer: Option<Imputer>,
    mice_seed: Option<u64>,
}

/// Runs every configuration of the grid on an already loaded matrix.
/// Artifacts for each cell are returned alongside the summary grid.
pub fn run_grid_on_matrix(
    matrix: &SparseMatrix,
    cfg: &GridConfig,
) -> Result<(ComparisonGrid, Vec<RunOutput>)> {
    cfg.validate()?;
    let digest = matrix.digest();
    let mut jobs = vec![Job {
        configuration: Configuration::WEIGHTED,
        imputer: None,
        mice_seed: None,
    }];
    for &method in &cfg.baselines {
        for (kind, imputer, seed) in cfg.imputer_variants() {
            jobs.push(Job {
                configuration: Configuration {
                    similarity: method,
                    imputer: Some(kind),
                },
                imputer: Some(imputer),
                mice_seed: seed,
            });
        }
    }

    // Imputations are shared by every baseline that uses them.
    let variants = cfg.imputer_variants();
    let imputed: Vec<(Imputer, ImputedMatrix)> = variants
        .par_iter()
        .map(|(_, imp, _)| imp.impute(matrix).map(|m| (*imp, m)))
        .collect::<Result<_>>()
        .map_err(|e| SparsimError::GridCell {
            cell: "imputation".into(),
            source: Box::new(e),
        })?;

    let cell_name = |job: &Job, k: usize| match job.mice_seed {
        None => format!("{}@k={k}", job.configuration.name()),
        Some(s) => format!("{}(seed={s})@k={k}", job.configuration.name()),
    };

    let results: Vec<Vec<RunOutput>> = jobs
        .par_iter()
        .map(|job| {
            let fail = |k: usize, e: SparsimError| SparsimError::GridCell {
                cell: cell_name(job, k),
                source: Box::new(e),
            };
            let (sim, warnings) = match &job.imputer {
                None => (
                    pairwise_matrix(MatrixInput::Sparse(matrix), job.configuration.similarity)
                        .map_err(|e| fail(0, e))?,
                    Vec::new(),
                ),
                Some(imp) => {
                    let m = &imputed
                        .iter()
                        .find(|(i, _)| i == imp)
                        .expect("imputed above")
                        .1;
                    (
                        pairwise_matrix(MatrixInput::Imputed(m), job.configuration.similarity)
                            .map_err(|e| fail(0, e))?,
                        m.warnings().to_vec(),
                    )
                }
            };
            cfg.top_k
                .par_iter()
                .map(|&k| {
                    let (graph, detection_graph, partition, report) =
                        detect_and_score(&sim, k, cfg.target_communities, cfg.keep_isolated)
                            .map_err(|e| fail(k, e))?;
                    info!(
                        "{} done: {} communities",
                        cell_name(job, k),
                        partition.len()
                    );
                    Ok(RunOutput {
                        dataset_digest: digest.clone(),
                        similarity: job.configuration.similarity,
                        imputer: job.imputer,
                        top_k: k,
                        target_communities: cfg.target_communities,
                        graph,
                        detection_graph,
                        partition,
                        report,
                        imputation_warnings: warnings.clone(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    let mut outputs = Vec::new();
    for &k in &cfg.top_k {
        for (job, runs) in jobs.iter().zip(&results) {
            let run = runs.iter().find(|r| r.top_k == k).expect("one run per k");
            cells.push(GridCell {
                configuration: job.configuration,
                mice_seed: job.mice_seed,
                top_k: k,
                n_communities: run.partition.len(),
                edge_removals: run.partition.removals(),
                isolated_nodes: run.isolated_nodes().len(),
                report: run.report.clone(),
            });
            outputs.push(run.clone());
        }
    }
    let verdicts = ComparisonGrid::compute_verdicts(&cells);
    Ok((
        ComparisonGrid {
            dataset_sha256: digest,
            cells,
            verdicts,
        },
        outputs,
    ))
}

/// Loads the input, runs the grid and writes per-cell artifacts plus
/// `grid_metrics.csv`, `grid_verdicts.csv` and `grid.json`.
pub fn run_grid(cfg: &GridConfig) -> Result<ComparisonGrid> {
    cfg.validate()?;
    let matrix = SparseMatrix::load_csv(&cfg.input, &cfg.missing_tokens)?;
    let (grid, outputs) = run_grid_on_matrix(&matrix, cfg)?;
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir).map_err(|e| SparsimError::io(dir, e))?;
        for (cell, run) in grid.cells.iter().zip(&outputs) {
            let cell_dir = dir.join(format!("k{}", cell.top_k)).join(cell.dir_name());
            run.write_artifacts(&cell_dir)?;
        }
        grid.write_long_csv(create(&dir.join("grid_metrics.csv"))?)?;
        grid.write_verdicts_csv(create(&dir.join("grid_verdicts.csv"))?)?;
        let path = dir.join("grid.json");
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &grid)?;
        writeln!(w).map_err(|e| SparsimError::io(&path, e))?;
        w.flush().map_err(|e| SparsimError::io(&path, e))?;
    }
    Ok(grid)
}
