use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparsim::pipeline::{run_grid, run_single, GridConfig, RunConfig, DEFAULT_KNN_K};
use sparsim::{Imputer, MiceConfig, MissingTokens, SimilarityMethod, SparseMatrix};

#[derive(Parser, Debug)]
#[command(
    name = "sparsim",
    version,
    about = "Similarity graphs and community detection on sparse entity/attribute tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one similarity/imputer/top-K configuration and write its artifacts.
    Run(RunArgs),
    /// Run the weighted similarity and every baseline/imputer pair.
    Grid(GridArgs),
    /// Print dataset dimensions and missing-cell statistics.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// CSV with an id column followed by one column per attribute.
    #[arg(long)]
    input: PathBuf,
    /// Cell text treated as missing (repeatable). Defaults to "", NA, NaN, nan.
    #[arg(long = "missing-token")]
    missing_tokens: Vec<String>,
}

impl InputArgs {
    fn tokens(&self) -> MissingTokens {
        if self.missing_tokens.is_empty() {
            MissingTokens::default()
        } else {
            MissingTokens::new(self.missing_tokens.iter().cloned())
        }
    }
}

#[derive(Args, Debug)]
struct MiceArgs {
    #[arg(long, default_value_t = MiceConfig::default().n_imputations)]
    mice_m: usize,
    #[arg(long, default_value_t = MiceConfig::default().n_iterations)]
    mice_iters: usize,
    /// Use the regression prediction without the residual draw.
    #[arg(long)]
    mice_no_noise: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ImputeChoice {
    None,
    Mean,
    Knn,
    Mice,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "weighted")]
    similarity: SimilarityMethod,
    #[arg(long, value_enum, default_value = "none")]
    impute: ImputeChoice,
    #[arg(long, default_value_t = DEFAULT_KNN_K)]
    knn_k: usize,
    #[arg(long, default_value_t = 0)]
    mice_seed: u64,
    #[command(flatten)]
    mice: MiceArgs,
    #[arg(long, default_value_t = 100)]
    top_k: usize,
    #[arg(long, default_value_t = 5)]
    communities: usize,
    /// Also run community detection on nodes without retained edges.
    #[arg(long)]
    keep_isolated: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 600, 1200])]
    top_k: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    communities: usize,
    #[arg(long, default_value_t = DEFAULT_KNN_K)]
    knn_k: usize,
    /// One MICE run per seed; comparisons use a majority vote over seeds.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64])]
    mice_seeds: Vec<u64>,
    #[command(flatten)]
    mice: MiceArgs,
    #[arg(long)]
    keep_isolated: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Print the statistics as JSON, including per-row missing counts.
    #[arg(long)]
    json: bool,
}

fn mice_config(args: &MiceArgs, seed: u64) -> MiceConfig {
    MiceConfig {
        n_imputations: args.mice_m,
        n_iterations: args.mice_iters,
        rng_seed: seed,
        noise: !args.mice_no_noise,
    }
}

fn run(cli: Cli) -> sparsim::Result<()> {
    match cli.command {
        Command::Run(a) => {
            let imputer = match a.impute {
                ImputeChoice::None => None,
                ImputeChoice::Mean => Some(Imputer::Mean),
                ImputeChoice::Knn => Some(Imputer::Knn { k: a.knn_k }),
                ImputeChoice::Mice => Some(Imputer::Mice(mice_config(&a.mice, a.mice_seed))),
            };
            let mut cfg = RunConfig::new(&a.input.input, a.similarity, imputer);
            cfg.missing_tokens = a.input.tokens();
            cfg.top_k = a.top_k;
            cfg.target_communities = a.communities;
            cfg.keep_isolated = a.keep_isolated;
            cfg.out_dir = Some(a.out.clone());
            let out = run_single(&cfg)?;
            let r = &out.report;
            println!(
                "{} nodes, {} edges, {} communities, {} edges removed",
                out.graph.n_nodes(),
                out.graph.n_edges(),
                out.partition.len(),
                out.partition.removals()
            );
            println!("modularity_q {}", sparsim::fmt_f64(r.general.modularity_q));
            println!("artifacts written to {}", a.out.display());
        }
        Command::Grid(a) => {
            let mut cfg = GridConfig::new(&a.input.input);
            cfg.missing_tokens = a.input.tokens();
            cfg.top_k = a.top_k;
            cfg.target_communities = a.communities;
            cfg.knn_k = a.knn_k;
            cfg.mice = mice_config(&a.mice, 0);
            cfg.mice_seeds = a.mice_seeds;
            cfg.keep_isolated = a.keep_isolated;
            cfg.out_dir = Some(a.out.clone());
            let grid = run_grid(&cfg)?;
            for &k in &cfg.top_k {
                let wins = grid.verdicts_for(k).filter(|v| v.weighted_is_best).count();
                let total = grid.verdicts_for(k).count();
                println!("top_k {k}: weighted best on {wins}/{total} metrics");
            }
            println!("{} cells written to {}", grid.cells.len(), a.out.display());
        }
        Command::Stats(a) => {
            let m = SparseMatrix::load_csv(&a.input.input, &a.input.tokens())?;
            let stats = m.stats();
            if a.json {
                println!("{}", serde_json::to_string_pretty(&stats)?);
            } else {
                println!("n_rows {}", stats.n_rows);
                println!("n_cols {}", stats.n_cols);
                println!("missing_fraction {}", stats.missing_fraction);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
