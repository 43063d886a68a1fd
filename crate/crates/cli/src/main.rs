use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clsbm::io::{read_assignment, read_attributes, read_graph, write_assignment, write_attributes, write_graph};
use clsbm::{
    divergence_closed_form, divergence_oracle, emit_csv, emit_plot_data, misclassified_count, run_experiment,
    sample_clsbm, BlockVariant, DetectOptions, Error, ExperimentConfig, LabelWeights, ModelParams,
};
use serde_json::json;

/// Contextual labeled SBM: sampling, spectral detection and divergence bounds.
#[derive(Parser)]
#[command(name = "clsbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset and write graph.csv, attributes.csv and truth.csv.
    Sample(SampleArgs),
    /// Recover communities from a graph and attribute matrix.
    Detect(DetectArgs),
    /// Report the divergence D for a model.
    Divergence(DivergenceArgs),
    /// Count misclassified nodes up to relabeling.
    Score(ScoreArgs),
    /// Run a sweep and write per-replication rows plus plot data.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Model JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Attribute CSV, one row per node.
    #[arg(long)]
    attrs: PathBuf,
    /// Number of communities.
    #[arg(short = 'K')]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = clsbm::spectral::DEFAULT_RESTARTS)]
    restarts: usize,
    /// Fixed label weights, e.g. 0.3,0.7.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Assignment CSV with header "i,community".
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Oracle,
    Both,
}

#[derive(Args)]
struct DivergenceArgs {
    #[arg(long)]
    config: PathBuf,
    /// Node count; defaults to the model's n.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value = "closed")]
    method: Method,
    /// JSON report; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    est: PathBuf,
    /// JSON output; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Per-replication CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-point CSV with bound curves; defaults to <out>.plot.csv.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Overrides the config's master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Block matrix used for the SNR: paper or expectation.
    #[arg(long)]
    snr_variant: Option<BlockVariant>,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn sample(args: SampleArgs) -> Outcome {
    let params = ModelParams::from_json(&read_text(&args.config)?)?;
    let ds = sample_clsbm(&params, args.seed);
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", args.out.display())))?;
    write_graph(&ds.graph, &args.out.join("graph.csv"))?;
    write_attributes(&ds.attrs, &args.out.join("attributes.csv"))?;
    write_assignment(&ds.sigma, &args.out.join("truth.csv"))?;
    Ok(())
}

fn detect(args: DetectArgs) -> Outcome {
    let attrs = read_attributes(&args.attrs)?;
    let graph = read_graph(&args.graph, attrs.n())?;
    let weights = args.weights.map(LabelWeights::new).transpose()?;
    let opts = DetectOptions {
        seed: args.seed,
        restarts: args.restarts,
        num_labels: weights.as_ref().map(|w| w.as_slice().len()),
        weights,
        ..DetectOptions::default()
    };
    let est = clsbm::detect(&graph, &attrs, args.k, &opts)?;
    write_assignment(&est, &args.out)?;
    Ok(())
}

fn divergence(args: DivergenceArgs) -> Outcome {
    let params = ModelParams::from_json(&read_text(&args.config)?)?;
    let n = args.n.unwrap_or(params.n);
    if n == 0 {
        return Err(Failure::Validation("--n must be positive".into()));
    }
    let value = match args.method {
        Method::Closed => json!(divergence_closed_form(&params, n)),
        Method::Oracle => json!(divergence_oracle(&params, n)?),
        Method::Both => json!({
            "closed": divergence_closed_form(&params, n),
            "oracle": divergence_oracle(&params, n)?,
        }),
    };
    write_text(args.out.as_deref(), &serde_json::to_string_pretty(&value).expect("report serializes"))
}

fn score(args: ScoreArgs) -> Outcome {
    let (truth, kt) = read_assignment(&args.truth)?;
    let (est, ke) = read_assignment(&args.est)?;
    let r = misclassified_count(&truth, &est, kt.max(ke))?;
    let value = json!({
        "count": r.count,
        "rate": r.rate,
        "perm": r.best_perm.iter().map(|a| a + 1).collect::<Vec<_>>(),
        "confusion": r.confusion,
    });
    write_text(args.out.as_deref(), &serde_json::to_string_pretty(&value).expect("score serializes"))
}

fn experiment(args: ExperimentArgs) -> Outcome {
    let mut config = ExperimentConfig::from_json(&read_text(&args.config)?)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(v) = args.snr_variant {
        config.snr_variant = v;
    }
    let result = run_experiment(&config)?;
    emit_csv(&result, &args.out)?;
    let plot = args.plot.unwrap_or_else(|| args.out.with_extension("plot.csv"));
    emit_plot_data(&result, &plot)?;
    let failed = result.rows.iter().filter(|r| r.failed).count();
    if failed > 0 {
        eprintln!("{failed} of {} replications failed", result.rows.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Sample(a) => sample(a),
        Command::Detect(a) => detect(a),
        Command::Divergence(a) => divergence(a),
        Command::Score(a) => score(a),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
