use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bregtree::io::{ingest_bow, ingest_csv, read_labels};
use bregtree::{
    dendrogram_purity, write_features_csv, Dataset, Dendrogram, Error, LabeledDataset, ModelKind, Pipeline,
    SmoothingChoice, Strategy,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bregtree", version, about = "Agglomerative clustering under Bregman divergences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dendrogram and write it out.
    Cluster {
        #[command(flatten)]
        run: RunArgs,
        /// Labels file; when given, purity is printed.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Number of top clusters to use as features.
        #[arg(long, requires = "out_features")]
        k: Option<usize>,
        #[arg(long, requires = "k")]
        out_features: Option<PathBuf>,
    },
    /// Build a dendrogram and print its purity against a labels file.
    Purity {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Build a dendrogram and write tree features for every input row.
    Features {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        k: usize,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out_features: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// kmeans, l1, gaussian-full, gaussian-diag or multinomial.
    #[arg(long)]
    model: ModelKind,
    /// auto or none.
    #[arg(long, default_value = "auto")]
    smoothing: SmoothingChoice,
    #[arg(long, default_value_t = 1.0)]
    bandwidth_scale: f64,
    /// heap or brute.
    #[arg(long, default_value = "heap")]
    strategy: Strategy,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_newick: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Bow,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Parse { .. } | Error::Format(_) => 3,
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure { code: 3, msg: format!("{}: {e}", path.display()) }
}

fn load(run: &RunArgs) -> Result<Dataset, Failure> {
    let wants_docs = run.model.needs_documents();
    match (run.format, wants_docs) {
        (Format::Csv, true) => return Err(usage(format!("model {} needs --format bow", run.model))),
        (Format::Bow, false) => return Err(usage(format!("model {} needs --format csv", run.model))),
        _ => {}
    }
    Ok(match run.format {
        Format::Csv => Dataset::Points(ingest_csv(&run.input)?.rows),
        Format::Bow => {
            let bow = ingest_bow(&run.input)?;
            Dataset::Documents { docs: bow.docs, vocab: bow.vocab }
        }
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn build(run: &RunArgs) -> Result<(Pipeline, Dataset, Dendrogram), Failure> {
    let data = load(run)?;
    let pipeline = Pipeline::new(run.model, &data, run.smoothing, run.bandwidth_scale)?;
    let start = Instant::now();
    let (tree, stats) = pipeline.cluster(&data, run.strategy)?;
    eprintln!(
        "clustered {} points with {} ({}) in {:.3}s: merges {}, cost evaluations {}, infinite costs {}, heap pushes {}, stale pops {}, peak candidates {}",
        data.len(),
        run.model,
        run.strategy,
        start.elapsed().as_secs_f64(),
        stats.merges,
        stats.cost_evaluations,
        stats.infinite_costs,
        stats.heap_pushes,
        stats.stale_pops,
        stats.peak_candidates,
    );
    if let Some(p) = &run.out_json {
        write_file(p, &tree.to_json())?;
    }
    if let Some(p) = &run.out_newick {
        write_file(p, &tree.to_newick())?;
    }
    Ok((pipeline, data, tree))
}

fn print_purity(tree: &Dendrogram, path: &Path) -> Result<(), Failure> {
    let labels = LabeledDataset::new(&read_labels(path)?)?;
    let p = dendrogram_purity(tree, &labels)?;
    println!("purity\t{p}");
    Ok(())
}

fn write_features(
    pipeline: &Pipeline,
    tree: &Dendrogram,
    data: &Dataset,
    k: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let start = Instant::now();
    let rows = pipeline.features(tree, k, data)?;
    match out {
        Some(p) => {
            let f = File::create(p).map_err(|e| io_failure(p, e))?;
            let mut w = BufWriter::new(f);
            write_features_csv(&mut w, &rows, k)?;
            w.flush().map_err(|e| io_failure(p, e))?;
        }
        None => write_features_csv(io::stdout().lock(), &rows, k)?,
    }
    eprintln!("wrote {} feature rows of width {k} in {:.3}s", rows.len(), start.elapsed().as_secs_f64());
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("BREGTREE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| usage(format!("BREGTREE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Cluster { run, labels, k, out_features } => {
            let (pipeline, data, tree) = build(&run)?;
            if let Some(l) = labels {
                print_purity(&tree, &l)?;
            }
            if let Some(k) = k {
                write_features(&pipeline, &tree, &data, k, out_features.as_deref())?;
            }
        }
        Command::Purity { run, labels } => {
            let (_, _, tree) = build(&run)?;
            print_purity(&tree, &labels)?;
        }
        Command::Features { run, k, out_features } => {
            let (pipeline, data, tree) = build(&run)?;
            write_features(&pipeline, &tree, &data, k, out_features.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bregtree: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
