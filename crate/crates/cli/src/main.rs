//! Command-line surface: dataset benchmarking (`run`), synthetic dataset
//! generation (`synth`), and blanket-recovery validation (`verify-mb`).
//!
//! Exit codes: 0 success, 1 benchmark completed with at least one failing
//! variant, 2 configuration error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairstream_core::{
    benchmark, generate_sem, load_csv, BenchmarkConfig, ColumnKind, GroundTruth,
    SelectOptions, SignificanceConfig, StreamEngine, StreamOrder, SyntheticSpec, Variant,
};

#[derive(Parser)]
#[command(name = "fairstream", version, about = "Streaming fairness-aware feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark selection variants on a CSV dataset and write report.json.
    Run(RunArgs),
    /// Generate a synthetic dataset with known ground-truth blankets.
    Synth(SynthArgs),
    /// Compare streamed blankets against a ground-truth file.
    VerifyMb(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Significance level for the conditional-independence tests.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Largest conditioning-set size searched during redundancy scans.
    #[arg(long, default_value_t = 3)]
    max_cond_size: usize,
    /// Feature arrival order: `natural` or `shuffled:<seed>`.
    #[arg(long, default_value = "natural")]
    order: StreamOrder,
}

impl CommonArgs {
    fn significance(&self) -> Result<SignificanceConfig, String> {
        SignificanceConfig::new(self.alpha, self.max_cond_size)
            .map_err(|e| format!("--alpha: {e}"))
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TestKind {
    /// Fisher's z on (standardized) continuous data.
    FisherZ,
    /// G² on discretized categorical data.
    G2,
}

#[derive(Args)]
struct RunArgs {
    /// Input CSV (RFC-4180, header row required).
    #[arg(long)]
    input: PathBuf,
    /// Name of the binary label column.
    #[arg(long)]
    label: String,
    /// Name of the protected-attribute column.
    #[arg(long)]
    protected: String,
    /// Selection variant; repeat for several. Defaults to all six.
    #[arg(long = "variant")]
    variants: Vec<Variant>,
    /// Conditional-independence test to use.
    #[arg(long, value_enum, default_value_t = TestKind::FisherZ)]
    test: TestKind,
    /// Equal-frequency bins used when discretizing for the G² test.
    #[arg(long, default_value_t = 5)]
    bins: usize,
    /// Number of seeded 70/30 train/test runs.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Where to write the JSON report.
    #[arg(long, default_value = "report.json")]
    output: PathBuf,
    /// Also write both egocentric graph states (JSON) to this path.
    #[arg(long)]
    dump_graph: Option<PathBuf>,
    /// Also write per-variant selection snapshots (JSON) to this path.
    #[arg(long)]
    dump_selection: Option<PathBuf>,
    /// Re-test replacement candidates against the label before admitting.
    #[arg(long)]
    revalidate: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of nodes in the generating graph (>= 3).
    #[arg(long)]
    nodes: usize,
    /// Number of rows to sample.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.25)]
    edge_prob: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Output CSV path.
    #[arg(long)]
    out_csv: PathBuf,
    /// Output ground-truth JSON path.
    #[arg(long)]
    out_truth: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Dataset CSV, typically produced by `synth`.
    #[arg(long)]
    input: PathBuf,
    /// Ground-truth JSON, produced by `synth`.
    #[arg(long)]
    truth: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Synth(args) => cmd_synth(args),
        Command::VerifyMb(args) => cmd_verify_mb(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, String> {
    let cfg = args.common.significance()?;
    let kind = match args.test {
        TestKind::FisherZ => ColumnKind::Continuous,
        TestKind::G2 => ColumnKind::Categorical,
    };
    if args.test == TestKind::G2 && args.bins < 2 {
        return Err("--bins: need at least 2 bins for the G² test".to_string());
    }
    let raw = load_csv(&args.input, &args.label, &args.protected, &BTreeMap::new())
        .map_err(|e| format!("--input: {e}"))?;
    let dataset = raw.coerced(kind, args.bins);
    let variants = if args.variants.is_empty() { Variant::ALL.to_vec() } else { args.variants.clone() };
    let bench = BenchmarkConfig {
        cfg: cfg.clone(),
        order: args.common.order,
        kind,
        runs: args.runs,
        opts: SelectOptions { revalidate: args.revalidate },
    };

    let report = benchmark(&dataset, &variants, &bench);
    std::fs::write(&args.output, report.to_json())
        .map_err(|e| format!("--output: cannot write {}: {e}", args.output.display()))?;
    print!("{}", report.to_table());

    if args.dump_graph.is_some() || args.dump_selection.is_some() {
        let mut engine = StreamEngine::run(&dataset, args.common.order, kind, cfg)
            .map_err(|e| e.to_string())?;
        if let Some(path) = &args.dump_graph {
            let dumps = serde_json::json!({
                "label": engine.g_y.dump(),
                "protected": engine.g_s.dump(),
            });
            write_pretty_json(path, &dumps)?;
        }
        if let Some(path) = &args.dump_selection {
            let mut snaps = Vec::new();
            for &variant in &variants {
                let snap = engine
                    .select(variant, &SelectOptions { revalidate: args.revalidate })
                    .map_err(|e| e.to_string())?;
                snaps.push(snap.dump(&engine.g_y));
            }
            write_pretty_json(path, &snaps)?;
        }
    }

    Ok(if report.any_error() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn write_pretty_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<(), String> {
    let mut body = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    body.push('\n');
    std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode, String> {
    let spec = SyntheticSpec {
        edge_prob: args.edge_prob,
        noise: args.noise,
        ..SyntheticSpec::new(args.nodes, args.seed)
    };
    let sample = generate_sem(&spec, args.n).map_err(|e| format!("--nodes: {e}"))?;
    let ds = &sample.dataset;

    let mut writer = csv::Writer::from_path(&args.out_csv)
        .map_err(|e| format!("--out-csv: cannot write {}: {e}", args.out_csv.display()))?;
    let mut header: Vec<String> = ds.feature_names().iter().map(|s| s.to_string()).collect();
    header.push(ds.label.name.clone());
    header.push(ds.protected.name.clone());
    writer.write_record(&header).map_err(|e| e.to_string())?;
    for row in 0..ds.n {
        let mut record: Vec<String> = ds.features.iter().map(|c| c.values[row].to_string()).collect();
        record.push(ds.label.values[row].to_string());
        record.push(ds.protected.values[row].to_string());
        writer.write_record(&record).map_err(|e| e.to_string())?;
    }
    writer.flush().map_err(|e| e.to_string())?;

    write_pretty_json(&args.out_truth, &sample.truth)?;
    println!(
        "wrote {} ({} rows, {} features) and {}",
        args.out_csv.display(),
        ds.n,
        ds.d(),
        args.out_truth.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_mb(args: VerifyArgs) -> Result<ExitCode, String> {
    let cfg = args.common.significance()?;
    let truth_body = std::fs::read_to_string(&args.truth)
        .map_err(|e| format!("--truth: cannot read {}: {e}", args.truth.display()))?;
    let truth: GroundTruth =
        serde_json::from_str(&truth_body).map_err(|e| format!("--truth: invalid JSON: {e}"))?;
    let dataset = load_csv(&args.input, &truth.label, &truth.protected, &BTreeMap::new())
        .map_err(|e| format!("--input: {e}"))?;

    let known: Vec<&str> = dataset.feature_names();
    for name in truth.mb_y.iter().chain(truth.mb_s.iter()) {
        if !known.contains(&name.as_str()) {
            return Err(format!(
                "--truth: feature `{name}` from the ground truth is not in the dataset"
            ));
        }
    }

    let engine = StreamEngine::run(&dataset, args.common.order, ColumnKind::Continuous, cfg)
        .map_err(|e| e.to_string())?;
    for (target, graph, truth_mb) in [
        (&truth.label, &engine.g_y, &truth.mb_y),
        (&truth.protected, &engine.g_s, &truth.mb_s),
    ] {
        let recovered: Vec<String> = graph
            .markov_blanket()
            .iter()
            .map(|&id| dataset.feature(id).name.clone())
            .collect();
        let tp = recovered.iter().filter(|n| truth_mb.contains(*n)).count() as f64;
        let precision = if recovered.is_empty() { 0.0 } else { tp / recovered.len() as f64 };
        let recall = if truth_mb.is_empty() { 1.0 } else { tp / truth_mb.len() as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        println!(
            "{target}: precision {precision:.3} recall {recall:.3} f1 {f1:.3} (recovered: {})",
            recovered.join(", ")
        );
    }
    Ok(ExitCode::SUCCESS)
}
