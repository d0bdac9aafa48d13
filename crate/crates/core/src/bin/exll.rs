use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use exll::explain::{explain_with, export_topology, extract_rules};
use exll::harness::{
    make_ordering, reports_to_csv, run_experiment, run_permutation, ExperimentConfig, LearnerKind, Ordering,
};
use exll::io::{load_model, save_model, Dataset, Split};
use exll::{Error, Exll, ExllConfig, Result};

#[derive(Parser)]
#[command(name = "exll", version, about = "Single-pass explainable prototype classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Prinf,
    Mcinf,
    Fuse,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Ncm,
    Slda,
    Perceptron,
    Nb,
}

#[derive(clap::Args)]
struct DataArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Feature file to use instead of the manifest's `feature_files`.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(clap::Args)]
struct OrderArgs {
    /// iid, class-iid, instance, low-shot or k-shot.
    #[arg(long, default_value = "iid")]
    ordering: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per class for the k-shot ordering.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Single pass over the training split; writes a model snapshot.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        order: OrderArgs,
        /// JSON model configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Top-1 accuracy and posterior statistics of a snapshot.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        #[arg(long, value_enum, default_value = "fuse")]
        inference: ModeArg,
    },
    /// Explanation JSON for one manifest sample.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        query_id: String,
    },
    /// IF-THEN rules of a snapshot as JSON.
    Rules {
        #[arg(long)]
        model: PathBuf,
    },
    /// Prototype graph of a snapshot as JSON.
    Topology {
        #[arg(long)]
        model: PathBuf,
    },
    /// Multi-permutation experiment; prints one JSON report per line.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Write the CSV summary here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write the JSON lines here.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
    /// Train and evaluate a comparison learner in one go.
    Baseline {
        #[arg(long, value_enum)]
        learner: BaselineArg,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        order: OrderArgs,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    serde_json::from_str(&text).map_err(|e| Error::Json { context: path.display().to_string(), source: e })
}

fn ordering(args: &OrderArgs) -> Result<Ordering> {
    Ok(Ordering { kind: args.ordering.parse()?, seed: args.seed, k_shots: args.k })
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Json { context: "output".into(), source: e })
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train { data, order, config, out } => {
            let config: ExllConfig = match config {
                Some(p) => read_json(&p)?,
                None => ExllConfig::default(),
            };
            let dataset = Dataset::load(&data.manifest, data.features.as_deref())?;
            let plan = make_ordering(dataset.manifest(), &ordering(&order)?)?;
            let mut model = Exll::new(config)?;
            for &i in &plan.indices {
                model.train_sample(&dataset.feature_vector(i))?;
            }
            model.check_invariants()?;
            save_model(&out, &model)?;
            println!(
                "trained on {} samples: {} classes, {} prototypes -> {}",
                model.sample_count(),
                model.classes().len(),
                model.prototype_count(),
                out.display()
            );
        }
        Command::Eval { model, data, split, inference } => {
            let model = load_model(&model)?;
            let scorer = model.scorer()?;
            let dataset = Dataset::load(&data.manifest, data.features.as_deref())?;
            let split = match split {
                SplitArg::Train => Split::Train,
                SplitArg::Test => Split::Test,
            };
            let indices = dataset.indices(split);
            let (mut correct, mut max_prob) = (0u64, 0.0);
            for &i in &indices {
                let x = dataset.feature_vector(i).normalized()?;
                let posterior = match inference {
                    ModeArg::Prinf => scorer.prinf(&x)?,
                    ModeArg::Mcinf => scorer.mcinf(&x)?,
                    ModeArg::Fuse => scorer.fuse(&x)?,
                };
                correct += u64::from(posterior.predicted == dataset.class_of(i));
                max_prob += posterior.max_probability();
            }
            let total = indices.len().max(1) as f64;
            println!("accuracy {:.4} ({correct}/{})", correct as f64 / total, indices.len());
            println!("mean_max_probability {:.4}", max_prob / total);
        }
        Command::Explain { model, data, query_id } => {
            let model = load_model(&model)?;
            let scorer = model.scorer()?;
            let dataset = Dataset::load(&data.manifest, data.features.as_deref())?;
            let i = dataset
                .find(&query_id)
                .ok_or_else(|| Error::InvalidConfig(format!("no sample {query_id:?} in the manifest")))?;
            let x = dataset.feature_vector(i).normalized()?;
            let e = explain_with(&scorer, model.config().max_members_per_rule, &query_id, &x)?;
            println!("{}", to_json(&e)?);
        }
        Command::Rules { model } => println!("{}", to_json(&extract_rules(&load_model(&model)?)?)?),
        Command::Topology { model } => println!("{}", to_json(&export_topology(&load_model(&model)?)?)?),
        Command::Bench { config, jobs, csv, jsonl } => {
            let mut cfg: ExperimentConfig = read_json(&config)?;
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            let base = config.parent().unwrap_or(Path::new(""));
            let manifest = cfg
                .manifest
                .as_ref()
                .map(|m| base.join(m))
                .ok_or_else(|| Error::InvalidConfig("bench config needs a manifest".into()))?;
            let features = cfg.features.as_ref().map(|f| base.join(f));
            let dataset = Dataset::load(&manifest, features.as_deref())?;
            let report = run_experiment(&dataset, &cfg)?;
            let lines = report.to_jsonl();
            print!("{lines}");
            if let Some(p) = jsonl {
                exll::io::write_atomic(&p, lines.as_bytes())?;
            }
            if let Some(p) = csv {
                let mut rows = report.runs.clone();
                rows.push(report.average.clone());
                exll::io::write_atomic(&p, reports_to_csv(&rows).as_bytes())?;
            }
        }
        Command::Baseline { learner, data, order } => {
            let dataset = Dataset::load(&data.manifest, data.features.as_deref())?;
            let ordering = ordering(&order)?;
            let cfg = ExperimentConfig {
                learner: match learner {
                    BaselineArg::Ncm => LearnerKind::Ncm,
                    BaselineArg::Slda => LearnerKind::Slda,
                    BaselineArg::Perceptron => LearnerKind::Perceptron,
                    BaselineArg::Nb => LearnerKind::NaiveBayes,
                },
                ordering: ordering.kind,
                k_shots: ordering.k_shots,
                ..Default::default()
            };
            let r = run_permutation(&dataset, &cfg, ordering.seed)?;
            println!("accuracy {:.4} ({}/{})", r.top1_accuracy, r.correct, r.total);
            println!("param_count {}", r.param_count);
        }
    }
    Ok(())
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("Usage", e.to_string(), 1),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Invariant(_)) => fail(e.kind(), e.to_string(), 3),
        Err(e) => fail(e.kind(), e.to_string(), 2),
    }
}
