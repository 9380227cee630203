//! Command-line front end. [`run`] parses arguments and returns the exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{
    atomic_write, load_checkpoint, load_dataset, save_checkpoint, save_dataset, split,
    synth_generate, write_affinity, Checkpoint, Dataset, Split, SplitSpec, SynthSpec,
};
use crate::error::{Error, Result};
use crate::eval::{
    ablation_table, evaluate, median_report, rank_bundles, EvalOptions, EvalReport, Scorer,
};
use crate::gradcheck::{gradcheck_suite, GRADCHECK_TOLERANCE};
use crate::graph::{SparsityGroups, TripartiteGraph, DEFAULT_GROUP_BOUNDARIES};
use crate::model::{AblationSwitches, TrainedModel};
use crate::train::{freeze, train, train_graph, TrainConfig, TrainOutcome, TrainStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bgcn",
    version,
    about = "Bundle recommendation with two-level graph convolution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write a checkpoint plus a JSON-lines log.
    Train(TrainArgs),
    /// Full-ranking evaluation of a checkpoint.
    Evaluate(EvalArgs),
    /// Top-K bundles for one user.
    Recommend(RecommendArgs),
    /// Run one or more ablation variants over several seeds.
    Ablate(AblateArgs),
    /// Finite-difference check of the analytic gradients.
    Gradcheck(GradcheckArgs),
    /// Generate a planted-structure synthetic dataset.
    Synth(SynthArgs),
}

/// Hyperparameter overrides shared by `train` and `ablate`.
#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// key=value config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// bgcn or mf
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub p_hard: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub eval_every: Option<usize>,
    #[arg(long)]
    pub message_dropout: Option<f64>,
    #[arg(long)]
    pub node_dropout: Option<f64>,
    /// Any other config key, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Ablation variant names, repeatable or comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub ablation: Vec<String>,
    /// Training log path (default: <out>.log.jsonl).
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "20,40,80")]
    pub ks: Vec<usize>,
    /// Break metrics down by training-degree group.
    #[arg(long)]
    pub groups: bool,
    #[arg(long, value_delimiter = ',')]
    pub boundaries: Option<Vec<usize>>,
    /// Evaluate against the validation split instead of test.
    #[arg(long)]
    pub validation: bool,
    /// Report path (default: <ckpt>.eval.tsv).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub user: usize,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Variants; each is one or more ablation names joined by '+'.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "both-levels,item-level,bundle-level,no-b2b,unweighted-b2b,no-hard,hard-item,hard-bundle"
    )]
    pub variants: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Switch combinations to check, each a '+'-joined list of ablation
    /// names; default is every combination.
    #[arg(long, value_delimiter = ',')]
    pub switches: Vec<String>,
    /// Perturb one analytic gradient entry (negative control).
    #[arg(long, hide = true)]
    pub corrupt_gradient: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// key=value spec file; defaults are used for missing keys.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Usage-class errors map to exit code 2.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Index { .. } => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Recommend(a) => cmd_recommend(&a),
        Command::Ablate(a) => cmd_ablate(&a),
        Command::Gradcheck(a) => cmd_gradcheck(&a),
        Command::Synth(a) => cmd_synth(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

/// Defaults, then the config file, then flags.
pub fn resolve_config(args: &ConfigArgs, ablations: &[String]) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_kv_text(&read_text(path)?)?;
    }
    let mut set = |key: &str, v: Option<String>| v.map_or(Ok(()), |v| cfg.set(key, &v));
    set("seed", args.seed.map(|v| v.to_string()))?;
    set("split_seed", args.split_seed.map(|v| v.to_string()))?;
    set("model", args.model.clone())?;
    set("max_epochs", args.max_epochs.map(|v| v.to_string()))?;
    set("lr", args.lr.map(|v| v.to_string()))?;
    set("lambda", args.lambda.map(|v| v.to_string()))?;
    set("batch_size", args.batch_size.map(|v| v.to_string()))?;
    set("dim", args.dim.map(|v| v.to_string()))?;
    set("layers", args.layers.map(|v| v.to_string()))?;
    set("p_hard", args.p_hard.map(|v| v.to_string()))?;
    set("tau", args.tau.map(|v| v.to_string()))?;
    set("patience", args.patience.map(|v| v.to_string()))?;
    set("eval_every", args.eval_every.map(|v| v.to_string()))?;
    set(
        "message_dropout",
        args.message_dropout.map(|v| v.to_string()),
    )?;
    set("node_dropout", args.node_dropout.map(|v| v.to_string()))?;
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::config("set", format!("expected KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    for name in ablations {
        for part in name.split('+') {
            cfg.apply_ablation(part)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn echo_config(cfg: &TrainConfig) {
    eprintln!("resolved config (seed {}):", cfg.seed);
    for line in cfg.to_kv_text().lines() {
        eprintln!("  {line}");
    }
}

fn load_split(data: &Path, cfg: &TrainConfig) -> Result<(Dataset, Split)> {
    let ds = load_dataset(data)?;
    let sp = split(
        &ds,
        &SplitSpec {
            seed: cfg.split_seed,
            ..Default::default()
        },
    )?;
    Ok((ds, sp))
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_train(a: &TrainArgs) -> Result<i32> {
    let cfg = resolve_config(&a.config, &a.ablation)?;
    echo_config(&cfg);
    let (ds, sp) = load_split(&a.data, &cfg)?;
    eprintln!("{}", ds.stats());
    let outcome = train(&cfg, &ds, &sp)?;
    write_outputs(a, &cfg, &outcome)?;
    if let TrainStatus::Diverged { epoch, msg } = &outcome.status {
        eprintln!(
            "error: {}",
            Error::Diverged {
                epoch: *epoch,
                msg: msg.clone()
            }
        );
        eprintln!("wrote last good checkpoint to {}", a.out.display());
        return Ok(EXIT_RUNTIME);
    }
    eprintln!(
        "best epoch {:?}, validation recall@{} {:?}; wrote {}",
        outcome.best_epoch,
        cfg.select_k,
        outcome.best_val_recall,
        a.out.display()
    );
    Ok(EXIT_OK)
}

fn write_outputs(a: &TrainArgs, cfg: &TrainConfig, outcome: &TrainOutcome) -> Result<()> {
    let ckpt = Checkpoint {
        model: outcome.model.clone(),
        config_echo: cfg.to_kv_text(),
    };
    save_checkpoint(&ckpt, &a.out)?;
    let log_path = a
        .log
        .clone()
        .unwrap_or_else(|| sidecar(&a.out, ".log.jsonl"));
    atomic_write(&log_path, outcome.log.to_json_lines().as_bytes())
}

/// Loads a checkpoint whose dimensions match `ds`, with its config echo.
fn load_matching(path: &Path, ds: &Dataset) -> Result<(TrainedModel, TrainConfig)> {
    let ckpt = load_checkpoint(path)?;
    let cfg = TrainConfig::from_kv_text(&ckpt.config_echo)?;
    let expect = |name: &str, rows: usize, want: usize, what: &str| {
        if rows == want {
            Ok(())
        } else {
            Err(Error::Checkpoint(format!(
                "tensor {name} has {rows} rows but the dataset has {want} {what}"
            )))
        }
    };
    match &ckpt.model {
        TrainedModel::Bgcn(p) => {
            expect("users", p.num_users(), ds.num_users, "users")?;
            expect("items", p.num_items(), ds.num_items, "items")?;
            expect("bundles", p.num_bundles(), ds.num_bundles, "bundles")?;
        }
        TrainedModel::Mf(p) => {
            expect("mf_users", p.num_users(), ds.num_users, "users")?;
            expect("mf_bundles", p.num_bundles(), ds.num_bundles, "bundles")?;
        }
    }
    Ok((ckpt.model, cfg))
}

fn report_with_header(cfg: &TrainConfig, body: &str) -> String {
    let mut s: String = cfg
        .to_kv_text()
        .lines()
        .map(|l| format!("# {l}\n"))
        .collect();
    s.push_str(body);
    s
}

fn groups_for(
    graph: &TripartiteGraph,
    on: bool,
    bounds: &Option<Vec<usize>>,
) -> Result<Option<SparsityGroups>> {
    if !on {
        return Ok(None);
    }
    let b = bounds
        .clone()
        .unwrap_or_else(|| DEFAULT_GROUP_BOUNDARIES.to_vec());
    SparsityGroups::new(graph, &b).map(Some)
}

fn cmd_evaluate(a: &EvalArgs) -> Result<i32> {
    let ds = load_dataset(&a.data)?;
    let (model, cfg) = load_matching(&a.ckpt, &ds)?;
    echo_config(&cfg);
    let sp = split(
        &ds,
        &SplitSpec {
            seed: cfg.split_seed,
            ..Default::default()
        },
    )?;
    let graph = train_graph(&ds, &sp.train)?;
    let frozen = freeze(&model, &graph, &cfg)?;
    let groups = groups_for(&graph, a.groups, &a.boundaries)?;
    let (truth, exclude) = if a.validation {
        (&sp.val, sp.train.clone())
    } else {
        (&sp.test, sp.train.union(&sp.val))
    };
    let report = evaluate(
        &frozen,
        truth,
        &exclude,
        EvalOptions {
            ks: &a.ks,
            groups: groups.as_ref(),
            threads: a.threads,
        },
    )?;
    print!("{}", report.to_table());
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| sidecar(&a.ckpt, ".eval.tsv"));
    atomic_write(&out, report_with_header(&cfg, &report.to_tsv()).as_bytes())?;
    Ok(EXIT_OK)
}

fn cmd_recommend(a: &RecommendArgs) -> Result<i32> {
    let ds = load_dataset(&a.data)?;
    if a.user >= ds.num_users {
        return Err(Error::Index {
            what: "user",
            index: a.user,
            len: ds.num_users,
        });
    }
    let (model, cfg) = load_matching(&a.ckpt, &ds)?;
    echo_config(&cfg);
    let sp = split(
        &ds,
        &SplitSpec {
            seed: cfg.split_seed,
            ..Default::default()
        },
    )?;
    let graph = train_graph(&ds, &sp.train)?;
    let frozen = freeze(&model, &graph, &cfg)?;
    let mut scores = vec![0.0; frozen.num_bundles()];
    frozen.score_user(a.user, &mut scores);
    for (rank, b) in rank_bundles(&scores, sp.train.of_user(a.user))
        .iter()
        .take(a.k)
        .enumerate()
    {
        println!("{} {} {:.6}", rank + 1, b, scores[*b as usize]);
    }
    Ok(EXIT_OK)
}

fn cmd_ablate(a: &AblateArgs) -> Result<i32> {
    let base = resolve_config(&a.config, &[])?;
    echo_config(&base);
    let (ds, sp) = load_split(&a.data, &base)?;
    let mut rows: Vec<(String, EvalReport)> = Vec::new();
    for variant in &a.variants {
        let mut reports = Vec::new();
        for &seed in &a.seeds {
            let mut cfg = resolve_config(&a.config, std::slice::from_ref(variant))?;
            cfg.seed = seed;
            let out = train(&cfg, &ds, &sp)?;
            if let TrainStatus::Diverged { epoch, msg } = out.status {
                return Err(Error::Diverged {
                    epoch,
                    msg: format!("{variant} seed {seed}: {msg}"),
                });
            }
            let graph = train_graph(&ds, &sp.train)?;
            let frozen = freeze(&out.model, &graph, &cfg)?;
            let r = evaluate(
                &frozen,
                &sp.test,
                &sp.train.union(&sp.val),
                EvalOptions {
                    ks: &[a.k],
                    ..Default::default()
                },
            )?;
            eprintln!(
                "{variant} seed {seed}: recall@{} {:.4}",
                a.k,
                r.recall(a.k).unwrap_or(0.0)
            );
            reports.push(r);
        }
        rows.push((variant.clone(), median_report(&reports)?));
    }
    let table = ablation_table(&rows, a.k);
    print!("{table}");
    if let Some(out) = &a.out {
        atomic_write(out, report_with_header(&base, &table).as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn cmd_gradcheck(a: &GradcheckArgs) -> Result<i32> {
    let combos = if a.switches.is_empty() {
        AblationSwitches::all()
    } else {
        a.switches
            .iter()
            .map(|spec| {
                let mut cfg = TrainConfig::default();
                for part in spec.split('+') {
                    cfg.apply_ablation(part)?;
                }
                cfg.switches.validate()?;
                Ok(cfg.switches)
            })
            .collect::<Result<Vec<_>>>()?
    };
    eprintln!(
        "gradcheck seed {} over {} switch combinations",
        a.seed,
        combos.len()
    );
    let report = gradcheck_suite(a.seed, &combos, a.corrupt_gradient)?;
    print!("{}", report.to_table());
    println!(
        "max relative error {:.3e} (tolerance {GRADCHECK_TOLERANCE:e})",
        report.max_error()
    );
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_RUNTIME
    })
}

fn cmd_synth(a: &SynthArgs) -> Result<i32> {
    let mut text = match &a.spec {
        Some(p) => read_text(p)?,
        None => String::new(),
    };
    if let Some(seed) = a.seed {
        text.push_str(&format!("\nseed={seed}\n"));
    }
    let spec = SynthSpec::from_kv_text(&text)?;
    eprintln!("synth spec: {spec:?}");
    let synth = synth_generate(&spec)?;
    save_dataset(&synth.dataset, &a.out)?;
    write_affinity(&synth, &a.out.join(AFFINITY_FILE))?;
    eprintln!("{}", synth.dataset.stats());
    Ok(EXIT_OK)
}

/// Sidecar with the generator's ground-truth user × bundle affinities.
pub const AFFINITY_FILE: &str = "affinity.txt";
