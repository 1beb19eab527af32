//! Command-line entry points.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use vngender_core::data::{dataset_stats, generate_synthetic, Dataset};
use vngender_core::eval::{self, confusion, macro_metrics, SplitSpec};
use vngender_core::featurize::{VectorizerConfig, VectorizerMode};
use vngender_core::lstm::{EmbeddingTable, LstmTrainConfig};
use vngender_core::models::ClassifierKind;
use vngender_core::names::{ComponentMask, NameError};
use vngender_core::pipeline::{self, ModelSpec};
use vngender_core::rng;

use crate::bundle::{self, BundleMeta, ModelBundle, PredictError};
use crate::dataset::{self as io, LoadReport};
use crate::{report, service};

pub const MODEL_PATH_ENV: &str = "GENDER_MODEL_PATH";

#[derive(Debug, Parser)]
#[command(name = "vngender", version, about = "Gender prediction from Vietnamese full names")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on the train split, report test metrics, write a bundle.
    Train(TrainArgs),
    /// Score a bundle on every record of a dataset.
    Evaluate(EvaluateArgs),
    /// Macro F1 for every name-component mask and model.
    Ablate(AblateArgs),
    /// Predict one line per name.
    Predict(PredictArgs),
    /// Serve the HTTP prediction API.
    Serve(ServeArgs),
    /// Label balance and top names per component.
    Stats(StatsArgs),
    /// Planted-rule synthetic dataset as CSV.
    Synth(SynthArgs),
}

/// A classical classifier kind or `lstm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Classical(ClassifierKind),
    Lstm,
}

impl FromStr for ModelChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("lstm") {
            Ok(Self::Lstm)
        } else {
            s.parse().map(Self::Classical)
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LstmArgs {
    /// Pretrained vectors in text `.vec` format; without it every token gets
    /// a seeded random vector.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    pub embedding_dim: usize,
    #[arg(long, default_value_t = 128)]
    pub hidden: usize,
    #[arg(long, default_value_t = 2)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.5)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 8)]
    pub max_seq_len: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// mnb, bnb, lr, svm, tree, forest or lstm.
    #[arg(long, default_value = "multinomial_nb")]
    pub model: ModelChoice,
    #[arg(long, default_value = "count")]
    pub vectorizer: VectorizerMode,
    #[arg(long, default_value = "mn+fin")]
    pub mask: ComponentMask,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bundle path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the experiment result (metrics, misclassified names) as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub lstm: LstmArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Bundle path.
    #[arg(long, env = MODEL_PATH_ENV)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated model kinds.
    #[arg(long, value_delimiter = ',', default_value = "mnb,bnb,lr,svm,tree,forest")]
    pub model: Vec<ModelChoice>,
    /// Comma-separated vectorizers; every classical model runs with each.
    #[arg(long, value_delimiter = ',', default_value = "count")]
    pub vectorizer: Vec<VectorizerMode>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the full report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub lstm: LstmArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Bundle path.
    #[arg(long, env = MODEL_PATH_ENV)]
    pub model: PathBuf,
    /// Print one JSON response per line.
    #[arg(long)]
    pub json: bool,
    #[arg(required = true)]
    pub names: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Bundle path.
    #[arg(long, env = MODEL_PATH_ENV)]
    pub model: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: std::net::SocketAddr,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub n: usize,
    pub fidelity: f64,
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs; usage errors exit 2, failures 1.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let stdout = std::io::stdout();
    match run(cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

pub fn run(cmd: Command, out: &mut dyn Write) -> anyhow::Result<()> {
    match cmd {
        Command::Train(a) => train(a, out),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Ablate(a) => ablate(a, out),
        Command::Predict(a) => predict(a, out),
        Command::Serve(a) => serve(a),
        Command::Stats(a) => stats(a, out),
        Command::Synth(a) => synth(a, out),
    }
}

fn load_data(path: &Path) -> anyhow::Result<Dataset> {
    let (d, LoadReport { rejects, .. }) = io::load_dataset(path)?;
    for r in rejects.iter().take(20) {
        eprintln!("warning: {}:{}: {}", path.display(), r.line, r.reason);
    }
    if rejects.len() > 20 {
        eprintln!("warning: {} more rejected rows", rejects.len() - 20);
    }
    Ok(d)
}

fn embeddings(a: &LstmArgs, seed: u64) -> anyhow::Result<Arc<EmbeddingTable>> {
    let table = match &a.embeddings {
        Some(path) => {
            let (t, rep) = io::load_embeddings(path, a.embedding_dim, seed)?;
            for (line, token) in &rep.duplicates {
                eprintln!("warning: {}:{line}: duplicate token `{token}` ignored", path.display());
            }
            t
        }
        None => EmbeddingTable::new(a.embedding_dim, seed)?,
    };
    Ok(Arc::new(table))
}

fn model_spec(choice: ModelChoice, seed: u64, lstm: &LstmArgs, emb: Option<&Arc<EmbeddingTable>>) -> ModelSpec {
    match choice {
        ModelChoice::Classical(kind) => ModelSpec::classical(kind, seed),
        ModelChoice::Lstm => ModelSpec::lstm(
            LstmTrainConfig {
                hidden: lstm.hidden,
                batch_size: lstm.batch_size,
                epochs: lstm.epochs,
                learning_rate: lstm.learning_rate,
                max_seq_len: lstm.max_seq_len,
                seed,
            },
            Arc::clone(emb.expect("embeddings loaded for lstm")),
        ),
    }
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn train(a: TrainArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let d = load_data(&a.data)?;
    let model_seed = rng::derive(a.seed, 1);
    let emb = match a.model {
        ModelChoice::Lstm => Some(embeddings(&a.lstm, a.seed)?),
        ModelChoice::Classical(_) => None,
    };
    let spec = model_spec(a.model, model_seed, &a.lstm, emb.as_ref());
    let vcfg = VectorizerConfig::for_mode(a.vectorizer);
    let split = eval::stratified_split(&d, &SplitSpec::with_seed(a.seed))?;
    let (model, result) = eval::train_and_evaluate(&split, a.mask, &spec, &vcfg)?;
    let meta = BundleMeta {
        model_id: format!("{}/{}/seed{}", pipeline::arm_name(&spec, &vcfg), a.mask, a.seed),
        mask: a.mask,
        dataset_tag: d.source_tag.clone(),
        seed: a.seed,
        created_unix: now_unix(),
        metrics: Some(result.metrics),
    };
    let source = if emb.as_ref().is_some_and(|e| !e.is_empty()) { a.lstm.embeddings.clone() } else { None };
    bundle::save_model(&ModelBundle::new(model, meta, source), &a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(p) = &a.report {
        std::fs::write(p, serde_json::to_vec_pretty(&result)?).with_context(|| format!("writing {}", p.display()))?;
    }
    out.write_all(report::experiment_tsv(&result).as_bytes())?;
    Ok(())
}

fn evaluate(a: EvaluateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let b = bundle::load_model(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let d = load_data(&a.data)?;
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    let mut skipped = 0usize;
    for r in &d.records {
        match b.predict_name(&r.full_name) {
            Ok(p) => {
                truth.push(r.gender);
                pred.push(p.prediction.label);
            }
            Err(PredictError::Name(NameError::EmptySelection(_))) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let cm = confusion(&truth, &pred)?;
    let m = macro_metrics(&cm)?;
    if a.json {
        let v = serde_json::json!({ "model_id": b.meta.model_id, "metrics": m, "confusion": cm, "skipped": skipped });
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        writeln!(out, "# model {} mask {} records {} skipped {skipped}", b.meta.model_id, b.mask(), truth.len())?;
        out.write_all(report::metrics_tsv(&m, &cm).as_bytes())?;
    }
    Ok(())
}

fn ablate(a: AblateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    if a.model.is_empty() || a.vectorizer.is_empty() {
        bail!("need at least one model and one vectorizer");
    }
    let d = load_data(&a.data)?;
    let emb = if a.model.contains(&ModelChoice::Lstm) { Some(embeddings(&a.lstm, a.seed)?) } else { None };
    let mut arms = Vec::new();
    for (i, &choice) in a.model.iter().enumerate() {
        let spec = model_spec(choice, rng::derive(a.seed, 100 + i as u64), &a.lstm, emb.as_ref());
        if spec.is_lstm() {
            arms.push((spec, VectorizerConfig::count()));
        } else {
            for &mode in &a.vectorizer {
                arms.push((spec.clone(), VectorizerConfig::for_mode(mode)));
            }
        }
    }
    let rep = eval::run_ablation(&d, &arms, &SplitSpec::with_seed(a.seed))?;
    if let Some(p) = &a.out {
        std::fs::write(p, serde_json::to_vec_pretty(&rep)?).with_context(|| format!("writing {}", p.display()))?;
    }
    out.write_all(report::ablation_tsv(&rep).as_bytes())?;
    Ok(())
}

fn predict(a: PredictArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let b = bundle::load_model(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    for name in &a.names {
        let req = service::PredictRequest { name: name.clone() };
        let r = service::respond(&b, &req).map_err(|(_, code, msg)| anyhow::anyhow!("{name:?}: {code}: {msg}"))?;
        if a.json {
            writeln!(out, "{}", serde_json::to_string(&r)?)?;
        } else {
            writeln!(out, "{name}\t{}\t{}\t{:.4}", r.label, r.gender, r.score)?;
        }
    }
    Ok(())
}

fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let b = Arc::new(bundle::load_model(&a.model).with_context(|| format!("loading {}", a.model.display()))?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = service::bind(a.bind).await.with_context(|| format!("binding {}", a.bind))?;
        eprintln!("serving {} on http://{}", b.meta.model_id, listener.local_addr()?);
        service::serve(b, listener).await?;
        Ok(())
    })
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let d = load_data(&a.data)?;
    let st = dataset_stats(&d, a.top_k)?;
    let text = if a.json { serde_json::to_string_pretty(&st)? + "\n" } else { report::stats_tsv(&st) };
    match &a.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn synth(a: SynthArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let d = generate_synthetic(a.n, a.fidelity, a.seed)?;
    match &a.out {
        Some(p) => io::save_dataset(&d, p)?,
        None => io::write_dataset(&d, out)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_choices() {
        assert_eq!("LSTM".parse::<ModelChoice>(), Ok(ModelChoice::Lstm));
        assert_eq!("svm".parse::<ModelChoice>(), Ok(ModelChoice::Classical(ClassifierKind::LinearSvm)));
        assert!("knn".parse::<ModelChoice>().is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with_args(["vngender", "frobnicate"]), ExitCode::from(2));
        assert_eq!(main_with_args(["vngender", "synth", "10", "0.5", "1", "--bogus"]), ExitCode::from(2));
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "vngender", "train", "--data", "d.csv", "--model", "svm", "--vectorizer", "tfidf", "--mask", "fan+fin", "--seed",
            "3", "--out", "m.bin",
        ])
        .unwrap();
        let Command::Train(t) = cli.command else { panic!() };
        assert_eq!(t.model, ModelChoice::Classical(ClassifierKind::LinearSvm));
        assert_eq!(t.vectorizer, VectorizerMode::Tfidf);
        assert_eq!(t.mask, ComponentMask::FAN_FIN);
        let cli = Cli::try_parse_from(["vngender", "ablate", "--data", "d.csv", "--model", "mnb,lstm", "--vectorizer", "count,tfidf"]).unwrap();
        let Command::Ablate(ab) = cli.command else { panic!() };
        assert_eq!(ab.model, [ModelChoice::Classical(ClassifierKind::MultinomialNb), ModelChoice::Lstm]);
        assert_eq!(ab.vectorizer.len(), 2);
    }
}
