//! Command-line interface: argument parsing, run manifests and subcommands.

pub mod config;
pub mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

pub use config::{RunConfig, SampleConfig};
pub use manifest::RunManifest;

use crate::chem::{canonicalize, morgan_fingerprint, parse_corpus, parse_smiles};
use crate::evalkit::{
    builtin_motifs, motif_search, motif_table, project_chemical_space, projection_csv, projection_svg,
    rediscovery_rate, rediscovery_table, reference_keys, sweep_table, volume_sweep, warhead_distance, GenerationRun,
    PoseFile,
};
use crate::io::atomic_write;
use crate::moo::{reports_csv, rl_train};
use crate::neural::{
    gradcam, pretrain_generator, retrain_balanced, train_graph_classifier, GeneratorModel, GraphModel, HeadKind,
    Label, LayerKind,
};
use crate::scorers::score_csv;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_RUNTIME: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "covgen", version, about = "Multi-objective RL engine for covalent inhibitor generation")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run seed; overrides the configuration file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving the manifest and outputs.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pretrain the SMILES generator, or a graph model with --graph-head.
    Pretrain(PretrainArgs),
    /// Policy-gradient fine-tuning of a generator against a scorer preset.
    Rltrain(RltrainArgs),
    /// Sample SMILES from a generator checkpoint.
    Sample(SampleArgs),
    /// Score molecules with a scorer preset.
    Score(ScoreArgs),
    /// Rediscovery rate of a scored run against a reference corpus.
    Evaluate(EvaluateArgs),
    /// Graph-model attribution maps and optional warhead distances.
    Attribute(AttributeArgs),
    /// Warhead motif search over the desirable molecules of a run.
    MotifSearch(MotifArgs),
    /// Two-dimensional chemical-space projection of fingerprint cohorts.
    Project(ProjectArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HeadArg {
    Binary,
    Multiclass,
    Regression,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LayerArg {
    Gcn,
    Attention,
    Deep,
}

#[derive(Debug, Args)]
pub struct PretrainArgs {
    /// Training corpus: `SMILES[\tid[\tlabel]]` lines or CSV with a smiles column.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Train a graph model with this head on the corpus labels.
    #[arg(long, value_enum)]
    pub graph_head: Option<HeadArg>,
    /// Graph layer type.
    #[arg(long, value_enum)]
    pub graph_layer: Option<LayerArg>,
    /// Retrain a binary graph model on a class-balanced subsample.
    #[arg(long)]
    pub balanced: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RltrainArgs {
    /// Pretrained generator checkpoint.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Molecules: `SMILES[\tid]` lines or CSV with smiles and optional id columns.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Score table with smiles and desirable columns.
    #[arg(long)]
    pub run: PathBuf,
    /// Reference inhibitor corpus.
    #[arg(long)]
    pub reference: PathBuf,
    /// Model label for the table row; defaults to the run file stem.
    #[arg(long)]
    pub name: Option<String>,
    /// Ascending generation volumes for a prefix sweep.
    #[arg(long, value_delimiter = ',')]
    pub scales: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct AttributeArgs {
    /// Graph model checkpoint.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Class to explain; defaults to 1 for binary heads, else 0.
    #[arg(long)]
    pub class: Option<usize>,
    /// Directory of `<id>.pose` files for warhead distances.
    #[arg(long)]
    pub poses: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MotifArgs {
    #[arg(long)]
    pub run: PathBuf,
    /// Extra motif as NAME=SMILES; repeatable.
    #[arg(long = "motif")]
    pub motifs: Vec<String>,
    /// Search only the --motif patterns.
    #[arg(long)]
    pub no_builtin: bool,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Cohort file; repeatable. The cohort tag is the file stem.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub components: usize,
    /// Also write an SVG scatter plot.
    #[arg(long)]
    pub svg: bool,
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("covgen: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("COVGEN_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("COVGEN_THREADS='{v}' is not a positive integer")))?;
    // A pool may already exist when run in-process more than once.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    configure_threads()?;
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    let seed = cfg.apply_seed(cli.seed);
    let mut ctx = Context { cfg, seed, out_dir: cli.out_dir, argv, manifest: None };
    if let Some(p) = &cli.config {
        ctx.track(p);
    }
    match cli.command {
        Command::Pretrain(a) => pretrain(&mut ctx, a),
        Command::Rltrain(a) => rltrain(&mut ctx, a),
        Command::Sample(a) => sample(&mut ctx, a),
        Command::Score(a) => score(&mut ctx, a),
        Command::Evaluate(a) => evaluate(&mut ctx, a),
        Command::Attribute(a) => attribute(&mut ctx, a),
        Command::MotifSearch(a) => motifs(&mut ctx, a),
        Command::Project(a) => project(&mut ctx, a),
    }
}

struct Context {
    cfg: RunConfig,
    seed: u64,
    out_dir: PathBuf,
    argv: Vec<String>,
    manifest: Option<RunManifest>,
}

impl Context {
    fn track(&mut self, p: &Path) {
        let m = self.manifest.get_or_insert_with(RunManifest::default);
        m.inputs.push(p.to_path_buf());
    }

    fn read(&mut self, p: &Path) -> Result<String, CliError> {
        let text = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        self.track(p);
        Ok(text)
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Writes the manifest for `command` ahead of any result file and
    /// returns the config hash.
    fn begin(&mut self, command: &str, params: serde_json::Value, outputs: &[PathBuf]) -> Result<String, CliError> {
        let inputs = self.manifest.take().map(|m| m.inputs).unwrap_or_default();
        let manifest = RunManifest::new(command, &self.cfg, params, self.seed, inputs, outputs.to_vec(), self.argv.clone())
            .map_err(|e| CliError::Input(e.to_string()))?;
        manifest.write(&self.out(&format!("{command}.manifest.json"))).map_err(runtime)?;
        let hash = manifest.config_hash.clone();
        self.manifest = Some(manifest);
        Ok(hash)
    }

    fn write(&self, path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        atomic_write(path, bytes.as_ref()).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }
}

fn checkpoint_files(p: &Path) -> [PathBuf; 2] {
    let mut side = p.as_os_str().to_owned();
    side.push(".json");
    [p.to_path_buf(), PathBuf::from(side)]
}

/// `(id, smiles, label)` rows from a `.csv` table or a line-oriented corpus.
fn read_molecules(ctx: &mut Context, p: &Path) -> Result<Vec<(String, String, Option<String>)>, CliError> {
    let text = ctx.read(p)?;
    if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let bad = |e: csv::Error| CliError::Input(format!("{}: {e}", p.display()));
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(bad)?.clone();
        let col = |n: &str| header.iter().position(|h| h.trim() == n);
        let s = col("smiles").ok_or_else(|| CliError::Input(format!("{}: no 'smiles' column", p.display())))?;
        let (id, label) = (col("id"), col("label"));
        let mut out = Vec::new();
        for (k, row) in rdr.records().enumerate() {
            let row = row.map_err(bad)?;
            let get = |c: Option<usize>| c.and_then(|c| row.get(c)).map(str::trim).filter(|v| !v.is_empty());
            out.push((
                get(id).map_or_else(|| format!("mol{}", k + 1), str::to_string),
                get(Some(s)).unwrap_or_default().to_string(),
                get(label).map(str::to_string),
            ));
        }
        Ok(out)
    } else {
        Ok(parse_corpus(&text).into_iter().map(|e| (e.id, e.smiles, e.label)).collect())
    }
}

fn pretrain(ctx: &mut Context, a: PretrainArgs) -> Result<(), CliError> {
    let rows = read_molecules(ctx, &a.corpus)?;
    let model_path = ctx.out("model.ckpt");
    let log_path = ctx.out("pretrain_log.csv");
    let mut outputs = checkpoint_files(&model_path).to_vec();
    outputs.push(log_path.clone());

    let Some(head) = a.graph_head else {
        if a.balanced || a.graph_layer.is_some() {
            return Err(CliError::Config("--balanced and --graph-layer need --graph-head".into()));
        }
        let mut pc = ctx.cfg.pretrain.clone();
        if let Some(e) = a.epochs {
            pc.epochs = e;
        }
        let hash = ctx.begin("pretrain", json!({ "model": "generator", "config": pc }), &outputs)?;
        let corpus: Vec<String> = rows.into_iter().map(|r| r.1).collect();
        let (model, report) = pretrain_generator(&corpus, &pc).map_err(runtime)?;
        model.save(&model_path).map_err(runtime)?;
        let mut log = format!("# config_hash={hash}\nepoch,train_loss,holdout_loss\n");
        for e in &report.epochs {
            let h = e.holdout_loss.map(|v| format!("{v:.6}")).unwrap_or_default();
            log.push_str(&format!("{},{:.6},{h}\n", e.epoch, e.train_loss));
        }
        return ctx.write(&log_path, log);
    };

    let mut gc = ctx.cfg.graph.clone();
    gc.arch.head = match head {
        HeadArg::Binary => HeadKind::Binary,
        HeadArg::Multiclass => HeadKind::Multiclass,
        HeadArg::Regression => HeadKind::Regression,
    };
    if let Some(l) = a.graph_layer {
        gc.arch.kind = match l {
            LayerArg::Gcn => LayerKind::Gcn,
            LayerArg::Attention => LayerKind::Attention,
            LayerArg::Deep => LayerKind::Deep,
        };
    }
    if let Some(e) = a.epochs {
        gc.epochs = e;
    }
    if a.balanced && gc.arch.head != HeadKind::Binary {
        return Err(CliError::Config("--balanced needs a binary head".into()));
    }
    let mut data = Vec::with_capacity(rows.len());
    let mut skipped = 0;
    for (id, smiles, label) in rows {
        let label = label.ok_or_else(|| CliError::Input(format!("molecule '{id}' has no label")))?;
        let label = match gc.arch.head {
            HeadKind::Regression => label.parse::<f64>().ok().filter(|v| v.is_finite()).map(Label::Value),
            _ => label.parse::<usize>().ok().map(Label::Class),
        }
        .ok_or_else(|| CliError::Input(format!("molecule '{id}': bad label '{label}'")))?;
        match parse_smiles(&smiles) {
            Ok(m) if !m.is_empty() => data.push((m, label)),
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} unparsable training molecules");
    }
    let hash = ctx.begin("pretrain", json!({ "model": "graph", "balanced": a.balanced, "config": gc }), &outputs)?;
    let trained = if a.balanced { retrain_balanced(&data, &gc) } else { train_graph_classifier(&data, &gc) };
    let (model, report) = trained.map_err(|e| CliError::Input(e.to_string()))?;
    model.save(&model_path).map_err(runtime)?;
    let mut log = format!("# config_hash={hash}\nepoch,train_loss,holdout_loss,holdout_metric\n");
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    for e in &report.epochs {
        log.push_str(&format!("{},{:.6},{},{}\n", e.epoch, e.train_loss, opt(e.holdout_loss), opt(e.holdout_metric)));
    }
    ctx.write(&log_path, log)
}

fn rltrain(ctx: &mut Context, a: RltrainArgs) -> Result<(), CliError> {
    let mut g = GeneratorModel::load(&a.model).map_err(|e| CliError::Input(format!("{}: {e}", a.model.display())))?;
    ctx.track(&a.model);
    let preset = ctx.cfg.preset(a.preset.as_deref())?;
    let (registry, inputs) = ctx.cfg.registry(preset)?;
    for p in &inputs {
        ctx.track(p);
    }
    let mut rc = ctx.cfg.rl.clone();
    if let Some(n) = a.iterations {
        rc.iterations = n;
    }
    if let Some(n) = a.batch_size {
        rc.batch_size = n;
    }
    let agent = ctx.out("agent.ckpt");
    let log_path = ctx.out("rl_log.csv");
    let mut outputs = checkpoint_files(&agent).to_vec();
    outputs.push(log_path.clone());
    if rc.checkpoint_every > 0 {
        for it in (rc.checkpoint_every..=rc.iterations).step_by(rc.checkpoint_every) {
            outputs.extend(checkpoint_files(&ctx.out(&format!("rl_iter{it:04}.ckpt"))));
        }
    }
    let hash = ctx.begin("rltrain", json!({ "preset": preset.name(), "config": rc }), &outputs)?;
    let reports = rl_train(&mut g, &registry, &rc, Some(&ctx.out_dir)).map_err(runtime)?;
    g.config_hash = hash.clone();
    g.save(&agent).map_err(runtime)?;
    ctx.write(&log_path, reports_csv(&reports, &hash))
}

fn sample(ctx: &mut Context, a: SampleArgs) -> Result<(), CliError> {
    let g = GeneratorModel::load(&a.model).map_err(|e| CliError::Input(format!("{}: {e}", a.model.display())))?;
    ctx.track(&a.model);
    let n = a.n.unwrap_or(ctx.cfg.sample.n);
    let temperature = a.temperature.unwrap_or(ctx.cfg.sample.temperature);
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(CliError::Config(format!("temperature {temperature} must be positive")));
    }
    let out = ctx.out("samples.csv");
    let hash = ctx.begin("sample", json!({ "n": n, "temperature": temperature }), std::slice::from_ref(&out))?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let seqs = g.sample(n, temperature, &mut rng);
    let mut text = format!("# config_hash={hash}\nid,smiles,valid,log_prob\n");
    for (k, s) in seqs.iter().enumerate() {
        let smi = g.smiles(s);
        let valid = parse_smiles(&smi).is_ok_and(|m| !m.is_empty());
        text.push_str(&format!("sample{:06},{smi},{valid},{:.6}\n", k + 1, s.log_prob()));
    }
    ctx.write(&out, text)
}

fn score(ctx: &mut Context, a: ScoreArgs) -> Result<(), CliError> {
    let rows = read_molecules(ctx, &a.input)?;
    let preset = ctx.cfg.preset(a.preset.as_deref())?;
    let (registry, inputs) = ctx.cfg.registry(preset)?;
    for p in &inputs {
        ctx.track(p);
    }
    let out = ctx.out("scores.csv");
    let hash = ctx.begin("score", json!({ "preset": preset.name() }), std::slice::from_ref(&out))?;
    let items: Vec<(String, String)> = rows.into_iter().map(|(id, s, _)| (id, s)).collect();
    let vectors = registry.evaluate_batch(&items).map_err(runtime)?;
    let invalid = vectors.iter().filter(|v| !v.valid).count();
    if invalid > 0 {
        log::warn!("{invalid} of {} molecules are invalid", vectors.len());
    }
    let names: Vec<&str> = registry.scorers().map(|s| s.name.as_str()).collect();
    ctx.write(&out, score_csv(&vectors, &names, &hash).map_err(runtime)?)
}

fn load_run(ctx: &mut Context, p: &Path) -> Result<GenerationRun, CliError> {
    let text = ctx.read(p)?;
    let id = p.file_stem().map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
    GenerationRun::parse_csv(&id, "", &text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
}

fn evaluate(ctx: &mut Context, a: EvaluateArgs) -> Result<(), CliError> {
    let run = load_run(ctx, &a.run)?;
    let reference = parse_corpus(&ctx.read(&a.reference)?);
    let (keys, skipped) = reference_keys(&reference);
    if skipped > 0 {
        log::warn!("skipped {skipped} unparsable reference molecules");
    }
    let table = ctx.out("rediscovery.csv");
    let sweep = ctx.out("volume_sweep.csv");
    let mut outputs = vec![table.clone()];
    if !a.scales.is_empty() {
        outputs.push(sweep.clone());
    }
    let name = a.name.unwrap_or_else(|| run.run_id.clone());
    let rows = if a.scales.is_empty() {
        None
    } else {
        Some(volume_sweep(&run, &a.scales, &keys).map_err(|e| CliError::Config(e.to_string()))?)
    };
    let hash = ctx.begin("evaluate", json!({ "name": name, "scales": a.scales }), &outputs)?;
    let r = rediscovery_rate(&run, &keys);
    ctx.write(&table, rediscovery_table(&[(name, r)], &hash))?;
    if let Some(rows) = rows {
        ctx.write(&sweep, sweep_table(&rows, &hash))?;
    }
    Ok(())
}

fn attribute(ctx: &mut Context, a: AttributeArgs) -> Result<(), CliError> {
    let model = GraphModel::load(&a.model).map_err(|e| CliError::Input(format!("{}: {e}", a.model.display())))?;
    ctx.track(&a.model);
    let class = a.class.unwrap_or(if model.arch.head == HeadKind::Binary { 1 } else { 0 });
    if class >= model.arch.class_count() {
        return Err(CliError::Config(format!("class {class} out of range for the model")));
    }
    let rows = read_molecules(ctx, &a.input)?;
    let mut poses = Vec::new();
    if let Some(dir) = &a.poses {
        for (id, _, _) in &rows {
            let p = dir.join(format!("{id}.pose"));
            if p.exists() {
                let pose = PoseFile::parse(&ctx.read(&p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                poses.push((id.clone(), pose));
            } else {
                log::warn!("no pose file for '{id}'");
            }
        }
    }
    let att_path = ctx.out("attribution.csv");
    let dist_path = ctx.out("warhead_distances.csv");
    let mut outputs = vec![att_path.clone()];
    if a.poses.is_some() {
        outputs.push(dist_path.clone());
    }
    let hash = ctx.begin("attribute", json!({ "class": class }), &outputs)?;
    let mut att = format!("# config_hash={hash}\nid,canonical_smiles,atom,element,score,normalized,tagged\n");
    let mut dist = format!("# config_hash={hash}\nid,residue,distance\n");
    for (id, smiles, _) in &rows {
        // Atom indices follow the canonical order, which is what poses use.
        let Some(m) = parse_smiles(smiles).ok().filter(|m| !m.is_empty()).and_then(|m| parse_smiles(&canonicalize(&m)).ok())
        else {
            log::warn!("skipping invalid molecule '{id}'");
            continue;
        };
        let map = gradcam(&model, &m, class).map_err(runtime)?;
        let canon = canonicalize(&m);
        for (i, atom) in m.atoms().iter().enumerate() {
            att.push_str(&format!(
                "{id},{canon},{i},{},{:.6},{:.6},{}\n",
                atom.element.symbol(),
                map.raw[i],
                map.normalized[i],
                map.tagged.contains(&i)
            ));
        }
        if let Some((_, pose)) = poses.iter().find(|(pid, _)| pid == id) {
            let d = match warhead_distance(&m, &map, pose) {
                Ok(d) => format!("{d:.4}"),
                Err(e) => {
                    log::warn!("{id}: {e}");
                    "n/a".into()
                }
            };
            dist.push_str(&format!("{id},{},{d}\n", pose.residue));
        }
    }
    ctx.write(&att_path, att)?;
    if a.poses.is_some() {
        ctx.write(&dist_path, dist)?;
    }
    Ok(())
}

fn motifs(ctx: &mut Context, a: MotifArgs) -> Result<(), CliError> {
    let run = load_run(ctx, &a.run)?;
    let mut list = if a.no_builtin { Vec::new() } else { builtin_motifs() };
    for spec in &a.motifs {
        let (name, smi) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("motif '{spec}' must be NAME=SMILES")))?;
        let q = parse_smiles(smi).map_err(|e| CliError::Config(format!("motif '{name}': {e}")))?;
        list.push((name.to_string(), q));
    }
    if list.is_empty() {
        return Err(CliError::Config("no motifs to search".into()));
    }
    let out = ctx.out("motif_hits.csv");
    let hash = ctx.begin("motif-search", json!({ "motifs": a.motifs, "builtin": !a.no_builtin }), std::slice::from_ref(&out))?;
    ctx.write(&out, motif_table(&motif_search(&run, &list), &hash))
}

fn project(ctx: &mut Context, a: ProjectArgs) -> Result<(), CliError> {
    let (mut ids, mut cohorts, mut fps) = (Vec::new(), Vec::new(), Vec::new());
    for p in &a.inputs {
        let cohort = p.file_stem().map_or_else(|| "cohort".to_string(), |s| s.to_string_lossy().into_owned());
        for (id, smiles, _) in read_molecules(ctx, p)? {
            match parse_smiles(&smiles) {
                Ok(m) if !m.is_empty() => {
                    ids.push(id);
                    cohorts.push(cohort.clone());
                    fps.push(morgan_fingerprint(&m));
                }
                _ => log::warn!("{}: skipping invalid molecule '{id}'", p.display()),
            }
        }
    }
    let csv_path = ctx.out("projection.csv");
    let svg_path = ctx.out("projection.svg");
    let mut outputs = vec![csv_path.clone()];
    if a.svg {
        outputs.push(svg_path.clone());
    }
    let proj = project_chemical_space(&fps, a.components).map_err(|e| CliError::Input(e.to_string()))?;
    let hash = ctx.begin("project", json!({ "components": a.components }), &outputs)?;
    ctx.write(&csv_path, projection_csv(&ids, &cohorts, &proj, &hash))?;
    if a.svg {
        ctx.write(&svg_path, projection_svg(&cohorts, &proj))?;
    }
    Ok(())
}
