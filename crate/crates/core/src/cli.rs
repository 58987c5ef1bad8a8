//! Command-line front end.
//!
//! Every subcommand key can come from a flag or from the TOML file given by
//! `--config` (flags win). Config keys use the flag names with `_` in place
//! of `-`; unknown keys are rejected. Each run writes `run_config.toml` with
//! its resolved settings into the output directory.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 failure
//! while running.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bench::{self, evaluate, save_det, save_report, ProtocolManifest, ScoreMode, ScoreSet};
use crate::experiment::{run_synthetic, SyntheticRun};
use crate::harvest::manifest::{load_pairs, save_pairs, save_records, PairRow};
use crate::harvest::{
    self, output_path, pair_rows, plan_selfmorphs, render_pairs, BonaFideMix, HarvestOptions,
    IdentityCatalog, PairingPlan, SampleKind, SampleRecord,
};
use crate::model::{
    check_random_model, load_training_set, save_trace, train, DualModel, GradCheckSetup,
    ModelError, TrainConfig,
};
use crate::morph::{Image, DEFAULT_ALPHA};
use crate::quality::{
    self, eer_threshold, far_frr, io as qio, joint_filter, stratified_sample, Direction,
    QualityVector, ScorerRegistry, Threshold,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or input files.
    Invalid(String),
    /// Something failed while doing the work.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<harvest::HarvestError> for CliError {
    fn from(e: harvest::HarvestError) -> Self {
        use harvest::HarvestError as H;
        match e {
            H::Io { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<bench::BenchError> for CliError {
    fn from(e: bench::BenchError) -> Self {
        use bench::BenchError as B;
        match e {
            B::Io { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<quality::QualityError> for CliError {
    fn from(e: quality::QualityError) -> Self {
        use quality::QualityError as Q;
        match e {
            Q::Io { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Config(_) | ModelError::Checkpoint(_) | ModelError::BadLabel { .. } => {
                CliError::Invalid(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<crate::morph::MorphError> for CliError {
    fn from(e: crate::morph::MorphError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "fusedmad",
    version,
    about = "Face morphing attack detection toolkit"
)]
pub struct Cli {
    /// TOML file with keys for the chosen subcommand (plus seed, jobs, out).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice; required by randomized subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for data-parallel stages (results do not depend on it).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render morphs (and selfmorphs) listed in a pair manifest.
    Morph(MorphKeys),
    /// Plan and render selfmorphs for every identity of a catalog.
    Selfmorph(SelfmorphKeys),
    /// Split identities, plan and render pairs, label and balance records.
    Harvest(HarvestKeys),
    /// Quality scoring, EER thresholds from manual labels, joint filtering.
    Filter(FilterKeys),
    /// Train the dual network on a record manifest.
    Train(TrainKeys),
    /// Score a protocol manifest with a trained model.
    Score(ScoreKeys),
    /// APCER/BPCER report and DET curves for protocols or score files.
    Bench(BenchKeys),
    /// Finite-difference check of the total-loss gradients on a random model.
    Gradcheck(GradcheckKeys),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphKeys {
    /// Pair manifest (kind,name,image_a,landmarks_a,id_a,image_b,landmarks_b,id_b,y1,y2).
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Blending coefficient for morph rows [default: 0.5].
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfmorphKeys {
    /// Catalog root: one directory per identity holding images and .lmk files.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarvestKeys {
    /// Catalog root: one directory per identity holding images and .lmk files.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Number of cross-half morph pairs to plan.
    #[arg(long)]
    pub morphs: Option<usize>,
    /// Blending coefficient for morphs [default: 0.5].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Non-morph samples kept: both, original_only or selfmorphs_only [default: both].
    #[arg(long)]
    pub mix: Option<BonaFideMix>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterKeys {
    /// Directory scanned recursively for images to score.
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// Precomputed scores (image_path,scorer_id,value) instead of --images.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Manual decisions (image_path,accept|reject).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Score direction per scorer, e.g. blur=higher_is_better (repeatable).
    #[arg(long)]
    #[serde(default)]
    pub direction: Vec<String>,
    /// Sub-ranges per scorer for the labelling sample [default: 5].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Images drawn per sub-range for the labelling sample [default: 4].
    #[arg(long)]
    pub per_bin: Option<usize>,
    /// Only score and write the stratified labelling sample.
    #[arg(long)]
    #[serde(default)]
    pub sample_only: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainKeys {
    /// Record manifest (kind,image_path,y1,y2,source_ids).
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Weight of the first identity loss [default: 0.2].
    #[arg(long)]
    pub alpha1: Option<f64>,
    /// Weight of the second identity loss [default: 0.2].
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Weight of the morph loss [default: 1.0].
    #[arg(long)]
    pub beta: Option<f64>,
    /// SGD learning rate [default: 0.01].
    #[arg(long)]
    pub lr: Option<f64>,
    /// Batch size [default: 32].
    #[arg(long)]
    pub batch: Option<usize>,
    /// Passes over the records [default: 60].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Input square side [default: 32].
    #[arg(long)]
    pub input_side: Option<usize>,
    /// Feature width [default: 32].
    #[arg(long)]
    pub feature_dim: Option<usize>,
    /// Hidden widths, comma separated [default: 64].
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// One set of backbone weights for both networks.
    #[arg(long)]
    #[serde(default)]
    pub shared_weights: bool,
    /// Start network 2 as a copy of network 1.
    #[arg(long)]
    #[serde(default)]
    pub mirrored_init: bool,
    /// Number of identity classes [default: largest label + 1].
    #[arg(long)]
    pub classes: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreKeys {
    /// Model checkpoint.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Protocol manifest.
    #[arg(long)]
    pub protocol: Option<PathBuf>,
    /// single or differential [default: single].
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchKeys {
    /// Model checkpoint used to score protocols.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Protocol manifest (repeatable).
    #[arg(long)]
    #[serde(default)]
    pub protocol: Vec<PathBuf>,
    /// Existing score file (path,truth,score), used without a model (repeatable).
    #[arg(long)]
    #[serde(default)]
    pub scores: Vec<PathBuf>,
    /// single or differential [default: single].
    #[arg(long)]
    pub mode: Option<String>,
    /// Run label in the report [default: run].
    #[arg(long)]
    pub run: Option<String>,
    /// Build, train and evaluate the bundled synthetic protocol.
    #[arg(long)]
    #[serde(default)]
    pub synthetic: bool,
    /// TOML overrides for the synthetic run.
    #[arg(long)]
    pub synthetic_config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckKeys {
    /// Random models to check [default: 1].
    #[arg(long)]
    pub models: Option<usize>,
    /// Classes per head [default: 3].
    #[arg(long)]
    pub classes: Option<usize>,
    /// Batch size, at least 2 [default: 6].
    #[arg(long)]
    pub batch: Option<usize>,
    /// Hidden widths, comma separated [default: 5].
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Feature width [default: 4].
    #[arg(long)]
    pub feature_dim: Option<usize>,
    /// Input square side [default: 3].
    #[arg(long)]
    pub input_side: Option<usize>,
    /// Finite-difference step [default: 1e-5].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Relative tolerance [default: 1e-4].
    #[arg(long)]
    pub rtol: Option<f64>,
}

/// Settings shared by all subcommands after merging flags and config.
#[derive(Debug, Clone, Serialize)]
struct Globals {
    seed: Option<u64>,
    jobs: Option<usize>,
    out: PathBuf,
}

impl Globals {
    fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Invalid("a seed is required (--seed or `seed` in --config)".into())
        })
    }
}

#[derive(Serialize)]
struct RunRecord<'a, K: Serialize> {
    command: &'a str,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: &'a Path,
    keys: &'a K,
}

/// Merges flag values over config values: any `Some`/non-empty/true flag
/// wins. Works field by field through the TOML representation.
fn merge<K: Serialize + DeserializeOwned>(
    flags: &K,
    config: Option<toml::Table>,
) -> Result<K, CliError> {
    let Some(mut table) = config else {
        return Ok(serde_clone(flags));
    };
    let flag_table = toml::Table::try_from(flags).map_err(|e| CliError::Invalid(e.to_string()))?;
    for (k, v) in flag_table {
        let set = match &v {
            toml::Value::Boolean(b) => *b,
            toml::Value::Array(a) => !a.is_empty(),
            _ => true,
        };
        if set || !table.contains_key(&k) {
            table.insert(k, v);
        }
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Invalid(format!("config: {}", e.message())))
}

fn serde_clone<K: Serialize + DeserializeOwned>(k: &K) -> K {
    toml::Table::try_from(k)
        .and_then(|t| {
            t.try_into()
                .map_err(|e: toml::de::Error| serde::ser::Error::custom(e.to_string()))
        })
        .expect("keys round-trip through TOML")
}

fn read_config(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Invalid(format!("{}: {}", path.display(), e.message())))
}

fn take_global<T: DeserializeOwned>(
    table: &mut toml::Table,
    key: &str,
) -> Result<Option<T>, CliError> {
    match table.remove(key) {
        None => Ok(None),
        Some(v) => v.try_into().map(Some).map_err(|e: toml::de::Error| {
            CliError::Invalid(format!("config key '{key}': {}", e.message()))
        }),
    }
}

fn require<T: Clone>(v: &Option<T>, key: &str) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::Invalid(format!("missing required key '{key}'")))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))
}

fn write_run_config<K: Serialize>(command: &str, g: &Globals, keys: &K) -> Result<(), CliError> {
    let record = RunRecord {
        command,
        seed: g.seed,
        jobs: g.jobs,
        out: &g.out,
        keys,
    };
    let text = toml::to_string(&record).map_err(runtime)?;
    let path = g.out.join("run_config.toml");
    std::fs::write(&path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = cli.config.as_deref().map(read_config).transpose()?;
    let (mut seed, mut jobs, mut out) = (cli.seed, cli.jobs, cli.out);
    if let Some(table) = config.as_mut() {
        seed = seed.or(take_global(table, "seed")?);
        jobs = jobs.or(take_global(table, "jobs")?);
        out = out.or(take_global(table, "out")?);
    }
    if jobs == Some(0) {
        return Err(CliError::Invalid("--jobs must be positive".into()));
    }
    let g = Globals {
        seed,
        jobs,
        out: out.unwrap_or_else(|| PathBuf::from("out")),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = g.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(runtime)?;
    pool.install(|| match &cli.command {
        Command::Morph(k) => cmd_morph(&g, &merge(k, config)?),
        Command::Selfmorph(k) => cmd_selfmorph(&g, &merge(k, config)?),
        Command::Harvest(k) => cmd_harvest(&g, &merge(k, config)?),
        Command::Filter(k) => cmd_filter(&g, &merge(k, config)?),
        Command::Train(k) => cmd_train(&g, &merge(k, config)?),
        Command::Score(k) => cmd_score(&g, &merge(k, config)?),
        Command::Bench(k) => cmd_bench(&g, &merge(k, config)?),
        Command::Gradcheck(k) => cmd_gradcheck(&g, &merge(k, config)?),
    })
}

fn check_alpha(alpha: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(alpha)
    } else {
        Err(CliError::Invalid(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )))
    }
}

/// Records for rendered pair rows.
fn pair_records(rows: &[PairRow], dir: &Path) -> Result<Vec<SampleRecord>, CliError> {
    rows.iter()
        .map(|r| {
            let kind = r.sample_kind().map_err(CliError::Invalid)?;
            let mut source_ids = vec![r.id_a.clone()];
            if kind == SampleKind::Morph {
                source_ids.push(r.id_b.clone());
            }
            Ok(SampleRecord {
                kind,
                image_path: output_path(dir, &r.name),
                y1: r.y1,
                y2: r.y2,
                source_ids,
            })
        })
        .collect()
}

fn render_and_record(g: &Globals, rows: &[PairRow], alpha: f64, seed: u64) -> Result<(), CliError> {
    let images = g.out.join("images");
    let failures = render_pairs(rows, &images, alpha, seed)?;
    save_records(&g.out.join("records.csv"), &pair_records(rows, &images)?)?;
    if failures.is_empty() {
        println!("rendered {} images into {}", rows.len(), images.display());
        Ok(())
    } else {
        for (name, e) in &failures {
            eprintln!("{name}: {e}");
        }
        Err(CliError::Runtime(format!(
            "{} of {} pairs failed",
            failures.len(),
            rows.len()
        )))
    }
}

fn cmd_morph(g: &Globals, k: &MorphKeys) -> Result<(), CliError> {
    let seed = g.seed()?;
    let rows = load_pairs(&require(&k.pairs, "pairs")?)?;
    let alpha = check_alpha(k.alpha.unwrap_or(DEFAULT_ALPHA))?;
    create_dir(&g.out)?;
    write_run_config(
        "morph",
        g,
        &MorphKeys {
            alpha: Some(alpha),
            ..k.clone()
        },
    )?;
    render_and_record(g, &rows, alpha, seed)
}

fn cmd_selfmorph(g: &Globals, k: &SelfmorphKeys) -> Result<(), CliError> {
    let seed = g.seed()?;
    let catalog = IdentityCatalog::scan(&require(&k.catalog, "catalog")?)?;
    create_dir(&g.out)?;
    write_run_config("selfmorph", g, k)?;
    let plan = PairingPlan {
        half1: vec![],
        half2: vec![],
        morph_pairs: vec![],
        selfmorph_pairs: plan_selfmorphs(&catalog, seed)?,
        seed,
    };
    let rows = pair_rows(&plan, &catalog)?;
    save_pairs(&g.out.join("pairs.csv"), &rows)?;
    render_and_record(g, &rows, DEFAULT_ALPHA, seed)
}

fn cmd_harvest(g: &Globals, k: &HarvestKeys) -> Result<(), CliError> {
    let seed = g.seed()?;
    let catalog = IdentityCatalog::scan(&require(&k.catalog, "catalog")?)?;
    let resolved = HarvestKeys {
        catalog: k.catalog.clone(),
        morphs: Some(require(&k.morphs, "morphs")?),
        alpha: Some(check_alpha(k.alpha.unwrap_or(DEFAULT_ALPHA))?),
        mix: Some(k.mix.unwrap_or_default()),
    };
    create_dir(&g.out)?;
    write_run_config("harvest", g, &resolved)?;
    let out = harvest::harvest(
        &catalog,
        &g.out,
        &HarvestOptions {
            morph_count: resolved.morphs.unwrap_or_default(),
            seed,
            alpha: resolved.alpha.unwrap_or(DEFAULT_ALPHA),
            mix: resolved.mix.unwrap_or_default(),
        },
    )?;
    let counts = harvest::kind_counts(&out.records);
    for (kind, n) in &counts {
        println!("{kind}: {n}");
    }
    println!("records: {}", out.records_path.display());
    if out.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "{} pairs failed to render",
            out.failures.len()
        )))
    }
}

fn collect_images(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_images(&p, out)?;
        } else if p.extension().and_then(|e| e.to_str()).is_some_and(|e| {
            matches!(
                e.to_ascii_lowercase().as_str(),
                "png" | "pgm" | "ppm" | "pnm"
            )
        }) {
            out.push(p);
        }
    }
    Ok(())
}

fn parse_directions(items: &[String]) -> Result<BTreeMap<String, Direction>, CliError> {
    items
        .iter()
        .map(|item| {
            let (scorer, dir) = item.split_once('=').ok_or_else(|| {
                CliError::Invalid(format!("direction '{item}' is not scorer=direction"))
            })?;
            Ok((scorer.to_string(), dir.parse().map_err(CliError::Invalid)?))
        })
        .collect()
}

fn cmd_filter(g: &Globals, k: &FilterKeys) -> Result<(), CliError> {
    let directions = parse_directions(&k.direction)?;
    let bins = k.bins.unwrap_or(5);
    let per_bin = k.per_bin.unwrap_or(4);
    let scores: Vec<(String, QualityVector)> = match (&k.images, &k.scores) {
        (Some(_), Some(_)) => {
            return Err(CliError::Invalid(
                "give either images or scores, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Invalid(
                "missing required key 'images' or 'scores'".into(),
            ))
        }
        (None, Some(path)) => qio::load_scores(path)?,
        (Some(dir), None) => {
            let mut paths = Vec::new();
            collect_images(dir, &mut paths)?;
            let registry = ScorerRegistry::default();
            use rayon::prelude::*;
            paths
                .par_iter()
                .map(|p| {
                    let img = Image::load(p)?;
                    let mut q = QualityVector::new();
                    for id in registry.ids() {
                        q.insert(id.to_string(), registry.score_image(&img, id)?);
                    }
                    Ok((p.display().to_string(), q))
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
    };
    create_dir(&g.out)?;
    write_run_config(
        "filter",
        g,
        &FilterKeys {
            bins: Some(bins),
            per_bin: Some(per_bin),
            ..k.clone()
        },
    )?;
    qio::save_scores(&g.out.join("scores.csv"), &scores)?;

    if k.sample_only {
        let seed = g.seed()?;
        let sample = stratified_sample(&scores, bins, per_bin, seed)?;
        qio::save_list(&g.out.join("sample.txt"), &sample)?;
        println!("{} images selected for labelling", sample.len());
        return Ok(());
    }

    let labels = qio::load_labels(&require(&k.labels, "labels")?)?;
    let by_image: BTreeMap<&str, &QualityVector> =
        scores.iter().map(|(n, q)| (n.as_str(), q)).collect();
    let scorers: Vec<String> = {
        let mut s: Vec<String> = scores.iter().flat_map(|(_, q)| q.keys().cloned()).collect();
        s.sort();
        s.dedup();
        s
    };
    if let Some(unknown) = directions.keys().find(|d| !scorers.contains(d)) {
        return Err(CliError::Invalid(format!(
            "direction given for unknown scorer '{unknown}'"
        )));
    }
    let mut report = Vec::new();
    for scorer in &scorers {
        let mut vals = Vec::new();
        let mut decisions = Vec::new();
        for l in &labels {
            let q = by_image.get(l.image.as_str()).ok_or_else(|| {
                CliError::Invalid(format!("labelled image '{}' has no scores", l.image))
            })?;
            let v = q.get(scorer).ok_or_else(|| {
                CliError::Invalid(format!(
                    "labelled image '{}' has no '{scorer}' score",
                    l.image
                ))
            })?;
            vals.push(*v);
            decisions.push(l.decision);
        }
        let direction = directions.get(scorer).copied().unwrap_or_default();
        let curve = far_frr(&vals, &decisions, direction)?;
        let (value, eer) = eer_threshold(&curve);
        qio::save_curve(&g.out.join(format!("far_frr_{scorer}.csv")), &curve)?;
        report.push((
            Threshold {
                scorer: scorer.clone(),
                direction,
                value,
            },
            eer,
        ));
    }
    qio::save_report(&g.out.join("thresholds.csv"), &report)?;
    let thresholds: Vec<Threshold> = report.iter().map(|(t, _)| t.clone()).collect();
    let accepted = joint_filter(&scores, &thresholds)?;
    qio::save_list(&g.out.join("accepted.txt"), &accepted)?;
    for (t, eer) in &report {
        println!(
            "{} ({}) threshold {} eer {:.4}",
            t.scorer, t.direction, t.value, eer
        );
    }
    println!("accepted {} of {} images", accepted.len(), scores.len());
    Ok(())
}

fn cmd_train(g: &Globals, k: &TrainKeys) -> Result<(), CliError> {
    let seed = g.seed()?;
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        alpha1: k.alpha1.unwrap_or(d.alpha1),
        alpha2: k.alpha2.unwrap_or(d.alpha2),
        beta: k.beta.unwrap_or(d.beta),
        lr: k.lr.unwrap_or(d.lr),
        batch: k.batch.unwrap_or(d.batch),
        epochs: k.epochs.unwrap_or(d.epochs),
        seed,
        input_side: k.input_side.unwrap_or(d.input_side),
        feature_dim: k.feature_dim.unwrap_or(d.feature_dim),
        hidden: k.hidden.clone().unwrap_or(d.hidden),
        shared_weights: k.shared_weights,
        mirrored_init: k.mirrored_init,
    };
    cfg.validate()?;
    let records = harvest::manifest::load_records(&require(&k.records, "records")?)?;
    if records.is_empty() {
        return Err(CliError::Invalid("record manifest is empty".into()));
    }
    let data = load_training_set(&records, cfg.input_side)?;
    let classes = k.classes.unwrap_or(data.classes());
    create_dir(&g.out)?;
    write_run_config(
        "train",
        g,
        &TrainKeys {
            classes: Some(classes),
            ..k.clone()
        },
    )?;
    std::fs::write(g.out.join("train_config.toml"), cfg.to_toml()).map_err(runtime)?;
    let model = DualModel::init(
        &cfg.backbone(),
        classes,
        cfg.shared_weights,
        cfg.mirrored_init,
        seed,
    )?;
    let outcome = train(model, &data, &cfg)?;
    outcome.model.save(&g.out.join("model.ckpt"))?;
    save_trace(&g.out.join("trace.csv"), &outcome.trace)?;
    if let (Some(a), Some(b)) = (outcome.trace.first(), outcome.trace.last()) {
        println!(
            "{} steps, loss {:.4} -> {:.4}",
            outcome.trace.len(),
            a.total,
            b.total
        );
    }
    println!("checkpoint: {}", g.out.join("model.ckpt").display());
    Ok(())
}

fn parse_mode(mode: &Option<String>) -> Result<ScoreMode, CliError> {
    mode.as_deref().map_or(Ok(ScoreMode::Single), |m| {
        m.parse().map_err(CliError::Invalid)
    })
}

fn cmd_score(g: &Globals, k: &ScoreKeys) -> Result<(), CliError> {
    let mode = parse_mode(&k.mode)?;
    let model = DualModel::load(&require(&k.model, "model")?)?;
    let manifest = ProtocolManifest::load(&require(&k.protocol, "protocol")?)?;
    create_dir(&g.out)?;
    write_run_config("score", g, k)?;
    let scores = bench::score_protocol(&model, &manifest, mode)?;
    scores.save(&g.out.join("scores.csv"))?;
    println!(
        "{} rows, {} errors -> {}",
        scores.rows.len(),
        scores.error_count(),
        g.out.join("scores.csv").display()
    );
    Ok(())
}

fn cmd_bench(g: &Globals, k: &BenchKeys) -> Result<(), CliError> {
    let mode = parse_mode(&k.mode)?;
    let run = k.run.clone().unwrap_or_else(|| "run".into());
    let mut sets: Vec<(String, ScoreSet)> = Vec::new();
    for path in &k.scores {
        let name = path
            .file_stem()
            .map_or("scores".into(), |s| s.to_string_lossy().into_owned());
        sets.push((name, ScoreSet::load(path)?));
    }
    if !k.protocol.is_empty() {
        let model = DualModel::load(&require(&k.model, "model")?)?;
        for path in &k.protocol {
            let manifest = ProtocolManifest::load(path)?;
            sets.push((
                manifest.name.clone(),
                bench::score_protocol(&model, &manifest, mode)?,
            ));
        }
    }
    create_dir(&g.out)?;
    if k.synthetic {
        let seed = g.seed()?;
        let mut cfg: SyntheticRun = match &k.synthetic_config {
            Some(p) => toml::from_str(&std::fs::read_to_string(p).map_err(runtime)?).map_err(
                |e: toml::de::Error| CliError::Invalid(format!("{}: {}", p.display(), e.message())),
            )?,
            None => SyntheticRun::default(),
        };
        cfg.synth.seed = seed;
        cfg.train.seed = seed;
        let report = run_synthetic(&g.out.join("synthetic"), &cfg).map_err(runtime)?;
        report.model.save(&g.out.join("synthetic_model.ckpt"))?;
        sets.push(("synthetic".into(), report.scores));
    }
    if sets.is_empty() {
        return Err(CliError::Invalid(
            "nothing to evaluate: give protocol, scores or synthetic".into(),
        ));
    }
    write_run_config("bench", g, k)?;
    let mut results = Vec::new();
    for (name, set) in &sets {
        set.save(&g.out.join(format!("scores_{name}.csv")))?;
        let r = evaluate(&run, name, set)?;
        save_det(&g.out.join(format!("det_{name}.csv")), &r.curve)?;
        results.push(r);
    }
    save_report(&g.out.join("report.csv"), &results)?;
    print!("{}", bench::report_table(&results));
    Ok(())
}

fn cmd_gradcheck(g: &Globals, k: &GradcheckKeys) -> Result<(), CliError> {
    let seed = g.seed.unwrap_or(0);
    let d = GradCheckSetup::default();
    let setup = GradCheckSetup {
        input_side: k.input_side.unwrap_or(d.input_side),
        hidden: k.hidden.clone().unwrap_or(d.hidden),
        feature_dim: k.feature_dim.unwrap_or(d.feature_dim),
        classes: k.classes.unwrap_or(d.classes),
        batch: k.batch.unwrap_or(d.batch),
        shared_weights: false,
        epsilon: k.epsilon.unwrap_or(d.epsilon),
        rtol: k.rtol.unwrap_or(d.rtol),
    };
    let models = k.models.unwrap_or(1);
    let mut worst: Option<crate::numgrad::GradCheckReport> = None;
    for m in 0..models {
        let report = check_random_model(&setup, seed.wrapping_add(m as u64))?;
        if worst
            .as_ref()
            .is_none_or(|w| report.max_rel_error() > w.max_rel_error())
        {
            worst = Some(report);
        }
    }
    let Some(report) = worst else {
        return Err(CliError::Invalid("models must be positive".into()));
    };
    println!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Runtime("gradient check failed".into()))
    }
}
