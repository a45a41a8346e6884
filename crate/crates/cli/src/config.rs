//! Flat `key = value` run configuration.
//!
//! Resolution order, later wins: built-in defaults, the `BIOIE_SEED`
//! environment variable, the config file, then `--set` flags in order.

use std::fmt::{self, Display};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bioie::autodiff::{Activation, AdamConfig};
use bioie::corpus::{EntityKind, LengthLimits};
use bioie::layers::{AttentionMode, ModelConfig};
use bioie::pipeline::DatasetOptions;
use bioie::training::{HyperGrid, TrainPlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusKind {
    Cdr,
    ChemProt,
    Pathology,
    Synthetic,
}

impl FromStr for CorpusKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cdr" => Ok(CorpusKind::Cdr),
            "chemprot" => Ok(CorpusKind::ChemProt),
            "pathology" => Ok(CorpusKind::Pathology),
            "synthetic" => Ok(CorpusKind::Synthetic),
            _ => Err(format!("expected cdr, chemprot, pathology or synthetic, got `{s}`")),
        }
    }
}

impl Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusKind::Cdr => "cdr",
            CorpusKind::ChemProt => "chemprot",
            CorpusKind::Pathology => "pathology",
            CorpusKind::Synthetic => "synthetic",
        })
    }
}

/// Shape of a generated corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthShape {
    /// `synth_reports` reports, half with a planted Size cue, TCGA wording.
    SeparableTcga,
    /// Same, hospital wording.
    SeparableTfah,
    /// Full TCGA-column counts.
    Tcga,
    /// Full hospital-column counts (1404 reports).
    Tfah,
}

impl FromStr for SynthShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "separable-tcga" => Ok(SynthShape::SeparableTcga),
            "separable-tfah" => Ok(SynthShape::SeparableTfah),
            "tcga" => Ok(SynthShape::Tcga),
            "tfah" => Ok(SynthShape::Tfah),
            _ => Err(format!("expected separable-tcga, separable-tfah, tcga or tfah, got `{s}`")),
        }
    }
}

impl Display for SynthShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthShape::SeparableTcga => "separable-tcga",
            SynthShape::SeparableTfah => "separable-tfah",
            SynthShape::Tcga => "tcga",
            SynthShape::Tfah => "tfah",
        })
    }
}

/// Where one corpus comes from.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSpec {
    pub corpus: CorpusKind,
    /// PubTator file, ChemProt directory or pathology record file.
    pub data: Option<PathBuf>,
    /// Pathology variable used as the task.
    pub subtask: EntityKind,
    /// Directory of `<doc id>.conllu` parses.
    pub parses: Option<PathBuf>,
    pub synth: SynthShape,
    pub synth_reports: usize,
}

impl DataSpec {
    fn new(synth: SynthShape) -> Self {
        DataSpec {
            corpus: CorpusKind::Synthetic,
            data: None,
            subtask: EntityKind::Size,
            parses: None,
            synth,
            synth_reports: 200,
        }
    }

    /// Short display name for tables.
    pub fn name(&self) -> String {
        match self.corpus {
            CorpusKind::Synthetic => match self.synth {
                SynthShape::SeparableTcga | SynthShape::Tcga => "TCGA".into(),
                SynthShape::SeparableTfah | SynthShape::Tfah => "TFAH".into(),
            },
            CorpusKind::Cdr => "CDR".into(),
            CorpusKind::ChemProt => "ChemProt".into(),
            CorpusKind::Pathology => self
                .data
                .as_deref()
                .and_then(Path::file_stem)
                .map_or_else(|| "pathology".into(), |s| s.to_string_lossy().into_owned()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: DataSpec,
    pub target: DataSpec,
    /// word2vec-style text vectors; random vectors when unset.
    pub vectors: Option<PathBuf>,
    pub min_len: usize,
    pub max_len: usize,
    pub min_count: usize,
    pub negative_ratio: Option<f64>,
    pub theta: f64,
    pub window: usize,
    /// Every model field except `label_count`, which comes from the task.
    pub model: ModelConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: Option<usize>,
    pub adam: AdamConfig,
    pub frozen: Vec<String>,
    pub folds: usize,
    pub resamples: usize,
    pub grid: bool,
    pub grid_lr: Vec<f64>,
    pub grid_hidden: Vec<usize>,
    pub grid_gcn_layers: Vec<usize>,
    pub seed: u64,
    pub out: PathBuf,
    pub checkpoint: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let plan = TrainPlan::default();
        let grid = HyperGrid::default();
        let opts = DatasetOptions::default();
        RunConfig {
            source: DataSpec::new(SynthShape::SeparableTcga),
            target: DataSpec::new(SynthShape::SeparableTfah),
            vectors: None,
            min_len: opts.limits.min,
            max_len: opts.limits.max,
            min_count: opts.min_count,
            negative_ratio: opts.negative_ratio,
            theta: opts.theta,
            window: opts.window,
            model: ModelConfig::default(),
            epochs: plan.epochs,
            batch_size: plan.batch_size,
            patience: plan.patience,
            adam: plan.adam,
            frozen: plan.frozen,
            folds: 10,
            resamples: bioie::eval::DEFAULT_RESAMPLES,
            grid: false,
            grid_lr: grid.lr,
            grid_hidden: grid.hidden,
            grid_gcn_layers: grid.gcn_layers,
            seed: plan.seed,
            out: PathBuf::from("run"),
            checkpoint: None,
        }
    }
}

type Setter = fn(&mut RunConfig, &str) -> Result<(), String>;
type Getter = fn(&RunConfig) -> String;

struct Key {
    name: &'static str,
    get: Getter,
    set: Setter,
}

fn parse<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: Display,
{
    v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

fn parse_opt_path(v: &str) -> Result<Option<PathBuf>, String> {
    Ok((!v.is_empty()).then(|| PathBuf::from(v)))
}

fn show_opt_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(String::new, |p| p.display().to_string())
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: Display,
{
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect()
}

fn show_list<T: Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn parse_kind(v: &str) -> Result<EntityKind, String> {
    EntityKind::parse_pathology(v).map_err(|e| e.to_string())
}

fn parse_serde<T: serde::de::DeserializeOwned>(v: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(v.to_string())).map_err(|_| format!("unrecognized value `{v}`"))
}

fn show_serde<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => panic!("enum did not serialize to a string: {other:?}"),
    }
}

macro_rules! key {
    ($name:literal, $($field:ident).+) => {
        Key {
            name: $name,
            get: |c| c.$($field).+.to_string(),
            set: |c, v| {
                c.$($field).+ = parse(v)?;
                Ok(())
            },
        }
    };
    ($name:literal, $($field:ident).+, $parse:expr, $show:expr) => {
        Key {
            name: $name,
            get: |c| $show(&c.$($field).+),
            set: |c, v| {
                c.$($field).+ = $parse(v)?;
                Ok(())
            },
        }
    };
}

fn show_kind(k: &EntityKind) -> String {
    k.as_str().to_string()
}

fn parse_opt_usize(v: &str) -> Result<Option<usize>, String> {
    if v == "none" {
        Ok(None)
    } else {
        parse(v).map(Some)
    }
}

fn show_opt<T: Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

fn parse_opt_f64(v: &str) -> Result<Option<f64>, String> {
    if v == "none" {
        Ok(None)
    } else {
        parse(v).map(Some)
    }
}

const KEYS: &[Key] = &[
    key!("corpus", source.corpus),
    key!("data", source.data, parse_opt_path, show_opt_path),
    key!("subtask", source.subtask, parse_kind, show_kind),
    key!("parses", source.parses, parse_opt_path, show_opt_path),
    key!("synth", source.synth),
    key!("synth_reports", source.synth_reports),
    key!("target_corpus", target.corpus),
    key!("target_data", target.data, parse_opt_path, show_opt_path),
    key!("target_subtask", target.subtask, parse_kind, show_kind),
    key!("target_parses", target.parses, parse_opt_path, show_opt_path),
    key!("target_synth", target.synth),
    key!("target_synth_reports", target.synth_reports),
    key!("vectors", vectors, parse_opt_path, show_opt_path),
    key!("min_len", min_len),
    key!("max_len", max_len),
    key!("min_count", min_count),
    key!("negative_ratio", negative_ratio, parse_opt_f64, show_opt),
    key!("theta", theta),
    key!("window", window),
    key!("d_w", model.d_w),
    key!("d_p", model.d_p),
    key!("max_dist", model.max_dist),
    key!("hidden", model.hidden),
    key!("heads", model.heads),
    key!("gcn_layers", model.gcn_layers),
    key!("dropout", model.dropout),
    key!("embed_dropout", model.embed_dropout),
    key!("feature_dropout", model.feature_dropout),
    key!("gcn_activation", model.gcn_activation, parse_serde::<Activation>, show_serde),
    key!("use_pretrained", model.use_pretrained, parse_bool, bool::to_string),
    key!("use_position", model.use_position, parse_bool, bool::to_string),
    key!("attention", model.attention, parse_serde::<AttentionMode>, show_serde),
    key!("use_gcn", model.use_gcn, parse_bool, bool::to_string),
    key!("epochs", epochs),
    key!("batch_size", batch_size),
    key!("patience", patience, parse_opt_usize, show_opt),
    key!("lr", adam.lr),
    key!("beta1", adam.beta1),
    key!("beta2", adam.beta2),
    key!("epsilon", adam.epsilon),
    key!("frozen", frozen, parse_list::<String>, |v: &Vec<String>| show_list(v)),
    key!("folds", folds),
    key!("resamples", resamples),
    key!("grid", grid, parse_bool, bool::to_string),
    key!("grid_lr", grid_lr, parse_list::<f64>, |v: &Vec<f64>| show_list(v)),
    key!("grid_hidden", grid_hidden, parse_list::<usize>, |v: &Vec<usize>| show_list(v)),
    key!("grid_gcn_layers", grid_gcn_layers, parse_list::<usize>, |v: &Vec<usize>| show_list(v)),
    key!("seed", seed),
    key!("out", out, |v: &str| Ok::<_, String>(PathBuf::from(v)), |p: &PathBuf| p.display().to_string()),
    key!("checkpoint", checkpoint, parse_opt_path, show_opt_path),
];

fn nearest_key(name: &str) -> &'static str {
    KEYS.iter()
        .map(|k| (strsim::levenshtein(name, k.name), k.name))
        .min()
        .map(|(_, n)| n)
        .expect("key table is not empty")
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let k = KEYS
            .iter()
            .find(|k| k.name == key)
            .ok_or_else(|| format!("unknown config key `{key}` (nearest known key: `{}`)", nearest_key(key)))?;
        (k.set)(self, value.trim()).map_err(|e| format!("config key `{key}`: {e}"))
    }

    /// Applies `key = value` lines; blank lines and lines starting with `#`
    /// are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), String> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{origin}:{}: expected `key = value`", n + 1))?;
            self.set(k.trim(), v).map_err(|e| format!("{origin}:{}: {e}", n + 1))?;
        }
        Ok(())
    }

    /// Every key in table order, one `key = value` line each.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# resolved bioie run configuration\n");
        for k in KEYS {
            out.push_str(&format!("{} = {}\n", k.name, (k.get)(self)));
        }
        out
    }

    pub fn model_config(&self, label_count: usize) -> ModelConfig {
        ModelConfig {
            label_count,
            ..self.model.clone()
        }
    }

    pub fn plan(&self) -> TrainPlan {
        TrainPlan {
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            patience: self.patience,
            adam: self.adam,
            frozen: self.frozen.clone(),
            grid: self.grid.then(|| self.hyper_grid()),
        }
    }

    pub fn hyper_grid(&self) -> HyperGrid {
        HyperGrid {
            lr: self.grid_lr.clone(),
            hidden: self.grid_hidden.clone(),
            gcn_layers: self.grid_gcn_layers.clone(),
        }
    }

    pub fn dataset_options(&self) -> DatasetOptions {
        DatasetOptions {
            limits: LengthLimits {
                min: self.min_len,
                max: self.max_len,
            },
            min_count: self.min_count,
            theta: self.theta,
            window: self.window,
            d_w: self.model.d_w,
            negative_ratio: self.negative_ratio,
            seed: self.seed,
        }
    }
}

/// Splits a `--set` argument at its first `=`.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

pub fn resolve(file: Option<&Path>, overrides: &[(String, String)], env_seed: Option<&str>) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(seed) = env_seed {
        cfg.set("seed", seed).map_err(|e| format!("BIOIE_SEED: {e}"))?;
    }
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.apply_text(&text, &path.display().to_string())?;
    }
    for (k, v) in overrides {
        cfg.set(k, v).map_err(|e| format!("--set {k}: {e}"))?;
    }
    Ok(cfg)
}
