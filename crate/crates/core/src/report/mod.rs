//! Configuration-driven experiment runner and table rendering.

mod render;
mod store;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{Backend, BackendConfig, BackendError};
use crate::corpus::{load_dataset, CorpusError, Dataset, Tagger};
use crate::interventions::{edit_dataset, EditBatch, InterventionCode, InterventionError, InterventionSpec, SingleChoice};
use crate::lexicon::{ColorTable, Lexicon, LexiconError};
use crate::retrieval::{check_scale, evaluate_stream, AceMode, AceRow, RetrievalError, RowContext, StreamOutcome, Task};

pub use render::{flag, parse_csv, render_csv, render_markdown, CsvRow, Flag, Format};
pub use store::{read_rows, ResultStore};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{path}:{line}: {message}")]
    Store { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Intervention(#[from] InterventionError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Cutoffs for highlighting: at or above `high` is HIGH, below `low` is LOW.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_high")]
    pub high: f64,
    #[serde(default = "default_low")]
    pub low: f64,
}

fn default_high() -> f64 {
    4.0
}

fn default_low() -> f64 {
    1.0
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            high: default_high(),
            low: default_low(),
        }
    }
}

fn default_ks() -> Vec<usize> {
    vec![1]
}

fn default_scale() -> u64 {
    100_000
}

fn default_tasks() -> Vec<Task> {
    vec![Task::Lr]
}

/// Experiment description, read from TOML. Relative paths resolve against
/// the directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub pretagged: bool,
    pub lexicon: PathBuf,
    pub colors: PathBuf,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    pub codes: Vec<String>,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    #[serde(default = "default_scale")]
    pub scale: u64,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 leaves the choice to the thread pool.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub mode: AceMode,
    #[serde(default)]
    pub single_choice: SingleChoice,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub record_timestamps: bool,
    pub backends: BTreeMap<String, BackendConfig>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig, ReportError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|source| ReportError::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset);
        fix(&mut self.lexicon);
        fix(&mut self.colors);
        fix(&mut self.output_dir);
        for b in self.backends.values_mut() {
            if let BackendConfig::File { path } = b {
                fix(path);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::Config(m));
        check_scale(self.scale).map_err(|e| ReportError::Config(e.to_string()))?;
        self.parsed_codes()?;
        if self.codes.is_empty() {
            return bad("no intervention codes".into());
        }
        if self.tasks.is_empty() {
            return bad("no tasks".into());
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return bad("ks must be a non-empty list of positive cutoffs".into());
        }
        if self.backends.is_empty() {
            return bad("no backends".into());
        }
        if self.thresholds.low > self.thresholds.high {
            return bad(format!("low threshold {} exceeds high threshold {}", self.thresholds.low, self.thresholds.high));
        }
        Ok(())
    }

    pub fn parsed_codes(&self) -> Result<Vec<InterventionCode>, ReportError> {
        self.codes
            .iter()
            .map(|c| c.parse().map_err(|e: InterventionError| ReportError::Config(e.to_string())))
            .collect()
    }
}

/// Rows of one experiment plus how to highlight them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AceReport {
    pub thresholds: Thresholds,
    pub rows: Vec<AceRow>,
}

impl AceReport {
    pub fn render(&self, format: Format) -> Result<String, ReportError> {
        match format {
            Format::Markdown => Ok(render_markdown(self)),
            Format::Csv => render_csv(self),
        }
    }
}

/// Identity of a row in the results store.
pub type RowKey = (String, Task, String, usize);

pub fn row_key(r: &AceRow) -> RowKey {
    (r.model.clone(), r.task, r.code.clone(), r.k)
}

/// Everything loaded from disk for a run.
pub struct Inputs {
    pub lexicon: Lexicon,
    pub colors: ColorTable,
    pub dataset: Dataset,
}

impl Inputs {
    pub fn load(cfg: &ExperimentConfig) -> Result<Inputs, ReportError> {
        let lexicon = Lexicon::load(&cfg.lexicon)?;
        let colors = ColorTable::load_csv(&cfg.colors)?;
        let (dataset, warnings) = load_dataset(&cfg.dataset, cfg.pretagged, &Tagger::new(&lexicon))?;
        if !warnings.is_empty() {
            log::warn!("{} dataset records rejected", warnings.len());
        }
        Ok(Inputs { lexicon, colors, dataset })
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Runs every (model, task, code, k) not already in the results store,
/// appending each row as soon as it is known. The default stream runs once
/// per (model, task); edits run once per code.
pub fn run(cfg: &ExperimentConfig, inputs: &Inputs) -> Result<AceReport, ReportError> {
    cfg.validate()?;
    let codes = cfg.parsed_codes()?;
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let mut store = ResultStore::open(cfg.output_dir.join("results.jsonl"))?;
    let depth = *cfg.ks.iter().max().expect("validated");
    let mut edits: HashMap<InterventionCode, EditBatch> = HashMap::new();

    for (model, backend_cfg) in &cfg.backends {
        let mut backend: Option<Backend> = None;
        for &task in &cfg.tasks {
            let mut default: Option<StreamOutcome> = None;
            for code in &codes {
                let todo: Vec<usize> = cfg
                    .ks
                    .iter()
                    .copied()
                    .filter(|&k| !store.contains(&(model.clone(), task, code.to_string(), k)))
                    .collect();
                if todo.is_empty() {
                    continue;
                }
                if backend.is_none() {
                    backend = Some(Backend::from_config(backend_cfg)?);
                }
                let b = backend.as_ref().expect("just set");
                if default.is_none() {
                    log::info!("{model}/{task}: default stream");
                    default = Some(evaluate_stream(&inputs.dataset, task, None, b, depth)?);
                }
                let batch = match edits.get(code) {
                    Some(batch) => batch,
                    None => {
                        let spec = InterventionSpec::new(*code, cfg.seed).with_single_choice(cfg.single_choice);
                        let batch = edit_dataset(&inputs.dataset, &spec, &inputs.lexicon, &inputs.colors)?;
                        edits.entry(*code).or_insert(batch)
                    }
                };
                log::info!("{model}/{task}/{code}: edited stream, n = {}", batch.total_n);
                let edited = evaluate_stream(&inputs.dataset, task, Some(batch), b, depth)?;
                let ctx = RowContext {
                    model,
                    code: code.to_string(),
                    seed: cfg.seed,
                    scale: cfg.scale,
                    mode: cfg.mode,
                };
                for k in todo {
                    let mut row = AceRow::from_streams(&ctx, default.as_ref().expect("just set"), &edited, batch.total_n, k);
                    if cfg.record_timestamps {
                        row.timestamp = Some(now());
                    }
                    store.append(row)?;
                }
            }
        }
    }
    Ok(assemble(cfg, &codes, store.rows()))
}

/// The requested rows in config order.
pub fn assemble(cfg: &ExperimentConfig, codes: &[InterventionCode], rows: &[AceRow]) -> AceReport {
    let by_key: HashMap<RowKey, &AceRow> = rows.iter().map(|r| (row_key(r), r)).collect();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for model in cfg.backends.keys() {
        for &task in &cfg.tasks {
            for code in codes {
                for &k in &cfg.ks {
                    let key = (model.clone(), task, code.to_string(), k);
                    if let Some(r) = by_key.get(&key) {
                        if seen.insert(key) {
                            out.push((*r).clone());
                        }
                    }
                }
            }
        }
    }
    AceReport {
        thresholds: cfg.thresholds,
        rows: out,
    }
}

/// Writes `report.md` and `report.csv` next to the results store.
pub fn write_reports(report: &AceReport, dir: &Path) -> Result<(), ReportError> {
    for (name, format) in [("report.md", Format::Markdown), ("report.csv", Format::Csv)] {
        let path = dir.join(name);
        fs::write(&path, report.render(format)?).map_err(io_err(&path))?;
    }
    Ok(())
}
