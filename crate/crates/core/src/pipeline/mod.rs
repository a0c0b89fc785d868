//! Stage-by-stage pipeline over a work directory. Every stage writes its
//! artifacts into its own subdirectory together with a manifest pinning the
//! configuration hash, the input and output content hashes and the run time.

mod config;
mod data;
mod manifest;
mod models;
mod ranking;

pub use config::{
    EncoderConfig, EvalConfig, FusionConfig, KgeConfig, PathsConfig, PipelineConfig, RetrievalConfig, SplitConfig, UserConfig,
};
pub use manifest::{read_manifest, sha256_file, Manifest, MANIFEST_FILE};
pub use data::{Part, SplitInfo};
pub use models::Variant;
pub use ranking::{read_lists, slug, system_names, ScoredList, TunedSystem, REFERENCE, SYSTEMS};

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::error::{Error, Result};
use manifest::{hash_tree, sha256_hex, write_manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Synth,
    Ingest,
    Index,
    TrainDense,
    Embed,
    BuildKg,
    TrainKg,
    Score,
    Tune,
    Eval,
    Ablate,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::Synth,
        Stage::Ingest,
        Stage::Index,
        Stage::TrainDense,
        Stage::Embed,
        Stage::BuildKg,
        Stage::TrainKg,
        Stage::Score,
        Stage::Tune,
        Stage::Eval,
        Stage::Ablate,
    ];

    /// Command-line name.
    pub fn command(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Index => "index",
            Stage::TrainDense => "train-dense",
            Stage::Embed => "embed",
            Stage::BuildKg => "build-kg",
            Stage::TrainKg => "train-kg",
            Stage::Score => "score",
            Stage::Tune => "tune",
            Stage::Eval => "eval",
            Stage::Ablate => "ablate",
        }
    }

    /// Work directory subdirectory.
    pub fn dir_name(self) -> &'static str {
        match self {
            Stage::TrainDense => "dense",
            Stage::BuildKg => "kg",
            Stage::TrainKg => "kge",
            other => other.command(),
        }
    }

    fn section(self, cfg: &PipelineConfig) -> serde_json::Value {
        match self {
            Stage::Synth => json!({ "seed": cfg.seed, "synth": cfg.synth }),
            Stage::Ingest => json!({ "corpus": cfg.paths.corpus, "authors": cfg.paths.authors, "split": cfg.split }),
            Stage::Index => json!({ "seed": cfg.seed, "retrieval": cfg.retrieval }),
            Stage::TrainDense => json!({ "seed": cfg.seed, "encoder": cfg.encoder }),
            Stage::Embed => json!({}),
            Stage::BuildKg => json!({ "kg": cfg.kg }),
            Stage::TrainKg => json!({ "seed": cfg.seed, "kge": cfg.kge }),
            Stage::Score => json!({ "user": cfg.user }),
            Stage::Tune => json!({ "fusion": cfg.fusion, "map_k": cfg.eval.map_k }),
            Stage::Eval => json!({ "seed": cfg.seed, "eval": cfg.eval }),
            Stage::Ablate => json!({}),
        }
    }
}

/// Stages that run for a configuration, in order.
pub fn stage_chain(cfg: &PipelineConfig) -> Vec<Stage> {
    Stage::ALL
        .into_iter()
        .filter(|s| *s != Stage::Synth || cfg.paths.corpus.is_none())
        .collect()
}

/// Cumulative configuration hash of `stage`.
pub fn config_hash(cfg: &PipelineConfig, stage: Stage) -> String {
    let mut h = String::new();
    for s in stage_chain(cfg) {
        let section = serde_json::to_string(&s.section(cfg)).expect("config serializes");
        h = sha256_hex(format!("{h}|{}|{section}", s.command()).as_bytes());
        if s == stage {
            break;
        }
    }
    h
}

pub struct Workspace {
    pub cfg: PipelineConfig,
    pub root: PathBuf,
    pub allow_stale: bool,
    inputs: RefCell<Vec<PathBuf>>,
}

impl Workspace {
    pub fn new(cfg: PipelineConfig, allow_stale: bool) -> Result<Self> {
        cfg.validate()?;
        let root = cfg.paths.workdir.clone();
        Ok(Workspace {
            cfg,
            root,
            allow_stale,
            inputs: RefCell::new(Vec::new()),
        })
    }

    pub fn dir(&self, stage: Stage) -> PathBuf {
        self.root.join(stage.dir_name())
    }

    /// Path of an upstream artifact; the file is recorded as a stage input.
    fn input(&self, stage: Stage, name: &str) -> Result<PathBuf> {
        let p = self.dir(stage).join(name);
        if !p.exists() {
            return Err(Error::MissingArtifact {
                stage: stage.command().to_string(),
                path: p,
            });
        }
        self.inputs.borrow_mut().push(p.clone());
        Ok(p)
    }

    fn external_input(&self, p: &Path) -> PathBuf {
        self.inputs.borrow_mut().push(p.to_path_buf());
        p.to_path_buf()
    }

    fn stage_seed(&self, tag: &str) -> u64 {
        crate::util::derive_seed(self.cfg.seed, tag)
    }

    /// Checks that every upstream stage has completed with the current
    /// configuration.
    pub fn check_upstream(&self, stage: Stage) -> Result<()> {
        for s in stage_chain(&self.cfg).into_iter().take_while(|s| *s != stage) {
            let dir = self.dir(s);
            let Some(m) = read_manifest(&dir)? else {
                return Err(Error::MissingArtifact {
                    stage: s.command().to_string(),
                    path: dir.join(MANIFEST_FILE),
                });
            };
            let expected = config_hash(&self.cfg, s);
            if m.config_hash != expected {
                if self.allow_stale {
                    log::warn!("using stale `{}` artifacts (config changed since they were built)", s.command());
                } else {
                    return Err(Error::Stale {
                        stage: s.command().to_string(),
                        expected,
                        found: m.config_hash,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn run(&self, stage: Stage) -> Result<()> {
        if stage == Stage::Synth && self.cfg.paths.corpus.is_some() {
            return Err(Error::Config("`synth` is not used when paths.corpus is set".into()));
        }
        self.check_upstream(stage)?;
        let dir = self.dir(stage);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        self.inputs.borrow_mut().clear();
        log::info!("stage `{}` started", stage.command());
        let start = Instant::now();
        match stage {
            Stage::Synth => data::synth(self, &dir),
            Stage::Ingest => data::ingest(self, &dir),
            Stage::Index => data::index(self, &dir),
            Stage::TrainDense => models::train_dense(self, &dir),
            Stage::Embed => models::embed(self, &dir),
            Stage::BuildKg => models::build_kg(self, &dir),
            Stage::TrainKg => models::train_kg(self, &dir),
            Stage::Score => ranking::score(self, &dir),
            Stage::Tune => ranking::tune(self, &dir),
            Stage::Eval => ranking::eval(self, &dir),
            Stage::Ablate => ranking::ablate(self, &dir),
        }?;
        let duration = start.elapsed().as_secs_f64();
        let mut inputs = BTreeMap::new();
        for p in self.inputs.borrow().iter() {
            let key = p.strip_prefix(&self.root).unwrap_or(p).to_string_lossy().replace('\\', "/");
            inputs.insert(key, sha256_file(p)?);
        }
        let manifest = Manifest {
            stage: stage.command().to_string(),
            config_hash: config_hash(&self.cfg, stage),
            seed: self.cfg.seed,
            config: serde_json::to_value(&self.cfg).expect("config serializes"),
            inputs,
            outputs: hash_tree(&self.root, &dir)?,
            duration_secs: duration,
        };
        write_manifest(&dir, &manifest)?;
        log::info!("stage `{}` finished in {:.1}s", stage.command(), duration);
        Ok(())
    }

    /// Runs every stage in order.
    pub fn end_to_end(&self) -> Result<()> {
        for s in stage_chain(&self.cfg) {
            self.run(s)?;
        }
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    write_text(path, &(text + "\n"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}
