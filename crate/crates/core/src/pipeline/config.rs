use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{QrelMode, SynthConfig};
use crate::dense::DenseTrainConfig;
use crate::error::{Error, Result};
use crate::graph::PageRankConfig;
use crate::kg::KgConfig;
use crate::kge::{KgModel, KgTrainConfig};
use crate::lexical::{Analyzer, Bm25Params};
use crate::user::{AggregationMode, UserSimilarity};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Corpus JSONL to ingest; the synthetic corpus is used when unset.
    pub corpus: Option<PathBuf>,
    pub authors: Option<PathBuf>,
    pub workdir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Fixed cutoff year; when unset, the year at `cutoff_percentile`.
    pub cutoff_year: Option<i32>,
    pub cutoff_percentile: f64,
    /// Number of years right before the cutoff whose papers become
    /// validation queries. Everything older is the fit partition.
    pub validation_years: i32,
    /// Subsample caps; every judged query is kept when unset.
    pub max_validation_queries: Option<usize>,
    pub max_test_queries: Option<usize>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            cutoff_year: None,
            cutoff_percentile: 0.8,
            validation_years: 1,
            max_validation_queries: None,
            max_test_queries: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub k1: f64,
    pub b: f64,
    pub stem: bool,
    pub candidates: usize,
    pub train_qrels: QrelMode,
    pub validation_qrels: QrelMode,
    pub test_qrels: QrelMode,
    /// BM25 depth of the union rule.
    pub union_depth: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            k1: 0.9,
            b: 0.4,
            stem: true,
            candidates: 100,
            train_qrels: QrelMode::Union,
            validation_qrels: QrelMode::CitationsOnly,
            test_qrels: QrelMode::CitationsOnly,
            union_depth: 100,
        }
    }
}

impl RetrievalConfig {
    pub fn bm25(&self) -> Bm25Params {
        Bm25Params { k1: self.k1, b: self.b }
    }

    pub fn analyzer(&self) -> Analyzer {
        Analyzer { stem: self.stem }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub dim: usize,
    pub buckets: usize,
    /// Training pairs kept per query, cited documents first.
    pub max_pairs_per_query: usize,
    pub train: DenseTrainConfig,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            dim: 64,
            buckets: 1 << 16,
            max_pairs_per_query: 4,
            train: DenseTrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KgeConfig {
    /// Model behind the ablation rows.
    pub ablation_model: KgModel,
    pub train: KgTrainConfig,
}

impl Default for KgeConfig {
    fn default() -> Self {
        KgeConfig {
            ablation_model: KgModel::TransH,
            train: KgTrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserConfig {
    pub aggregation: AggregationMode,
    pub similarity: UserSimilarity,
    pub pagerank: PageRankConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub step: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig { step: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub map_k: usize,
    pub mrr_k: usize,
    pub ndcg_k: usize,
    pub permutations: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            map_k: 100,
            mrr_k: 10,
            ndcg_k: 10,
            permutations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: PathsConfig,
    pub synth: SynthConfig,
    pub split: SplitConfig,
    pub retrieval: RetrievalConfig,
    pub encoder: EncoderConfig,
    pub kg: KgConfig,
    pub kge: KgeConfig,
    pub user: UserConfig,
    pub fusion: FusionConfig,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 7,
            paths: PathsConfig {
                workdir: PathBuf::from("work"),
                ..Default::default()
            },
            synth: SynthConfig::default(),
            split: SplitConfig::default(),
            retrieval: RetrievalConfig::default(),
            encoder: EncoderConfig::default(),
            kg: KgConfig::default(),
            kge: KgeConfig::default(),
            user: UserConfig::default(),
            fusion: FusionConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.retrieval.bm25().validate()?;
        self.encoder.train.validate()?;
        self.kge.train.validate()?;
        if self.encoder.dim == 0 || self.encoder.buckets == 0 {
            return Err(Error::Config("encoder dim and buckets must be positive".into()));
        }
        if self.retrieval.candidates == 0 {
            return Err(Error::Config("retrieval.candidates must be positive".into()));
        }
        if self.split.validation_years < 1 {
            return Err(Error::Config("split.validation_years must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.split.cutoff_percentile) {
            return Err(Error::Config("split.cutoff_percentile must lie in [0, 1]".into()));
        }
        crate::eval::lambda_grid(self.fusion.step)?;
        if self.paths.corpus.is_some() != self.paths.authors.is_some() {
            return Err(Error::Config("paths.corpus and paths.authors must be given together".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(PipelineConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(matches!(PipelineConfig::from_toml("[bm25]\nk1 = 1.0"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::from_toml("[fusion]\nstep = 0.3"), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::from_toml("[retrieval]\nb = 2.0"), Err(Error::Config(_))));
    }
}
