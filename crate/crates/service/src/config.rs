use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stp_core::similarity::{ParamsError, SimilarityParams};
use stp_core::RecommendParams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(#[from] ParamsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub college: f64,
    pub programs: f64,
    pub interests: f64,
    pub expertise: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        let d = SimilarityParams::default();
        SimilarityWeights {
            college: d.weight_college,
            programs: d.weight_programs,
            interests: d.weight_interests,
            expertise: d.weight_expertise,
        }
    }
}

/// Service configuration file. Every key is optional and falls back to the
/// built-in default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub port: u16,
    pub data_path: PathBuf,
    pub vocab_path: Option<PathBuf>,
    pub default_alpha: f64,
    pub default_k_neighbors: usize,
    pub default_limit: usize,
    pub similarity_weights: SimilarityWeights,
}

impl Default for Config {
    fn default() -> Self {
        let d = RecommendParams::default();
        Config {
            port: 8080,
            data_path: PathBuf::from("stp-state.json"),
            vocab_path: None,
            default_alpha: d.alpha,
            default_k_neighbors: d.similarity.k_neighbors,
            default_limit: d.limit,
            similarity_weights: SimilarityWeights::default(),
        }
    }
}

impl Config {
    pub fn from_json(bytes: &[u8]) -> Result<Self, ConfigError> {
        let config: Config = serde_json::from_slice(bytes)?;
        config.recommend_params()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&bytes)
    }

    /// Default recommendation parameters described by this config.
    pub fn recommend_params(&self) -> Result<RecommendParams, ParamsError> {
        let w = &self.similarity_weights;
        let params = RecommendParams {
            alpha: self.default_alpha,
            limit: self.default_limit,
            include_past_items: false,
            similarity: SimilarityParams {
                weight_college: w.college,
                weight_programs: w.programs,
                weight_interests: w.interests,
                weight_expertise: w.expertise,
                k_neighbors: self.default_k_neighbors,
            },
        };
        params.validate()?;
        Ok(params)
    }
}
