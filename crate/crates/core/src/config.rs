//! JSON run configuration for the `train` subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetFormat;
use crate::error::{Error, Result};
use crate::llmdcos::LayerRange;
use crate::model::{ModelConfig, TrainOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    /// Training corpus.
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<DatasetFormat>,
    pub text_field: Option<String>,
    pub checkpoint: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpus: None,
            corpus_format: None,
            text_field: None,
            checkpoint: PathBuf::from("model.actg"),
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub bucket_size: usize,
    pub histogram_bins: usize,
    pub layer_range: Option<LayerRange>,
    pub pairs_per_cell: usize,
    pub max_samples: usize,
    pub global_sparsity: f64,
    pub shallow_layers: Option<LayerRange>,
    pub shallow_sparsity: f64,
    pub calib_samples: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bucket_size: 1000,
            histogram_bins: 50,
            layer_range: None,
            pairs_per_cell: 64,
            max_samples: 64,
            global_sparsity: 0.5,
            shallow_layers: None,
            shallow_sparsity: 0.45,
            calib_samples: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train: TrainOptions,
    pub paths: Paths,
    pub analysis: AnalysisConfig,
    pub seed: u64,
}

impl RunConfig {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(c) = cfg.paths.corpus.as_mut() {
            resolve(c);
        }
        resolve(&mut cfg.paths.checkpoint);
        resolve(&mut cfg.paths.out_dir);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if let Some(c) = &self.paths.corpus {
            if !c.exists() {
                return Err(Error::Data(format!("corpus {} does not exist", c.display())));
            }
        }
        let n = self.model.n_layers;
        if let Some(r) = self.analysis.layer_range {
            r.validate(n)?;
        }
        if let Some(r) = self.analysis.shallow_layers {
            r.validate(n)?;
        }
        if self.analysis.bucket_size == 0 {
            return Err(Error::Config {
                field: "analysis.bucket_size",
                reason: "must be at least 1".into(),
            });
        }
        if self.train.batch == 0 {
            return Err(Error::Config {
                field: "train.batch",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg: RunConfig = serde_json::from_str(r#"{"model": {"n_layers": 2, "d_model": 8, "n_heads": 2, "d_ff": 16, "vocab_size": 259, "context_len": 16, "seed": 1}, "train": {"steps": 3}}"#).unwrap();
        assert_eq!(cfg.train.steps, 3);
        assert_eq!(cfg.train.batch, TrainOptions::default().batch);
        assert_eq!(cfg.analysis.bucket_size, 1000);
        cfg.validate().unwrap();
    }

    #[test]
    fn range_beyond_depth_rejected() {
        let mut cfg = RunConfig::default();
        cfg.analysis.layer_range = Some(LayerRange::new(5, 12));
        assert!(cfg.validate().is_err());
    }
}
