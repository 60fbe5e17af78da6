use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::classifier::Hyperparameters;
use crate::features::{FeatureMode, DEFAULT_TOPICS};
use crate::translator::TranslationBackendSpec;

/// Desk configuration. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub sources_path: PathBuf,
    pub lexicons_path: PathBuf,
    pub glossary_path: PathBuf,
    pub store_dir: PathBuf,
    pub backends: Vec<TranslationBackendSpec>,
    #[serde(default)]
    pub feature_mode: FeatureMode,
    #[serde(default)]
    pub classifier_hyper: Hyperparameters,
    /// The class set; defaults to the six editorial topics plus `other`.
    #[serde(default = "default_classes")]
    pub classes: Vec<String>,
    /// JSON map of article URL → class, used for `fixture` label training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_labels_path: Option<PathBuf>,
    #[serde(default = "default_parallelism")]
    pub fetch_parallelism: usize,
    /// Every k-th labeled article per class is held out for evaluation; 0 disables.
    #[serde(default = "default_holdout_every")]
    pub holdout_every: usize,
    #[serde(default = "default_min_df")]
    pub vocab_min_df: u32,
    #[serde(default = "default_max_terms")]
    pub vocab_max_terms: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dashboard_dir: Option<PathBuf>,
}

fn default_classes() -> Vec<String> {
    DEFAULT_TOPICS.iter().map(|s| s.to_string()).chain(["other".to_string()]).collect()
}

fn default_parallelism() -> usize {
    4
}

fn default_holdout_every() -> usize {
    4
}

fn default_min_df() -> u32 {
    1
}

fn default_max_terms() -> usize {
    5000
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let mut config: Config =
            serde_json::from_str(&raw).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.sources_path);
        fix(&mut self.lexicons_path);
        fix(&mut self.glossary_path);
        fix(&mut self.store_dir);
        if let Some(p) = self.fixture_labels_path.as_mut() {
            fix(p);
        }
        if let Some(p) = self.dashboard_dir.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.classes.len() < 2 {
            return Err(ServiceError::Config("at least two classes are required".into()));
        }
        if self.fetch_parallelism == 0 {
            return Err(ServiceError::Config("fetch_parallelism must be at least 1".into()));
        }
        for b in &self.backends {
            b.validate()?;
        }
        Ok(())
    }

    /// Directory feeds with `fixture:` URLs are read from.
    pub fn fixture_root(&self) -> PathBuf {
        self.sources_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn models_dir(&self) -> PathBuf {
        self.store_dir.join("models")
    }
}
