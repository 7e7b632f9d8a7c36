use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use kblink::linker::FilterToggles;
use kblink::{LinkerConfig, Normalizer};
use serde::Deserialize;

/// Config file contents. Every key is optional; unset keys keep the
/// linker defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub nil_threshold: Option<f64>,
    pub filters: Option<FilterToggles>,
    pub normalizer: Option<Normalizer>,
    pub context_window: Option<usize>,
    pub smooth_idf: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn linker(&self, lambda: Option<f64>, nil_threshold: Option<f64>) -> Result<LinkerConfig> {
        let d = LinkerConfig::default();
        let cfg = LinkerConfig {
            lambda: lambda.or(self.lambda).unwrap_or(d.lambda),
            nil_threshold: nil_threshold.or(self.nil_threshold).unwrap_or(d.nil_threshold),
            filters: self.filters.unwrap_or(d.filters),
            context_window: self.context_window.or(d.context_window),
            smooth_idf: self.smooth_idf.unwrap_or(d.smooth_idf),
        };
        cfg.validate().map_err(anyhow::Error::msg)?;
        Ok(cfg)
    }
}
