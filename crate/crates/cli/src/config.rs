//! Optional TOML config. Keys mirror the long flag names (with `_` for
//! `-`); a flag given on the command line always wins.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;
use tipcast_core::regime::Thresholds;

use crate::args::Format;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<Format>,
    pub forecast: ForecastConfig,
    pub cohesion: CohesionConfig,
    pub toy: ToyConfig,
    pub map: MapConfig,
    pub regimes: RegimesConfig,
    pub corpus: CorpusConfig,
    pub serve: ServeConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub warn_threshold_n: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohesionConfig {
    pub threshold: Option<f64>,
    pub sweep: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub preset: Option<String>,
    pub seeds: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub bins: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimesConfig {
    pub similarity_threshold: Option<f64>,
    pub bins: Option<usize>,
    /// Cut-offs of the classifier cascade; missing keys keep their defaults.
    pub thresholds: Option<Thresholds>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub correlation: Option<String>,
    pub shuffles: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub state_dir: Option<PathBuf>,
    pub host: Option<String>,
    pub port: Option<u16>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}
