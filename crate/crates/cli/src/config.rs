use std::path::{Path, PathBuf};

use instasel::SelectorConfig;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Values read from `--config`. Every key is optional; a flag given on the
/// command line wins over the file. Relative paths are taken as written,
/// that is relative to the working directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub graphs: Option<PathBuf>,
    pub perf: Option<PathBuf>,
    pub target_perf: Option<PathBuf>,
    pub source_models: Option<PathBuf>,
    pub target_models: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub schema: Option<StringList>,
    pub testbed: Option<String>,
    pub sparsity: Option<f64>,
    pub epsilon: Option<usize>,
    pub algorithms: Option<StringList>,
    pub selector: Option<SelectorConfig>,
}

/// Accepts either `"a,b"` or `["a", "b"]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StringList {
    Joined(String),
    Items(Vec<String>),
}

impl StringList {
    pub fn joined(&self) -> String {
        match self {
            StringList::Joined(s) => s.clone(),
            StringList::Items(v) => v.join(","),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Effective settings shared by all subcommands.
#[derive(Debug, Default)]
pub struct Settings {
    pub file: FileConfig,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl Settings {
    pub fn new(config: Option<&Path>, seed: Option<u64>, jobs: Option<usize>) -> CliResult<Self> {
        let file = match config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        Ok(Settings {
            seed: seed.or(file.seed),
            jobs: jobs.or(file.jobs),
            file,
        })
    }

    /// The seed, or a usage error naming what needed it.
    pub fn require_seed(&self, why: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::usage(format!("--seed is required ({why})")))
    }

    pub fn selector_config(&self) -> SelectorConfig {
        self.file.selector.clone().unwrap_or_default()
    }
}

/// Flag value, else config value, else a usage error.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> CliResult<T> {
    flag.or(file).ok_or_else(|| CliError::usage(format!("missing --{name}")))
}
