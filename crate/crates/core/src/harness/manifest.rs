use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::TrainConfig;
use crate::corpus::CorpusFormat;
use crate::cost::{Clock, CostModel, VirtualRates};
use crate::error::{Error, Result};
use crate::llm::{BackendConfig, PromptTemplate};
use crate::router::{default_grid, validate_grid, RouterConfig, UnparsedPolicy};

/// Everything needed to reproduce a run. Relative paths are resolved
/// against the directory holding the manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
    /// Significance level of the paired t-tests.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub router: RouterSection,
    #[serde(default)]
    pub backend: BackendConfig,
    /// Backend used for threshold tuning; defaults to `backend`.
    #[serde(default)]
    pub tuning_backend: Option<BackendConfig>,
    #[serde(default)]
    pub template: PromptTemplate,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub cost: CostModel,
    #[serde(default)]
    pub clock: ClockConfig,
}

fn default_seed() -> u64 {
    42
}
fn default_k() -> usize {
    5
}
fn default_validation_fraction() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    0.05
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("run")
}
fn default_methods() -> Vec<Method> {
    vec![Method::Local, Method::Cascade, Method::Llm]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Calibrated classifier alone.
    Local,
    /// Classifier with low-confidence documents sent to the LLM.
    Cascade,
    /// Every test document sent to the LLM.
    Llm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Local => "local",
            Method::Cascade => "cascade",
            Method::Llm => "llm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default = "default_dataset_name")]
    pub name: String,
    pub path: PathBuf,
    /// Inferred from the extension when absent.
    #[serde(default)]
    pub format: Option<CorpusFormat>,
    pub embeddings: PathBuf,
}

fn default_dataset_name() -> String {
    "dataset".into()
}

impl DatasetConfig {
    pub fn corpus_format(&self) -> CorpusFormat {
        self.format
            .unwrap_or_else(|| CorpusFormat::from_path(&self.path))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouterSection {
    /// Fixed threshold; when absent each fold tunes one over `grid`.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    #[serde(default)]
    pub unparsed_policy: UnparsedPolicy,
}

impl Default for RouterSection {
    fn default() -> Self {
        Self {
            threshold: None,
            grid: default_grid(),
            unparsed_policy: UnparsedPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    #[default]
    Monotonic,
    Virtual,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockConfig {
    #[serde(default)]
    pub mode: ClockMode,
    #[serde(default)]
    pub rates: VirtualRates,
    /// Per-fold time spent building document representations outside this
    /// tool. Overrides the virtual representation rate when set.
    #[serde(default)]
    pub representation_seconds: Option<f64>,
}

impl ClockConfig {
    pub fn clock(&self) -> Clock {
        match self.mode {
            ClockMode::Monotonic => Clock::Monotonic,
            ClockMode::Virtual => Clock::Virtual(self.rates),
        }
    }
}

impl RunManifest {
    pub fn new(dataset: PathBuf, embeddings: PathBuf) -> Self {
        Self {
            seed: default_seed(),
            k: default_k(),
            validation_fraction: default_validation_fraction(),
            alpha: default_alpha(),
            output_dir: default_output_dir(),
            methods: default_methods(),
            dataset: DatasetConfig {
                name: default_dataset_name(),
                path: dataset,
                format: None,
                embeddings,
            },
            router: RouterSection::default(),
            backend: BackendConfig::default(),
            tuning_backend: None,
            template: PromptTemplate::default(),
            train: TrainConfig::default(),
            cost: CostModel::default(),
            clock: ClockConfig::default(),
        }
    }

    /// Parse a manifest and make its relative paths absolute with respect
    /// to the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest = Self::from_toml(&raw)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        manifest.resolve_paths(base);
        Ok(manifest)
    }

    pub fn from_toml(raw: &str) -> Result<Self> {
        toml::from_str(raw).map_err(|e| Error::Config(format!("manifest: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("manifest: {e}")))
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.dataset.path);
        join(&mut self.dataset.embeddings);
        join(&mut self.output_dir);
        for backend in std::iter::once(&mut self.backend).chain(self.tuning_backend.as_mut()) {
            if let Some(c) = backend.cassette.as_mut() {
                join(c);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config(format!(
                "validation_fraction must lie in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if let Some(t) = self.router.threshold {
            crate::router::check_threshold(t).map_err(|e| Error::Config(e.to_string()))?;
        }
        validate_grid(&self.router.grid).map_err(|e| Error::Config(e.to_string()))?;
        self.backend.validate()?;
        if let Some(b) = &self.tuning_backend {
            b.validate()?;
        }
        self.cost.validate()?;
        crate::metrics::t_critical(1, self.alpha).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(s) = self.clock.representation_seconds {
            if !(s >= 0.0) {
                return Err(Error::Config(
                    "representation_seconds must be non-negative".into(),
                ));
            }
        }
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        if methods.len() != self.methods.len() {
            return Err(Error::Config("methods must not repeat".into()));
        }
        Ok(())
    }

    pub fn router_config(&self, threshold: f64) -> RouterConfig {
        RouterConfig {
            threshold,
            unparsed_policy: self.router.unparsed_policy,
            template: self.template.clone(),
        }
    }

    pub fn tuning_backend(&self) -> &BackendConfig {
        self.tuning_backend.as_ref().unwrap_or(&self.backend)
    }
}
