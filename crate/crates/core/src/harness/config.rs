//! TOML experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::synthetic::SyntheticSpec;
use crate::correlation::ThresholdPolicy;
use crate::ensemble::LogisticConfig;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::strategy::{AcquisitionConfig, QueryBudget, ScoringOptions, StrategyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    #[default]
    Crab,
    #[serde(alias = "besra_style")]
    Besra,
    Random,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Crab => "crab",
            StrategyKind::Besra => "besra",
            StrategyKind::Random => "random",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crab" => Ok(StrategyKind::Crab),
            "besra" | "besra_style" => Ok(StrategyKind::Besra),
            "random" => Ok(StrategyKind::Random),
            other => Err(Error::Config(format!(
                "unknown strategy {other:?} (crab, besra, random)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub strategy: StrategyKind,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub execution: Execution,
    /// Write `A` and `NegA` after every iteration.
    pub dump_correlation: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            strategy: StrategyKind::Crab,
            seeds: vec![1, 2, 3, 4, 5],
            out: PathBuf::from("results"),
            execution: Execution::Parallel,
            dump_correlation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Sparse-format pool. Either this or `synthetic` must be set.
    pub train: Option<PathBuf>,
    /// Held-out evaluation set; without it a validation split of the pool is used.
    pub test: Option<PathBuf>,
    pub initial_labeled: usize,
    /// Validation split size, used only when `test` is absent.
    pub validation: usize,
    pub synthetic: Option<SyntheticSpec>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            train: None,
            test: None,
            initial_labeled: 20,
            validation: 200,
            synthetic: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub size: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection { size: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub data: DataSection,
    pub scoring: ScoringOptions,
    pub correlation: ThresholdPolicy,
    pub ensemble: EnsembleSection,
    pub classifier: LogisticConfig,
    pub budget: QueryBudget,
    pub strategy: StrategyOptions,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads, resolves relative paths against the file's directory and
    /// validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = ExperimentConfig::parse(&text)?;
        if let Some(dir) = path.parent() {
            config.resolve_paths(dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.data.train.as_mut() {
            fix(p);
        }
        if let Some(p) = self.data.test.as_mut() {
            fix(p);
        }
        if let Some(p) = self.data.synthetic.as_mut().and_then(|s| s.base.as_mut()) {
            fix(p);
        }
        fix(&mut self.run.out);
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.seeds.is_empty() {
            return Err(Error::Config("run.seeds must list at least one seed".into()));
        }
        match (&self.data.train, &self.data.synthetic) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set either data.train or data.synthetic, not both".into(),
                ))
            }
            (None, None) => return Err(Error::Config("one of data.train or data.synthetic is required".into())),
            _ => {}
        }
        for p in [&self.data.train, &self.data.test].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::Config(format!("data file {} not found", p.display())));
            }
        }
        if let Some(spec) = &self.data.synthetic {
            spec.validate()?;
        }
        if self.data.initial_labeled == 0 {
            return Err(Error::Config("data.initial_labeled must be >= 1".into()));
        }
        if self.data.test.is_none() && self.data.validation == 0 {
            return Err(Error::Config("data.validation must be >= 1 without a test set".into()));
        }
        if self.ensemble.size == 0 {
            return Err(Error::Config("ensemble.size must be >= 1".into()));
        }
        self.classifier.validate()?;
        self.acquisition().validate()
    }

    pub fn acquisition(&self) -> AcquisitionConfig {
        AcquisitionConfig {
            budget: self.budget,
            strategy: self.strategy,
            scoring: self.scoring,
            correlation: self.correlation,
            execution: self.run.execution,
        }
    }
}
