//! Loaded models keyed by (horizon, target) over one corpus snapshot.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;
use trendcast::corpus::{ingest, CorpusPaths, WindowConvention};
use trendcast::features::MAX_HORIZON;
use trendcast::models::persist;
use trendcast::{CorpusError, CorpusStore, ModelError, TargetKind, TrainedModel};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{}: {source}", path.display())]
    Model {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
    #[error("reading {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("two models for horizon {horizon}, target {target}: {} and {}", first.display(), second.display())]
    Duplicate {
        horizon: u32,
        target: TargetKind,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("no {target} model for horizon {horizon}; horizons must run 1..={max} for both targets")]
    Gap {
        horizon: u32,
        target: TargetKind,
        max: u32,
    },
    #[error("horizon {0} is out of range")]
    Horizon(u32),
}

/// Immutable after construction; reloads build a new registry.
#[derive(Debug)]
pub struct Registry {
    store: CorpusStore,
    models: BTreeMap<(u32, TargetKind), TrainedModel>,
    max_horizon: u32,
}

impl Registry {
    /// Requires, for some `H`, exactly one model of each target for every
    /// horizon in `1..=H`. No models at all is allowed (browsing only).
    pub fn new(store: CorpusStore, models: Vec<TrainedModel>) -> Result<Self, RegistryError> {
        let named = models.into_iter().map(|m| (PathBuf::new(), m)).collect();
        Self::from_named(store, named)
    }

    fn from_named(store: CorpusStore, models: Vec<(PathBuf, TrainedModel)>) -> Result<Self, RegistryError> {
        let mut by_key: BTreeMap<(u32, TargetKind), (PathBuf, TrainedModel)> = BTreeMap::new();
        for (path, model) in models {
            if !(1..=MAX_HORIZON).contains(&model.horizon) {
                return Err(RegistryError::Horizon(model.horizon));
            }
            let key = (model.horizon, model.target);
            if let Some((first, _)) = by_key.get(&key) {
                return Err(RegistryError::Duplicate {
                    horizon: key.0,
                    target: key.1,
                    first: first.clone(),
                    second: path,
                });
            }
            by_key.insert(key, (path, model));
        }
        let max_horizon = by_key.keys().map(|k| k.0).max().unwrap_or(0);
        for horizon in 1..=max_horizon {
            for target in [TargetKind::Pop, TargetKind::Pct] {
                if !by_key.contains_key(&(horizon, target)) {
                    return Err(RegistryError::Gap {
                        horizon,
                        target,
                        max: max_horizon,
                    });
                }
            }
        }
        Ok(Self {
            store,
            models: by_key.into_iter().map(|(k, (_, m))| (k, m)).collect(),
            max_horizon,
        })
    }

    /// Reads every `*.json` model in `models_dir` and the corpus files in
    /// `corpus_dir`.
    pub fn load(models_dir: &Path, corpus_dir: &Path) -> Result<Self, RegistryError> {
        let store = ingest(&CorpusPaths::in_dir(corpus_dir), WindowConvention::default())?;
        Self::with_models_dir(store, models_dir)
    }

    /// Pairs an already loaded corpus with every `*.json` model in `models_dir`.
    pub fn with_models_dir(store: CorpusStore, models_dir: &Path) -> Result<Self, RegistryError> {
        let io = |path: &Path, source| RegistryError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut paths = Vec::new();
        for entry in std::fs::read_dir(models_dir).map_err(|e| io(models_dir, e))? {
            let path = entry.map_err(|e| io(models_dir, e))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                paths.push(path);
            }
        }
        paths.sort();
        let mut models = Vec::with_capacity(paths.len());
        for path in paths {
            let model = persist::load(&path).map_err(|source| RegistryError::Model {
                path: path.clone(),
                source,
            })?;
            models.push((path, model));
        }
        let registry = Self::from_named(store, models)?;
        log::info!(
            "registry: {} topics, {} models, horizons 1..={}",
            registry.store.len(),
            registry.models.len(),
            registry.max_horizon
        );
        Ok(registry)
    }

    pub fn store(&self) -> &CorpusStore {
        &self.store
    }

    pub fn model(&self, horizon: u32, target: TargetKind) -> Option<&TrainedModel> {
        self.models.get(&(horizon, target))
    }

    /// Largest horizon served; 0 when no models are loaded.
    pub fn max_horizon(&self) -> u32 {
        self.max_horizon
    }
}
