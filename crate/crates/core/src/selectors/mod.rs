//! Instantaneous model selection algorithms.
//!
//! Every selector is split into [`SelectorModel::fit`], which learns from a
//! [`TrainCorpus`], and [`SelectorModel::predict`], which maps a query
//! meta-feature vector to one score per model (higher is better).

pub mod alors;
pub mod baselines;
pub mod forest;
pub mod kmeans;
pub mod metagl;
pub mod metaod;
pub mod mlp;
pub mod ncf;
pub mod nmf;
pub mod s2;
pub mod scaler;
pub mod train;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::linalg::Matrix;
use crate::metafeat::Schema;
use crate::perf::{ModelConfig, PerformanceMatrix};
use self::train::{OptimizerKind, TrainOptions};

/// Score given to models with no observation anywhere in the training corpus.
/// It is the most negative finite double so such models rank last while
/// predictions stay finite.
pub const UNOBSERVED_SCORE: f64 = f64::MIN;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "randsel")]
    RandSel,
    #[serde(rename = "gb_avgperf")]
    GbAvgPerf,
    #[serde(rename = "gb_avgrank")]
    GbAvgRank,
    #[serde(rename = "isac")]
    Isac,
    #[serde(rename = "argosmart")]
    ArgoSmart,
    #[serde(rename = "s2")]
    S2,
    #[serde(rename = "alors")]
    Alors,
    #[serde(rename = "ncf")]
    Ncf,
    #[serde(rename = "metaod")]
    MetaOd,
    #[serde(rename = "metagl_lite")]
    MetaGlLite,
}

impl Algorithm {
    pub const ALL: [Algorithm; 10] = [
        Algorithm::RandSel,
        Algorithm::GbAvgPerf,
        Algorithm::GbAvgRank,
        Algorithm::Isac,
        Algorithm::ArgoSmart,
        Algorithm::S2,
        Algorithm::Alors,
        Algorithm::Ncf,
        Algorithm::MetaOd,
        Algorithm::MetaGlLite,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::RandSel => "randsel",
            Algorithm::GbAvgPerf => "gb_avgperf",
            Algorithm::GbAvgRank => "gb_avgrank",
            Algorithm::Isac => "isac",
            Algorithm::ArgoSmart => "argosmart",
            Algorithm::S2 => "s2",
            Algorithm::Alors => "alors",
            Algorithm::Ncf => "ncf",
            Algorithm::MetaOd => "metaod",
            Algorithm::MetaGlLite => "metagl_lite",
        }
    }

    /// Display name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::RandSel => "RandSel",
            Algorithm::GbAvgPerf => "GB-AvgPerf",
            Algorithm::GbAvgRank => "GB-AvgRank",
            Algorithm::Isac => "ISAC",
            Algorithm::ArgoSmart => "AS",
            Algorithm::S2 => "S2",
            Algorithm::Alors => "ALORS",
            Algorithm::Ncf => "NCF",
            Algorithm::MetaOd => "MetaOD-style",
            Algorithm::MetaGlLite => "MetaGL-lite",
        }
    }

    pub fn is_gradient_trained(self) -> bool {
        matches!(self, Algorithm::S2 | Algorithm::Alors | Algorithm::Ncf | Algorithm::MetaOd | Algorithm::MetaGlLite)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let alg = match key.as_str() {
            "randsel" | "random" => Algorithm::RandSel,
            "gb_avgperf" => Algorithm::GbAvgPerf,
            "gb_avgrank" => Algorithm::GbAvgRank,
            "isac" => Algorithm::Isac,
            "argosmart" | "as" => Algorithm::ArgoSmart,
            "s2" => Algorithm::S2,
            "alors" => Algorithm::Alors,
            "ncf" => Algorithm::Ncf,
            "metaod" | "metaod_style" => Algorithm::MetaOd,
            "metagl_lite" | "metagl" => Algorithm::MetaGlLite,
            _ => return Err(Error::invalid(format!("unknown algorithm {s:?}"))),
        };
        Ok(alg)
    }
}

/// Hyperparameters shared by all selectors; each algorithm reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectorConfig {
    pub isac_k: usize,
    pub kmeans_max_iter: usize,
    pub hidden: usize,
    /// Hidden layers of the S2 and ALORS regressors and the NCF graph encoder.
    pub hidden_layers: usize,
    /// Latent size of ALORS/NCF/MetaOD factors and MetaGL embeddings.
    pub latent: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub optimizer: OptimizerKind,
    pub patience: usize,
    pub min_improvement: f64,
    pub nmf_max_iter: usize,
    pub n_trees: usize,
    pub max_depth: usize,
    pub top_k: usize,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig {
            isac_k: 5,
            kmeans_max_iter: 100,
            hidden: 32,
            hidden_layers: 2,
            latent: 32,
            epochs: 500,
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 1e-4,
            optimizer: OptimizerKind::Sgd,
            patience: 50,
            min_improvement: 1e-6,
            nmf_max_iter: 2000,
            n_trees: 100,
            max_depth: 10,
            top_k: 30,
        }
    }
}

impl SelectorConfig {
    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            optimizer: self.optimizer,
            patience: self.patience.max(1),
            min_improvement: self.min_improvement,
        }
    }
}

/// Meta-features and (possibly sparse) performances of the training graphs.
#[derive(Clone, Debug)]
pub struct TrainCorpus {
    pub features: Matrix,
    pub perf: PerformanceMatrix,
    pub catalog: Vec<ModelConfig>,
    pub schema: Option<Schema>,
}

impl TrainCorpus {
    pub fn new(features: Matrix, perf: PerformanceMatrix) -> Result<Self> {
        if features.rows() != perf.n_graphs() {
            return Err(Error::invalid(format!(
                "{} feature rows for {} performance rows",
                features.rows(),
                perf.n_graphs()
            )));
        }
        if features.rows() == 0 || features.cols() == 0 || perf.n_models() == 0 {
            return Err(Error::invalid("training corpus must have graphs, features and models"));
        }
        if !features.is_finite() {
            return Err(Error::invalid("training meta-features contain non-finite values"));
        }
        Ok(TrainCorpus {
            features,
            perf,
            catalog: Vec::new(),
            schema: None,
        })
    }

    /// Aligns feature rows to the performance matrix's graph order.
    pub fn from_feature_matrix(fm: &FeatureMatrix, perf: PerformanceMatrix) -> Result<Self> {
        let index = fm.index_of();
        let rows = perf
            .graph_ids
            .iter()
            .map(|g| {
                index
                    .get(g.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("no meta-features for graph {g:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut corpus = TrainCorpus::new(fm.values.select_rows(&rows), perf)?;
        corpus.schema = Some(fm.schema);
        Ok(corpus)
    }

    pub fn with_catalog(mut self, catalog: Vec<ModelConfig>) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn m(&self) -> usize {
        self.perf.n_models()
    }

    pub fn d(&self) -> usize {
        self.features.cols()
    }

    /// Performance values with unobserved cells set to zero, and the mask.
    pub(crate) fn perf_dense(&self) -> (Matrix, Vec<bool>) {
        let (n, m) = (self.n(), self.m());
        let mut values = Matrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                if let Some(v) = self.perf.get(i, j) {
                    values.set(i, j, v);
                }
            }
        }
        (values, self.perf.mask().to_vec())
    }

    pub(crate) fn never_observed(&self) -> Vec<bool> {
        (0..self.m()).map(|j| (0..self.n()).all(|i| !self.perf.observed(i, j))).collect()
    }
}

/// Learned payload of one selector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectorState {
    Random { n_models: usize },
    Constant { scores: Vec<f64> },
    Isac(baselines::IsacState),
    ArgoSmart(baselines::ArgoSmartState),
    S2(s2::S2State),
    Alors(alors::AlorsState),
    Ncf(ncf::NcfState),
    MetaOd(metaod::MetaOdState),
    MetaGl(metagl::MetaGlState),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectorModel {
    pub algorithm: Algorithm,
    pub config: SelectorConfig,
    pub seed: u64,
    pub schema: Option<Schema>,
    pub model_ids: Vec<String>,
    pub feature_dim: usize,
    pub never_observed: Vec<bool>,
    pub state: SelectorState,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    algorithm: Algorithm,
    config: SelectorConfig,
    seed: u64,
    schema: Option<Schema>,
    feature_dim: usize,
    model_ids: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    never_observed: Vec<bool>,
    state: SelectorState,
}

impl SelectorModel {
    pub fn fit(algorithm: Algorithm, corpus: &TrainCorpus, config: &SelectorConfig, seed: u64) -> Result<Self> {
        let state = match algorithm {
            Algorithm::RandSel => SelectorState::Random { n_models: corpus.m() },
            Algorithm::GbAvgPerf => SelectorState::Constant {
                scores: baselines::gb_avgperf(&corpus.perf),
            },
            Algorithm::GbAvgRank => SelectorState::Constant {
                scores: baselines::gb_avgrank(&corpus.perf),
            },
            Algorithm::Isac => SelectorState::Isac(baselines::IsacState::fit(corpus, config.isac_k, seed, config.kmeans_max_iter)?),
            Algorithm::ArgoSmart => SelectorState::ArgoSmart(baselines::ArgoSmartState::fit(corpus)),
            Algorithm::S2 => SelectorState::S2(s2::S2State::fit(corpus, config, seed)?),
            Algorithm::Alors => SelectorState::Alors(alors::AlorsState::fit(corpus, config, seed)?),
            Algorithm::Ncf => SelectorState::Ncf(ncf::NcfState::fit(corpus, config, seed)?),
            Algorithm::MetaOd => SelectorState::MetaOd(metaod::MetaOdState::fit(corpus, config, seed)?),
            Algorithm::MetaGlLite => SelectorState::MetaGl(metagl::MetaGlState::fit(corpus, config, seed)?),
        };
        Ok(SelectorModel {
            algorithm,
            config: config.clone(),
            seed,
            schema: corpus.schema,
            model_ids: corpus.perf.model_ids.clone(),
            feature_dim: corpus.d(),
            never_observed: corpus.never_observed(),
            state,
        })
    }

    pub fn n_models(&self) -> usize {
        self.model_ids.len()
    }

    /// One finite score per model.
    pub fn predict(&self, query: &[f64]) -> Result<Vec<f64>> {
        if query.len() != self.feature_dim {
            return Err(Error::invalid(format!(
                "query has {} features, model expects {}",
                query.len(),
                self.feature_dim
            )));
        }
        if query.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("query meta-features contain non-finite values"));
        }
        let mut scores = match &self.state {
            SelectorState::Random { n_models } => baselines::random_scores(*n_models, self.seed, query),
            SelectorState::Constant { scores } => scores.clone(),
            SelectorState::Isac(s) => s.predict(query),
            SelectorState::ArgoSmart(s) => s.predict(query),
            SelectorState::S2(s) => s.predict(query),
            SelectorState::Alors(s) => s.predict(query),
            SelectorState::Ncf(s) => s.predict(query),
            SelectorState::MetaOd(s) => s.predict(query),
            SelectorState::MetaGl(s) => s.predict(query),
        };
        debug_assert_eq!(scores.len(), self.n_models());
        let mut non_finite = 0;
        for (s, &never) in scores.iter_mut().zip(&self.never_observed) {
            if !s.is_finite() {
                non_finite += 1;
            }
            if never || !s.is_finite() {
                *s = UNOBSERVED_SCORE;
            }
        }
        if non_finite > 0 {
            log::warn!("{}: {non_finite} non-finite scores replaced", self.algorithm);
        }
        Ok(scores)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = Manifest {
            format_version: BUNDLE_FORMAT_VERSION,
            algorithm: self.algorithm,
            config: self.config.clone(),
            seed: self.seed,
            schema: self.schema,
            feature_dim: self.feature_dim,
            model_ids: self.model_ids.clone(),
        };
        let state = StateFile {
            never_observed: self.never_observed.clone(),
            state: self.state.clone(),
        };
        write_json(&dir.join("manifest.json"), &manifest)?;
        write_json(&dir.join("state.json"), &state)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
        if manifest.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported selector bundle version {}",
                manifest.format_version
            )));
        }
        let state: StateFile = read_json(&dir.join("state.json"))?;
        if state.never_observed.len() != manifest.model_ids.len() {
            return Err(Error::invalid("selector bundle state does not match its manifest"));
        }
        Ok(SelectorModel {
            algorithm: manifest.algorithm,
            config: manifest.config,
            seed: manifest.seed,
            schema: manifest.schema,
            model_ids: manifest.model_ids,
            feature_dim: manifest.feature_dim,
            never_observed: state.never_observed,
            state: state.state,
        })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Fit and predict in one call.
pub fn select(algorithm: Algorithm, corpus: &TrainCorpus, query: &[f64], config: &SelectorConfig, seed: u64) -> Result<Vec<f64>> {
    SelectorModel::fit(algorithm, corpus, config, seed)?.predict(query)
}

/// Model indices ordered by descending score, lowest index first on ties.
pub fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
            let json = serde_json::to_string(&a).unwrap();
            assert_eq!(json, format!("\"{}\"", a.as_str()));
        }
        assert_eq!("AS".parse::<Algorithm>().unwrap(), Algorithm::ArgoSmart);
        assert!("bogus".parse::<Algorithm>().is_err());
    }

    #[test]
    fn config_defaults_and_partial_json() {
        let c: SelectorConfig = serde_json::from_str(r#"{"isac_k": 3}"#).unwrap();
        assert_eq!(c.isac_k, 3);
        assert_eq!(c.latent, 32);
        assert!(serde_json::from_str::<SelectorConfig>(r#"{"nope": 1}"#).is_err());
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        assert_eq!(ranking(&[0.5, 0.9, 0.5, UNOBSERVED_SCORE]), vec![1, 0, 2, 3]);
    }

    #[test]
    fn corpus_shape_checks() {
        let perf = PerformanceMatrix::from_rows(vec!["a".into()], vec!["m".into()], &[vec![1.0]]).unwrap();
        assert!(TrainCorpus::new(Matrix::zeros(2, 3), perf.clone()).is_err());
        assert!(TrainCorpus::new(Matrix::zeros(1, 0), perf.clone()).is_err());
        assert!(TrainCorpus::new(Matrix::filled(1, 2, f64::NAN), perf.clone()).is_err());
        assert!(TrainCorpus::new(Matrix::zeros(1, 2), perf).is_ok());
    }
}
