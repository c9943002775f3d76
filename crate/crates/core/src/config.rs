//! Experiment configuration: flat `section.key = value` text, one source of
//! truth per run. No environment-variable overrides, no wall-clock seed
//! defaults — a run is a pure function of its config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{SyntheticKind, SyntheticSpec};
use crate::error::{Error, Result};
use crate::explainer::GfdsPlusHead;
use crate::grouping::GroupingMethod;
use crate::model::ArchKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum DatasetSource {
    Csv { path: PathBuf, label_column: usize, has_header: bool },
    Idx { images: PathBuf, labels: PathBuf },
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelSettings {
    pub kind: ArchKind,
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// None means full batch.
    pub batch_size: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Loo,
    Tmc,
    Cwls,
    Fds,
    Afds,
    Gfds,
    #[serde(rename = "gfds+")]
    GfdsPlus,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Loo => "loo",
            Method::Tmc => "tmc",
            Method::Cwls => "cwls",
            Method::Fds => "fds",
            Method::Afds => "afds",
            Method::Gfds => "gfds",
            Method::GfdsPlus => "gfds+",
        }
    }

    pub fn is_explainer(self) -> bool {
        matches!(self, Method::Fds | Method::Afds | Method::Gfds | Method::GfdsPlus)
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Method::Exact),
            "loo" => Ok(Method::Loo),
            "tmc" => Ok(Method::Tmc),
            "cwls" => Ok(Method::Cwls),
            "fds" => Ok(Method::Fds),
            "afds" => Ok(Method::Afds),
            "gfds" => Ok(Method::Gfds),
            "gfds+" => Ok(Method::GfdsPlus),
            other => Err(format!(
                "unknown method `{other}` (expected exact|loo|tmc|cwls|fds|afds|gfds|gfds+)"
            )),
        }
    }
}

/// Method hyperparameters, pre-filled with the reference defaults
/// (α = 2e−4, β = 10, K = 10; N defaults to the label count at run time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodParams {
    pub k: usize,
    pub beta: f64,
    /// Group count N; None means "use the label count".
    #[serde(rename = "N")]
    pub n_groups: Option<usize>,
    pub gamma: f64,
    pub alpha: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub hidden_units: usize,
    pub permutations: usize,
    pub head: GfdsPlusHead,
    pub grouping: GroupingMethod,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams {
            k: 10,
            beta: 10.0,
            n_groups: None,
            gamma: 0.0,
            alpha: 2e-4,
            steps: 2000,
            batch_size: 32,
            hidden_units: 32,
            permutations: 200,
            head: GfdsPlusHead::NDimSplit,
            grouping: GroupingMethod::ByLabel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub model: ModelSettings,
    pub method: Method,
    pub params: MethodParams,
    pub etas: Vec<f64>,
    /// Test samples to attribute individually (the rest only feed H_η).
    pub num_explained: usize,
    /// Test-set size for synthetic sources.
    pub test_size: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

fn cfg_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.to_string(), msg: msg.into() }
}

struct KeyMap {
    entries: BTreeMap<String, String>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl KeyMap {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                cfg_err(&format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.insert(key.clone(), value).is_some() {
                return Err(cfg_err(&key, "duplicate key"));
            }
        }
        Ok(KeyMap { entries, used: Default::default() })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key).map(String::as_str);
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key).ok_or_else(|| cfg_err(key, "missing required key"))?;
        raw.parse().map_err(|e| cfg_err(key, format!("{e}")))
    }

    fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| cfg_err(key, format!("{e}"))),
        }
    }

    fn optional_or<T: FromStr>(&self, key: &str, fallback: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.optional(key)?.unwrap_or(fallback))
    }

    fn reject_unknown(&self) -> Result<()> {
        let used = self.used.borrow();
        for key in self.entries.keys() {
            if !used.contains(key) {
                return Err(cfg_err(key, "unknown key"));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let map = KeyMap::parse(text)?;

        let dataset = match map.required::<String>("dataset.source")?.as_str() {
            "csv" => DatasetSource::Csv {
                path: PathBuf::from(map.required::<String>("dataset.path")?),
                label_column: map.optional_or("dataset.label_column", 0)?,
                has_header: map.optional_or("dataset.header", false)?,
            },
            "idx" => DatasetSource::Idx {
                images: PathBuf::from(map.required::<String>("dataset.images")?),
                labels: PathBuf::from(map.required::<String>("dataset.labels")?),
            },
            "synthetic" => {
                let kind = match map.required::<String>("dataset.kind")?.as_str() {
                    "blobs" | "gaussian-blobs" => SyntheticKind::GaussianBlobs,
                    "xor" => SyntheticKind::Xor,
                    "two-moons" => SyntheticKind::TwoMoons,
                    other => {
                        return Err(cfg_err(
                            "dataset.kind",
                            format!("unknown kind `{other}` (expected blobs|xor|two-moons)"),
                        ))
                    }
                };
                DatasetSource::Synthetic(SyntheticSpec {
                    kind,
                    n: map.required("dataset.n")?,
                    d: map.optional_or("dataset.d", 2)?,
                    m: map.optional_or("dataset.m", 2)?,
                    noise_std: map.optional_or("dataset.noise_std", 0.5)?,
                    seed: 0, // resolved from the root seed's dataset stream
                })
            }
            other => {
                return Err(cfg_err(
                    "dataset.source",
                    format!("unknown source `{other}` (expected csv|idx|synthetic)"),
                ))
            }
        };

        let kind = match map.optional_or("model.arch", "logistic".to_string())?.as_str() {
            "logistic" => ArchKind::Logistic,
            "mlp1" => ArchKind::Mlp1,
            other => {
                return Err(cfg_err(
                    "model.arch",
                    format!("unknown architecture `{other}` (expected logistic|mlp1)"),
                ))
            }
        };
        let model = ModelSettings {
            kind,
            hidden_units: map.optional_or("model.hidden_units", 16)?,
            learning_rate: map.optional_or("model.lr", 0.1)?,
            epochs: map.optional_or("model.epochs", 200)?,
            batch_size: map.optional("model.batch_size")?,
        };
        if model.learning_rate <= 0.0 {
            return Err(cfg_err("model.lr", "learning rate must be > 0"));
        }
        if kind == ArchKind::Mlp1 && model.hidden_units == 0 {
            return Err(cfg_err("model.hidden_units", "mlp1 needs ≥ 1 hidden unit"));
        }

        let method: Method = map.required("method")?;

        let defaults = MethodParams::default();
        let head = match map.optional::<String>("method.head")?.as_deref() {
            None => defaults.head,
            Some("n-dim-split") => GfdsPlusHead::NDimSplit,
            Some("n-dim-penalty") => GfdsPlusHead::NDimPenalty,
            Some(other) => {
                return Err(cfg_err(
                    "method.head",
                    format!("unknown head `{other}` (expected n-dim-split|n-dim-penalty)"),
                ))
            }
        };
        let grouping = match map.optional::<String>("method.grouping")?.as_deref() {
            None => defaults.grouping,
            Some("by-label") => GroupingMethod::ByLabel,
            Some("kmeans-logits") => GroupingMethod::KmeansLogits,
            Some(other) => {
                return Err(cfg_err(
                    "method.grouping",
                    format!("unknown grouping `{other}` (expected by-label|kmeans-logits)"),
                ))
            }
        };
        let params = MethodParams {
            k: map.optional_or("method.K", defaults.k)?,
            beta: map.optional_or("method.beta", defaults.beta)?,
            n_groups: map.optional("method.N")?,
            gamma: map.optional_or("method.gamma", defaults.gamma)?,
            alpha: map.optional_or("method.alpha", defaults.alpha)?,
            steps: map.optional_or("method.steps", defaults.steps)?,
            batch_size: map.optional_or("method.batch_size", defaults.batch_size)?,
            hidden_units: map.optional_or("method.hidden_units", defaults.hidden_units)?,
            permutations: map.optional_or("method.permutations", defaults.permutations)?,
            head,
            grouping,
        };
        if params.k == 0 {
            return Err(cfg_err("method.K", "truncation epochs K must be ≥ 1"));
        }
        if params.beta <= 0.0 {
            return Err(cfg_err("method.beta", "β must be > 0"));
        }
        if params.gamma < 0.0 {
            return Err(cfg_err("method.gamma", "γ must be ≥ 0"));
        }
        if params.alpha <= 0.0 {
            return Err(cfg_err("method.alpha", "α must be > 0"));
        }
        if method.is_explainer() && params.batch_size == 0 {
            return Err(cfg_err("method.batch_size", "batch size must be ≥ 1"));
        }
        if method == Method::Tmc && params.permutations == 0 {
            return Err(cfg_err("method.permutations", "TMC needs ≥ 1 permutation"));
        }
        if let Some(n_groups) = params.n_groups {
            if n_groups == 0 {
                return Err(cfg_err("method.N", "N must be ≥ 1"));
            }
        }

        let etas: Vec<f64> = match map.raw("eval.etas") {
            None => vec![0.1, 0.2],
            Some(raw) => raw
                .split(',')
                .map(|tok| tok.trim().parse::<f64>().map_err(|e| cfg_err("eval.etas", e.to_string())))
                .collect::<Result<_>>()?,
        };
        if etas.iter().any(|&e| !(0.0..1.0).contains(&e)) {
            return Err(cfg_err("eval.etas", "each η must lie in [0, 1)"));
        }
        if etas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(cfg_err("eval.etas", "etas must be strictly increasing"));
        }

        let num_explained = map.optional_or("eval.num_explained", 4)?;
        if num_explained == 0 {
            return Err(cfg_err("eval.num_explained", "must attribute ≥ 1 test sample"));
        }
        let test_size = map.optional_or("eval.test_size", 32)?;
        if test_size == 0 {
            return Err(cfg_err("eval.test_size", "test set must be nonempty"));
        }

        let seed: u64 = map.required("seed")?;
        let out_dir = PathBuf::from(map.optional_or("out", "out".to_string())?);

        map.reject_unknown()?;

        Ok(ExperimentConfig {
            dataset,
            model,
            method,
            params,
            etas,
            num_explained,
            test_size,
            seed,
            out_dir,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::parse(&text)
    }

    /// Player-count-dependent checks that need the loaded dataset.
    pub fn validate_against(&self, n: usize, m: usize) -> Result<()> {
        if let Some(n_groups) = self.params.n_groups {
            if n_groups > n {
                return Err(cfg_err(
                    "method.N",
                    format!("N={n_groups} exceeds the {n} training points"),
                ));
            }
        }
        if self.params.grouping == GroupingMethod::ByLabel {
            if let Some(n_groups) = self.params.n_groups {
                if (self.method == Method::Gfds || self.method == Method::GfdsPlus)
                    && n_groups != m
                {
                    return Err(cfg_err(
                        "method.N",
                        format!("by-label grouping forces N = {m} (the label count), got {n_groups}"),
                    ));
                }
            }
        }
        Ok(())
    }
}
