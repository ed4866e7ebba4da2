//! Experiment configuration: one JSON document describing a complete run.
//!
//! The schema is closed (unknown keys are rejected) so a config file is a
//! full, diff-able record of an experiment; everything else (partition,
//! initialization, batches, noise) derives from `run_seed`. The smallest
//! valid config names a rule, a model, its size, and the core
//! hyperparameters:
//!
//! ```json
//! {"rule": "feedsign", "model": "quadratic", "d": 100,
//!  "K": 5, "T": 1000, "eta": 1e-3, "mu": 1e-3, "run_seed": 1}
//! ```
//!
//! # Fields
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `rule` | `fedsgd`, `zo_fedsgd`, `feedsign`, or `dp_feedsign` | required |
//! | `model` | name (`quadratic`, `logistic`, `mlp`) or detailed object | required |
//! | `d` | parameter count (quadratic) / feature count (logistic) | required for those names |
//! | `K` | number of clients | required |
//! | `T` | number of rounds | required |
//! | `B` | per-client batch size, drawn with replacement | full shard |
//! | `eta` | step size | required |
//! | `mu` | finite-difference perturbation scale | `1e-3` |
//! | `beta` | Dirichlet concentration for the label partition | balanced split |
//! | `byzantine` | `{count, kind}`, kind `reverse` or `random` | none |
//! | `het_noise` | multiply every honest contribution by `(1 + N(0,1))` | `false` |
//! | `epsilon` | privacy budget; required with `dp_feedsign`, rejected otherwise | |
//! | `run_seed` | master seed for the whole run | required |
//! | `eval_every` | evaluate loss every this many steps; `0` disables | `1` |
//! | `dataset` | `{path}` or synthetic parameters | synthetic defaults |
//! | `out_dir` | where the runner writes outputs | runner's flag |
//!
//! The detailed `model` object takes `kind` plus, by kind: `eigenvalues`
//! and `optimum` (quadratic), `layers` (mlp), and for any kind
//! `init_scale` (default 1) and, quadratic only, `het_shift_sigma`
//! (default 0) for per-client optimum displacement. The synthetic `dataset`
//! object takes `samples` (default 64, or `K` if larger) plus
//! `offset_sigma` (quadratic, default 0) or `margin`/`noise` (classifiers,
//! defaults 2 and 0.5).

use crate::aggregation::AggregationRule;
use crate::error::{Error, Result};
use crate::federation::{
    partition_dirichlet, ClientRole, ClientShard, FederationState, LABEL_DATA, LABEL_INIT,
    LABEL_SHIFT,
};
use crate::models::{synthetic_blobs, synthetic_offsets, Dataset, ModelSpec};
use crate::prng::{derive_seed, make_stream, Seed};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    rule: String,
    model: serde_json::Value,
    #[serde(default)]
    d: Option<usize>,
    #[serde(rename = "K")]
    clients: usize,
    #[serde(rename = "T")]
    steps: u64,
    #[serde(rename = "B", default)]
    batch_size: Option<usize>,
    eta: f64,
    #[serde(default)]
    mu: Option<f64>,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default)]
    byzantine: Option<RawByzantine>,
    #[serde(default)]
    het_noise: bool,
    #[serde(default)]
    epsilon: Option<f64>,
    run_seed: u64,
    #[serde(default)]
    eval_every: Option<u64>,
    #[serde(default)]
    dataset: Option<RawDataset>,
    #[serde(default)]
    out_dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelDetail {
    kind: String,
    #[serde(default)]
    layers: Option<Vec<usize>>,
    #[serde(default)]
    eigenvalues: Option<Vec<f64>>,
    #[serde(default)]
    optimum: Option<Vec<f64>>,
    #[serde(default)]
    init_scale: Option<f64>,
    #[serde(default)]
    het_shift_sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawByzantine {
    count: usize,
    #[serde(default)]
    kind: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    #[serde(default)]
    path: Option<String>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    offset_sigma: Option<f64>,
    #[serde(default)]
    margin: Option<f64>,
    #[serde(default)]
    noise: Option<f64>,
}

/// Where the training data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// A CSV file: feature columns, plus a leading `label` column for
    /// classifiers.
    Path(PathBuf),
    /// Generated from the run seed.
    Synthetic { samples: usize, offset_sigma: f64, margin: f64, noise: f64 },
}

/// A parsed, validated experiment: every field resolved, every constraint
/// checked. Built by [`parse_config`]; turned into a live run by
/// [`ExperimentConfig::build_state`].
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub rule: AggregationRule,
    pub spec: ModelSpec,
    pub init_scale: f64,
    /// Per-client optimum displacement scale (quadratic only): client `k`
    /// gets a `N(0, sigma^2 I)` shift, mean-centered across clients so the
    /// global optimum stays put.
    pub het_shift_sigma: f64,
    pub clients: usize,
    pub steps: u64,
    pub batch_size: Option<usize>,
    pub eta: f64,
    pub mu: f64,
    pub beta: Option<f64>,
    pub byzantine_count: usize,
    pub byzantine_kind: ClientRole,
    pub het_noise: bool,
    pub run_seed: Seed,
    pub eval_every: u64,
    pub dataset: DatasetSource,
    pub out_dir: Option<PathBuf>,
}

fn bad(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.into(), message: message.into() }
}

fn require_positive(field: &str, value: f64) -> Result<f64> {
    if !value.is_finite() || value <= 0.0 {
        return Err(bad(field, format!("must be a positive finite number, got {value}")));
    }
    Ok(value)
}

/// Parse and validate one experiment from JSON bytes.
pub fn parse_config(text: &[u8]) -> Result<ExperimentConfig> {
    let raw: RawConfig = serde_json::from_slice(text)?;
    validate(raw)
}

/// Parse a config file that is either a single experiment object or an
/// array of them (a matrix of independent runs).
pub fn parse_config_set(text: &[u8]) -> Result<Vec<ExperimentConfig>> {
    let value: serde_json::Value = serde_json::from_slice(text)?;
    if value.is_array() {
        let raws: Vec<RawConfig> = serde_json::from_value(value)?;
        if raws.is_empty() {
            return Err(bad("", "config array is empty"));
        }
        raws.into_iter().map(validate).collect()
    } else {
        let raw: RawConfig = serde_json::from_value(value)?;
        Ok(vec![validate(raw)?])
    }
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig> {
    let epsilon = raw.epsilon;
    let rule = match raw.rule.as_str() {
        "fedsgd" => AggregationRule::FedSgd,
        "zo_fedsgd" => AggregationRule::ZoFedSgd,
        "feedsign" => AggregationRule::FeedSign,
        "dp_feedsign" => {
            let eps = epsilon.ok_or_else(|| bad("epsilon", "required for rule dp_feedsign"))?;
            AggregationRule::DpFeedSign { epsilon: require_positive("epsilon", eps)? }
        }
        other => {
            return Err(bad(
                "rule",
                format!("unknown rule {other:?}; expected fedsgd, zo_fedsgd, feedsign, or dp_feedsign"),
            ))
        }
    };
    if epsilon.is_some() && !matches!(rule, AggregationRule::DpFeedSign { .. }) {
        return Err(bad("epsilon", format!("only meaningful for dp_feedsign, not {}", raw.rule)));
    }

    if raw.clients == 0 {
        return Err(bad("K", "need at least one client"));
    }
    let eta = require_positive("eta", raw.eta)?;
    let mu = require_positive("mu", raw.mu.unwrap_or(1e-3))?;
    if let Some(b) = raw.beta {
        require_positive("beta", b)?;
    }
    if raw.batch_size == Some(0) {
        return Err(bad("B", "batch size must be at least 1"));
    }

    let detail = resolve_model(raw.model)?;
    let (spec, init_scale, het_shift_sigma) = build_model(&detail, raw.d)?;

    let (byzantine_count, byzantine_kind) = match raw.byzantine {
        None => (0, ClientRole::ByzantineReverse),
        Some(b) => {
            if b.count >= raw.clients {
                return Err(bad(
                    "byzantine.count",
                    format!("{} attackers among {} clients leaves no honest majority possible", b.count, raw.clients),
                ));
            }
            let kind = match b.kind.as_deref() {
                None | Some("reverse") => ClientRole::ByzantineReverse,
                Some("random") => ClientRole::ByzantineRandom,
                Some(other) => {
                    return Err(bad(
                        "byzantine.kind",
                        format!("unknown kind {other:?}; expected reverse or random"),
                    ))
                }
            };
            (b.count, kind)
        }
    };

    let dataset = resolve_dataset(raw.dataset, &spec, raw.clients)?;

    Ok(ExperimentConfig {
        rule,
        spec,
        init_scale,
        het_shift_sigma,
        clients: raw.clients,
        steps: raw.steps,
        batch_size: raw.batch_size,
        eta,
        mu,
        beta: raw.beta,
        byzantine_count,
        byzantine_kind,
        het_noise: raw.het_noise,
        run_seed: Seed(raw.run_seed),
        eval_every: raw.eval_every.unwrap_or(1),
        dataset,
        out_dir: raw.out_dir.map(PathBuf::from),
    })
}

fn resolve_model(value: serde_json::Value) -> Result<RawModelDetail> {
    match value {
        serde_json::Value::String(kind) => Ok(RawModelDetail {
            kind,
            layers: None,
            eigenvalues: None,
            optimum: None,
            init_scale: None,
            het_shift_sigma: None,
        }),
        obj @ serde_json::Value::Object(_) => Ok(serde_json::from_value(obj)?),
        other => Err(bad("model", format!("expected a name or an object, got {other}"))),
    }
}

fn build_model(detail: &RawModelDetail, d: Option<usize>) -> Result<(ModelSpec, f64, f64)> {
    let init_scale = match detail.init_scale {
        Some(s) if !s.is_finite() || s < 0.0 => {
            return Err(bad("model.init_scale", format!("must be finite and nonnegative, got {s}")))
        }
        Some(s) => s,
        None => 1.0,
    };
    let shift_sigma = match detail.het_shift_sigma {
        Some(s) if !s.is_finite() || s < 0.0 => {
            return Err(bad(
                "model.het_shift_sigma",
                format!("must be finite and nonnegative, got {s}"),
            ))
        }
        Some(s) => s,
        None => 0.0,
    };
    let forbid = |field: &str, present: bool| -> Result<()> {
        if present {
            return Err(bad(field, format!("not a {} parameter", detail.kind)));
        }
        Ok(())
    };
    let spec = match detail.kind.as_str() {
        "quadratic" => {
            forbid("model.layers", detail.layers.is_some())?;
            let eigenvalues = match (&detail.eigenvalues, d) {
                (Some(e), dd) => {
                    if let Some(dd) = dd {
                        if dd != e.len() {
                            return Err(bad(
                                "d",
                                format!("{dd} disagrees with {} eigenvalues", e.len()),
                            ));
                        }
                    }
                    e.clone()
                }
                (None, Some(dd)) => vec![1.0; dd],
                (None, None) => return Err(bad("d", "required for a quadratic model")),
            };
            let optimum = match &detail.optimum {
                Some(o) => o.clone(),
                None => vec![0.0; eigenvalues.len()],
            };
            ModelSpec::quadratic(eigenvalues, optimum)?
        }
        "logistic" => {
            forbid("model.layers", detail.layers.is_some())?;
            forbid("model.eigenvalues", detail.eigenvalues.is_some())?;
            forbid("model.optimum", detail.optimum.is_some())?;
            forbid("model.het_shift_sigma", shift_sigma > 0.0)?;
            let features = d.ok_or_else(|| bad("d", "required for a logistic model"))?;
            ModelSpec::logistic(features)?
        }
        "mlp" => {
            forbid("model.eigenvalues", detail.eigenvalues.is_some())?;
            forbid("model.optimum", detail.optimum.is_some())?;
            forbid("model.het_shift_sigma", shift_sigma > 0.0)?;
            if d.is_some() {
                return Err(bad("d", "an mlp is sized by model.layers, not d"));
            }
            let layers = detail
                .layers
                .clone()
                .ok_or_else(|| bad("model.layers", "required for an mlp"))?;
            ModelSpec::mlp(layers)?
        }
        other => {
            return Err(bad(
                "model.kind",
                format!("unknown model {other:?}; expected quadratic, logistic, or mlp"),
            ))
        }
    };
    Ok((spec, init_scale, shift_sigma))
}

fn resolve_dataset(
    raw: Option<RawDataset>,
    spec: &ModelSpec,
    clients: usize,
) -> Result<DatasetSource> {
    let raw = raw.unwrap_or(RawDataset {
        path: None,
        samples: None,
        offset_sigma: None,
        margin: None,
        noise: None,
    });
    let quadratic = matches!(spec, ModelSpec::Quadratic { .. });
    if let Some(path) = raw.path {
        for (field, present) in [
            ("dataset.samples", raw.samples.is_some()),
            ("dataset.offset_sigma", raw.offset_sigma.is_some()),
            ("dataset.margin", raw.margin.is_some()),
            ("dataset.noise", raw.noise.is_some()),
        ] {
            if present {
                return Err(bad(field, "meaningless alongside dataset.path"));
            }
        }
        return Ok(DatasetSource::Path(PathBuf::from(path)));
    }
    if quadratic {
        for (field, present) in
            [("dataset.margin", raw.margin.is_some()), ("dataset.noise", raw.noise.is_some())]
        {
            if present {
                return Err(bad(field, "a classifier parameter; quadratic data takes offset_sigma"));
            }
        }
    } else if raw.offset_sigma.is_some() {
        return Err(bad("dataset.offset_sigma", "a quadratic parameter; classifiers take margin and noise"));
    }
    let samples = raw.samples.unwrap_or_else(|| 64usize.max(clients));
    if samples < clients {
        return Err(bad(
            "dataset.samples",
            format!("{samples} rows cannot cover {clients} clients"),
        ));
    }
    let offset_sigma = raw.offset_sigma.unwrap_or(0.0);
    if !offset_sigma.is_finite() || offset_sigma < 0.0 {
        return Err(bad("dataset.offset_sigma", format!("must be finite and nonnegative, got {offset_sigma}")));
    }
    let margin = match raw.margin {
        Some(m) => require_positive("dataset.margin", m)?,
        None => 2.0,
    };
    let noise = raw.noise.unwrap_or(0.5);
    if !noise.is_finite() || noise < 0.0 {
        return Err(bad("dataset.noise", format!("must be finite and nonnegative, got {noise}")));
    }
    Ok(DatasetSource::Synthetic { samples, offset_sigma, margin, noise })
}

impl ExperimentConfig {
    /// Materialize the training data: load and check the file, or generate
    /// synthetic rows from the run seed.
    pub fn build_dataset(&self) -> Result<Dataset> {
        let dataset = match &self.dataset {
            DatasetSource::Path(path) => Dataset::from_csv_path(path)?,
            DatasetSource::Synthetic { samples, offset_sigma, margin, noise } => {
                let seed = derive_seed(self.run_seed, &[LABEL_DATA]);
                match &self.spec {
                    ModelSpec::Quadratic { eigenvalues, .. } => {
                        synthetic_offsets(*samples, eigenvalues.len(), *offset_sigma, seed)?
                    }
                    _ => synthetic_blobs(
                        *samples,
                        self.spec.input_width(),
                        self.spec.classes().expect("classifier"),
                        *margin,
                        *noise,
                        seed,
                    )?,
                }
            }
        };
        if dataset.width() != self.spec.input_width() {
            return Err(Error::ShapeMismatch {
                expected: self.spec.input_width(),
                got: dataset.width(),
            });
        }
        if let Some(classes) = self.spec.classes() {
            if let Some(&worst) = dataset.labels().iter().max() {
                if worst as usize >= classes {
                    return Err(Error::Dataset(format!(
                        "label {worst} out of range for a {classes}-class model"
                    )));
                }
            }
        }
        Ok(dataset)
    }

    /// Partition the data and decorate the shards: byzantine roles go to
    /// the last `byzantine_count` clients, the heterogeneity-noise flag and
    /// batch size apply to everyone, and positive `het_shift_sigma` gives
    /// each client a mean-centered optimum displacement.
    pub fn build_shards(&self, dataset: &Dataset) -> Result<Vec<ClientShard>> {
        let mut shards = partition_dirichlet(dataset, self.clients, self.beta, self.run_seed)?;
        for shard in &mut shards {
            shard.het_noise = self.het_noise;
            shard.batch_size = self.batch_size;
            if shard.client >= self.clients - self.byzantine_count {
                shard.role = self.byzantine_kind;
            }
        }
        if self.het_shift_sigma > 0.0 {
            let d = self.spec.param_count();
            let mut stream = make_stream(derive_seed(self.run_seed, &[LABEL_SHIFT]));
            let mut shifts: Vec<Vec<f64>> = (0..self.clients)
                .map(|_| {
                    (0..d).map(|_| self.het_shift_sigma * stream.next_gaussian()).collect()
                })
                .collect();
            let mut mean = vec![0.0; d];
            for s in &shifts {
                for (m, v) in mean.iter_mut().zip(s) {
                    *m += v / self.clients as f64;
                }
            }
            for s in &mut shifts {
                for (v, m) in s.iter_mut().zip(&mean) {
                    *v -= m;
                }
            }
            for (shard, shift) in shards.iter_mut().zip(shifts) {
                shard.optimum_shift = Some(shift);
            }
        }
        Ok(shards)
    }

    /// Starting parameters, seeded from the run seed.
    pub fn initial_params(&self) -> Vec<f64> {
        self.spec.init_params(derive_seed(self.run_seed, &[LABEL_INIT]), self.init_scale)
    }

    /// Assemble the live federation this config describes.
    pub fn build_state(&self) -> Result<FederationState> {
        let dataset = self.build_dataset()?;
        let shards = self.build_shards(&dataset)?;
        FederationState::new(
            self.spec.clone(),
            dataset,
            self.initial_params(),
            shards,
            self.rule.clone(),
            self.eta,
            self.mu,
            self.run_seed,
        )
    }
}
