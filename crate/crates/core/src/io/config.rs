//! JSON network configuration.
//!
//! Node ids in files are 1-based and converted on ingest. Example:
//!
//! ```json
//! {
//!   "n": 3,
//!   "adjacency": [[0,1,1],[1,0,1],[1,1,0]],
//!   "omega": [{"cluster": 1, "value": 0.5}, {"cluster": 2, "value": 0.9}],
//!   "gamma": 1.0, "mu_inter": 0.01, "mu_intra": 0.01,
//!   "rule": {"type": "hebbian-cos"},
//!   "partition": [[1, 2], [3]],
//!   "initial": {"theta": [0.0, 0.1, 2.0], "k": "random(42, -0.01, 0.01)"},
//!   "sim": {"dt": 0.01, "t_end": 100, "sample_every": 10}
//! }
//! ```

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::dynamics::{LearningRule, NetworkSpec, SimState, SpecError, StepSettings};
use crate::graph::{Digraph, Partition};
use crate::seeding::uniform_per_index;

pub const DEFAULT_DT: f64 = 1e-2;
pub const DEFAULT_T_END: f64 = 2000.0;
pub const DEFAULT_SAMPLE_EVERY: usize = 100;

/// Parse or validation failure, located in the source text when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.origin, line, self.message),
            None => write!(f, "{}: {}", self.origin, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: usize,
    adjacency: Vec<Vec<i64>>,
    omega: RawOmega,
    gamma: f64,
    mu_inter: f64,
    mu_intra: f64,
    #[serde(default)]
    rule: Option<LearningRule>,
    partition: Vec<Vec<usize>>,
    #[serde(default)]
    representatives: Option<Vec<usize>>,
    #[serde(default)]
    initial: Option<RawInitial>,
    #[serde(default)]
    sim: Option<RawSim>,
    #[serde(default)]
    #[allow(dead_code)]
    notes: Option<serde_json::Value>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawOmega {
    PerNode(Vec<f64>),
    PerCluster(Vec<ClusterValue>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterValue {
    cluster: usize,
    value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    theta: RawValues,
    k: RawValues,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawValues {
    Explicit(Vec<f64>),
    Generator(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_t_end")]
    t_end: f64,
    #[serde(default = "default_sample_every")]
    sample_every: usize,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_t_end() -> f64 {
    DEFAULT_T_END
}

fn default_sample_every() -> usize {
    DEFAULT_SAMPLE_EVERY
}

/// A uniform generator written as `random(seed, lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
}

impl RandomSpec {
    pub fn parse(text: &str) -> Option<Self> {
        let inner = text.trim().strip_prefix("random(")?.strip_suffix(')')?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let [seed, lo, hi] = parts.as_slice() else {
            return None;
        };
        let spec = Self {
            seed: seed.parse().ok()?,
            lo: lo.parse().ok()?,
            hi: hi.parse().ok()?,
        };
        (spec.lo.is_finite() && spec.hi.is_finite() && spec.lo <= spec.hi).then_some(spec)
    }

    pub fn sample(&self, count: usize) -> Vec<f64> {
        uniform_per_index(self.seed, self.lo, self.hi, count)
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub spec: NetworkSpec,
    pub partition: Partition,
    /// `None` when the file has no `initial` block.
    pub initial: Option<SimState>,
    pub sim: StepSettings,
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        origin: origin.clone(),
        line: None,
        message: e.to_string(),
    })?;
    parse_config(&text, &origin)
}

/// Line of the first occurrence of `"key"`, for messages about a field.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

pub fn parse_config(text: &str, origin: &str) -> Result<Config, ConfigError> {
    let fail = |key: &str, message: String| ConfigError {
        origin: origin.to_string(),
        line: line_of(text, key),
        message: format!("{key}: {message}"),
    };
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError {
        origin: origin.to_string(),
        line: Some(e.line()),
        message: e.to_string(),
    })?;

    let n = raw.n;
    if raw.adjacency.len() != n {
        return Err(fail(
            "adjacency",
            format!("expected {n} rows, found {}", raw.adjacency.len()),
        ));
    }
    let graph = Digraph::from_adjacency(&raw.adjacency).map_err(|e| fail("adjacency", e.to_string()))?;

    let clusters = raw
        .partition
        .iter()
        .map(|c| c.iter().map(|&id| to_zero_based(id, n)).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| fail("partition", format!("node ids must lie in 1..={n}")))?;
    let reps = match &raw.representatives {
        None => None,
        Some(ids) => Some(
            ids.iter()
                .map(|&id| to_zero_based(id, n))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| fail("representatives", format!("node ids must lie in 1..={n}")))?,
        ),
    };
    let partition = Partition::new(n, clusters, reps).map_err(|e| {
        let key = if raw.representatives.is_some() && e.to_string().contains("representative") {
            "representatives"
        } else {
            "partition"
        };
        fail(key, e.to_string())
    })?;

    let omega = match raw.omega {
        RawOmega::PerNode(values) => values,
        RawOmega::PerCluster(entries) => {
            let m = partition.cluster_count();
            let mut per_cluster = vec![None; m];
            for entry in &entries {
                let s = entry
                    .cluster
                    .checked_sub(1)
                    .filter(|&s| s < m)
                    .ok_or_else(|| fail("omega", format!("cluster ids must lie in 1..={m}")))?;
                if per_cluster[s].replace(entry.value).is_some() {
                    return Err(fail("omega", format!("cluster {} given twice", entry.cluster)));
                }
            }
            let per_cluster = per_cluster
                .into_iter()
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| fail("omega", "every cluster needs a frequency".into()))?;
            (0..n).map(|i| per_cluster[partition.cluster_of(i)]).collect()
        }
    };

    let spec = NetworkSpec::new(
        graph,
        omega,
        raw.gamma,
        raw.mu_inter,
        raw.mu_intra,
        raw.rule.unwrap_or(LearningRule::HebbianCos),
    )
    .map_err(|e| {
        // parameter messages already start with the field name
        match &e {
            SpecError::Parameter { name, .. } => ConfigError {
                origin: origin.to_string(),
                line: line_of(text, name),
                message: e.to_string(),
            },
            _ => fail("omega", e.to_string()),
        }
    })?;

    let initial = match raw.initial {
        None => None,
        Some(init) => {
            let theta = resolve_values(init.theta, n).map_err(|m| fail("theta", m))?;
            let k = resolve_values(init.k, spec.graph.edge_count()).map_err(|m| fail("k", m))?;
            Some(SimState::new(theta, k))
        }
    };

    let sim = match raw.sim {
        None => StepSettings::new(DEFAULT_DT, DEFAULT_T_END, DEFAULT_SAMPLE_EVERY),
        Some(s) => StepSettings::new(s.dt, s.t_end, s.sample_every),
    };
    sim.validate().map_err(|e| fail("sim", e.to_string()))?;

    Ok(Config {
        spec,
        partition,
        initial,
        sim,
    })
}

fn to_zero_based(id: usize, n: usize) -> Option<usize> {
    id.checked_sub(1).filter(|&i| i < n)
}

fn resolve_values(raw: RawValues, count: usize) -> Result<Vec<f64>, String> {
    match raw {
        RawValues::Explicit(values) => {
            if values.len() != count {
                return Err(format!("expected {count} values, found {}", values.len()));
            }
            Ok(values)
        }
        RawValues::Generator(text) => RandomSpec::parse(&text)
            .map(|r| r.sample(count))
            .ok_or_else(|| format!("expected \"random(seed, lo, hi)\" with lo <= hi, found {text:?}")),
    }
}
