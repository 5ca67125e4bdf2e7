//! Resolved run configuration. Values come from flags, then the command's
//! section of the `--config` file, then the defaults below.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use mpgfrft::compression::{GridMetric, GridRange};
use mpgfrft::graph::ShiftKind;
use mpgfrft::spectral::TransformKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const COMMANDS: [&str; 10] = [
    "compress",
    "denoise",
    "keygen",
    "encrypt",
    "decrypt",
    "learn-transform",
    "learn-orders",
    "analyze-correlation",
    "sensitivity",
    "selftest",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CompressMethod {
    #[default]
    Adapted,
    Fixed,
    Grid,
    Learned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Denoise,
    Compress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FilterChoice {
    Ideal,
    #[default]
    Learnable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Tying {
    Free,
    Scalar,
    #[default]
    Blocks,
}

/// `lo:hi:step`, also accepted as `{"lo": .., "hi": .., "step": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpanRepr")]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpanRepr {
    Text(String),
    Parts { lo: f64, hi: f64, step: f64 },
}

impl TryFrom<SpanRepr> for Span {
    type Error = String;

    fn try_from(r: SpanRepr) -> Result<Self, String> {
        match r {
            SpanRepr::Text(s) => s.parse(),
            SpanRepr::Parts { lo, hi, step } => Ok(Span { lo, hi, step }),
        }
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
        Ok(Span { lo: num(lo)?, hi: num(hi)?, step: num(step)? })
    }
}

impl From<Span> for GridRange {
    fn from(s: Span) -> Self {
        GridRange { lo: s.lo, hi: s.hi, step: s.step }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct CompressParams {
    pub input: Option<PathBuf>,
    pub ratio: f64,
    pub method: CompressMethod,
    pub blocks: usize,
    pub kind: TransformKind,
    pub orders: Vec<f64>,
    pub graph: Option<PathBuf>,
    pub shift: ShiftKind,
    pub block: usize,
    pub column: Option<usize>,
    pub grid: Span,
    pub metric: GridMetric,
    pub epochs: usize,
    pub lr: f64,
    pub init_order: f64,
    pub report: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for CompressParams {
    fn default() -> Self {
        CompressParams {
            input: None,
            ratio: 0.01,
            method: CompressMethod::Adapted,
            blocks: 4,
            kind: TransformKind::MpgfrftI,
            orders: vec![0.5],
            graph: None,
            shift: ShiftKind::Laplacian,
            block: 16,
            column: None,
            grid: Span { lo: 0.1, hi: 1.0, step: 0.1 },
            metric: GridMetric::Re,
            epochs: 500,
            lr: 0.005,
            init_order: 0.5,
            report: None,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct DenoiseParams {
    pub noisy: Option<PathBuf>,
    pub clean: Option<PathBuf>,
    pub sigma: Option<f64>,
    pub block: usize,
    pub knn: usize,
    pub epochs: usize,
    pub lr: f64,
    pub kind: TransformKind,
    pub init_order: f64,
    pub report: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for DenoiseParams {
    fn default() -> Self {
        DenoiseParams {
            noisy: None,
            clean: None,
            sigma: None,
            block: 8,
            knn: 4,
            epochs: 300,
            lr: 0.005,
            kind: TransformKind::MpgfrftI,
            init_order: 0.5,
            report: None,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct KeygenParams {
    pub kind: TransformKind,
    pub group_size: usize,
    pub out: Option<PathBuf>,
}

impl Default for KeygenParams {
    fn default() -> Self {
        KeygenParams {
            kind: TransformKind::MpgfrftI,
            group_size: mpgfrft::crypto::cipher::DEFAULT_GROUP_SIZE,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EncryptParams {
    pub input: Option<PathBuf>,
    pub key: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub preview: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct DecryptParams {
    pub input: Option<PathBuf>,
    pub key: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct CorrelationParams {
    pub input: Option<PathBuf>,
    pub key: Option<PathBuf>,
    pub pairs: usize,
    pub report: Option<PathBuf>,
}

impl Default for CorrelationParams {
    fn default() -> Self {
        CorrelationParams {
            input: None,
            key: None,
            pairs: mpgfrft::crypto::analysis::DEFAULT_PAIRS,
            report: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SensitivityParams {
    pub input: Option<PathBuf>,
    pub key: Option<PathBuf>,
    pub delta_range: Span,
    pub out: Option<PathBuf>,
}

impl Default for SensitivityParams {
    fn default() -> Self {
        SensitivityParams {
            input: None,
            key: None,
            delta_range: Span { lo: -0.6, hi: 0.6, step: 0.05 },
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LearnTransformParams {
    pub graph: Option<PathBuf>,
    pub nodes: usize,
    pub graph_kind: String,
    pub shift: ShiftKind,
    pub signal: Option<PathBuf>,
    pub column: usize,
    pub kind: TransformKind,
    pub target: Vec<f64>,
    pub layers: usize,
    pub init: Option<Vec<f64>>,
    pub epochs: usize,
    pub lr: f64,
    pub log_every: usize,
    pub report: Option<PathBuf>,
    pub orders_out: Option<PathBuf>,
    pub progress: Option<PathBuf>,
}

impl Default for LearnTransformParams {
    fn default() -> Self {
        LearnTransformParams {
            graph: None,
            nodes: 90,
            graph_kind: "sensor".into(),
            shift: ShiftKind::Laplacian,
            signal: None,
            column: 0,
            kind: TransformKind::MpgfrftI,
            target: vec![0.7, 0.2, 0.5],
            layers: 1,
            init: None,
            epochs: 2000,
            lr: 0.001,
            log_every: 100,
            report: None,
            orders_out: None,
            progress: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LearnOrdersParams {
    pub objective: Objective,
    pub graph: Option<PathBuf>,
    pub nodes: usize,
    pub graph_kind: String,
    pub shift: ShiftKind,
    pub kind: TransformKind,
    pub target: Vec<f64>,
    pub k: usize,
    pub overlap: usize,
    pub sigma: f64,
    pub filter: FilterChoice,
    pub tying: Tying,
    pub tying_blocks: usize,
    pub init_order: f64,
    pub ratio: f64,
    pub signal: Option<PathBuf>,
    pub column: usize,
    pub epochs: usize,
    pub lr: f64,
    pub log_every: usize,
    pub report: Option<PathBuf>,
    pub orders_out: Option<PathBuf>,
    pub progress: Option<PathBuf>,
}

impl Default for LearnOrdersParams {
    fn default() -> Self {
        LearnOrdersParams {
            objective: Objective::Denoise,
            graph: None,
            nodes: 100,
            graph_kind: "sensor".into(),
            shift: ShiftKind::Laplacian,
            kind: TransformKind::MpgfrftI,
            target: vec![0.7, 0.2, 0.5],
            k: 70,
            overlap: 0,
            sigma: 0.2,
            filter: FilterChoice::Learnable,
            tying: Tying::Blocks,
            tying_blocks: 2,
            init_order: 0.5,
            ratio: 0.3,
            signal: None,
            column: 0,
            epochs: 1000,
            lr: 0.005,
            log_every: 100,
            report: None,
            orders_out: None,
            progress: None,
        }
    }
}

/// Global settings after precedence has been applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Globals {
    pub seed: u64,
    pub threads: Option<usize>,
    pub output_format: Option<OutputFormat>,
}

/// A parsed `--config` file: global keys plus command sections.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    root: Map<String, Value>,
}

const GLOBAL_KEYS: [&str; 3] = ["seed", "threads", "output-format"];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| mpgfrft::Error::from(e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let Value::Object(root) = value else {
            return Err(CliError::Config("config file must hold a JSON object".into()));
        };
        for key in root.keys() {
            if !GLOBAL_KEYS.contains(&key.as_str()) && !COMMANDS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("unknown config key '{key}'")));
            }
        }
        Ok(ConfigFile { root })
    }

    fn global<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.root.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| CliError::Config(format!("{key}: {e}"))),
        }
    }

    pub fn globals(
        &self,
        seed: Option<u64>,
        threads: Option<usize>,
        output_format: Option<OutputFormat>,
    ) -> Result<Globals, CliError> {
        Ok(Globals {
            seed: seed.or(self.global("seed")?).unwrap_or(0),
            threads: threads.or(self.global("threads")?),
            output_format: output_format.or(self.global("output-format")?),
        })
    }

    fn section(&self, command: &str) -> Result<Map<String, Value>, CliError> {
        match self.root.get(command) {
            None | Some(Value::Null) => Ok(Map::new()),
            Some(Value::Object(m)) => Ok(m.clone()),
            Some(_) => Err(CliError::Config(format!("section '{command}' must be an object"))),
        }
    }

    /// Merges the command section under the flags that were given and
    /// deserializes the result over the defaults.
    pub fn resolve<A: Serialize, P: DeserializeOwned>(&self, command: &str, flags: &A) -> Result<P, CliError> {
        let mut merged = self.section(command)?;
        let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))? else {
            return Err(CliError::Config("flags did not serialize to an object".into()));
        };
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
        serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("{command}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    #[serde(rename_all = "kebab-case")]
    struct Flags {
        ratio: Option<f64>,
        block: Option<usize>,
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = ConfigFile::parse(r#"{"seed": 9, "compress": {"ratio": 0.2, "block": 8, "method": "grid"}}"#).unwrap();
        let p: CompressParams = file.resolve("compress", &Flags { ratio: Some(0.5), block: None }).unwrap();
        assert_eq!(p.ratio, 0.5);
        assert_eq!(p.block, 8);
        assert_eq!(p.method, CompressMethod::Grid);
        assert_eq!(p.blocks, 4);
        let g = file.globals(None, None, None).unwrap();
        assert_eq!(g.seed, 9);
        assert_eq!(file.globals(Some(3), None, None).unwrap().seed, 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ConfigFile::parse(r#"{"compres": {}}"#).is_err());
        let file = ConfigFile::parse(r#"{"compress": {"ratoi": 0.2}}"#).unwrap();
        let err = file.resolve::<_, CompressParams>("compress", &Flags { ratio: None, block: None }).unwrap_err();
        assert!(err.to_string().contains("ratoi"));
    }

    #[test]
    fn spans_parse_both_ways() {
        let s: Span = "-0.6:0.6:0.05".parse().unwrap();
        assert_eq!(s, Span { lo: -0.6, hi: 0.6, step: 0.05 });
        let t: Span = serde_json::from_str(r#""0.1:2:0.1""#).unwrap();
        assert_eq!(t.hi, 2.0);
        let u: Span = serde_json::from_str(r#"{"lo": 0, "hi": 1, "step": 0.5}"#).unwrap();
        assert_eq!(u.step, 0.5);
        assert!("1:2".parse::<Span>().is_err());
    }
}
