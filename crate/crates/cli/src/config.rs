//! Run-config document: one JSON object shared by every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sparse_pce::{Benchmark, InputSpace, ReductionMode, TrainConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Benchmark id: `ishigami`, `borehole` or `sar-synthetic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ReductionMode>,
    /// CSV with a header row, `d` input columns and the response last.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    /// Inline variable list or the path of a JSON file holding one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_space: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rep: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_test: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_cv: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<PathBuf>,
    /// Input-only CSV evaluated by `benchmark-eval`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Reads, merges and validates a config. Relative paths are resolved
    /// against the directory containing the config file.
    pub fn load(path: &Path, overrides: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.apply(overrides, base)?;
        Ok(cfg)
    }

    fn apply(&mut self, overrides: &Overrides, base: &Path) -> CliResult<()> {
        if overrides.seed.is_some() {
            self.seed = overrides.seed;
        }
        if self.seed.is_none() {
            return Err(CliError::config("a seed is required: set \"seed\" in the config or pass --seed"));
        }
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        resolve(&mut self.output_dir);
        if let Some(out) = &overrides.out {
            self.output_dir = Some(out.clone());
        }
        for (name, p) in [
            ("data", &mut self.data),
            ("model", &mut self.model),
            ("scenario", &mut self.scenario),
            ("points", &mut self.points),
        ] {
            resolve(p);
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(CliError::config(format!("{name} file {} does not exist", p.display())));
                }
            }
        }
        if let Some(Value::String(s)) = &self.input_space {
            let mut p = Some(PathBuf::from(s));
            resolve(&mut p);
            let p = p.unwrap_or_default();
            if !p.is_file() {
                return Err(CliError::config(format!("input_space file {} does not exist", p.display())));
            }
            self.input_space = Some(Value::String(p.to_string_lossy().into_owned()));
        }
        if let Some(problem) = &self.problem {
            Benchmark::parse(problem, self.mode).map_err(|e| CliError::config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or_default()
    }

    pub fn output_dir(&self) -> CliResult<&Path> {
        self.output_dir
            .as_deref()
            .ok_or_else(|| CliError::config("no output directory: set \"output_dir\" or pass --out"))
    }

    pub fn benchmark(&self) -> CliResult<Option<Benchmark>> {
        self.problem
            .as_deref()
            .map(|p| Benchmark::parse(p, self.mode).map_err(|e| CliError::config(e.to_string())))
            .transpose()
    }

    pub fn require_benchmark(&self) -> CliResult<Benchmark> {
        self.benchmark()?.ok_or_else(|| CliError::config("\"problem\" is required"))
    }

    /// Training settings; the recorded seed is always the run seed.
    pub fn train_config(&self) -> CliResult<TrainConfig> {
        let cfg = self.train.ok_or_else(|| CliError::config("\"train\" section is required"))?;
        Ok(cfg.with_seed(self.seed()))
    }

    pub fn input_space(&self) -> CliResult<Option<InputSpace>> {
        let Some(value) = &self.input_space else { return Ok(None) };
        let space = match value {
            Value::String(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("cannot read input_space {path}: {e}")))?;
                serde_json::from_str(&text).map_err(|e| CliError::config(format!("invalid input_space {path}: {e}")))?
            }
            inline => serde_json::from_value(inline.clone())
                .map_err(|e| CliError::config(format!("invalid input_space: {e}")))?,
        };
        Ok(Some(space))
    }

    pub fn require<T: Copy>(&self, value: Option<T>, name: &str) -> CliResult<T> {
        value.ok_or_else(|| CliError::config(format!("\"{name}\" is required")))
    }

    /// Canonical JSON of the effective configuration (sorted keys). The
    /// output directory is left out: it does not influence any result.
    pub fn canonical_json(&self) -> String {
        let mut effective = self.clone();
        effective.output_dir = None;
        effective.train = effective.train.map(|t| t.with_seed(self.seed()));
        let value = serde_json::to_value(&effective).unwrap_or(Value::Null);
        serde_json::to_string_pretty(&value).unwrap_or_default()
    }
}
