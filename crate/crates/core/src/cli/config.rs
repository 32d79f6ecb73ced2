use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayesopt::BoOptions;
use crate::error::{Error, Result};
use crate::localopt::LocalOptOptions;
use crate::metainit::{AngleBounds, TrainConfig};
use crate::persist::SCHEMA_VERSION;

/// Experiment description read from a TOML file.
///
/// Only `seed` is mandatory. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    /// Master seed; every random draw of every mode derives from it.
    pub seed: u64,
    #[serde(default)]
    pub instances: InstanceSection,
    #[serde(default)]
    pub qaoa: QaoaSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub bounds: AngleBounds,
    #[serde(default)]
    pub localopt: LocalOptOptions,
    #[serde(default)]
    pub detect: DetectSection,
    #[serde(default)]
    pub paths: PathSection,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstanceSection {
    pub count: usize,
    /// Transmit-antenna counts; each instance draws one uniformly.
    #[serde(with = "one_or_many")]
    pub n_t: Vec<usize>,
    /// Receive antennas. `None` means square systems (`n_r = n_t`).
    pub n_r: Option<usize>,
    pub noise_scale: f64,
}

impl Default for InstanceSection {
    fn default() -> Self {
        Self {
            count: 100,
            n_t: vec![2, 3],
            n_r: None,
            noise_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QaoaSection {
    pub p: usize,
}

impl Default for QaoaSection {
    fn default() -> Self {
        Self { p: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub rounds: usize,
    pub kappa: f64,
    pub n_init: usize,
    pub length_scale: f64,
    pub noise_variance: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let bo = BoOptions::default();
        Self {
            rounds: bo.rounds,
            kappa: bo.kappa,
            n_init: bo.n_init,
            length_scale: bo.kernel.length_scale,
            noise_variance: bo.kernel.noise_variance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TrainedInit,
    RandomInit,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::TrainedInit => "trained-init",
            Method::RandomInit => "random-init",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectSection {
    /// Initialization used by `detect`. Unset: trained-init when
    /// `paths.init_params` is configured, random-init otherwise.
    pub method: Option<Method>,
    /// Rows kept in each report's probability table.
    pub top_k: Option<usize>,
}

pub const DEFAULT_TOP_K: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathSection {
    pub instances: PathBuf,
    pub init_params: Option<PathBuf>,
    /// Output directory for `detect`, `compare` and `selftest`.
    pub out: PathBuf,
}

impl Default for PathSection {
    fn default() -> Self {
        Self {
            instances: PathBuf::from("instances.jsonl"),
            init_params: None,
            out: PathBuf::from("out"),
        }
    }
}

mod one_or_many {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        One(usize),
        Many(Vec<usize>),
    }

    pub fn serialize<S: Serializer>(v: &[usize], s: S) -> Result<S::Ok, S::Error> {
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::One(n) => vec![n],
            Repr::Many(v) => v,
        })
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file, resolving relative paths against
    /// its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), config_message(e))))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        cfg.paths.instances = base_dir.join(&cfg.paths.instances);
        cfg.paths.out = base_dir.join(&cfg.paths.out);
        cfg.paths.init_params = cfg.paths.init_params.map(|p| base_dir.join(p));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let inst = &self.instances;
        if inst.count == 0 {
            return bad("instances.count must be >= 1".into());
        }
        if inst.n_t.is_empty() || inst.n_t.contains(&0) {
            return bad("instances.n_t must list positive antenna counts".into());
        }
        if inst.n_r == Some(0) {
            return bad("instances.n_r must be positive".into());
        }
        if !(inst.noise_scale >= 0.0 && inst.noise_scale.is_finite()) {
            return bad("instances.noise_scale must be finite and >= 0".into());
        }
        if self.qaoa.p == 0 {
            return bad("qaoa.p must be >= 1".into());
        }
        if self.train.rounds == 0 {
            return bad("train.rounds must be >= 1".into());
        }
        if self.train.n_init == 0 {
            return bad("train.n_init must be >= 1".into());
        }
        if !(self.train.kappa >= 0.0 && self.train.kappa.is_finite()) {
            return bad("train.kappa must be finite and >= 0".into());
        }
        if !(self.train.length_scale > 0.0 && self.train.noise_variance > 0.0) {
            return bad("train.length_scale and train.noise_variance must be positive".into());
        }
        for (name, (lo, hi)) in [("gamma", self.bounds.gamma), ("beta", self.bounds.beta)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("bounds.{name} must be a finite [lo, hi] with lo < hi"));
            }
        }
        let lo = &self.localopt;
        if lo.budget == 0 {
            return bad("localopt.budget must be >= 1".into());
        }
        if !(lo.tol > 0.0 && lo.initial_step > 0.0) {
            return bad("localopt.tol and localopt.initial_step must be positive".into());
        }
        if self.detect.top_k == Some(0) {
            return bad("detect.top_k must be >= 1".into());
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let mut bo = BoOptions {
            rounds: self.train.rounds,
            kappa: self.train.kappa,
            n_init: self.train.n_init,
            ..BoOptions::default()
        };
        bo.kernel.length_scale = self.train.length_scale;
        bo.kernel.noise_variance = self.train.noise_variance;
        TrainConfig {
            p: self.qaoa.p,
            angle_bounds: self.bounds,
            bo,
        }
    }

    pub fn detect_method(&self) -> Method {
        self.detect.method.unwrap_or(match self.paths.init_params {
            Some(_) => Method::TrainedInit,
            None => Method::RandomInit,
        })
    }

    pub fn top_k(&self) -> usize {
        self.detect.top_k.unwrap_or(DEFAULT_TOP_K)
    }
}

fn config_message(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}
