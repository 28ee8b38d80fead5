use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discover::DEFAULT_SIGNIFICANCE;
use crate::error::{Error, Result};
use crate::simulate::BetaPrior;

/// Overrides `master_seed` when set.
pub const SEED_ENV_VAR: &str = "DOFINETTI_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DoFinetti,
    Iid,
    DoFinettiTrueDag,
    IidTrueDag,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::DoFinetti,
        Method::Iid,
        Method::DoFinettiTrueDag,
        Method::IidTrueDag,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DoFinetti => "do-finetti",
            Method::Iid => "iid",
            Method::DoFinettiTrueDag => "do-finetti-true-dag",
            Method::IidTrueDag => "iid-true-dag",
        }
    }

    pub fn uses_true_dag(self) -> bool {
        matches!(self, Method::DoFinettiTrueDag | Method::IidTrueDag)
    }

    pub fn is_exchangeable(self) -> bool {
        matches!(self, Method::DoFinetti | Method::DoFinettiTrueDag)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env_counts: Vec<usize>,
    pub repeats: usize,
    pub prior: BetaPrior,
    pub positions: usize,
    pub methods: Vec<Method>,
    pub significance: f64,
    /// Additive histogram smoothing; 0 is the raw estimator.
    pub smoothing: f64,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env_counts: vec![50, 100, 200, 500, 1000, 2000, 5000],
            repeats: 100,
            prior: BetaPrior::default(),
            positions: 2,
            methods: Method::ALL.to_vec(),
            significance: DEFAULT_SIGNIFICANCE,
            smoothing: 0.0,
            master_seed: 0,
            output_dir: PathBuf::from("sweep-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::parse(0, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies the seed override from the environment, if present.
    pub fn with_env_overrides(mut self) -> Result<Self> {
        if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
            self.master_seed = raw
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("{SEED_ENV_VAR}={raw} is not a u64")))?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if self.env_counts.is_empty() || self.env_counts[0] == 0 {
            return Err(Error::invalid("env_counts must be nonempty and positive"));
        }
        if self.env_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("env_counts must be strictly increasing"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        if !(2..=8).contains(&self.positions) {
            return Err(Error::invalid("positions must lie in 2..=8"));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::invalid("significance must lie in (0, 1)"));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::invalid("smoothing must be nonnegative"));
        }
        BetaPrior::new(self.prior.alpha, self.prior.beta)?;
        Ok(())
    }
}
