//! Experiment configuration files.
//!
//! A configuration is a TOML document: top-level keys for run-wide settings
//! and one table per component.
//!
//! ```toml
//! mode = "train-t0"          # optional; must match the subcommand if set
//! output_dir = "out/trinomial"
//! lambda = 10000.0           # train-t0, and the base policy of train-consumption
//! lambdas = [10, 50, 100]    # sweep-lambda
//! alphas = [0.6, 1.0]        # quantile-curve
//! n_paths = 300000           # simulate, baseline-delta
//! seed = 1                   # simulate, baseline-delta
//!
//! [market]
//! kind = "trinomial"         # or "black_scholes" with sigma, mu, dt
//! x0 = 100.0
//! horizon = 29
//! d = -0.01
//! m = 0.0
//! u = 0.01
//!
//! [claim]
//! kind = "european_call"     # or "barrier_up_out_call" with barrier
//! strike = 100.0
//!
//! [train]                    # all keys optional; defaults shown
//! n_samples = 200000
//! batch_size = 512
//! epochs = 16
//! lr = 0.001
//! lr_final = 0.0001
//! seed = 0
//!
//! [policy]                   # all keys optional
//! hidden = [30, 30]
//! activation = "swish"
//!
//! [consumption]              # train-consumption
//! beta = 500.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::claims::ClaimSpec;
use crate::consumption::ConsumptionConfig;
use crate::error::{Error, Result};
use crate::hedger::{PolicyConfig, TrainConfig};
use crate::market::MarketModelConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Oracle,
    TrainT0,
    SweepLambda,
    Consumption,
    Baseline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    pub market: MarketModelConfig,
    pub claim: ClaimSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consumption: Option<ConsumptionConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Penalty weights of the trinomial benchmark sweep.
pub fn default_lambdas() -> Vec<f64> {
    vec![10.0, 50.0, 100.0, 500.0, 1000.0, 2000.0, 4000.0, 10000.0]
}

fn default_alphas() -> Vec<f64> {
    vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
}

fn default_n_paths() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("cannot parse configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read configuration {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialise configuration: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.market.validate()?;
        self.claim.validate()?;
        self.train.validate()?;
        if self.n_paths == 0 {
            return Err(Error::config("n_paths must be at least 1"));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return Err(Error::config(format!("lambda must be positive, got {l}")));
            }
        }
        if self.lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::config("every entry of lambdas must be positive"));
        }
        if self.alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::config("every entry of alphas must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Fail unless the optional `mode` agrees with the subcommand.
    pub fn require_mode(&self, mode: Mode) -> Result<()> {
        match self.mode {
            Some(m) if m != mode => Err(Error::config(format!(
                "configuration is for mode {m:?} but the subcommand runs {mode:?}"
            ))),
            _ => Ok(()),
        }
    }
}
