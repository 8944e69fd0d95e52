//! Contingent claims and the success-ratio diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClaimSpec {
    /// `(X_T - K)^+`.
    EuropeanCall { strike: f64 },
    /// `(X_T - K)^+` if every observed price stays strictly below the
    /// barrier, including the first and the last one; zero otherwise.
    BarrierUpOutCall { strike: f64, barrier: f64 },
}

impl ClaimSpec {
    pub fn call(strike: f64) -> Self {
        ClaimSpec::EuropeanCall { strike }
    }

    pub fn barrier_up_out(strike: f64, barrier: f64) -> Self {
        ClaimSpec::BarrierUpOutCall { strike, barrier }
    }

    pub fn strike(&self) -> f64 {
        match *self {
            ClaimSpec::EuropeanCall { strike } | ClaimSpec::BarrierUpOutCall { strike, .. } => strike,
        }
    }

    /// Whether the payoff depends on more than the terminal price.
    pub fn is_path_dependent(&self) -> bool {
        matches!(self, ClaimSpec::BarrierUpOutCall { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClaimSpec::EuropeanCall { strike } => {
                if !(strike > 0.0) {
                    return Err(Error::config(format!("strike must be positive, got {strike}")));
                }
            }
            ClaimSpec::BarrierUpOutCall { strike, barrier } => {
                if !(strike > 0.0) {
                    return Err(Error::config(format!("strike must be positive, got {strike}")));
                }
                if !(strike < barrier) {
                    return Err(Error::config(format!(
                        "barrier claim needs strike < barrier, got K={strike}, U={barrier}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Payoff on a single-asset price path `X_0, ..., X_T`.
    pub fn payoff<'a, I>(&self, path: I) -> f64
    where
        I: IntoIterator<Item = &'a f64>,
        I::IntoIter: DoubleEndedIterator,
    {
        match *self {
            ClaimSpec::EuropeanCall { strike } => {
                let last = *path.into_iter().next_back().expect("non-empty path");
                (last - strike).max(0.0)
            }
            ClaimSpec::BarrierUpOutCall { strike, barrier } => {
                let mut last = f64::NAN;
                for &x in path {
                    if x >= barrier {
                        return 0.0;
                    }
                    last = x;
                }
                (last - strike).max(0.0)
            }
        }
    }

    /// Payoff that also validates the claim first.
    pub fn checked_payoff(&self, path: &[f64]) -> Result<f64> {
        self.validate()?;
        if path.is_empty() {
            return Err(Error::config("payoff needs a non-empty price path"));
        }
        Ok(self.payoff(path))
    }
}

/// Success ratio of a terminal portfolio value `v_t` against the claim value
/// `h`: 1 on the success set `{v_t >= h}`, `v_t / h` otherwise.
pub fn success_ratio(v_t: f64, h: f64) -> Result<f64> {
    if v_t < 0.0 {
        return Err(Error::Domain(format!(
            "success ratio needs a non-negative terminal value, got {v_t}"
        )));
    }
    if h < 0.0 {
        return Err(Error::Domain(format!("claim value must be non-negative, got {h}")));
    }
    Ok(if v_t >= h { 1.0 } else { v_t / h })
}
