//! Brute-force α-quantile hedging prices on tiny trees.
//!
//! The quantile price is the smallest superhedging price of the knocked-down
//! claim `H 1_A` over events `A` of probability at least `α`. On a tree with
//! `n` leaves this is a minimum over `2^n` subsets, so it is only offered for
//! horizons of at most two periods.

use super::tree::sup_martingale_expectation;
use crate::claims::ClaimSpec;
use crate::error::{Error, Result};
use crate::market::{enumerate_trinomial, MarketModelConfig};

pub const BRUTE_FORCE_MAX_HORIZON: usize = 2;

/// Slack when comparing an event probability with the target level, so that
/// e.g. two of three equally likely paths reach `α = 2/3`.
const PROB_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantileCurve {
    /// Increasing grid in (0, 1].
    pub alphas: Vec<f64>,
    pub prices: Vec<f64>,
    /// Superhedging price, i.e. the quantile price at `α = 1`.
    pub superhedge_price: f64,
}

struct Leaves {
    claims: Vec<f64>,
    probs: Vec<f64>,
}

fn leaves(cfg: &MarketModelConfig, claim: &ClaimSpec) -> Result<Leaves> {
    claim.validate()?;
    if cfg.horizon > BRUTE_FORCE_MAX_HORIZON {
        return Err(Error::EnumerationCap(format!(
            "subset enumeration supports horizons up to {BRUTE_FORCE_MAX_HORIZON}, got {}; \
             estimate quantile prices with the neural-network hedger (train-t0) instead",
            cfg.horizon
        )));
    }
    let batch = enumerate_trinomial(cfg)?;
    let claims = (0..batch.n_paths()).map(|i| claim.payoff(batch.path(i))).collect();
    let probs = batch.probs.expect("enumeration carries probabilities");
    Ok(Leaves { claims, probs })
}

fn quantile_from_leaves(cfg: &MarketModelConfig, leaves: &Leaves, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("quantile level must lie in (0, 1], got {alpha}")));
    }
    let n = leaves.claims.len();
    let mut best = f64::INFINITY;
    let mut knocked = vec![0.0; n];
    for mask in 0u64..(1u64 << n) {
        let prob: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| leaves.probs[i]).sum();
        if prob < alpha - PROB_SLACK {
            continue;
        }
        for (i, slot) in knocked.iter_mut().enumerate() {
            *slot = if mask >> i & 1 == 1 { leaves.claims[i] } else { 0.0 };
        }
        best = best.min(sup_martingale_expectation(cfg, &knocked)?);
    }
    Ok(best)
}

/// α-quantile hedging price by enumerating every event of the tree.
pub fn quantile_price_bruteforce(cfg: &MarketModelConfig, claim: &ClaimSpec, alpha: f64) -> Result<f64> {
    let leaves = leaves(cfg, claim)?;
    quantile_from_leaves(cfg, &leaves, alpha)
}

/// Quantile prices over a grid of levels. The grid is sorted; the result
/// is checked to be nondecreasing.
pub fn quantile_curve(cfg: &MarketModelConfig, claim: &ClaimSpec, alpha_grid: &[f64]) -> Result<QuantileCurve> {
    let leaves = leaves(cfg, claim)?;
    let mut alphas = alpha_grid.to_vec();
    alphas.sort_by(f64::total_cmp);
    let prices = alphas
        .iter()
        .map(|&a| quantile_from_leaves(cfg, &leaves, a))
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = prices.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::Domain(format!(
            "quantile prices decrease along the grid ({} -> {})",
            w[0], w[1]
        )));
    }
    let superhedge_price = sup_martingale_expectation(cfg, &leaves.claims)?;
    Ok(QuantileCurve { alphas, prices, superhedge_price })
}
