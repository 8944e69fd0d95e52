//! Closed-form Black-Scholes references at zero interest rate.

use statrs::function::erf::erfc;

use crate::claims::ClaimSpec;
use crate::error::{Error, Result};
use crate::market::{increments, simulate_black_scholes, MarketModelConfig, ModelKind};

/// Rounding allowance when comparing a replicating portfolio with the claim.
const REPLICATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsParams {
    pub spot: f64,
    pub strike: f64,
    pub sigma: f64,
    /// Time to expiry in years.
    pub tau: f64,
}

impl BsParams {
    pub fn new(spot: f64, strike: f64, sigma: f64, tau: f64) -> Result<Self> {
        let p = BsParams { spot, strike, sigma, tau };
        if !(spot > 0.0 && strike > 0.0 && sigma > 0.0 && tau > 0.0) {
            return Err(Error::config(format!(
                "Black-Scholes parameters must be positive: spot={spot}, strike={strike}, sigma={sigma}, tau={tau}"
            )));
        }
        Ok(p)
    }

    fn d1(&self) -> f64 {
        let vol = self.sigma * self.tau.sqrt();
        ((self.spot / self.strike).ln() + 0.5 * vol * vol) / vol
    }
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn bs_call_price(p: &BsParams) -> f64 {
    let d1 = p.d1();
    let d2 = d1 - p.sigma * p.tau.sqrt();
    p.spot * norm_cdf(d1) - p.strike * norm_cdf(d2)
}

pub fn bs_delta(p: &BsParams) -> f64 {
    norm_cdf(p.d1())
}

/// Delta with the expiry limit: at zero time to expiry the hedge is the
/// digital `1{spot > strike}` (one half at the money).
fn delta_or_digital(spot: f64, strike: f64, sigma: f64, tau: f64) -> f64 {
    if tau > 0.0 {
        bs_delta(&BsParams { spot, strike, sigma, tau })
    } else if spot > strike {
        1.0
    } else if spot < strike {
        0.0
    } else {
        0.5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaHedgeReport {
    /// Black-Scholes price paid at time 0.
    pub initial_cost: f64,
    /// Fraction of paths whose terminal portfolio covers the claim.
    pub alpha_hat: f64,
    /// Terminal portfolio minus claim on every path.
    pub pnl: Vec<f64>,
}

/// Discrete delta hedge of a call along simulated Black-Scholes paths.
///
/// The position held over period `(k, k+1]` is set at `X_k` and uses the
/// time to expiry remaining after that period, `τ - (k+1) Δt`; the last
/// period therefore holds the digital limit of the delta.
pub fn delta_hedge_simulate(cfg: &MarketModelConfig, claim: &ClaimSpec, n: usize, seed: u64) -> Result<DeltaHedgeReport> {
    let ModelKind::BlackScholes { sigma, dt, .. } = cfg.model else {
        return Err(Error::config("delta hedging needs a Black-Scholes market"));
    };
    let ClaimSpec::EuropeanCall { strike } = *claim else {
        return Err(Error::config("delta hedging is defined for European calls only"));
    };
    claim.validate()?;
    let tau = cfg.horizon as f64 * dt;
    let initial_cost = bs_call_price(&BsParams::new(cfg.x0, strike, sigma, tau)?);
    let batch = simulate_black_scholes(cfg, n, seed)?;
    let incs = increments(&batch)?;
    let pnl: Vec<f64> = (0..n)
        .map(|i| {
            let path = batch.path(i);
            let mut value = initial_cost;
            for k in 0..cfg.horizon {
                let remaining = tau - (k + 1) as f64 * dt;
                // guard against rounding leaving a tiny positive remainder at expiry
                let remaining = if remaining < 0.5 * dt { 0.0 } else { remaining };
                value += delta_or_digital(path[k], strike, sigma, remaining) * incs[[i, k, 0]];
            }
            value - claim.payoff(path)
        })
        .collect();
    let hits = pnl.iter().filter(|&&x| x >= -REPLICATION_TOL).count();
    Ok(DeltaHedgeReport { initial_cost, alpha_hat: hits as f64 / n as f64, pnl })
}

/// Superhedging price `x0 (1 - K/U)` of an up-and-out call in the
/// discretised Black-Scholes model.
pub fn barrier_superhedge_theoretical(x0: f64, strike: f64, barrier: f64) -> Result<f64> {
    if !(strike < barrier) {
        return Err(Error::config(format!("barrier claim needs K < U, got K={strike}, U={barrier}")));
    }
    if !(x0 > 0.0 && x0 < barrier) {
        return Err(Error::config(format!("spot must lie in (0, U), got x0={x0}, U={barrier}")));
    }
    Ok(x0 * (1.0 - strike / barrier))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_call_price() {
        let p = BsParams::new(100.0, 100.0, 0.1, 30.0 / 250.0).unwrap();
        assert!((bs_call_price(&p) - 1.38).abs() < 0.005);
    }

    #[test]
    fn call_limits() {
        let deep = BsParams::new(100.0, 1e-9, 0.1, 0.1).unwrap();
        assert!((bs_call_price(&deep) - 100.0).abs() < 1e-6);
        let flat = BsParams::new(105.0, 100.0, 1e-9, 1e-6).unwrap();
        assert!((bs_call_price(&flat) - 5.0).abs() < 1e-9);
        let otm = BsParams::new(95.0, 100.0, 1e-9, 1e-6).unwrap();
        assert!(bs_call_price(&otm).abs() < 1e-9);
    }

    #[test]
    fn delta_values() {
        let atm = BsParams::new(100.0, 100.0, 0.1, 30.0 / 250.0).unwrap();
        let oracle = norm_cdf(0.1 * (30.0f64 / 250.0).sqrt() / 2.0);
        assert!((bs_delta(&atm) - oracle).abs() < 1e-15);
        assert!((bs_delta(&atm) - 0.507).abs() < 5e-4);
        assert!(bs_delta(&BsParams::new(200.0, 100.0, 0.1, 0.1).unwrap()) > 0.999_999);
        assert!(bs_delta(&BsParams::new(50.0, 100.0, 0.1, 0.1).unwrap()) < 1e-6);
    }

    #[test]
    fn normal_cdf_known_values() {
        // statrs' erfc is accurate to roughly 1e-11
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 5e-11);
        assert!((norm_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 5e-11);
    }

    #[test]
    fn barrier_theoretical() {
        assert!((barrier_superhedge_theoretical(100.0, 100.0, 105.0).unwrap() - 4.761_904_761_904_762).abs() < 1e-12);
        assert!(barrier_superhedge_theoretical(100.0, 104.999_999, 105.0).unwrap() < 1e-5);
        assert!((barrier_superhedge_theoretical(100.0, 100.0, 1e12).unwrap() - 100.0).abs() < 1e-6);
        assert!(barrier_superhedge_theoretical(100.0, 105.0, 105.0).is_err());
        assert!(barrier_superhedge_theoretical(106.0, 100.0, 105.0).is_err());
    }

    #[test]
    fn initial_cost_is_closed_form_price() {
        let cfg = MarketModelConfig::black_scholes(100.0, 30, 0.1, 0.0, 1.0 / 250.0);
        let r = delta_hedge_simulate(&cfg, &ClaimSpec::call(100.0), 10, 1).unwrap();
        let p = BsParams::new(100.0, 100.0, 0.1, 30.0 / 250.0).unwrap();
        assert_eq!(r.initial_cost, bs_call_price(&p));
        assert_eq!(r.pnl.len(), 10);
    }

    #[test]
    fn deterministic_market_replicates() {
        let cfg = MarketModelConfig::black_scholes(100.0, 30, 1e-7, 0.0, 1.0 / 250.0);
        let r = delta_hedge_simulate(&cfg, &ClaimSpec::call(80.0), 500, 4).unwrap();
        assert_eq!(r.alpha_hat, 1.0);
        assert!(r.pnl.iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn single_path_alpha_is_binary() {
        let cfg = MarketModelConfig::black_scholes(100.0, 30, 0.1, 0.0, 1.0 / 250.0);
        for seed in 0..5 {
            let a = delta_hedge_simulate(&cfg, &ClaimSpec::call(100.0), 1, seed).unwrap().alpha_hat;
            assert!(a == 0.0 || a == 1.0);
        }
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let tri = MarketModelConfig::trinomial_benchmark();
        assert!(delta_hedge_simulate(&tri, &ClaimSpec::call(100.0), 1, 0).is_err());
        let bs = MarketModelConfig::black_scholes(100.0, 3, 0.1, 0.0, 0.004);
        assert!(delta_hedge_simulate(&bs, &ClaimSpec::barrier_up_out(100.0, 105.0), 1, 0).is_err());
        assert!(BsParams::new(100.0, 100.0, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn price_monotone_in_vol_and_time(s1 in 0.01f64..0.8, s2 in 0.01f64..0.8, t1 in 0.01f64..2.0, t2 in 0.01f64..2.0, k in 50.0f64..150.0) {
            let (slo, shi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let (tlo, thi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let price = |s, t| bs_call_price(&BsParams::new(100.0, k, s, t).unwrap());
            prop_assert!(price(slo, 0.5) <= price(shi, 0.5) + 1e-12);
            prop_assert!(price(0.2, tlo) <= price(0.2, thi) + 1e-12);
            let d = bs_delta(&BsParams::new(100.0, k, s1, t1).unwrap());
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
