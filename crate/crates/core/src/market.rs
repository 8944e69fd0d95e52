//! Discounted price paths for the trinomial and discretised Black-Scholes
//! markets.
//!
//! Prices are stored already discounted (numeraire identically 1) in an
//! array of shape `[n_paths, T + 1, n_assets]`. All shipped models carry a
//! single risky asset; the asset axis is kept so that shapes do not change
//! if more assets are added.

use ndarray::{s, Array3, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Largest number of leaves the exact tree enumerator accepts by default (3^13).
pub const DEFAULT_ENUMERATION_CAP: usize = 1_594_323;

/// Paths generated per independent random stream.
const BLOCK_PATHS: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// i.i.d. one-period returns taking the values `d < m < u`.
    Trinomial {
        d: f64,
        m: f64,
        u: f64,
        #[serde(default = "equal_thirds")]
        probs: [f64; 3],
    },
    /// Exact log-normal one-step scheme with annualised `sigma`, `mu` and
    /// step length `dt` in years.
    BlackScholes { sigma: f64, mu: f64, dt: f64 },
}

fn equal_thirds() -> [f64; 3] {
    [1.0 / 3.0; 3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketModelConfig {
    pub x0: f64,
    pub horizon: usize,
    #[serde(flatten)]
    pub model: ModelKind,
}

impl MarketModelConfig {
    pub fn trinomial(x0: f64, horizon: usize, d: f64, m: f64, u: f64) -> Self {
        MarketModelConfig {
            x0,
            horizon,
            model: ModelKind::Trinomial { d, m, u, probs: equal_thirds() },
        }
    }

    pub fn black_scholes(x0: f64, horizon: usize, sigma: f64, mu: f64, dt: f64) -> Self {
        MarketModelConfig { x0, horizon, model: ModelKind::BlackScholes { sigma, mu, dt } }
    }

    /// The trinomial market used for the call benchmark: returns of -1%, 0
    /// and +1% over 29 periods from a spot of 100.
    pub fn trinomial_benchmark() -> Self {
        Self::trinomial(100.0, 29, -0.01, 0.0, 0.01)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(Error::config(format!("x0 must be positive, got {}", self.x0)));
        }
        match self.model {
            ModelKind::Trinomial { d, m, u, probs } => {
                if !(-1.0 < d && d < m && m < u) {
                    return Err(Error::config(format!(
                        "trinomial returns must satisfy -1 < d < m < u, got d={d}, m={m}, u={u}"
                    )));
                }
                if !(d < 0.0 && u > 0.0) {
                    return Err(Error::config(format!(
                        "trinomial model admits arbitrage unless d < 0 < u (d={d}, u={u})"
                    )));
                }
                if probs.iter().any(|&p| !(p > 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(Error::config(format!(
                        "trinomial probabilities must be positive and sum to 1, got {probs:?}"
                    )));
                }
            }
            ModelKind::BlackScholes { sigma, mu, dt } => {
                if !(sigma > 0.0) || !(dt > 0.0) || !mu.is_finite() {
                    return Err(Error::config(format!(
                        "Black-Scholes needs sigma > 0, dt > 0 and finite mu (sigma={sigma}, dt={dt}, mu={mu})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One-period gross returns `(1 + d, 1 + m, 1 + u)`.
    pub fn trinomial_factors(&self) -> Option<[f64; 3]> {
        match self.model {
            ModelKind::Trinomial { d, m, u, .. } => Some([1.0 + d, 1.0 + m, 1.0 + u]),
            _ => None,
        }
    }
}

/// A batch of discounted price paths.
#[derive(Clone, Debug, PartialEq)]
pub struct PathBatch {
    /// `[n_paths, T + 1, n_assets]`.
    pub prices: Array3<f64>,
    /// Exact path probabilities, present for enumerated trees.
    pub probs: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

impl PathBatch {
    /// Wrap single-asset paths given as rows of equal length.
    pub fn from_paths(paths: &[Vec<f64>]) -> Result<Self> {
        let len = paths.first().map(Vec::len).unwrap_or(0);
        if len == 0 {
            return Err(Error::config("path batch needs at least one non-empty path"));
        }
        let mut prices = Array3::zeros((paths.len(), len, 1));
        for (i, p) in paths.iter().enumerate() {
            if p.len() != len {
                return Err(Error::Shape { expected: len, got: p.len() });
            }
            for (t, &x) in p.iter().enumerate() {
                prices[[i, t, 0]] = x;
            }
        }
        Ok(PathBatch { prices, probs: None, seed: None })
    }

    pub fn n_paths(&self) -> usize {
        self.prices.len_of(Axis(0))
    }

    pub fn horizon(&self) -> usize {
        self.prices.len_of(Axis(1)) - 1
    }

    pub fn n_assets(&self) -> usize {
        self.prices.len_of(Axis(2))
    }

    /// Price path of the first asset for path `i`.
    pub fn path(&self, i: usize) -> ArrayView1<'_, f64> {
        self.prices.slice(s![i, .., 0])
    }

    /// Price path of the first asset as an owned vector.
    pub fn path_vec(&self, i: usize) -> Vec<f64> {
        self.path(i).to_vec()
    }

    /// Terminal prices of the first asset.
    pub fn terminal(&self) -> Vec<f64> {
        let t = self.horizon();
        self.prices.slice(s![.., t, 0]).to_vec()
    }

    /// Rows `range` of the batch (probabilities are dropped).
    pub fn select(&self, range: std::ops::Range<usize>) -> PathBatch {
        PathBatch {
            prices: self.prices.slice(s![range, .., ..]).to_owned(),
            probs: None,
            seed: self.seed,
        }
    }
}

/// Price after one step of the exact log-normal scheme driven by `z`.
#[inline]
pub fn log_euler_step(x: f64, z: f64, sigma: f64, mu: f64, dt: f64) -> f64 {
    x * ((mu - 0.5 * sigma * sigma) * dt + sigma * dt.sqrt() * z).exp()
}

/// Fill `n` paths block by block; block `b` draws from stream `b` of `seed`.
fn simulate_blocks<F>(cfg: &MarketModelConfig, n: usize, seed: u64, step: F) -> PathBatch
where
    F: Fn(&mut Stream, f64) -> f64 + Sync,
{
    let width = cfg.horizon + 1;
    let mut flat = vec![0.0; n * width];
    flat.par_chunks_mut(BLOCK_PATHS * width)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut stream = Stream::new(seed, block as u64);
            for path in chunk.chunks_mut(width) {
                path[0] = cfg.x0;
                for t in 1..width {
                    path[t] = step(&mut stream, path[t - 1]);
                }
            }
        });
    let prices = Array3::from_shape_vec((n, width, 1), flat).expect("shape matches buffer");
    PathBatch { prices, probs: None, seed: Some(seed) }
}

pub fn simulate_trinomial(cfg: &MarketModelConfig, n: usize, seed: u64) -> Result<PathBatch> {
    cfg.validate()?;
    let ModelKind::Trinomial { d, m, u, probs } = cfg.model else {
        return Err(Error::config("simulate_trinomial needs a trinomial model"));
    };
    if n == 0 {
        return Err(Error::config("number of paths must be at least 1"));
    }
    let (c0, c1) = (probs[0], probs[0] + probs[1]);
    Ok(simulate_blocks(cfg, n, seed, |stream, x| {
        let v = stream.uniform();
        let r = if v < c0 {
            d
        } else if v < c1 {
            m
        } else {
            u
        };
        x * (1.0 + r)
    }))
}

pub fn simulate_black_scholes(cfg: &MarketModelConfig, n: usize, seed: u64) -> Result<PathBatch> {
    cfg.validate()?;
    let ModelKind::BlackScholes { sigma, mu, dt } = cfg.model else {
        return Err(Error::config("simulate_black_scholes needs a Black-Scholes model"));
    };
    if n == 0 {
        return Err(Error::config("number of paths must be at least 1"));
    }
    Ok(simulate_blocks(cfg, n, seed, |stream, x| {
        log_euler_step(x, stream.normal(), sigma, mu, dt)
    }))
}

/// Dispatch on the model kind.
pub fn simulate(cfg: &MarketModelConfig, n: usize, seed: u64) -> Result<PathBatch> {
    match cfg.model {
        ModelKind::Trinomial { .. } => simulate_trinomial(cfg, n, seed),
        ModelKind::BlackScholes { .. } => simulate_black_scholes(cfg, n, seed),
    }
}

/// Moves `0 = d, 1 = m, 2 = u` of enumerated path `index`, first move most
/// significant.
pub fn trinomial_moves(mut index: usize, horizon: usize) -> Vec<u8> {
    let mut moves = vec![0u8; horizon];
    for slot in moves.iter_mut().rev() {
        *slot = (index % 3) as u8;
        index /= 3;
    }
    moves
}

/// `3^horizon`, or `None` on overflow.
pub fn tree_size(horizon: usize) -> Option<usize> {
    3usize.checked_pow(u32::try_from(horizon).ok()?)
}

pub fn enumerate_trinomial(cfg: &MarketModelConfig) -> Result<PathBatch> {
    enumerate_trinomial_capped(cfg, DEFAULT_ENUMERATION_CAP)
}

/// Every path of the trinomial tree with its exact probability, in base-3
/// lexicographic order of the moves.
pub fn enumerate_trinomial_capped(cfg: &MarketModelConfig, cap: usize) -> Result<PathBatch> {
    cfg.validate()?;
    let ModelKind::Trinomial { probs, .. } = cfg.model else {
        return Err(Error::config("enumerate_trinomial needs a trinomial model"));
    };
    let factors = cfg.trinomial_factors().expect("trinomial");
    let horizon = cfg.horizon;
    let n = match tree_size(horizon) {
        Some(n) if n <= cap => n,
        _ => {
            return Err(Error::EnumerationCap(format!(
                "3^{horizon} paths exceed the enumeration cap of {cap}; use simulation instead"
            )))
        }
    };
    let width = horizon + 1;
    let mut prices = Array3::zeros((n, width, 1));
    let mut path_probs = Vec::with_capacity(n);
    for i in 0..n {
        let moves = trinomial_moves(i, horizon);
        let mut x = cfg.x0;
        let mut p = 1.0;
        prices[[i, 0, 0]] = x;
        for (t, &mv) in moves.iter().enumerate() {
            x *= factors[mv as usize];
            p *= probs[mv as usize];
            prices[[i, t + 1, 0]] = x;
        }
        path_probs.push(p);
    }
    Ok(PathBatch { prices, probs: Some(path_probs), seed: None })
}

/// Price increments `X_{k+1} - X_k`, shape `[n_paths, T, n_assets]`.
pub fn increments(batch: &PathBatch) -> Result<Array3<f64>> {
    let horizon = batch.horizon();
    if horizon == 0 {
        return Err(Error::config("increments need a horizon of at least one step"));
    }
    let later = batch.prices.slice(s![.., 1.., ..]);
    let earlier = batch.prices.slice(s![.., ..horizon, ..]);
    Ok(&later - &earlier)
}
