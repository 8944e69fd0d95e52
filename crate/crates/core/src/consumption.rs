//! Consumption process of the uniform Doob decomposition and the resulting
//! superhedging price process.
//!
//! Given a trained time-0 policy with surplus `G = V_T - H`, the consumption
//! is approximated recursively by
//!
//! ```text
//! B_0 = 0,   B_t = max(F_t(X_0, ..., X_t), B_{t-1}),
//! ```
//!
//! where `F_t` is trained, after `F_1, ..., F_{t-1}` are frozen, on
//!
//! ```text
//! (1/N) Σ_j [ -B_t,j^2 + β max(B_t,j - G_j, 0) ].
//! ```
//!
//! The price process is then `U_t = price + Σ_{k<=t} ξ_k ΔX_k - B_t`.

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::claims::ClaimSpec;
use crate::error::{Error, Result};
use crate::hedger::{cumulative_gains, payoffs, portfolio_terminal, FeatureMap, HedgePolicy, TrainConfig};
use crate::market::{increments, simulate, MarketModelConfig, PathBatch};
use crate::nn::checkpoint::{expect_magic, read_f64, read_u32, write_f64, write_u32, FORMAT_VERSION};
use crate::nn::{read_network, write_network, Activation, Adam, Network};
use crate::rng::derive_seed;

/// Additive slack on `G` when counting a path as feasible.
pub const FEASIBILITY_SLACK: f64 = 0.01;

const NET_SEED_LABEL: u64 = 0xc0_5e;
const PILOT_LABEL: u64 = 0xb1a5;
const PILOT_PATHS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionConfig {
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    pub beta: f64,
}

fn default_hidden() -> Vec<usize> {
    vec![30, 20, 20]
}

fn default_activation() -> Activation {
    Activation::Swish
}

impl ConsumptionConfig {
    pub fn with_beta(beta: f64) -> Self {
        ConsumptionConfig { hidden: default_hidden(), activation: default_activation(), beta }
    }
}

/// Per-date consumption networks; `nets[t - 1]` reads `X_0, ..., X_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsumptionNets {
    pub nets: Vec<Network>,
    pub beta: f64,
    pub features: FeatureMap,
}

/// Price-process trajectories, each array `[n_paths, T + 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceProcessSample {
    pub u: Array2<f64>,
    pub b: Array2<f64>,
    pub gains: Array2<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsumptionReport {
    pub beta: f64,
    /// Fraction of test paths with `B_T <= G + FEASIBILITY_SLACK`.
    pub feasibility_rate: f64,
    pub mean_terminal_consumption: f64,
    pub n_test: usize,
}

impl ConsumptionNets {
    pub fn horizon(&self) -> usize {
        self.nets.len()
    }

    /// `B_0, ..., B_T` on one single-asset path.
    pub fn consumption_path(&self, path: &[f64]) -> Result<Vec<f64>> {
        if path.len() != self.horizon() + 1 {
            return Err(Error::Shape { expected: self.horizon() + 1, got: path.len() });
        }
        let feats: Vec<f64> = path.iter().map(|&x| self.features.apply(x)).collect();
        let mut b = vec![0.0; path.len()];
        for (t, net) in self.nets.iter().enumerate() {
            let f = net.forward(&feats[..t + 2])?[0];
            b[t + 1] = f.max(b[t]);
        }
        Ok(b)
    }

    /// `B_0, ..., B_upto` for every path, using the first `upto` networks.
    fn consumption_upto(&self, feats: &Array2<f64>, upto: usize) -> Result<Array2<f64>> {
        let n = feats.nrows();
        let mut b = Array2::zeros((n, upto + 1));
        for t in 1..=upto {
            let (f, _) = self.nets[t - 1].forward_batch(feats.slice(s![.., ..=t]))?;
            for i in 0..n {
                b[[i, t]] = f[[i, 0]].max(b[[i, t - 1]]);
            }
        }
        Ok(b)
    }

    pub fn consumption_batch(&self, batch: &PathBatch) -> Result<Array2<f64>> {
        if batch.horizon() != self.horizon() {
            return Err(Error::Shape { expected: self.horizon(), got: batch.horizon() });
        }
        self.consumption_upto(&self.features.batch(batch), self.horizon())
    }
}

/// Surplus `V_T - H` of the time-0 policy on every path.
pub fn gains_minus_claim(base_policy: &HedgePolicy, batch: &PathBatch, claim: &ClaimSpec) -> Result<Vec<f64>> {
    let v = portfolio_terminal(base_policy, batch)?;
    Ok(v.iter().zip(payoffs(claim, batch)).map(|(v, h)| v - h).collect())
}

/// Empirical loss of the date-`t` network, where `t` is read off the
/// network's input width (`t + 1` prices).
pub fn loss_consumption_t(
    net_t: &Network,
    features: &FeatureMap,
    beta: f64,
    batch: &PathBatch,
    g: &[f64],
    b_prev: &[f64],
) -> Result<f64> {
    let n = batch.n_paths();
    if g.len() != n || b_prev.len() != n {
        return Err(Error::Shape { expected: n, got: g.len().min(b_prev.len()) });
    }
    let t = net_t.input_dim() - 1;
    if t == 0 || t > batch.horizon() {
        return Err(Error::config(format!("consumption network reads {} prices, batch has {}", t + 1, batch.horizon() + 1)));
    }
    let feats = features.batch(batch);
    let (f, _) = net_t.forward_batch(feats.slice(s![.., ..=t]))?;
    let total: f64 = (0..n)
        .map(|i| {
            let b = f[[i, 0]].max(b_prev[i]);
            -b * b + beta * (b - g[i]).max(0.0)
        })
        .sum();
    Ok(total / n as f64)
}

/// Loss and parameter gradient of the date-`t` network on one batch.
fn loss_and_gradient_t(
    net: &Network,
    feats: &Array2<f64>,
    t: usize,
    beta: f64,
    g: &[f64],
    b_prev: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let n = feats.nrows();
    let (f, cache) = net.forward_batch(feats.slice(s![.., ..=t]))?;
    let mut loss = 0.0;
    let mut upstream = Array2::zeros((n, 1));
    for i in 0..n {
        let fi = f[[i, 0]];
        let b = fi.max(b_prev[i]);
        let violated = b > g[i];
        loss += -b * b + if violated { beta * (b - g[i]) } else { 0.0 };
        // the network only moves B_t where it sets the running maximum
        if fi > b_prev[i] {
            upstream[[i, 0]] = (-2.0 * b + if violated { beta } else { 0.0 }) / n as f64;
        }
    }
    let grads = net.backward_batch(&cache, upstream.view())?;
    Ok((loss / n as f64, grads))
}

fn validate_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::config(format!(
            "beta must be positive: without the penalty the loss decreases without bound in B (got {beta})"
        )));
    }
    Ok(())
}

/// Train `F_1, ..., F_T` one date at a time on fresh batches, then evaluate
/// feasibility on held-out paths.
pub fn train_consumption(
    cfg: &MarketModelConfig,
    claim: &ClaimSpec,
    base_policy: &HedgePolicy,
    consumption_cfg: &ConsumptionConfig,
    train_cfg: &TrainConfig,
) -> Result<(ConsumptionNets, ConsumptionReport)> {
    validate_beta(consumption_cfg.beta)?;
    cfg.validate()?;
    claim.validate()?;
    train_cfg.validate()?;
    if cfg.horizon != base_policy.horizon() {
        return Err(Error::Shape { expected: base_policy.horizon(), got: cfg.horizon });
    }
    let horizon = cfg.horizon;
    let mut nets = ConsumptionNets { nets: Vec::with_capacity(horizon), beta: consumption_cfg.beta, features: base_policy.features };
    let base_seed = derive_seed(train_cfg.seed, NET_SEED_LABEL);

    for t in 1..=horizon {
        let mut dims = vec![t + 1];
        dims.extend_from_slice(&consumption_cfg.hidden);
        dims.push(1);
        let mut net = Network::init_truncated_normal(&dims, consumption_cfg.activation, derive_seed(base_seed, t as u64))?;
        // centre the fresh network on the inherited level so that it sets
        // the running maximum on a sizeable share of paths
        let pilot = simulate(cfg, PILOT_PATHS, derive_seed(base_seed, PILOT_LABEL + t as u64))?;
        let prev = nets.consumption_upto(&nets.features.batch(&pilot), t - 1)?;
        let level = prev.column(t - 1).mean().unwrap_or(0.0);
        let last = net.n_layers() - 1;
        net.bias_mut(last)[0] = level;

        let mut adam = Adam::new(net.params().len(), train_cfg.lr);
        for it in 0..train_cfg.iterations() {
            adam.lr = train_cfg.lr_at(it);
            let batch = simulate(cfg, train_cfg.batch_size, derive_seed(train_cfg.batch_seed(it), t as u64))?;
            let g = gains_minus_claim(base_policy, &batch, claim)?;
            let feats = nets.features.batch(&batch);
            let b_prev = nets.consumption_upto(&feats, t - 1)?;
            let b_prev = b_prev.column(t - 1).to_vec();
            let (loss, grads) = loss_and_gradient_t(&net, &feats, t, consumption_cfg.beta, &g, &b_prev)?;
            if !loss.is_finite() {
                return Err(Error::Training { iteration: (t - 1) * train_cfg.iterations() + it, loss });
            }
            adam.step(net.params_mut(), &grads);
        }
        nets.nets.push(net);
    }

    let test = simulate(cfg, train_cfg.n_test(), train_cfg.test_seed())?;
    let g = gains_minus_claim(base_policy, &test, claim)?;
    let terminal = nets.consumption_batch(&test)?.column(horizon).to_vec();
    let report = ConsumptionReport {
        beta: consumption_cfg.beta,
        feasibility_rate: feasibility_from_surplus(&g, &terminal, FEASIBILITY_SLACK),
        mean_terminal_consumption: terminal.iter().sum::<f64>() / terminal.len() as f64,
        n_test: test.n_paths(),
    };
    Ok((nets, report))
}

/// Fraction of paths with `B_T <= G + slack`.
pub fn feasibility_from_surplus(g: &[f64], b_terminal: &[f64], slack: f64) -> f64 {
    let ok = g.iter().zip(b_terminal).filter(|(g, b)| **b <= **g + slack).count();
    ok as f64 / g.len() as f64
}

/// Fraction of paths with `U_T >= H - slack`.
pub fn feasibility_from_prices(sample: &PriceProcessSample, claim_values: &[f64], slack: f64) -> f64 {
    let last = sample.u.ncols() - 1;
    let ok = claim_values.iter().enumerate().filter(|(i, h)| sample.u[[*i, last]] >= **h - slack).count();
    ok as f64 / claim_values.len() as f64
}

/// Superhedging price process `U_t = price + gains_t - B_t` on every path.
pub fn price_process(base_policy: &HedgePolicy, nets: &ConsumptionNets, batch: &PathBatch) -> Result<PriceProcessSample> {
    if nets.horizon() != base_policy.horizon() {
        return Err(Error::Shape { expected: base_policy.horizon(), got: nets.horizon() });
    }
    let gains = cumulative_gains(&base_policy.positions(batch)?, &increments(batch)?);
    let b = nets.consumption_batch(batch)?;
    let u = gains.mapv(|g| base_policy.price + g) - &b;
    Ok(PriceProcessSample { u, b, gains })
}

/// Binary checkpoint of consumption networks, little-endian:
///
/// ```text
/// "SHCN" u32 version
/// f64 beta, f64 feature reference, f64 feature scale
/// u32 number of networks T, then T network records ("SHNN" ...)
/// ```
pub const CONSUMPTION_MAGIC: &[u8; 4] = b"SHCN";

impl ConsumptionNets {
    pub fn write_checkpoint(&self, w: &mut impl std::io::Write) -> Result<()> {
        w.write_all(CONSUMPTION_MAGIC)?;
        write_u32(w, FORMAT_VERSION)?;
        write_f64(w, self.beta)?;
        write_f64(w, self.features.reference)?;
        write_f64(w, self.features.scale)?;
        write_u32(w, self.nets.len() as u32)?;
        self.nets.iter().try_for_each(|n| write_network(w, n))
    }

    pub fn read_checkpoint(r: &mut impl std::io::Read) -> Result<Self> {
        expect_magic(r, CONSUMPTION_MAGIC)?;
        let beta = read_f64(r)?;
        let features = FeatureMap { reference: read_f64(r)?, scale: read_f64(r)? };
        let n = read_u32(r)?;
        let nets = (0..n).map(|_| read_network(r)).collect::<Result<Vec<_>>>()?;
        for (t, net) in nets.iter().enumerate() {
            if net.input_dim() != t + 2 || net.output_dim() != 1 {
                return Err(Error::Checkpoint(format!("consumption network {} has widths {:?}", t + 1, net.dims())));
            }
        }
        Ok(ConsumptionNets { nets, beta, features })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_checkpoint(&mut w)?;
        std::io::Write::flush(&mut w)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::read_checkpoint(&mut std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
