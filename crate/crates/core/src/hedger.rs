//! Neural time-0 superhedging.
//!
//! A policy is a scalar initial capital plus one strategy network per
//! trading period; network `k` sees the price history `X_0, ..., X_{k-1}` and
//! returns the position held over `(k-1, k]`. Training minimises
//!
//! ```text
//! L(θ) = price^2 + λ/N Σ_j ( max(H_j - V_T,j, 0) )^2
//! ```
//!
//! with Adam, drawing a fresh batch of paths at every iteration. A larger
//! `λ` buys a higher probability of superhedging at a higher price.

use ndarray::{s, Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::claims::ClaimSpec;
use crate::error::{Error, Result};
use crate::market::{increments, simulate, MarketModelConfig, PathBatch};
use crate::nn::checkpoint::{expect_magic, read_f64, read_u32, write_f64, write_u32, FORMAT_VERSION};
use crate::nn::{read_network, truncate_derivative, truncate_scalar, write_network, Activation, Adam, Network};
use crate::rng::derive_seed;

/// Seed label of the held-out evaluation paths.
const TEST_POOL_LABEL: u64 = 0x7e57;
/// Seed label of the pilot sample used to guess the initial price.
const PILOT_LABEL: u64 = 0x9110;
const PILOT_PATHS: usize = 20_000;

/// Network inputs are scaled log-prices relative to a reference level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub reference: f64,
    pub scale: f64,
}

impl FeatureMap {
    pub fn for_market(cfg: &MarketModelConfig) -> Self {
        FeatureMap { reference: cfg.x0, scale: 10.0 }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.scale * (x / self.reference).ln()
    }

    /// Features of every price in the batch, `[n_paths, T + 1]` (first asset).
    pub fn batch(&self, batch: &PathBatch) -> Array2<f64> {
        batch.prices.index_axis(Axis(2), 0).mapv(|x| self.apply(x))
    }
}

/// Initial capital plus per-period strategy networks.
#[derive(Clone, Debug, PartialEq)]
pub struct HedgePolicy {
    pub price: f64,
    /// `nets[k - 1]` trades over period `k`; its input has length `k`.
    pub nets: Vec<Network>,
    pub truncation: Option<f64>,
    pub lambda: f64,
    pub features: FeatureMap,
}

/// How to build a fresh policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    /// Clamp strategy outputs to `[-C, C]`; unset trains unclamped.
    #[serde(default)]
    pub truncation: Option<f64>,
    /// Starting capital; unset uses the sample mean of the claim.
    #[serde(default)]
    pub initial_price: Option<f64>,
}

fn default_hidden() -> Vec<usize> {
    vec![30, 30]
}

fn default_activation() -> Activation {
    Activation::Swish
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            hidden: default_hidden(),
            activation: default_activation(),
            truncation: None,
            initial_price: None,
        }
    }
}

impl PolicyConfig {
    pub fn build(&self, cfg: &MarketModelConfig, claim: &ClaimSpec, lambda: f64, seed: u64) -> Result<HedgePolicy> {
        let price = match self.initial_price {
            Some(p) => p,
            None => {
                let pilot = simulate(cfg, PILOT_PATHS, derive_seed(seed, PILOT_LABEL))?;
                (0..pilot.n_paths()).map(|i| claim.payoff(pilot.path(i))).sum::<f64>() / pilot.n_paths() as f64
            }
        };
        HedgePolicy::new(
            cfg.horizon,
            &self.hidden,
            self.activation,
            FeatureMap::for_market(cfg),
            lambda,
            self.truncation,
            price,
            seed,
        )
    }
}

impl HedgePolicy {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        horizon: usize,
        hidden: &[usize],
        activation: Activation,
        features: FeatureMap,
        lambda: f64,
        truncation: Option<f64>,
        price: f64,
        seed: u64,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::config("hedging needs at least one trading period"));
        }
        let nets = (1..=horizon)
            .map(|k| {
                let mut dims = vec![k];
                dims.extend_from_slice(hidden);
                dims.push(1);
                Network::init_truncated_normal(&dims, activation, derive_seed(seed, k as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        let policy = HedgePolicy { price, nets, truncation, lambda, features };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if let Some(c) = self.truncation {
            if !(c > 0.0) {
                return Err(Error::config(format!("truncation bound must be positive, got {c}")));
            }
        }
        for (k, net) in self.nets.iter().enumerate() {
            if net.input_dim() != k + 1 || net.output_dim() != 1 {
                return Err(Error::config(format!(
                    "strategy network {} must map R^{} to R, got {:?}",
                    k + 1,
                    k + 1,
                    net.dims()
                )));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.nets.len()
    }

    fn check_batch(&self, batch: &PathBatch) -> Result<()> {
        if batch.horizon() != self.horizon() {
            return Err(Error::Shape { expected: self.horizon(), got: batch.horizon() });
        }
        Ok(())
    }

    #[inline]
    fn clamp(&self, raw: f64) -> f64 {
        match self.truncation {
            Some(c) => truncate_scalar(raw, c),
            None => raw,
        }
    }

    /// Positions `ξ_k` for every path and period, `[n_paths, T]`.
    pub fn positions(&self, batch: &PathBatch) -> Result<Array2<f64>> {
        self.check_batch(batch)?;
        let feats = self.features.batch(batch);
        let mut out = Array2::zeros((batch.n_paths(), self.horizon()));
        for (k, net) in self.nets.iter().enumerate() {
            let (raw, _) = net.forward_batch(feats.slice(s![.., ..=k]))?;
            out.column_mut(k).assign(&raw.column(0).mapv(|v| self.clamp(v)));
        }
        Ok(out)
    }
}

/// Cumulative gains `Σ_{k<=t} ξ_k ΔX_k` for `t = 0..=T`, `[n_paths, T + 1]`.
pub fn cumulative_gains(positions: &Array2<f64>, incs: &Array3<f64>) -> Array2<f64> {
    let (n, horizon) = positions.dim();
    let mut gains = Array2::zeros((n, horizon + 1));
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..horizon {
            acc += positions[[i, k]] * incs[[i, k, 0]];
            gains[[i, k + 1]] = acc;
        }
    }
    gains
}

/// Terminal value `price + Σ_k ξ_k ΔX_k` of the policy on every path.
pub fn portfolio_terminal(policy: &HedgePolicy, batch: &PathBatch) -> Result<Vec<f64>> {
    let pos = policy.positions(batch)?;
    let incs = increments(batch)?;
    Ok((0..batch.n_paths())
        .map(|i| policy.price + (0..policy.horizon()).map(|k| pos[[i, k]] * incs[[i, k, 0]]).sum::<f64>())
        .collect())
}

pub fn payoffs(claim: &ClaimSpec, batch: &PathBatch) -> Vec<f64> {
    (0..batch.n_paths()).map(|i| claim.payoff(batch.path(i))).collect()
}

#[inline]
fn squared_rectifier(x: f64) -> f64 {
    let r = x.max(0.0);
    r * r
}

pub fn loss_lambda(policy: &HedgePolicy, batch: &PathBatch, claim: &ClaimSpec) -> Result<f64> {
    if batch.n_paths() == 0 {
        return Err(Error::config("loss needs a non-empty batch"));
    }
    let values = portfolio_terminal(policy, batch)?;
    let h = payoffs(claim, batch);
    let penalty: f64 = h.iter().zip(&values).map(|(h, v)| squared_rectifier(h - v)).sum();
    Ok(policy.price * policy.price + policy.lambda * penalty / batch.n_paths() as f64)
}

/// Loss and its gradient: `(loss, d/d price, d/d params of each net)`.
pub fn loss_and_gradient(
    policy: &HedgePolicy,
    batch: &PathBatch,
    claim: &ClaimSpec,
) -> Result<(f64, f64, Vec<Vec<f64>>)> {
    policy.check_batch(batch)?;
    let n = batch.n_paths();
    let feats = policy.features.batch(batch);
    let incs = increments(batch)?;
    let h = payoffs(claim, batch);

    let mut raw_out = Vec::with_capacity(policy.horizon());
    let mut caches = Vec::with_capacity(policy.horizon());
    let mut values = vec![policy.price; n];
    for (k, net) in policy.nets.iter().enumerate() {
        let (raw, cache) = net.forward_batch(feats.slice(s![.., ..=k]))?;
        for i in 0..n {
            values[i] += policy.clamp(raw[[i, 0]]) * incs[[i, k, 0]];
        }
        raw_out.push(raw);
        caches.push(cache);
    }

    let weight = policy.lambda / n as f64;
    let mut loss = policy.price * policy.price;
    // dL/dV_j
    let mut dv = vec![0.0; n];
    for i in 0..n {
        let shortfall = (h[i] - values[i]).max(0.0);
        loss += weight * shortfall * shortfall;
        dv[i] = -2.0 * weight * shortfall;
    }
    let d_price = 2.0 * policy.price + dv.iter().sum::<f64>();

    let mut net_grads = Vec::with_capacity(policy.horizon());
    for (k, net) in policy.nets.iter().enumerate() {
        let raw = &raw_out[k];
        let upstream = Array2::from_shape_fn((n, 1), |(i, _)| {
            let slope = match policy.truncation {
                Some(c) => truncate_derivative(raw[[i, 0]], c),
                None => 1.0,
            };
            dv[i] * incs[[i, k, 0]] * slope
        });
        net_grads.push(net.backward_batch(&caches[k], upstream.view())?);
    }
    Ok((loss, d_price, net_grads))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Size of the notional sample pool; with `train_fraction` it fixes the
    /// number of iterations per epoch and the size of the test set.
    pub n_samples: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    /// Learning rate for the final `final_phase` share of iterations.
    #[serde(default)]
    pub lr_final: Option<f64>,
    #[serde(default = "default_final_phase")]
    pub final_phase: f64,
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.7
}

fn default_final_phase() -> f64 {
    0.2
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_samples: 200_000,
            batch_size: 512,
            epochs: 16,
            lr: 1e-3,
            lr_final: Some(1e-4),
            final_phase: default_final_phase(),
            seed: 0,
            train_fraction: default_train_fraction(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.batch_size > self.n_samples {
            return Err(Error::config(format!(
                "batch size must lie in 1..={}, got {}",
                self.n_samples, self.batch_size
            )));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config(format!("train fraction must lie in (0, 1), got {}", self.train_fraction)));
        }
        if !(self.lr > 0.0) || self.lr_final.is_some_and(|l| !(l > 0.0)) {
            return Err(Error::config("learning rates must be positive"));
        }
        if !(0.0..=1.0).contains(&self.final_phase) {
            return Err(Error::config("final_phase must lie in [0, 1]"));
        }
        if self.n_test() == 0 {
            return Err(Error::config("the test split is empty"));
        }
        Ok(())
    }

    pub fn n_train(&self) -> usize {
        (self.n_samples as f64 * self.train_fraction).round() as usize
    }

    pub fn n_test(&self) -> usize {
        self.n_samples - self.n_train()
    }

    pub fn iterations(&self) -> usize {
        self.epochs * self.n_train().div_ceil(self.batch_size)
    }

    /// Learning rate at iteration `i`.
    pub fn lr_at(&self, i: usize) -> f64 {
        match self.lr_final {
            Some(lr) if (i as f64) >= (1.0 - self.final_phase) * self.iterations() as f64 => lr,
            _ => self.lr,
        }
    }

    /// Seed of the fresh batch drawn at iteration `i`.
    pub fn batch_seed(&self, i: usize) -> u64 {
        derive_seed(self.seed, i as u64 + 1)
    }

    pub fn test_seed(&self) -> u64 {
        derive_seed(self.seed, TEST_POOL_LABEL)
    }
}

/// Test-set performance of a policy.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub lambda: f64,
    pub price: f64,
    /// Fraction of test paths with `V_T >= H`.
    pub alpha_hat: f64,
    /// `V_T - H` on every test path.
    pub loss_samples: Vec<f64>,
    pub n_test: usize,
    pub seed: u64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "lambda,price,alpha_hat,n_test,seed";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.lambda, self.price, self.alpha_hat, self.n_test, self.seed)
    }
}

pub fn evaluate(policy: &HedgePolicy, batch: &PathBatch, claim: &ClaimSpec, seed: u64) -> Result<EvalReport> {
    let values = portfolio_terminal(policy, batch)?;
    let loss_samples: Vec<f64> = values.iter().zip(payoffs(claim, batch)).map(|(v, h)| v - h).collect();
    let hits = loss_samples.iter().filter(|&&x| x >= 0.0).count();
    Ok(EvalReport {
        lambda: policy.lambda,
        price: policy.price,
        alpha_hat: hits as f64 / loss_samples.len() as f64,
        loss_samples,
        n_test: batch.n_paths(),
        seed,
    })
}

/// One Adam optimiser per trainable group: the price, then each network.
struct Optimisers {
    price: Adam,
    nets: Vec<Adam>,
}

impl Optimisers {
    fn new(policy: &HedgePolicy, lr: f64) -> Self {
        Optimisers {
            price: Adam::new(1, lr),
            nets: policy.nets.iter().map(|n| Adam::new(n.params().len(), lr)).collect(),
        }
    }

    fn set_lr(&mut self, lr: f64) {
        self.price.lr = lr;
        self.nets.iter_mut().for_each(|a| a.lr = lr);
    }
}

/// Train a policy by minibatch Adam on fresh batches and report on the
/// held-out test paths.
pub fn train_t0(
    cfg: &MarketModelConfig,
    claim: &ClaimSpec,
    policy_init: HedgePolicy,
    train_cfg: &TrainConfig,
) -> Result<(HedgePolicy, EvalReport)> {
    cfg.validate()?;
    claim.validate()?;
    train_cfg.validate()?;
    policy_init.validate()?;
    if cfg.horizon != policy_init.horizon() {
        return Err(Error::Shape { expected: cfg.horizon, got: policy_init.horizon() });
    }
    let mut policy = policy_init;
    let mut opt = Optimisers::new(&policy, train_cfg.lr);
    for it in 0..train_cfg.iterations() {
        opt.set_lr(train_cfg.lr_at(it));
        let batch = simulate(cfg, train_cfg.batch_size, train_cfg.batch_seed(it))?;
        let (loss, d_price, grads) = loss_and_gradient(&policy, &batch, claim)?;
        if !loss.is_finite() {
            return Err(Error::Training { iteration: it, loss });
        }
        let mut price = [policy.price];
        opt.price.step(&mut price, &[d_price]);
        policy.price = price[0];
        for ((net, adam), g) in policy.nets.iter_mut().zip(&mut opt.nets).zip(&grads) {
            adam.step(net.params_mut(), g);
        }
    }
    let test = simulate(cfg, train_cfg.n_test(), train_cfg.test_seed())?;
    let report = evaluate(&policy, &test, claim, train_cfg.seed)?;
    Ok((policy, report))
}

/// Independent training runs over a grid of penalty weights, sorted by `λ`.
///
/// Every run shares the training seed, so all weights see the same batches
/// and the same initial networks.
pub fn sweep_lambda(
    cfg: &MarketModelConfig,
    claim: &ClaimSpec,
    lambdas: &[f64],
    policy_cfg: &PolicyConfig,
    train_cfg: &TrainConfig,
) -> Result<Vec<(HedgePolicy, EvalReport)>> {
    let mut grid = lambdas.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&lambda| {
            let init = policy_cfg.build(cfg, claim, lambda, train_cfg.seed)?;
            train_t0(cfg, claim, init, train_cfg)
        })
        .collect()
}

/// Binary policy checkpoint, little-endian, in the framing of
/// [`crate::nn::checkpoint`]:
///
/// ```text
/// "SHPL" u32 version
/// f64 price, f64 lambda
/// u32 has_truncation, f64 truncation (0 when absent)
/// f64 feature reference, f64 feature scale
/// u32 number of networks T, then T network records ("SHNN" ...)
/// ```
pub const POLICY_MAGIC: &[u8; 4] = b"SHPL";

impl HedgePolicy {
    pub fn write_checkpoint(&self, w: &mut impl std::io::Write) -> Result<()> {
        w.write_all(POLICY_MAGIC)?;
        write_u32(w, FORMAT_VERSION)?;
        write_f64(w, self.price)?;
        write_f64(w, self.lambda)?;
        write_u32(w, self.truncation.is_some() as u32)?;
        write_f64(w, self.truncation.unwrap_or(0.0))?;
        write_f64(w, self.features.reference)?;
        write_f64(w, self.features.scale)?;
        write_u32(w, self.nets.len() as u32)?;
        self.nets.iter().try_for_each(|n| write_network(w, n))
    }

    pub fn read_checkpoint(r: &mut impl std::io::Read) -> Result<Self> {
        expect_magic(r, POLICY_MAGIC)?;
        let price = read_f64(r)?;
        let lambda = read_f64(r)?;
        let has_trunc = read_u32(r)?;
        let c = read_f64(r)?;
        let features = FeatureMap { reference: read_f64(r)?, scale: read_f64(r)? };
        let n = read_u32(r)?;
        let nets = (0..n).map(|_| read_network(r)).collect::<Result<Vec<_>>>()?;
        let policy = HedgePolicy { price, nets, truncation: (has_trunc != 0).then_some(c), lambda, features };
        policy.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(policy)
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

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_policy(horizon: usize, lambda: f64, price: f64) -> HedgePolicy {
        let mut p = HedgePolicy::new(
            horizon,
            &[4],
            Activation::Tanh,
            FeatureMap { reference: 100.0, scale: 10.0 },
            lambda,
            None,
            price,
            1,
        )
        .unwrap();
        p.nets.iter_mut().for_each(|n| n.params_mut().fill(0.0));
        p
    }

    /// Force network `k` to output the constant `c`.
    fn set_constant(policy: &mut HedgePolicy, k: usize, c: f64) {
        let net = &mut policy.nets[k];
        net.params_mut().fill(0.0);
        let last = net.n_layers() - 1;
        net.bias_mut(last)[0] = c;
    }

    #[test]
    fn zero_strategy_keeps_capital() {
        let policy = zero_policy(3, 1.0, 1.7);
        let batch = PathBatch::from_paths(&[vec![100.0, 101.0, 99.0, 98.0], vec![100.0, 90.0, 95.0, 120.0]]).unwrap();
        assert_eq!(portfolio_terminal(&policy, &batch).unwrap(), vec![1.7, 1.7]);
    }

    #[test]
    fn constant_position_arithmetic() {
        let mut policy = zero_policy(1, 1.0, 0.0);
        set_constant(&mut policy, 0, 0.5);
        let batch = PathBatch::from_paths(&[vec![100.0, 101.0]]).unwrap();
        assert_eq!(portfolio_terminal(&policy, &batch).unwrap(), vec![0.5]);
        policy.truncation = Some(0.1);
        let v = portfolio_terminal(&policy, &batch).unwrap()[0];
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn horizon_mismatch() {
        let policy = zero_policy(2, 1.0, 0.0);
        let batch = PathBatch::from_paths(&[vec![100.0, 101.0]]).unwrap();
        assert!(matches!(portfolio_terminal(&policy, &batch), Err(Error::Shape { .. })));
    }

    #[test]
    fn loss_examples() {
        // perfect superhedge: only the price term remains
        let policy = zero_policy(1, 10.0, 3.0);
        let batch = PathBatch::from_paths(&[vec![100.0, 102.0]]).unwrap();
        let claim = ClaimSpec::call(100.0);
        assert_eq!(loss_lambda(&policy, &batch, &claim).unwrap(), 9.0);
        // shortfall of 2 with price 1 and λ = 10
        let policy = zero_policy(1, 10.0, 1.0);
        let batch = PathBatch::from_paths(&[vec![100.0, 103.0]]).unwrap();
        assert_eq!(loss_lambda(&policy, &batch, &claim).unwrap(), 41.0);
    }

    #[test]
    fn loss_monotone_in_shortfall() {
        let claim = ClaimSpec::call(100.0);
        let policy = zero_policy(1, 5.0, 1.0);
        let mut last = f64::INFINITY;
        for xt in [110.0, 108.0, 105.0, 102.0, 101.0, 100.0] {
            let batch = PathBatch::from_paths(&[vec![100.0, xt], vec![100.0, 104.0]]).unwrap();
            let l = loss_lambda(&policy, &batch, &claim).unwrap();
            assert!(l <= last);
            last = l;
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cfg = MarketModelConfig::trinomial(100.0, 3, -0.01, 0.0, 0.01);
        let claim = ClaimSpec::call(100.0);
        let mut policy = HedgePolicy::new(3, &[5], Activation::Swish, FeatureMap::for_market(&cfg), 50.0, None, 0.2, 3)
            .unwrap();
        policy.price = 0.2;
        let batch = simulate(&cfg, 64, 5).unwrap();
        let (_, d_price, grads) = loss_and_gradient(&policy, &batch, &claim).unwrap();
        let h = 1e-6;
        let f = |p: &HedgePolicy| loss_lambda(p, &batch, &claim).unwrap();
        let mut up = policy.clone();
        up.price += h;
        let mut dn = policy.clone();
        dn.price -= h;
        assert!(((f(&up) - f(&dn)) / (2.0 * h) - d_price).abs() < 1e-5 * (1.0 + d_price.abs()));
        for k in 0..3 {
            for j in (0..policy.nets[k].params().len()).step_by(3) {
                let mut up = policy.clone();
                up.nets[k].params_mut()[j] += h;
                let mut dn = policy.clone();
                dn.nets[k].params_mut()[j] -= h;
                let fd = (f(&up) - f(&dn)) / (2.0 * h);
                let g = grads[k][j];
                assert!((fd - g).abs() < 1e-5 * (1.0 + g.abs()), "net {k} param {j}: fd {fd} vs {g}");
            }
        }
    }

    #[test]
    fn alpha_hat_matches_nonnegative_samples() {
        let cfg = MarketModelConfig::trinomial(100.0, 4, -0.01, 0.0, 0.01);
        let policy = HedgePolicy::new(4, &[6], Activation::Swish, FeatureMap::for_market(&cfg), 10.0, None, 0.8, 2)
            .unwrap();
        let batch = simulate(&cfg, 500, 3).unwrap();
        let r = evaluate(&policy, &batch, &ClaimSpec::call(100.0), 0).unwrap();
        let frac = r.loss_samples.iter().filter(|&&x| x >= 0.0).count() as f64 / 500.0;
        assert_eq!(r.alpha_hat, frac);
        assert!((0.0..=1.0).contains(&r.alpha_hat));
    }

    #[test]
    fn train_config_validation() {
        let mut t = TrainConfig { n_samples: 100, batch_size: 200, epochs: 10, ..TrainConfig::default() };
        assert!(t.validate().is_err());
        t.batch_size = 10;
        t.train_fraction = 1.0;
        assert!(t.validate().is_err());
        t.train_fraction = 0.7;
        assert!(t.validate().is_ok());
        assert_eq!(t.n_train(), 70);
        assert_eq!(t.n_test(), 30);
        assert_eq!(t.iterations(), 10 * 7);
    }

    #[test]
    fn non_positive_lambda_rejected() {
        assert!(HedgePolicy::new(2, &[3], Activation::Tanh, FeatureMap { reference: 1.0, scale: 1.0 }, 0.0, None, 0.0, 0)
            .is_err());
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut p = zero_policy(3, 250.0, 1.25);
        p.truncation = Some(4.0);
        p.nets[1].params_mut()[0] = -0.75;
        let mut buf = Vec::new();
        p.write_checkpoint(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"SHPL");
        assert_eq!(HedgePolicy::read_checkpoint(&mut buf.as_slice()).unwrap(), p);
        buf[0] = b'X';
        assert!(HedgePolicy::read_checkpoint(&mut buf.as_slice()).is_err());
    }
}
