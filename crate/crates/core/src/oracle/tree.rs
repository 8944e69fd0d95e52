//! Backward induction on trinomial trees.
//!
//! Two independent routes to the time-0 superhedging price:
//! [`superhedge_price_tree`] solves the primal one-period programs node by
//! node, [`sup_martingale_expectation`] maximises expected values over the
//! extreme points of the one-period martingale measures.

use rayon::prelude::*;

use super::lp::{one_step_superhedge, NodeLPResult};
use crate::claims::ClaimSpec;
use crate::error::{Error, Result};
use crate::market::{enumerate_trinomial_capped, tree_size, MarketModelConfig, DEFAULT_ENUMERATION_CAP};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeValue {
    pub price: f64,
    pub strategy: f64,
}

impl From<NodeLPResult> for NodeValue {
    fn from(r: NodeLPResult) -> Self {
        NodeValue { price: r.price, strategy: r.strategy }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeLayout {
    /// Nodes identified by the move counts `(n_d, n_u)`; `n_m = t - n_d - n_u`.
    Recombining,
    /// One node per move sequence, `3^t` nodes at level `t`.
    Full,
}

/// Superhedging prices and positions at every node of the tree.
#[derive(Clone, Debug)]
pub struct SuperhedgeSolution {
    pub price: f64,
    pub layout: TreeLayout,
    /// `levels[t][node]` for `t = 0..=T`; terminal nodes carry the claim
    /// value and a zero position.
    levels: Vec<Vec<NodeValue>>,
}

impl SuperhedgeSolution {
    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    fn node_index(&self, moves: &[u8]) -> usize {
        match self.layout {
            TreeLayout::Full => moves.iter().fold(0, |acc, &m| acc * 3 + m as usize),
            TreeLayout::Recombining => {
                let nd = moves.iter().filter(|&&m| m == 0).count();
                let nu = moves.iter().filter(|&&m| m == 2).count();
                lattice_index(moves.len(), nd, nu)
            }
        }
    }

    /// Node reached after `moves` (0 = down, 1 = middle, 2 = up).
    pub fn node(&self, moves: &[u8]) -> NodeValue {
        self.levels[moves.len()][self.node_index(moves)]
    }

    /// Position held over the period following `moves`.
    pub fn strategy(&self, moves: &[u8]) -> f64 {
        self.node(moves).strategy
    }

    pub fn level(&self, t: usize) -> &[NodeValue] {
        &self.levels[t]
    }
}

/// Position of `(n_d, n_u)` among the `(t + 1)(t + 2) / 2` lattice nodes at
/// level `t`, ordered by `n_d` then `n_u`.
fn lattice_index(t: usize, nd: usize, nu: usize) -> usize {
    // nodes with fewer down moves come first: sum_{k < nd} (t - k + 1)
    nd * (t + 1) - nd * (nd.saturating_sub(1)) / 2 + nu
}

fn lattice_nodes(t: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=t).flat_map(move |nd| (0..=t - nd).map(move |nu| (nd, nu)))
}

/// Time-0 superhedging price and strategy on a trinomial tree.
///
/// Terminal-value claims use the recombining lattice; path-dependent claims
/// use the full tree, subject to the default enumeration cap.
pub fn superhedge_price_tree(cfg: &MarketModelConfig, claim: &ClaimSpec) -> Result<SuperhedgeSolution> {
    if claim.is_path_dependent() {
        superhedge_price_full_tree(cfg, claim, DEFAULT_ENUMERATION_CAP)
    } else {
        superhedge_price_lattice(cfg, claim)
    }
}

fn check_inputs(cfg: &MarketModelConfig, claim: &ClaimSpec) -> Result<[f64; 3]> {
    cfg.validate()?;
    claim.validate()?;
    cfg.trinomial_factors()
        .ok_or_else(|| Error::config("tree oracle needs a trinomial model"))
}

pub fn superhedge_price_lattice(cfg: &MarketModelConfig, claim: &ClaimSpec) -> Result<SuperhedgeSolution> {
    let factors = check_inputs(cfg, claim)?;
    if claim.is_path_dependent() {
        return Err(Error::config("a recombining lattice cannot price a path-dependent claim"));
    }
    let horizon = cfg.horizon;
    let spot = |t: usize, nd: usize, nu: usize| {
        cfg.x0
            * factors[0].powi(nd as i32)
            * factors[1].powi((t - nd - nu) as i32)
            * factors[2].powi(nu as i32)
    };

    let mut levels: Vec<Vec<NodeValue>> = vec![Vec::new(); horizon + 1];
    levels[horizon] = lattice_nodes(horizon)
        .map(|(nd, nu)| NodeValue {
            price: claim.payoff(&[spot(horizon, nd, nu)]),
            strategy: 0.0,
        })
        .collect();
    for t in (0..horizon).rev() {
        let next = &levels[t + 1];
        let nodes: Vec<(usize, usize)> = lattice_nodes(t).collect();
        let level = nodes
            .par_iter()
            .map(|&(nd, nu)| {
                let children = [
                    (spot(t + 1, nd + 1, nu), next[lattice_index(t + 1, nd + 1, nu)].price),
                    (spot(t + 1, nd, nu), next[lattice_index(t + 1, nd, nu)].price),
                    (spot(t + 1, nd, nu + 1), next[lattice_index(t + 1, nd, nu + 1)].price),
                ];
                one_step_superhedge(spot(t, nd, nu), &children).map(NodeValue::from)
            })
            .collect::<Result<Vec<_>>>()?;
        levels[t] = level;
    }
    Ok(SuperhedgeSolution { price: levels[0][0].price, layout: TreeLayout::Recombining, levels })
}

/// Full non-recombining tree; works for any claim.
pub fn superhedge_price_full_tree(
    cfg: &MarketModelConfig,
    claim: &ClaimSpec,
    cap: usize,
) -> Result<SuperhedgeSolution> {
    let factors = check_inputs(cfg, claim)?;
    let leaves = enumerate_trinomial_capped(cfg, cap)?;
    let horizon = cfg.horizon;

    let mut spots: Vec<Vec<f64>> = Vec::with_capacity(horizon + 1);
    spots.push(vec![cfg.x0]);
    for t in 0..horizon {
        let next = spots[t].iter().flat_map(|&x| factors.map(|f| x * f)).collect();
        spots.push(next);
    }

    let mut levels: Vec<Vec<NodeValue>> = vec![Vec::new(); horizon + 1];
    levels[horizon] = (0..leaves.n_paths())
        .map(|i| NodeValue { price: claim.payoff(leaves.path(i)), strategy: 0.0 })
        .collect();
    for t in (0..horizon).rev() {
        let next = &levels[t + 1];
        let next_spots = &spots[t + 1];
        let level = spots[t]
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let children = [0, 1, 2].map(|k| (next_spots[3 * i + k], next[3 * i + k].price));
                one_step_superhedge(x, &children).map(NodeValue::from)
            })
            .collect::<Result<Vec<_>>>()?;
        levels[t] = level;
    }
    Ok(SuperhedgeSolution { price: levels[0][0].price, layout: TreeLayout::Full, levels })
}

/// Extreme points of `{q >= 0, sum q = 1, sum q_i r_i = 0}` for one-period
/// relative moves `r_i`.
pub fn martingale_vertices(moves: &[f64]) -> Vec<Vec<f64>> {
    let n = moves.len();
    let mut out = Vec::new();
    for i in 0..n {
        if moves[i] == 0.0 {
            let mut q = vec![0.0; n];
            q[i] = 1.0;
            out.push(q);
        }
        for j in 0..n {
            if moves[i] < 0.0 && moves[j] > 0.0 {
                let span = moves[j] - moves[i];
                let mut q = vec![0.0; n];
                q[i] = moves[j] / span;
                q[j] = -moves[i] / span;
                out.push(q);
            }
        }
    }
    out
}

/// `sup E*[V]` over martingale measures on the full trinomial tree, by
/// backward induction over one-period measures. `claim_values` follow the
/// path order of [`enumerate_trinomial`](crate::market::enumerate_trinomial).
pub fn sup_martingale_expectation(cfg: &MarketModelConfig, claim_values: &[f64]) -> Result<f64> {
    sup_martingale_expectation_capped(cfg, claim_values, DEFAULT_ENUMERATION_CAP)
}

pub fn sup_martingale_expectation_capped(
    cfg: &MarketModelConfig,
    claim_values: &[f64],
    cap: usize,
) -> Result<f64> {
    cfg.validate()?;
    let factors = cfg
        .trinomial_factors()
        .ok_or_else(|| Error::config("martingale expectation needs a trinomial model"))?;
    let leaves = match tree_size(cfg.horizon) {
        Some(n) if n <= cap => n,
        _ => {
            return Err(Error::EnumerationCap(format!(
                "3^{} paths exceed the enumeration cap of {cap}",
                cfg.horizon
            )))
        }
    };
    if claim_values.len() != leaves {
        return Err(Error::Shape { expected: leaves, got: claim_values.len() });
    }
    // relative moves are the same at every node, so are the measures
    let vertices = martingale_vertices(&factors.map(|f| f - 1.0));
    let mut values = claim_values.to_vec();
    while values.len() > 1 {
        values = values
            .par_chunks(3)
            .map(|kids| {
                vertices
                    .iter()
                    .map(|q| q.iter().zip(kids).map(|(qi, vi)| qi * vi).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
    }
    Ok(values[0])
}
