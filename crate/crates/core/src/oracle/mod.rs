//! Exact superhedging and quantile-hedging prices on finite trinomial trees.

mod lp;
mod quantile;
mod tree;

pub use lp::{one_step_superhedge, NodeLPResult};
pub use quantile::{quantile_curve, quantile_price_bruteforce, QuantileCurve, BRUTE_FORCE_MAX_HORIZON};
pub use tree::{
    martingale_vertices, sup_martingale_expectation, sup_martingale_expectation_capped,
    superhedge_price_full_tree, superhedge_price_lattice, superhedge_price_tree, NodeValue,
    SuperhedgeSolution, TreeLayout,
};
