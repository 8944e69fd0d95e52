//! One-period superhedging linear program.
//!
//! At a node with spot `x0` and successors `(x_i, h_i)` we look for the
//! cheapest `u` such that some position `xi` gives `u + xi (x_i - x0) >= h_i`
//! for every successor. The feasible region lives in two unknowns, so every
//! vertex is pinned by two active constraints (or by one constraint with a
//! zero price move). Enumerating those candidates and keeping the cheapest
//! feasible one is exact.

use crate::error::{Error, Result};

/// Solution of a one-period superhedging problem.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeLPResult {
    /// Cheapest superhedging capital at the node.
    pub price: f64,
    /// Position in the risky asset held over the period.
    pub strategy: f64,
    /// Indices of successors whose constraint holds with equality.
    pub binding: Vec<usize>,
}

fn tolerance(scale: f64) -> f64 {
    1e-11 * (1.0 + scale)
}

fn feasible(u: f64, xi: f64, moves: &[f64], claims: &[f64]) -> bool {
    moves
        .iter()
        .zip(claims)
        .all(|(&dx, &h)| u + xi * dx >= h - tolerance(h.abs() + u.abs() + (xi * dx).abs()))
}

/// Cheapest one-period superhedge of `children = [(x_i, h_i)]` from spot `x0`.
///
/// Among candidates with the same price the one with the smaller absolute
/// position wins.
pub fn one_step_superhedge(x0: f64, children: &[(f64, f64)]) -> Result<NodeLPResult> {
    if children.len() < 2 {
        return Err(Error::config(format!(
            "one-period problem needs at least two successors, got {}",
            children.len()
        )));
    }
    let lo = children.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let hi = children.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    for (i, a) in children.iter().enumerate() {
        if children[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::config(format!("successor prices must be distinct, {} repeats", a.0)));
        }
    }
    if !(lo <= x0 && x0 <= hi) {
        return Err(Error::Arbitrage { spot: x0, lo, hi });
    }

    let moves: Vec<f64> = children.iter().map(|c| c.0 - x0).collect();
    let claims: Vec<f64> = children.iter().map(|c| c.1).collect();
    let mut best: Option<(f64, f64)> = None;
    let mut offer = |u: f64, xi: f64| {
        if !u.is_finite() || !xi.is_finite() || !feasible(u, xi, &moves, &claims) {
            return;
        }
        best = match best {
            None => Some((u, xi)),
            Some((bu, bxi)) => {
                let tol = tolerance(bu.abs().max(u.abs()));
                if u < bu - tol || ((u - bu).abs() <= tol && xi.abs() < bxi.abs()) {
                    Some((u, xi))
                } else {
                    Some((bu, bxi))
                }
            }
        };
    };

    let n = children.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let xi = (claims[j] - claims[i]) / (moves[j] - moves[i]);
            offer(claims[i] - xi * moves[i], xi);
        }
    }
    // a successor at the spot binds alone; the position ranges over an
    // interval cut out by the others
    for i in (0..n).filter(|&i| moves[i] == 0.0) {
        let u = claims[i];
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in (0..n).filter(|&k| k != i) {
            let bound = (claims[k] - u) / moves[k];
            if moves[k] > 0.0 {
                lower = lower.max(bound);
            } else {
                upper = upper.min(bound);
            }
        }
        if lower <= upper {
            offer(u, 0.0f64.clamp(lower, upper));
        }
    }

    let (price, strategy) = best.ok_or(Error::Arbitrage { spot: x0, lo, hi })?;
    let binding = moves
        .iter()
        .zip(&claims)
        .enumerate()
        .filter(|(_, (&dx, &h))| {
            (price + strategy * dx - h).abs() <= tolerance(h.abs() + price.abs() + (strategy * dx).abs())
        })
        .map(|(i, _)| i)
        .collect();
    Ok(NodeLPResult { price, strategy, binding })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trinomial_call_node() {
        let r = one_step_superhedge(100.0, &[(99.0, 0.0), (100.0, 0.0), (101.0, 1.0)]).unwrap();
        assert!((r.price - 0.5).abs() < 1e-12);
        assert!((r.strategy - 0.5).abs() < 1e-12);
        assert_eq!(r.binding, vec![0, 2]);
    }

    #[test]
    fn constant_claim() {
        let r = one_step_superhedge(100.0, &[(99.0, 3.0), (100.0, 3.0), (101.0, 3.0)]).unwrap();
        assert!((r.price - 3.0).abs() < 1e-12);
        assert_eq!(r.strategy, 0.0);
    }

    #[test]
    fn binomial_put_like_node() {
        let r = one_step_superhedge(100.0, &[(99.0, 1.0), (101.0, 0.0)]).unwrap();
        assert!((r.price - 0.5).abs() < 1e-12);
        assert!((r.strategy + 0.5).abs() < 1e-12);
    }

    #[test]
    fn spot_outside_hull_is_arbitrage() {
        let err = one_step_superhedge(102.0, &[(99.0, 0.0), (101.0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Arbitrage { .. }));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(one_step_superhedge(100.0, &[(100.0, 1.0)]).is_err());
        assert!(one_step_superhedge(100.0, &[(99.0, 1.0), (99.0, 2.0)]).is_err());
    }

    #[test]
    fn spot_on_boundary_uses_single_constraint() {
        // spot equals the highest successor: selling arbitrarily much is free
        // on the down move, so only the flat successor binds
        let r = one_step_superhedge(101.0, &[(99.0, 5.0), (101.0, 1.0)]).unwrap();
        assert!((r.price - 1.0).abs() < 1e-12);
        assert!(r.strategy <= -2.0 + 1e-12);
    }

    #[test]
    fn middle_peak_binds_alone() {
        // concave payoff: the flat successor dominates
        let r = one_step_superhedge(100.0, &[(99.0, 0.0), (100.0, 2.0), (101.0, 0.0)]).unwrap();
        assert!((r.price - 2.0).abs() < 1e-12);
        assert_eq!(r.strategy, 0.0);
        assert_eq!(r.binding, vec![1]);
    }

    proptest! {
        #[test]
        fn solution_dominates_every_successor(
            h in proptest::collection::vec(0.0f64..5.0, 3),
            d in -0.2f64..-0.001, m in -0.0009f64..0.0009, u in 0.001f64..0.2,
        ) {
            let x0 = 100.0;
            let kids = [(x0 * (1.0 + d), h[0]), (x0 * (1.0 + m), h[1]), (x0 * (1.0 + u), h[2])];
            let r = one_step_superhedge(x0, &kids).unwrap();
            for (x, hv) in kids {
                prop_assert!(r.price + r.strategy * (x - x0) >= hv - 1e-10);
            }
        }

        #[test]
        fn redundant_successor_changes_nothing(
            hd in 0.0f64..5.0, hu in 0.0f64..5.0, w in 0.01f64..0.99, drop in 0.0f64..3.0,
        ) {
            let x0 = 100.0;
            let (xd, xu) = (95.0, 104.0);
            let base = one_step_superhedge(x0, &[(xd, hd), (xu, hu)]).unwrap();
            // a point on or below the chord between the two successors
            let x = w * xd + (1.0 - w) * xu;
            let h = w * hd + (1.0 - w) * hu - drop;
            let extended = one_step_superhedge(x0, &[(xd, hd), (x, h), (xu, hu)]).unwrap();
            prop_assert!((base.price - extended.price).abs() < 1e-9);
            prop_assert!((base.strategy - extended.strategy).abs() < 1e-9);
        }
    }
}
