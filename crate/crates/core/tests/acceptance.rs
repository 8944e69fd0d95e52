//! End-to-end acceptance checks. Runs sequentially (custom harness) so the
//! runtime bounds are measured without competing test threads, and prints
//! one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use superhedge::baseline::{barrier_superhedge_theoretical, bs_call_price, delta_hedge_simulate, BsParams};
use superhedge::claims::ClaimSpec;
use superhedge::consumption::{
    feasibility_from_prices, gains_minus_claim, price_process, train_consumption, ConsumptionConfig,
    FEASIBILITY_SLACK,
};
use superhedge::hedger::{payoffs, sweep_lambda, train_t0, PolicyConfig, TrainConfig};
use superhedge::market::{enumerate_trinomial, simulate, MarketModelConfig};
use superhedge::nn::{truncate, Activation, Adam, Network};
use superhedge::oracle::{quantile_curve, quantile_price_bruteforce, sup_martingale_expectation, superhedge_price_tree};
use superhedge::rng::Stream;

/// Weights of the trinomial penalty sweep.
const LAMBDAS: [f64; 8] = [10.0, 50.0, 100.0, 500.0, 1000.0, 2000.0, 4000.0, 10000.0];

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new(), notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        self.require(elapsed <= limit, format!("runtime {:.1}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()));
    }
}

fn criterion_1() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let sol = superhedge_price_tree(&MarketModelConfig::trinomial_benchmark(), &ClaimSpec::call(100.0)).unwrap();
    c.runtime(start.elapsed(), Duration::from_secs(5));
    c.require((sol.price - 2.17).abs() <= 0.005, format!("price {:.6} vs 2.17 ± 0.005", sol.price));
    c
}

fn criterion_2() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let mut rng = Stream::new(2024, 0);
    let mut worst: f64 = 0.0;
    for instance in 0..50 {
        let horizon = 1 + (rng.uniform() * 6.0) as usize;
        let d = -0.002 - 0.05 * rng.uniform();
        let u = 0.002 + 0.05 * rng.uniform();
        // every other instance keeps the middle move at zero
        let m = if instance % 2 == 0 { 0.0 } else { d + (u - d) * rng.uniform() };
        let cfg = MarketModelConfig::trinomial(100.0, horizon, d, m, u);
        let strike = 90.0 + 20.0 * rng.uniform();
        let barrier = strike.max(100.0) + 0.5 + 10.0 * rng.uniform();
        let paths = enumerate_trinomial(&cfg).unwrap();
        for claim in [ClaimSpec::call(strike), ClaimSpec::barrier_up_out(strike, barrier)] {
            let primal = superhedge_price_tree(&cfg, &claim).unwrap().price;
            let values = payoffs(&claim, &paths);
            let dual = sup_martingale_expectation(&cfg, &values).unwrap();
            let gap = (primal - dual).abs();
            worst = worst.max(gap);
            if gap > 1e-9 {
                c.failures.push(format!("instance {instance} {claim:?} T={horizon}: primal {primal} dual {dual}"));
            }
        }
    }
    c.runtime(start.elapsed(), Duration::from_secs(30));
    c.notes.push(format!("100 primal/dual pairs, max gap {worst:.2e}"));
    c
}

fn criterion_3() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let grid = [0.1, 0.2, 0.3, 1.0 / 3.0, 0.4, 0.5, 0.6, 2.0 / 3.0, 0.7, 0.8, 0.9, 1.0];
    for horizon in [1, 2] {
        let cfg = MarketModelConfig::trinomial(100.0, horizon, -0.01, 0.0, 0.01);
        let claim = ClaimSpec::call(100.0);
        let curve = quantile_curve(&cfg, &claim, &grid).unwrap();
        let monotone = curve.prices.windows(2).all(|w| w[0] <= w[1]);
        c.require(monotone, format!("T={horizon} curve nondecreasing"));
        let tree = superhedge_price_tree(&cfg, &claim).unwrap().price;
        let top = *curve.prices.last().unwrap();
        c.require((top - tree).abs() <= 1e-12, format!("T={horizon} α=1 price {top} vs superhedging price {tree}"));
        c.require(
            (curve.superhedge_price - tree).abs() <= 1e-12,
            format!("T={horizon} dual superhedging price {}", curve.superhedge_price),
        );
    }
    let t1 = MarketModelConfig::trinomial(100.0, 1, -0.01, 0.0, 0.01);
    let p06 = quantile_price_bruteforce(&t1, &ClaimSpec::call(100.0), 0.6).unwrap();
    let p10 = quantile_price_bruteforce(&t1, &ClaimSpec::call(100.0), 1.0).unwrap();
    c.require(p06.abs() <= 1e-12 && (p10 - 0.5).abs() <= 1e-12, format!("T=1: α=0.6 → {p06}, α=1 → {p10}"));
    c.runtime(start.elapsed(), Duration::from_secs(10));
    c
}

fn criterion_4() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let cfg = MarketModelConfig::trinomial_benchmark();
    let claim = ClaimSpec::call(100.0);
    let oracle = superhedge_price_tree(&cfg, &claim).unwrap().price;
    let results = sweep_lambda(&cfg, &claim, &LAMBDAS, &PolicyConfig::default(), &TrainConfig::default()).unwrap();
    c.runtime(start.elapsed(), Duration::from_secs(30 * 60));
    let reports: Vec<_> = results.iter().map(|(_, r)| r).collect();
    for r in &reports {
        println!("    lambda={:<6} price={:.4} alpha_hat={:.4}", r.lambda, r.price, r.alpha_hat);
    }
    for w in reports.windows(2) {
        c.require(
            w[1].alpha_hat >= w[0].alpha_hat - 0.03,
            format!("alpha λ={} → λ={}: {:.4} → {:.4} (tol 0.03)", w[0].lambda, w[1].lambda, w[0].alpha_hat, w[1].alpha_hat),
        );
        c.require(
            w[1].price >= w[0].price - 0.05,
            format!("price λ={} → λ={}: {:.4} → {:.4} (tol 0.05)", w[0].lambda, w[1].lambda, w[0].price, w[1].price),
        );
    }
    let top = reports.last().unwrap();
    c.require((1.90..=2.25).contains(&top.price), format!("λ=10000 price {:.4} in [1.90, 2.25]", top.price));
    c.require(top.alpha_hat >= 0.97, format!("λ=10000 alpha {:.4} ≥ 0.97", top.alpha_hat));
    let low = reports[0];
    c.require(
        (1.3..=1.9).contains(&low.price) && (0.05..=0.45).contains(&low.alpha_hat),
        format!("λ=10 price {:.4} in [1.3, 1.9], alpha {:.4} in [0.05, 0.45]", low.price, low.alpha_hat),
    );
    for r in &reports {
        c.require(r.price <= oracle + 0.15, format!("λ={} price {:.4} ≤ oracle {:.4} + 0.15", r.lambda, r.price, oracle));
    }
    let near = top.loss_samples.iter().filter(|&&g| g >= -0.05).count() as f64 / top.loss_samples.len() as f64;
    c.require(near >= 0.97, format!("λ=10000 share of G ≥ -0.05: {near:.4} ≥ 0.97"));
    c
}

fn criterion_5() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let call = bs_call_price(&BsParams::new(100.0, 100.0, 0.1, 30.0 / 250.0).unwrap());
    c.require((call - 1.38).abs() <= 0.005, format!("call price {call:.5} vs 1.38 ± 0.005"));
    let barrier = barrier_superhedge_theoretical(100.0, 100.0, 105.0).unwrap();
    c.require((barrier - 4.7619).abs() <= 1e-4, format!("barrier price {barrier:.6} vs 4.7619 ± 1e-4"));
    let cfg = MarketModelConfig::black_scholes(100.0, 30, 0.1, 0.0, 1.0 / 250.0);
    let r = delta_hedge_simulate(&cfg, &ClaimSpec::call(100.0), 300_000, 5369).unwrap();
    c.require((r.alpha_hat - 0.5369).abs() <= 0.03, format!("delta hedge alpha {:.4} vs 0.5369 ± 0.03", r.alpha_hat));
    c.require((r.initial_cost - call).abs() <= 1e-12, format!("delta hedge initial cost {:.6} equals call price", r.initial_cost));
    c.runtime(start.elapsed(), Duration::from_secs(120));
    c
}

fn criterion_6() -> Check {
    let mut c = Check::new();
    let cfg = MarketModelConfig::black_scholes(100.0, 30, 0.3, 0.0, 1.0 / 250.0);
    let claim = ClaimSpec::barrier_up_out(100.0, 105.0);
    // the capital starts near the mean payoff (about 0.12) and with λ this
    // large Adam lifts it by well under lr per step, so the climb needs many
    // more steps than the trinomial runs: smaller batches, more epochs, and
    // no low-rate tail
    let tc = TrainConfig { batch_size: 256, epochs: 30, lr_final: None, ..TrainConfig::default() };
    let init = PolicyConfig::default().build(&cfg, &claim, 1e7, tc.seed).unwrap();
    let (_, r) = train_t0(&cfg, &claim, init, &tc).unwrap();
    c.require((3.0..=4.9).contains(&r.price), format!("barrier price {:.4} in [3.0, 4.9] (alpha {:.4})", r.price, r.alpha_hat));
    c
}

fn criterion_7() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let cfg = MarketModelConfig::black_scholes(100.0, 10, 0.1, 0.0, 1.0 / 250.0);
    let claim = ClaimSpec::call(100.0);
    let tc = TrainConfig::default();
    let init = PolicyConfig::default().build(&cfg, &claim, 1024.0, tc.seed).unwrap();
    let (policy, base) = train_t0(&cfg, &claim, init, &tc).unwrap();
    let (nets, report) = train_consumption(&cfg, &claim, &policy, &ConsumptionConfig::with_beta(500.0), &tc).unwrap();
    c.runtime(start.elapsed(), Duration::from_secs(15 * 60));
    c.notes.push(format!("base policy price {:.4}, alpha {:.4}", base.price, base.alpha_hat));

    let test = simulate(&cfg, tc.n_test(), tc.test_seed()).unwrap();
    let pp = price_process(&policy, &nets, &test).unwrap();
    let g = gains_minus_claim(&policy, &test, &claim).unwrap();
    let h = payoffs(&claim, &test);
    let (mut start_zero, mut monotone, mut identity) = (true, true, 0.0f64);
    for i in 0..test.n_paths() {
        start_zero &= pp.b[[i, 0]] == 0.0;
        monotone &= (1..=10).all(|t| pp.b[[i, t]] >= pp.b[[i, t - 1]]);
        identity = identity.max(((pp.u[[i, 10]] - h[i]) - (g[i] - pp.b[[i, 10]])).abs());
    }
    c.require(start_zero, "B_0 = 0 on every path".into());
    c.require(monotone, "B nondecreasing on every path".into());
    c.require(identity <= 1e-9, format!("max |U_T - H - (G - B_T)| = {identity:.2e} ≤ 1e-9"));
    c.require(
        report.feasibility_rate >= 0.95,
        format!("feasibility P(B_T ≤ G + 0.01) = {:.4} ≥ 0.95", report.feasibility_rate),
    );
    let from_prices = feasibility_from_prices(&pp, &h, FEASIBILITY_SLACK);
    c.require(
        (from_prices - report.feasibility_rate).abs() <= 1e-9,
        format!("feasibility from U_T ≥ H - 0.01: {from_prices:.4}"),
    );
    c
}

fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn criterion_8() -> Check {
    let mut c = Check::new();
    let start = Instant::now();
    let mut rng = Stream::new(8, 0);
    let activations = [Activation::Tanh, Activation::Sigmoid, Activation::Swish];
    let mut worst: f64 = 0.0;
    for instance in 0..100 {
        let depth = 1 + (rng.uniform() * 3.0) as usize;
        let mut dims = vec![1 + (rng.uniform() * 5.0) as usize];
        for _ in 0..depth {
            dims.push(1 + (rng.uniform() * 6.0) as usize);
        }
        dims.push(1 + (rng.uniform() * 2.0) as usize);
        let act = activations[instance % 3];
        let mut net = Network::init_truncated_normal(&dims, act, instance as u64).unwrap();
        net.params_mut().iter_mut().for_each(|p| *p += 0.1 * rng.normal());
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.normal()).collect();
        let up: Vec<f64> = (0..*dims.last().unwrap()).map(|_| rng.normal()).collect();
        let grads = net.backward(&x, &up).unwrap();
        let objective = |n: &Network, x: &[f64]| n.forward(x).unwrap().iter().zip(&up).map(|(a, b)| a * b).sum::<f64>();
        for j in 0..net.params().len() {
            let fd = central_difference(
                |v| {
                    let mut n = net.clone();
                    n.params_mut()[j] = v;
                    objective(&n, &x)
                },
                net.params()[j],
                1e-5,
            );
            worst = worst.max(relative_error(grads.params[j], fd));
        }
        for j in 0..x.len() {
            let fd = central_difference(
                |v| {
                    let mut y = x.clone();
                    y[j] = v;
                    objective(&net, &y)
                },
                x[j],
                1e-5,
            );
            worst = worst.max(relative_error(grads.input[j], fd));
        }
    }
    c.require(worst < 1e-5, format!("100 random nets, max gradient relative error {worst:.2e} < 1e-5"));

    let mut adam = Adam::new(1, 1e-3);
    let mut theta = [0.0];
    adam.step(&mut theta, &[1.0]);
    let expected = -1e-3 / (1.0 + 1e-8);
    c.require((theta[0] - expected).abs() <= 1e-9, format!("Adam first step {:.12} vs {expected:.12}", theta[0]));

    let mut clamp_ok = true;
    for _ in 0..1000 {
        let bound = 0.01 + 10.0 * rng.uniform();
        let y: Vec<f64> = (0..8).map(|_| 20.0 * rng.normal()).collect();
        let once = truncate(&y, bound);
        clamp_ok &= once.iter().all(|v| v.abs() <= bound) && truncate(&once, bound) == once;
        clamp_ok &= y.iter().zip(&once).all(|(a, b)| a.abs() > bound || a == b);
    }
    c.require(clamp_ok, "truncation bounded, idempotent and identity inside the bound".into());
    c.runtime(start.elapsed(), Duration::from_secs(60));
    c
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as --nocapture; a name filter
    // selects criteria by number
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Check); 8] = [
        (1, "oracle exactness", criterion_1),
        (2, "primal/dual agreement", criterion_2),
        (3, "quantile curve", criterion_3),
        (4, "lambda sweep shape", criterion_4),
        (5, "Black-Scholes references", criterion_5),
        (6, "barrier training bracket", criterion_6),
        (7, "consumption invariants", criterion_7),
        (8, "numerical kernels", criterion_8),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let check = run();
        let secs = start.elapsed().as_secs_f64();
        let status = if check.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("[{status}] criterion {id}: {name} ({secs:.1}s)");
        for f in &check.failures {
            println!("    failed: {f}");
        }
        for n in &check.notes {
            println!("    ok: {n}");
        }
        failed += usize::from(!check.failures.is_empty());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
