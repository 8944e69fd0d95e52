//! Minimal SVG charts. Output depends only on the data, so identical inputs
//! give byte-identical files.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_BINS: usize = 200;
/// Price-process charts draw at most this many paths.
pub const MAX_PATHS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    LossHistogram,
    PriceProcess,
    LambdaCurves,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlotData {
    /// Samples of `V_T - H`.
    Samples(Vec<f64>),
    /// One price trajectory per entry.
    Paths(Vec<Vec<f64>>),
    /// Price and success ratio against the penalty weight.
    Lambda { lambdas: Vec<f64>, prices: Vec<f64>, alphas: Vec<f64> },
}

pub fn plot(kind: PlotKind, data: &PlotData) -> Result<String> {
    match (kind, data) {
        (PlotKind::LossHistogram, PlotData::Samples(s)) => histogram(s, "terminal hedging error V_T - H"),
        (PlotKind::PriceProcess, PlotData::Paths(p)) => paths(p, "price process U_t"),
        (PlotKind::LambdaCurves, PlotData::Lambda { lambdas, prices, alphas }) => lambda_curves(lambdas, prices, alphas),
        _ => Err(Error::config(format!("plot {kind:?} does not accept this data"))),
    }
}

/// Freedman-Diaconis bin count, clamped to `[1, MAX_BINS]`; falls back to
/// Sturges' rule when the interquartile range vanishes.
pub fn bin_count(samples: &[f64]) -> usize {
    let mut s: Vec<f64> = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let (lo, hi) = (s[0], s[n - 1]);
    if hi <= lo {
        return 1;
    }
    let q = |p: f64| s[((n - 1) as f64 * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let bins = if iqr > 0.0 {
        let h = 2.0 * iqr / (n as f64).cbrt();
        ((hi - lo) / h).ceil() as usize
    } else {
        (n as f64).log2().ceil() as usize + 1
    };
    bins.clamp(1, MAX_BINS)
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Domain("nothing to plot: empty data".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("cannot plot non-finite values".into()));
    }
    Ok(())
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
        Frame { x: pad(x), y: pad(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(out, r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 15.0, tick(xv));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 5.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    super::table::sig6((v * 1e4).round() / 1e4)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(out: &mut String, f: &Frame, xs: &[f64], ys: &[f64], colour: &str) {
    let pts: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1"/>"#, pts.join(" "));
}

fn histogram(samples: &[f64], title: &str) -> Result<String> {
    check_finite(samples)?;
    let bins = bin_count(samples);
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let k = (((s - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let top = *counts.iter().max().expect("bins") as f64;
    let f = Frame::new((lo, lo + width * bins as f64), (0.0, top));
    let mut out = String::new();
    header(&mut out, title);
    for (k, &c) in counts.iter().enumerate() {
        let (xa, xb) = (f.px(lo + k as f64 * width), f.px(lo + (k + 1) as f64 * width));
        let (ya, yb) = (f.py(c as f64), f.py(0.0));
        let _ = writeln!(
            out,
            r#"<rect x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="steelblue" stroke="white" stroke-width="0.5"/>"#,
            xb - xa,
            yb - ya
        );
    }
    axes(&mut out, &f, "V_T - H", "count");
    out.push_str("</svg>\n");
    Ok(out)
}

fn paths(paths: &[Vec<f64>], title: &str) -> Result<String> {
    if paths.is_empty() {
        return Err(Error::Domain("nothing to plot: no paths".into()));
    }
    // evenly spaced subset, always including the first path
    let stride = paths.len().div_ceil(MAX_PATHS);
    let chosen: Vec<&Vec<f64>> = paths.iter().step_by(stride).collect();
    for p in &chosen {
        check_finite(p)?;
    }
    let len = chosen.iter().map(|p| p.len()).max().expect("non-empty");
    let lo = chosen.iter().flat_map(|p| p.iter()).copied().fold(f64::INFINITY, f64::min);
    let hi = chosen.iter().flat_map(|p| p.iter()).copied().fold(f64::NEG_INFINITY, f64::max);
    let f = Frame::new((0.0, (len - 1) as f64), (lo, hi));
    let mut out = String::new();
    header(&mut out, title);
    for p in chosen {
        let xs: Vec<f64> = (0..p.len()).map(|t| t as f64).collect();
        polyline(&mut out, &f, &xs, p, "steelblue");
    }
    axes(&mut out, &f, "t", "value");
    out.push_str("</svg>\n");
    Ok(out)
}

fn lambda_curves(lambdas: &[f64], prices: &[f64], alphas: &[f64]) -> Result<String> {
    check_finite(lambdas)?;
    check_finite(prices)?;
    check_finite(alphas)?;
    if prices.len() != lambdas.len() || alphas.len() != lambdas.len() {
        return Err(Error::Shape { expected: lambdas.len(), got: prices.len().min(alphas.len()) });
    }
    if lambdas.iter().any(|&l| l <= 0.0) {
        return Err(Error::Domain("lambda axis is logarithmic; values must be positive".into()));
    }
    let mut idx: Vec<usize> = (0..lambdas.len()).collect();
    idx.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
    let xs: Vec<f64> = idx.iter().map(|&i| lambdas[i].log10()).collect();
    let p: Vec<f64> = idx.iter().map(|&i| prices[i]).collect();
    let a: Vec<f64> = idx.iter().map(|&i| alphas[i]).collect();
    let xr = (xs[0], xs[xs.len() - 1]);
    let pmax = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pmin = p.iter().copied().fold(f64::INFINITY, f64::min);

    let mut out = String::new();
    header(&mut out, "price and success ratio against lambda");
    // price on the left axis, alpha rescaled onto the same frame
    let f = Frame::new(xr, (pmin.min(0.0), pmax));
    let a_scaled: Vec<f64> = a.iter().map(|v| f.y.0 + v * (f.y.1 - f.y.0)).collect();
    polyline(&mut out, &f, &xs, &p, "steelblue");
    polyline(&mut out, &f, &xs, &a_scaled, "darkorange");
    for (x, (y1, y2)) in xs.iter().zip(p.iter().zip(&a_scaled)) {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, f.px(*x), f.py(*y1));
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="darkorange"/>"#, f.px(*x), f.py(*y2));
    }
    axes(&mut out, &f, "log10 lambda", "price");
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" fill="steelblue">price</text>"#, LEFT + 10.0, TOP + 12.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" fill="darkorange">alpha (0 to 1, full height)</text>"#,
        LEFT + 10.0,
        TOP + 26.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}
