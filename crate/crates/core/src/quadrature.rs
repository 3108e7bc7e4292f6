//! Adaptive Gauss–Kronrod quadrature and improper integrals with divergence
//! detection.
//!
//! Improper endpoints (`0` or `∞`) are integrated shell by shell over
//! geometrically shrinking (or growing) cutoffs. The log of each shell's mass
//! is regressed against the log of its distance toward the endpoint; a
//! fitted slope at or above [`DIVERGENCE_SLOPE`] declares the integral
//! infinite. Otherwise the tail beyond the last shell is added as a
//! geometric remainder, which is exact for power-law integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Shell slope (per unit of `ln cutoff`, measured toward the endpoint) at or
/// above which an improper integral is declared divergent.
pub const DIVERGENCE_SLOPE: f64 = -0.01;

const SHELL_RATIO: f64 = 10.0;
const MIN_SHELLS: usize = 8;
const MAX_SHELLS: usize = 40;
const FIT_WINDOW: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-300, max_evals: 1_000_000 }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Endpoint of an improper integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "inf")]
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Improper {
    /// `f64::INFINITY` when divergent.
    pub value: f64,
    pub error: f64,
    pub divergent_at: Option<Endpoint>,
    /// Fitted shell slope at each improper endpoint that was examined.
    pub slope_zero: Option<f64>,
    pub slope_inf: Option<f64>,
    pub evals: usize,
}

impl Improper {
    pub fn is_finite(&self) -> bool {
        self.divergent_at.is_none()
    }

    fn zero() -> Self {
        Self {
            value: 0.0,
            error: 0.0,
            divergent_at: None,
            slope_zero: None,
            slope_inf: None,
            evals: 0,
        }
    }
}

// 15-point Kronrod nodes (positive half) with 7-point Gauss embedded.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let val = resk * h;
    let err = ((resk - resg) * h).abs();
    (val, err)
}

struct Segment {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive G7-K15 on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, evals: 0, converged: true };
    }
    if a > b {
        let r = integrate(f, b, a, opts);
        return QuadResult { value: -r.value, ..r };
    }
    let (v, e) = gk15(&f, a, b);
    let mut evals = 15;
    let mut total = v;
    let mut total_err = e;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, val: v, err: e });
    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if evals + 30 > opts.max_evals {
            return QuadResult { value: total, error: total_err, evals, converged: false };
        }
        let Some(seg) = heap.pop() else { break };
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a || m >= seg.b {
            // interval exhausted at machine precision
            heap.push(Segment { err: 0.0, ..seg });
            total_err = heap.iter().map(|s| s.err).sum();
            if total_err == 0.0 {
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(&f, seg.a, m);
        let (v2, e2) = gk15(&f, m, seg.b);
        evals += 30;
        total += v1 + v2 - seg.val;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: m, val: v1, err: e1 });
        heap.push(Segment { a: m, b: seg.b, val: v2, err: e2 });
        if total_err < 0.0 {
            total_err = heap.iter().map(|s| s.err).sum();
        }
    }
    // resum to shed accumulated rounding from the running updates
    let value = heap.iter().map(|s| s.val).sum();
    let error = heap.iter().map(|s| s.err).sum();
    QuadResult { value, error, evals, converged: true }
}

/// Finite interval split at the given interior breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> QuadResult {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut knots = Vec::with_capacity(pts.len() + 2);
    knots.push(a);
    knots.extend(pts);
    knots.push(b);
    let mut out = QuadResult { value: 0.0, error: 0.0, evals: 0, converged: true };
    for w in knots.windows(2) {
        let r = integrate(&f, w[0], w[1], opts);
        out.value += r.value;
        out.error += r.error;
        out.evals += r.evals;
        out.converged &= r.converged;
    }
    out
}

/// `∫_{c1}^{c2} f` computed in the log variable, which keeps power-law
/// integrands smooth across decades.
fn log_shell<F: Fn(f64) -> f64>(f: &F, c1: f64, c2: f64, breaks: &[f64], opts: &QuadOptions) -> QuadResult {
    let g = |y: f64| {
        let z = y.exp();
        let v = f(z) * z;
        if v.is_nan() { 0.0 } else { v }
    };
    let lb: Vec<f64> = breaks.iter().filter(|&&p| p > c1 && p < c2).map(|p| p.ln()).collect();
    integrate_with_breaks(g, c1.ln(), c2.ln(), &lb, opts)
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Integrate a non-negative `f` from `base` toward `endpoint` in shells.
fn toward_endpoint<F: Fn(f64) -> f64>(
    f: &F,
    base: f64,
    endpoint: Endpoint,
    breaks: &[f64],
    opts: &QuadOptions,
) -> (Improper, f64) {
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut zero_run = 0usize;
    let shell_opts = QuadOptions { rel_tol: opts.rel_tol.max(1e-12), ..*opts };
    // furthest breakpoint toward the endpoint; zero shells before it are not conclusive
    let last_break = match endpoint {
        Endpoint::Zero => breaks.iter().copied().filter(|&p| p > 0.0 && p < base).fold(f64::INFINITY, f64::min),
        Endpoint::Infinity => breaks.iter().copied().filter(|&p| p > base && p.is_finite()).fold(0.0, f64::max),
    };
    let mut last_slope = f64::NAN;
    for k in 0..MAX_SHELLS {
        let (c1, c2) = match endpoint {
            Endpoint::Zero => (base / SHELL_RATIO.powi(k as i32 + 1), base / SHELL_RATIO.powi(k as i32)),
            Endpoint::Infinity => (base * SHELL_RATIO.powi(k as i32), base * SHELL_RATIO.powi(k as i32 + 1)),
        };
        let r = log_shell(f, c1, c2, breaks, &shell_opts);
        evals += r.evals;
        if !r.value.is_finite() {
            let imp = Improper { value: f64::INFINITY, error: f64::INFINITY, divergent_at: Some(endpoint), slope_zero: None, slope_inf: None, evals };
            return (imp, f64::INFINITY);
        }
        sum += r.value;
        err += r.error;
        let passed_breaks = match endpoint {
            Endpoint::Zero => c1 <= last_break || last_break.is_infinite(),
            Endpoint::Infinity => c2 >= last_break,
        };
        if r.value <= 0.0 {
            zero_run += 1;
            if zero_run >= 3 && passed_breaks && k + 1 >= 3 {
                let imp = Improper { value: sum, error: err, divergent_at: None, slope_zero: None, slope_inf: None, evals };
                return (imp, f64::NEG_INFINITY);
            }
            continue;
        }
        zero_run = 0;
        xs.push((k as f64) * SHELL_RATIO.ln());
        ys.push(r.value.ln());
        if xs.len() > FIT_WINDOW {
            xs.remove(0);
            ys.remove(0);
        }
        if k + 1 < MIN_SHELLS || xs.len() < 3 || !passed_breaks {
            continue;
        }
        let slope = fit_slope(&xs, &ys);
        last_slope = slope;
        if slope >= DIVERGENCE_SLOPE {
            let imp = Improper { value: f64::INFINITY, error: f64::INFINITY, divergent_at: Some(endpoint), slope_zero: None, slope_inf: None, evals };
            return (imp, slope);
        }
        let rho = (slope * SHELL_RATIO.ln()).exp();
        let remainder = r.value * rho / (1.0 - rho);
        if remainder <= opts.rel_tol * sum.abs() {
            let imp = Improper { value: sum + remainder, error: err + remainder, divergent_at: None, slope_zero: None, slope_inf: None, evals };
            return (imp, slope);
        }
    }
    // out of shells: close with the fitted geometric tail
    let (value, extra) = if last_slope.is_nan() {
        (sum, 0.0)
    } else {
        let rho = (last_slope * SHELL_RATIO.ln()).exp();
        let last = ys.last().map(|y| y.exp()).unwrap_or(0.0);
        let rem = last * rho / (1.0 - rho);
        (sum + rem, rem)
    };
    let imp = Improper { value, error: err + extra * 1e-3, divergent_at: None, slope_zero: None, slope_inf: None, evals };
    (imp, last_slope)
}

/// `∫_lo^hi f` for non-negative `f`, with `lo ≥ 0` and `hi ≤ ∞`. An improper
/// endpoint (`lo = 0` or `hi = ∞`) is probed for divergence. `scale` is the
/// pivot used when both endpoints are improper.
pub fn integrate_positive<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    scale: f64,
    opts: &QuadOptions,
) -> Improper {
    assert!(lo >= 0.0 && hi >= lo, "bad interval [{lo}, {hi}]");
    if lo == hi {
        return Improper::zero();
    }
    let zero_end = lo == 0.0;
    let inf_end = hi.is_infinite();
    let finite_part = |a: f64, b: f64| -> Improper {
        let r = integrate_with_breaks(&f, a, b, breaks, opts);
        Improper { value: r.value, error: r.error, evals: r.evals, ..Improper::zero() }
    };
    match (zero_end, inf_end) {
        (false, false) => finite_part(lo, hi),
        (true, false) => {
            let (mut r, s) = toward_endpoint(&f, hi, Endpoint::Zero, breaks, opts);
            r.slope_zero = Some(s);
            r
        }
        (false, true) => {
            let (mut r, s) = toward_endpoint(&f, lo, Endpoint::Infinity, breaks, opts);
            r.slope_inf = Some(s);
            r
        }
        (true, true) => {
            let pivot = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
            let (r0, s0) = toward_endpoint(&f, pivot, Endpoint::Zero, breaks, opts);
            let (r1, s1) = toward_endpoint(&f, pivot, Endpoint::Infinity, breaks, opts);
            combine(r0, r1, Some(s0), Some(s1))
        }
    }
}

fn combine(a: Improper, b: Improper, s0: Option<f64>, s1: Option<f64>) -> Improper {
    let divergent_at = a.divergent_at.or(b.divergent_at);
    Improper {
        value: if divergent_at.is_some() { f64::INFINITY } else { a.value + b.value },
        error: a.error + b.error,
        divergent_at,
        slope_zero: s0,
        slope_inf: s1,
        evals: a.evals + b.evals,
    }
}

/// Sum two improper results (first divergence wins).
pub fn add(a: Improper, b: Improper) -> Improper {
    Improper {
        slope_zero: a.slope_zero.or(b.slope_zero),
        slope_inf: a.slope_inf.or(b.slope_inf),
        ..combine(a, b, None, None)
    }
}

impl Improper {
    pub fn finite(value: f64) -> Self {
        Self { value, ..Self::zero() }
    }

    pub fn divergent(at: Endpoint) -> Self {
        Self { value: f64::INFINITY, error: f64::INFINITY, divergent_at: Some(at), ..Self::zero() }
    }

    pub fn scaled(self, c: f64) -> Self {
        if c == 0.0 && self.divergent_at.is_none() {
            return Self { value: 0.0, error: 0.0, ..self };
        }
        Self { value: self.value * c, error: self.error * c.abs(), ..self }
    }
}
