//! Trawl functions `ψ`: non-increasing, continuous, integrable, `ψ(0) < ∞`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TrawlFunctionSpec {
    /// `ψ(v) = e^{-rate·v}`.
    Exponential { rate: f64 },
    /// `ψ(v) = (1 + v/tau)^{-h}`, `h > 1`.
    Power { tau: f64, h: f64 },
    /// Piecewise-linear through `points = [[v, ψ(v)], ...]`, starting at
    /// `v = 0` and ending at `ψ = 0`.
    Table {
        #[serde(default)]
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrawlFunction {
    Exponential { rate: f64 },
    Power { tau: f64, h: f64 },
    Table { v: Vec<f64>, psi: Vec<f64>, cum: Vec<f64> },
}

impl TrawlFunctionSpec {
    pub fn build(&self) -> Result<TrawlFunction> {
        match self {
            TrawlFunctionSpec::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::invalid("kernel.psi.rate", "must be positive and finite"));
                }
                Ok(TrawlFunction::Exponential { rate: *rate })
            }
            TrawlFunctionSpec::Power { tau, h } => {
                if !(tau.is_finite() && *tau > 0.0) {
                    return Err(Error::invalid("kernel.psi.tau", "must be positive and finite"));
                }
                if !(h.is_finite() && *h > 1.0) {
                    return Err(Error::invalid("kernel.psi.h", "must exceed 1 for an integrable trawl function"));
                }
                Ok(TrawlFunction::Power { tau: *tau, h: *h })
            }
            TrawlFunctionSpec::Table { points, path } => {
                if points.is_empty() {
                    let why = match path {
                        Some(p) => format!("table file {p:?} was not loaded"),
                        None => "either `points` or `path` is required".into(),
                    };
                    return Err(Error::invalid("kernel.psi.points", why));
                }
                TrawlFunction::table(points)
            }
        }
    }
}

impl TrawlFunction {
    pub fn table(points: &[[f64; 2]]) -> Result<Self> {
        let key = "kernel.psi.points";
        if points.len() < 2 {
            return Err(Error::invalid(key, "a trawl table needs at least two rows"));
        }
        if points[0][0] != 0.0 {
            return Err(Error::invalid(key, "the first row must be at v = 0"));
        }
        if !(points[0][1].is_finite() && points[0][1] > 0.0) {
            return Err(Error::invalid(key, "ψ(0) must be positive and finite"));
        }
        if points[points.len() - 1][1] != 0.0 {
            return Err(Error::invalid(key, "the last row must have ψ = 0"));
        }
        let mut v = Vec::with_capacity(points.len());
        let mut psi = Vec::with_capacity(points.len());
        for (i, &[vi, pi]) in points.iter().enumerate() {
            if !vi.is_finite() || !pi.is_finite() || pi < 0.0 {
                return Err(Error::invalid(key, format!("row {i}: values must be finite with ψ >= 0")));
            }
            if i > 0 && vi <= v[i - 1] {
                return Err(Error::invalid(key, format!("row {i}: v must be strictly increasing")));
            }
            if i > 0 && pi > psi[i - 1] {
                return Err(Error::invalid(key, format!("row {i}: ψ must be non-increasing")));
            }
            v.push(vi);
            psi.push(pi);
        }
        let mut cum = vec![0.0];
        for i in 0..v.len() - 1 {
            let area = 0.5 * (psi[i] + psi[i + 1]) * (v[i + 1] - v[i]);
            cum.push(cum[i] + area);
        }
        Ok(TrawlFunction::Table { v, psi, cum })
    }

    pub fn psi(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        match self {
            TrawlFunction::Exponential { rate } => (-rate * v).exp(),
            TrawlFunction::Power { tau, h } => (1.0 + v / tau).powf(-h),
            TrawlFunction::Table { v: vs, psi, .. } => {
                let n = vs.len();
                if v >= vs[n - 1] {
                    return 0.0;
                }
                let i = vs.partition_point(|&k| k <= v) - 1;
                let w = (v - vs[i]) / (vs[i + 1] - vs[i]);
                psi[i] + w * (psi[i + 1] - psi[i])
            }
        }
    }

    pub fn psi0(&self) -> f64 {
        match self {
            TrawlFunction::Table { psi, .. } => psi[0],
            _ => 1.0,
        }
    }

    /// `ψ^←(x−) = sup{u ≥ 0 : ψ(u) ≥ x}`; on flat stretches the right end.
    pub fn inverse_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        if x > self.psi0() {
            return 0.0;
        }
        match self {
            TrawlFunction::Exponential { rate } => -x.ln() / rate,
            TrawlFunction::Power { tau, h } => tau * (x.powf(-1.0 / h) - 1.0),
            TrawlFunction::Table { v, psi, .. } => {
                // last knot with ψ ≥ x; the next one is strictly below x
                let i = psi.partition_point(|&p| p >= x) - 1;
                if i + 1 >= v.len() {
                    return v[v.len() - 1];
                }
                let frac = (psi[i] - x) / (psi[i] - psi[i + 1]);
                v[i] + frac * (v[i + 1] - v[i])
            }
        }
    }

    /// `∫_0^∞ ψ(v) dv`.
    pub fn integral(&self) -> f64 {
        match self {
            TrawlFunction::Exponential { rate } => 1.0 / rate,
            TrawlFunction::Power { tau, h } => tau / (h - 1.0),
            TrawlFunction::Table { cum, .. } => cum[cum.len() - 1],
        }
    }

    /// A time with density `ψ(v) / ∫ψ`.
    pub fn sample_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self {
            TrawlFunction::Exponential { rate } => -(1.0 - u).ln() / rate,
            TrawlFunction::Power { tau, h } => tau * ((1.0 - u).powf(-1.0 / (h - 1.0)) - 1.0),
            TrawlFunction::Table { v, psi, cum } => {
                let target = u * cum[cum.len() - 1];
                let i = (cum.partition_point(|&c| c <= target).max(1) - 1).min(v.len() - 2);
                let (p0, p1, w) = (psi[i], psi[i + 1], v[i + 1] - v[i]);
                let a = target - cum[i];
                // solve p0 s + (p1 - p0) s² / (2w) = a for s in [0, w]
                let slope = (p1 - p0) / w;
                let s = if slope.abs() < 1e-300 {
                    a / p0
                } else {
                    let disc = (p0 * p0 + 2.0 * slope * a).max(0.0);
                    2.0 * a / (p0 + disc.sqrt())
                };
                v[i] + s.clamp(0.0, w)
            }
        }
    }
}
