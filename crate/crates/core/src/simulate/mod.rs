//! Path simulation of `X*(t)` from the Poisson random measure behind the
//! Lévy basis, plus its deterministic and Gaussian parts.

mod engine;
mod gaussian;
mod path;
mod plan;
mod prm;

pub use engine::{write_csv, PathSample, SimOptions, SimReport, Simulator};
pub use gaussian::{gaussian_covariance, GaussianFactor};
pub use path::{oracle_time_integral, path_from_points, JumpPath};
pub use plan::{PastWindow, Plan};
pub use prm::{sample_prm, PoissonPoint};

use serde::{Deserialize, Serialize};

use crate::conditions::Centering;
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::measures::{LevyMeasure, LevyMeasureSpec, MixingMeasure, MixingMeasureSpec};

/// Simulation windows. Unset values are chosen automatically.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    /// Start of the simulated past, the same for every `x`. When unset the
    /// past reaches back to where the kernel tail falls below `tol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_min: Option<f64>,
    /// Jumps with `|z| ≤ eps` are not simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Relative kernel tail `f₂/f₁` at which an automatic past window stops.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Replace the dropped small jumps by a Gaussian of the same variance.
    #[serde(default)]
    pub gaussian_residue: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
}

fn default_t_max() -> f64 {
    100.0
}

fn default_ppd() -> usize {
    20
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { t_max: default_t_max(), points_per_decade: default_ppd() }
    }
}

/// A model file: the generating quadruple, the kernel, and simulation
/// settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    pub levy: LevyMeasureSpec,
    pub mixing: MixingMeasureSpec,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub centering: Centering,
    #[serde(default)]
    pub windows: WindowSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A validated model.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: ModelSpec,
    pub a: f64,
    pub b: f64,
    pub levy: LevyMeasure,
    pub mixing: MixingMeasure,
    pub kernel: KernelFamily,
    pub centering: Centering,
}

impl ModelSpec {
    pub fn build(&self) -> Result<Model> {
        if !self.a.is_finite() {
            return Err(Error::invalid("a", "must be finite"));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::invalid("b", format!("must be non-negative and finite, got {}", self.b)));
        }
        let w = &self.windows;
        if let Some(s) = w.s_min {
            if !(s.is_finite() && s <= 0.0) {
                return Err(Error::invalid("windows.s_min", format!("must be finite and <= 0, got {s}")));
            }
        }
        if let Some(e) = w.eps {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::invalid("windows.eps", format!("must be positive and finite, got {e}")));
            }
        }
        if let Some(t) = w.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::invalid("windows.tol", format!("must lie in (0, 1), got {t}")));
            }
        }
        if !(self.grid.t_max.is_finite() && self.grid.t_max > 0.0) {
            return Err(Error::invalid("grid.t_max", format!("must be positive and finite, got {}", self.grid.t_max)));
        }
        if self.grid.points_per_decade == 0 || self.grid.points_per_decade > 1000 {
            return Err(Error::invalid("grid.points_per_decade", "must lie in 1..=1000"));
        }
        Ok(Model {
            spec: self.clone(),
            a: self.a,
            b: self.b,
            levy: self.levy.build()?,
            mixing: self.mixing.build()?,
            kernel: self.kernel.build()?,
            centering: self.centering,
        })
    }
}

/// `0`, dyadic steps of `1/16` up to `min(1, t_max)`, then
/// `points_per_decade` log-spaced points up to `t_max`.
pub fn time_grid(t_max: f64, points_per_decade: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    let mut k = 1;
    while (k as f64) / 16.0 <= t_max.min(1.0) {
        g.push(k as f64 / 16.0);
        k += 1;
    }
    if t_max > 1.0 {
        let mut j = 1;
        loop {
            let t = 10f64.powf(j as f64 / points_per_decade as f64);
            if t >= t_max * (1.0 - 1e-12) {
                break;
            }
            g.push(t);
            j += 1;
        }
    }
    if *g.last().unwrap() < t_max {
        g.push(t_max);
    }
    g
}
