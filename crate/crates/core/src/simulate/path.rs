use serde::Serialize;

use super::{Model, PoissonPoint};
use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Jump part of `X*` on a grid, split by where the points fall.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpPath {
    /// `Σ_{s≤0} z (f₂(x, −s) − f₂(x, t−s))`
    pub past: Vec<f64>,
    /// `Σ_{0<s≤t} z (f₁(x) − f₂(x, t−s))`
    pub window: Vec<f64>,
    /// `Σ_{0<s≤t} z f₁(x)`, the subordinator-like part of the window term.
    pub subordinator: Vec<f64>,
}

impl JumpPath {
    pub fn total(&self, i: usize) -> f64 {
        self.past[i] + self.window[i]
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("t_grid", "must be increasing, finite and non-negative"));
    }
    Ok(())
}

/// Jump contributions to `X*(t)` for each `t` in `t_grid`, from the
/// closed-form `f₁` and `f₂` of the kernel.
pub fn path_from_points(model: &Model, points: &[PoissonPoint], t_grid: &[f64]) -> Result<JumpPath> {
    check_grid(t_grid)?;
    let k = &model.kernel;
    let n = t_grid.len();
    let mut out = JumpPath { past: vec![0.0; n], window: vec![0.0; n], subordinator: vec![0.0; n] };
    for p in points {
        if p.s <= 0.0 {
            let u = -p.s;
            for (i, &t) in t_grid.iter().enumerate() {
                out.past[i] += p.z * k.f2_diff(p.x, u, t);
            }
        } else {
            let f1 = k.f1(p.x);
            let first = t_grid.partition_point(|&t| t < p.s);
            for i in first..n {
                out.window[i] += p.z * k.f1_minus_f2(p.x, t_grid[i] - p.s);
                out.subordinator[i] += p.z * f1;
            }
        }
    }
    Ok(out)
}

/// `X*(t) = ∫_0^t X(u) du` with `X(u) = Σ z f(x, u − s)` integrated by the
/// composite trapezoid rule with step at most `quad_step`. Nodes are added at
/// the grid times and at every kink of every kernel term, and each panel
/// uses one-sided limits at its ends.
pub fn oracle_time_integral(model: &Model, points: &[PoissonPoint], t_grid: &[f64], quad_step: f64) -> Result<Vec<f64>> {
    check_grid(t_grid)?;
    if !(quad_step > 0.0 && quad_step.is_finite()) {
        return Err(Error::invalid("quad_step", "must be positive"));
    }
    let Some(&t_end) = t_grid.last() else {
        return Ok(Vec::new());
    };
    let k = &model.kernel;
    let mut nodes: Vec<f64> = t_grid.to_vec();
    for p in points {
        let mut kinks = vec![p.s];
        kinks.extend(k.breaks(p.x).into_iter().map(|b| p.s + b));
        nodes.extend(kinks.into_iter().filter(|u| *u > 0.0 && *u < t_end));
    }
    nodes.push(0.0);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let x_at = |u: f64| -> f64 { points.iter().map(|p| p.z * k.f(p.x, u - p.s)).sum() };

    let mut out = Vec::with_capacity(t_grid.len());
    let mut acc = 0.0;
    let mut gi = 0;
    while gi < t_grid.len() && t_grid[gi] <= 0.0 {
        out.push(0.0);
        gi += 1;
    }
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = ((b - a) / quad_step).ceil().max(1.0) as usize;
        let h = (b - a) / m as f64;
        let delta = 1e-9 * h;
        let mut panel = 0.5 * (x_at(a + delta) + x_at(b - delta));
        for j in 1..m {
            panel += x_at(a + j as f64 * h);
        }
        acc += panel * h;
        while gi < t_grid.len() && t_grid[gi] <= b {
            out.push(acc);
            gi += 1;
        }
    }
    Ok(out)
}
