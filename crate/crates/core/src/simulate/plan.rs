use serde::Serialize;

use super::Model;
use crate::conditions::{f1_moment, Centering};
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::measures::ext::serde_f64;
use crate::measures::{Region, Side};
use crate::quadrature::QuadOptions;

/// Jump threshold used for infinite-activity Lévy measures when the model
/// does not set one.
pub const DEFAULT_EPS: f64 = 1e-2;

/// Target for the automatic past window: neglected mean below this times `t`.
pub const AUTO_WINDOW_TARGET: f64 = 1e-6;

/// How far back the simulated past reaches for a component `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PastWindow {
    /// `[s_min, 0]` for every `x`.
    Fixed {
        #[serde(with = "serde_f64")]
        s_min: f64,
    },
    /// `[-c/x, 0]`: superposition kernels, whose tail scales with `1/x`.
    Scaled {
        #[serde(with = "serde_f64")]
        c: f64,
    },
    /// `[-ψ^←(x), 0]`: the exact support of a trawl kernel.
    Trawl,
    /// `[-len, 0]` for moving averages.
    Constant {
        #[serde(with = "serde_f64")]
        len: f64,
    },
    /// Atoms of `π`, each with its own maturity.
    Atoms {
        #[serde(with = "serde_f64")]
        tol: f64,
    },
}

/// Resolved simulation settings for one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    /// Jumps with `|z| ≤ eps` are not simulated (`0`: all jumps are).
    #[serde(with = "serde_f64")]
    pub eps: f64,
    pub past: PastWindow,
    /// `λ({|z| > eps})`
    #[serde(with = "serde_f64")]
    pub jump_rate: f64,
    /// `∫_{|z|>eps} |z| λ(dz)`, infinite when the big jumps have no mean.
    #[serde(with = "serde_f64")]
    pub abs_mean: f64,
    /// Signed mean of the unsimulated jumps, `∫_{|z|≤eps} z λ(dz)`.
    #[serde(with = "serde_f64")]
    pub residue_mean: f64,
    /// `∫_{|z|≤eps} z² λ(dz)`
    #[serde(with = "serde_f64")]
    pub residue_second_moment: f64,
    /// Signed mean `∫_{eps<|z|≤1} z λ(dz)` that is compensated.
    #[serde(with = "serde_f64")]
    pub compensated_mean: f64,
    pub compensate: bool,
    /// `∫ f₁ dπ`
    #[serde(with = "serde_f64")]
    pub f1_integral: f64,
    pub gaussian_residue: bool,
}

fn value_or_inf(r: crate::quadrature::Improper) -> f64 {
    if r.is_finite() { r.value } else { f64::INFINITY }
}

impl Plan {
    pub fn resolve(model: &Model) -> Result<Plan> {
        let w = &model.spec.windows;
        let levy = &model.levy;
        let finite_activity = levy.tail_mass(0.0, Side::Both).is_finite();
        let eps = match w.eps {
            Some(e) => e,
            None if finite_activity => 0.0,
            None => DEFAULT_EPS,
        };
        let jump_rate = levy.tail_mass(eps, Side::Both);
        if !jump_rate.is_finite() {
            return Err(Error::Divergent { what: format!("λ-mass of jumps above eps = {eps} (the Lévy marginal)"), endpoint: None });
        }
        let total = model.mixing.total_mass();
        if !total.is_finite() {
            return Err(Error::Divergent {
                what: "π(V), the mixing marginal of the simulation window".into(),
                endpoint: model.mixing.moment(0.0).divergent_at,
            });
        }
        let f1 = f1_moment(&model.mixing, &model.kernel, 1.0);
        if !f1.is_finite() {
            return Err(Error::Divergent { what: "∫ f1 dπ".into(), endpoint: f1.divergent_at });
        }
        let f1_integral = f1.value;
        let above = if eps > 0.0 { Region::above(eps) } else { Region::ALL };
        let abs_mean = value_or_inf(levy.partial_moment(1.0, above, Side::Both));
        let residue = Region::new(0.0, eps);
        let (residue_mean, residue_second_moment) = if eps > 0.0 {
            let m = levy.signed_first_moment(residue);
            (if m.is_finite() { m.value } else { f64::NAN }, value_or_inf(levy.partial_moment(2.0, residue, Side::Both)))
        } else {
            (0.0, 0.0)
        };
        let compensated_mean = if eps < 1.0 {
            let m = levy.signed_first_moment(Region::new(eps, 1.0));
            if m.is_finite() { m.value } else { f64::NAN }
        } else {
            0.0
        };
        let compensate = match model.centering {
            Centering::Raw => true,
            Centering::PaperThm1 => !levy.has_finite_variation(),
        };

        let tol = w.tol.unwrap_or_else(|| {
            let scale = if abs_mean.is_finite() { abs_mean * f1_integral } else { f1_integral };
            AUTO_WINDOW_TARGET / scale.max(1.0)
        });
        let kernel = &model.kernel;
        let past = if let Some(s_min) = w.s_min {
            PastWindow::Fixed { s_min }
        } else if kernel.trawl_function().is_some() {
            if model.mixing.atoms().is_some() {
                PastWindow::Atoms { tol }
            } else {
                match (model.mixing.is_lebesgue_from_zero(), kernel.trawl_function()) {
                    (Some(hi), Some(psi)) if hi >= psi.psi0() => PastWindow::Trawl,
                    _ => {
                        return Err(Error::invalid(
                            "windows.s_min",
                            "an automatic past window for a trawl kernel needs π = Lebesgue on (0, ψ(0)] or atoms; set s_min",
                        ))
                    }
                }
            }
        } else if kernel.is_moving_average() {
            let len = match kernel.spec() {
                KernelSpec::MaBox { q } | KernelSpec::MaTriangle { q } => *q,
                _ => kernel.maturity(1.0, tol),
            };
            PastWindow::Constant { len }
        } else if model.mixing.atoms().is_some() {
            PastWindow::Atoms { tol }
        } else {
            PastWindow::Scaled { c: kernel.maturity(1.0, tol) }
        };
        Ok(Plan {
            eps,
            past,
            jump_rate,
            abs_mean,
            residue_mean,
            residue_second_moment,
            compensated_mean,
            compensate,
            f1_integral,
            gaussian_residue: w.gaussian_residue,
        })
    }

    /// Length of the simulated past for component `x`.
    pub fn past_len(&self, model: &Model, x: f64) -> f64 {
        match self.past {
            PastWindow::Fixed { s_min } => -s_min,
            PastWindow::Scaled { c } => c / x,
            PastWindow::Trawl => model.kernel.f1(x),
            PastWindow::Constant { len } => len,
            PastWindow::Atoms { tol } => {
                let f1 = model.kernel.f1(x);
                if f1 <= 0.0 {
                    0.0
                } else if model.kernel.trawl_function().is_some() {
                    f1
                } else {
                    model.kernel.maturity(x, tol)
                }
            }
        }
    }

    /// `∫ π(dx) ∫_{s < -S(x)} ∫_0^t f(x, u - s) du ds`: the kernel mass of
    /// the unsimulated past up to time `t`.
    pub fn neglected_kernel_mass(&self, model: &Model, t: f64) -> f64 {
        let k = &model.kernel;
        let phi = |x: f64| {
            let s = self.past_len(model, x);
            if s.is_infinite() {
                return 0.0;
            }
            (k.f3(x, s) - k.f3(x, s + t)).max(0.0)
        };
        if k.is_moving_average() {
            return phi(1.0) * model.mixing.total_mass();
        }
        let mut br = model.mixing.breaks();
        if let Some(psi) = k.trawl_function() {
            br.push(psi.psi0());
        }
        value_or_inf(model.mixing.integrate_with(phi, Region::ALL, &br, &QuadOptions::default()))
    }

    /// Bound on `E|neglected past contribution to X*(t)|`; `None` when the
    /// simulated jumps have no finite mean.
    pub fn truncation_error_bound(&self, model: &Model, t: f64) -> Option<f64> {
        if !self.abs_mean.is_finite() {
            return None;
        }
        if self.abs_mean == 0.0 {
            return Some(0.0);
        }
        Some(self.abs_mean * self.neglected_kernel_mass(model, t))
    }

    /// Deterministic drift contribution at time `t`.
    pub fn drift(&self, model: &Model, t: f64) -> f64 {
        let rate = match model.centering {
            Centering::Raw => model.a,
            Centering::PaperThm1 if self.compensate => 0.0,
            Centering::PaperThm1 => self.residue_mean,
        };
        rate * t * self.f1_integral
    }

    /// Compensator of the simulated jumps with `eps < |z| ≤ 1`, over the
    /// simulated window only.
    pub fn compensator(&self, model: &Model, t: f64) -> f64 {
        if !self.compensate || self.compensated_mean == 0.0 || t == 0.0 {
            return 0.0;
        }
        let simulated = t * self.f1_integral - self.neglected_kernel_mass(model, t);
        -self.compensated_mean * simulated
    }

    /// Variance rate added to `b` when the dropped jumps are replaced by a
    /// Gaussian.
    pub fn residue_variance_rate(&self) -> f64 {
        if self.gaussian_residue { self.residue_second_moment } else { 0.0 }
    }
}
