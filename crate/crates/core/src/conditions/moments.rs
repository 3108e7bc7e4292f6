use serde::{Deserialize, Serialize};

use super::{integrate_over_f1, IntegralValue};
use crate::kernels::{Kernel, KernelFamily, KernelSpec};
use crate::measures::ext::serde_f64;
use crate::measures::{LevyMeasure, MixingMeasure, Region, Side};
use crate::quadrature::{self, Improper, QuadOptions};

/// How the drift `a` enters the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// Uncompensated small jumps when they are integrable (so `a` is the
    /// signed small-jump mean), compensated with `a = 0` otherwise.
    #[default]
    PaperThm1,
    /// `a` as given, small jumps compensated.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    pub centering: Centering,
    /// Drift actually used: `a` in raw mode, the small-jump mean otherwise.
    #[serde(with = "serde_f64")]
    pub drift: f64,
    /// `E X*(t) / t`.
    pub mean_rate: IntegralValue,
    #[serde(with = "serde_f64")]
    pub t: f64,
    #[serde(with = "serde_f64")]
    pub mean: f64,
    /// `Var X*(t)`, jumps and Gaussian part together.
    #[serde(with = "serde_f64")]
    pub variance: f64,
    /// `Var X*₊,₁(1) = m₂(λ) ∫ f₁² dπ`.
    pub subordinator_variance: IntegralValue,
    /// `b ∫ f₁² dπ`, the slope of the Gaussian variance.
    pub gaussian_rate: IntegralValue,
}

/// `∫ f₁^p dπ`.
pub fn f1_moment(mixing: &MixingMeasure, kernel: &KernelFamily, p: f64) -> Improper {
    integrate_over_f1(mixing, kernel, 0.0, f64::INFINITY, |c| c.powf(p), &QuadOptions::default())
}

fn times(scale: f64, r: Improper) -> Improper {
    if scale == 0.0 { Improper::finite(0.0) } else { r.scaled(scale) }
}

/// `η̄(r) = ∫ λ̄₊(r / f₁(x)) π(dx)`, the tail of the Lévy measure of the
/// subordinator built from positive jumps.
pub fn subordinator_tail(levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily, r: f64) -> crate::Result<f64> {
    if !(r > 0.0) {
        return Err(crate::Error::invalid("r", format!("must be positive, got {r}")));
    }
    let v = integrate_over_f1(mixing, kernel, 0.0, f64::INFINITY, |c| levy.tail_mass(r / c, Side::Pos), &QuadOptions::default());
    Ok(if v.is_finite() { v.value } else { f64::INFINITY })
}

/// `∫ (F(x, s))² ds` with `F(x, s) = ∫_0^t f(x, u − s) du`.
pub(crate) fn window_square_integral(kernel: &KernelFamily, x: f64, t: f64) -> f64 {
    match kernel.spec() {
        KernelSpec::Supou {} => {
            let e1 = (-x * t).exp_m1();
            let e2 = (-2.0 * x * t).exp_m1();
            e1 * e1 / (2.0 * x.powi(3)) + (t + 2.0 * e1 / x - e2 / (2.0 * x)) / (x * x)
        }
        KernelSpec::Trawl { .. } | KernelSpec::MaBox { .. } => {
            let c = kernel.f1(x);
            let (lo, hi) = (c.min(t), c.max(t));
            lo * lo * hi - lo.powi(3) / 3.0
        }
        _ => {
            let opts = QuadOptions::default();
            let f1 = kernel.f1(x);
            let mut br = kernel.breaks(x);
            br.extend(kernel.breaks(x).iter().map(|b| b - t).filter(|b| *b > 0.0));
            let past = quadrature::integrate_positive(|w| kernel.f2_diff(x, w, t).powi(2), 0.0, f64::INFINITY, &br, f1, &opts);
            let inner_br: Vec<f64> = kernel.breaks(x).into_iter().filter(|b| *b < t).collect();
            let window = quadrature::integrate_with_breaks(|w| kernel.f1_minus_f2(x, w).powi(2), 0.0, t, &inner_br, &opts);
            past.value + window.value
        }
    }
}

/// `∫ π(dx) ∫ F(x, s)² ds`: `Var X*(t)` per unit of `b + m₂(λ)`.
pub fn gaussian_window_variance(mixing: &MixingMeasure, kernel: &KernelFamily, t: f64) -> Improper {
    if t == 0.0 {
        return Improper::finite(0.0);
    }
    if kernel.is_moving_average() {
        let m = mixing.total_mass();
        let v = window_square_integral(kernel, 1.0, t);
        return if m.is_finite() { Improper::finite(v * m) } else { Improper::divergent(quadrature::Endpoint::Infinity) };
    }
    let mut br = mixing.breaks();
    if let Some(psi) = kernel.trawl_function() {
        br.push(psi.psi0());
    }
    mixing.integrate_with(|x| window_square_integral(kernel, x, t), Region::ALL, &br, &QuadOptions::default())
}

/// `Q(t) = (b/2) ∫ π(dx) ∫ F(x, s)² ds`, half the variance of the Gaussian part.
pub fn gaussian_q(b: f64, mixing: &MixingMeasure, kernel: &KernelFamily, t: f64) -> Improper {
    times(b / 2.0, gaussian_window_variance(mixing, kernel, t))
}

/// Drift used by the mean under `centering`.
pub(crate) fn effective_drift(levy: &LevyMeasure, a: f64, centering: Centering) -> f64 {
    match centering {
        Centering::Raw => a,
        Centering::PaperThm1 => {
            let m = levy.signed_first_moment(Region::SMALL);
            if m.is_finite() { m.value } else { 0.0 }
        }
    }
}

/// `E X*(t) / t`, which does not depend on `t`.
pub fn mean_rate(levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily, a: f64, centering: Centering) -> Improper {
    let f1 = f1_moment(mixing, kernel, 1.0);
    let drift = effective_drift(levy, a, centering);
    let large = levy.signed_first_moment(Region::LARGE);
    let per_unit = if large.is_finite() { Improper::finite(drift + large.value) } else { large };
    if per_unit.is_finite() && per_unit.value == 0.0 {
        Improper::finite(0.0)
    } else if !f1.is_finite() {
        f1
    } else if !per_unit.is_finite() {
        per_unit
    } else {
        Improper::finite(f1.value * per_unit.value)
    }
}

/// Mean and variance of `X*(t)` where finite.
pub fn mean_variance(
    levy: &LevyMeasure,
    mixing: &MixingMeasure,
    kernel: &KernelFamily,
    a: f64,
    b: f64,
    centering: Centering,
    t: f64,
) -> Moments {
    let f1sq = f1_moment(mixing, kernel, 2.0);
    let drift = effective_drift(levy, a, centering);
    let mean_rate = mean_rate(levy, mixing, kernel, a, centering);
    let m2 = levy.partial_moment(2.0, Region::ALL, Side::Both);
    let subordinator_variance = super::product(m2, f1sq);
    let gaussian_rate = times(b, f1sq);
    let scale = if m2.is_finite() { b + m2.value } else { f64::INFINITY };
    let window = gaussian_window_variance(mixing, kernel, t);
    let variance = if scale == 0.0 || t == 0.0 {
        0.0
    } else if window.is_finite() && scale.is_finite() {
        scale * window.value
    } else {
        f64::INFINITY
    };
    let mean_rate = IntegralValue::from(mean_rate);
    let mean = if mean_rate.convergent { t * mean_rate.value } else { f64::NAN };
    Moments {
        centering,
        drift,
        mean_rate,
        t,
        mean,
        variance,
        subordinator_variance: subordinator_variance.into(),
        gaussian_rate: gaussian_rate.into(),
    }
}
