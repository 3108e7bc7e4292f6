//! Integral conditions on the generating quadruple: `(C_γ)`, existence,
//! Fubini, model indices, and rate classification.

mod cgamma;
mod classify;
mod existence;
mod moments;

pub use cgamma::{c_gamma_direct, evaluate_c_gamma, ConditionReport, Term};
pub use classify::{classify_model, classify_rate, compute_indices, compute_indices_numeric, Indices, Normalizer, RateFlags, RateReport, Regime, INDEX_SLACK};
pub use existence::{check_existence, check_fubini, check_supfou_existence, ExistenceReport, FubiniCheck, FubiniReport, SupfouClause, SupfouReport};
pub use moments::{f1_moment, gaussian_q, gaussian_window_variance, mean_rate, mean_variance, subordinator_tail, Centering, Moments};

use serde::Serialize;

use crate::kernels::{Kernel, KernelFamily};
use crate::measures::ext::serde_f64;
use crate::measures::{MixingMeasure, Region};
use crate::quadrature::{Endpoint, Improper, QuadOptions};

/// Serializable summary of an [`Improper`] integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralValue {
    #[serde(with = "serde_f64")]
    pub value: f64,
    pub convergent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<Endpoint>,
    #[serde(with = "serde_f64")]
    pub error: f64,
}

impl From<Improper> for IntegralValue {
    fn from(r: Improper) -> Self {
        IntegralValue {
            value: if r.is_finite() { r.value } else { f64::INFINITY },
            convergent: r.is_finite() && r.value.is_finite(),
            endpoint: r.divergent_at,
            error: if r.is_finite() { r.error } else { f64::INFINITY },
        }
    }
}

/// The `x` at which `f₁(x) = c`; `f₁` is non-increasing in `x` for every
/// family with a non-trivial mixing space.
fn f1_level(kernel: &KernelFamily, c: f64) -> f64 {
    if let Some(psi) = kernel.trawl_function() {
        if c.is_infinite() {
            return 0.0;
        }
        return psi.psi(c);
    }
    if c == 0.0 {
        f64::INFINITY
    } else if c.is_infinite() {
        0.0
    } else {
        1.0 / c
    }
}

/// `∫ φ(f₁(x)) π(dx)` over `{x : lo < f₁(x) ≤ hi}` for non-negative `φ`.
/// Divergence endpoints refer to `x`.
pub fn integrate_over_f1<F: Fn(f64) -> f64>(
    mixing: &MixingMeasure,
    kernel: &KernelFamily,
    lo: f64,
    hi: f64,
    phi: F,
    opts: &QuadOptions,
) -> Improper {
    let inside = |c: f64| c > lo && c <= hi;
    if kernel.is_moving_average() {
        let c = kernel.f1(1.0);
        if !inside(c) {
            return Improper::finite(0.0);
        }
        let v = phi(c);
        if v == 0.0 {
            return Improper::finite(0.0);
        }
        let m = mixing.total_mass();
        return if m.is_finite() { Improper::finite(v * m) } else { Improper::divergent(Endpoint::Infinity) };
    }
    if let Some(atoms) = mixing.atoms() {
        let v = atoms.iter().map(|&(x, m)| (x, m, kernel.f1(x))).filter(|&(_, _, c)| inside(c)).map(|(_, m, c)| m * phi(c)).sum();
        return Improper::finite(v);
    }
    let x_lo = f1_level(kernel, hi);
    let x_hi = f1_level(kernel, lo);
    if x_hi <= x_lo {
        return Improper::finite(0.0);
    }
    let mut breaks = mixing.breaks();
    if let Some(psi) = kernel.trawl_function() {
        breaks.push(psi.psi0());
    }
    mixing.integrate_with(
        |x| {
            let c = kernel.f1(x);
            if inside(c) { phi(c) } else { 0.0 }
        },
        Region::new(x_lo, x_hi),
        &breaks,
        opts,
    )
}

/// `∫_0^∞ φ(f(x, v)) dv / f₁(x)`, which does not depend on `x` for any
/// family here: supOU and supfOU kernels are functions of `xv` with
/// `f₁ = 1/x`, trawl kernels are indicators, and moving averages ignore `x`.
/// `use_majorant` replaces `f` with the Fubini majorant `g`.
pub(crate) fn kernel_profile<F: Fn(f64) -> f64>(kernel: &KernelFamily, phi: F, use_majorant: bool, opts: &QuadOptions) -> Improper {
    if kernel.trawl_function().is_some() || matches!(kernel.spec(), crate::kernels::KernelSpec::MaBox { .. }) {
        return Improper::finite(phi(1.0));
    }
    let x0 = 1.0;
    let f1 = kernel.f1(x0);
    let g = |v: f64| {
        let y = if use_majorant { kernel.fubini_majorant(x0, v).unwrap_or(f64::INFINITY) } else { kernel.f(x0, v) };
        // below the smallest normal double `1/y` overflows
        if y > f64::MIN_POSITIVE { phi(y) } else { 0.0 }
    };
    let r = crate::quadrature::integrate_positive(g, 0.0, f64::INFINITY, &kernel.breaks(x0), f1, opts);
    r.scaled(1.0 / f1)
}

/// Product of two non-negative improper values with `0 · ∞ = 0`.
pub(crate) fn product(a: Improper, b: Improper) -> Improper {
    if (a.is_finite() && a.value == 0.0) || (b.is_finite() && b.value == 0.0) {
        return Improper::finite(0.0);
    }
    if !a.is_finite() {
        return a;
    }
    if !b.is_finite() {
        return b;
    }
    Improper { value: a.value * b.value, error: a.error * b.value.abs() + b.error * a.value.abs(), ..a }
}
