use serde::Serialize;

use super::{integrate_over_f1, moments::f1_moment};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, TrawlFunction};
use crate::measures::ext::serde_f64;
use crate::measures::{Index, LevyMeasure, MixingMeasure};
use crate::quadrature::{Improper, QuadOptions};

/// Distance below (or above) a non-attained index used in its place, and
/// the step past an open bound.
pub const INDEX_SLACK: f64 = 1e-6;

/// Relative width within which two sides of a case boundary count as equal.
const BOUNDARY_RTOL: f64 = 1e-12;

/// `(α, β, η)` with attained flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Indices {
    pub alpha: Index,
    pub beta: Index,
    pub eta: Index,
}

/// Which case of the growth-rate classification applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `α ≥ 1`, `η ≥ 2`: `1/γ = 1/2`.
    Half,
    /// `α ≥ 1, η < 2` or `α < 1, η ≤ 1+α, β ≤ 1+α`: `1/γ = 1/η`.
    InvEta,
    /// `α < 1, η > 1+α, β ≤ 1+α`: `1/γ = 1/(1+α)`.
    InvOnePlusAlpha,
    /// `α < 1, η > 1+α, β > 1+α`: `1/γ > 1 − α/β`.
    OpenActivity,
    /// `α < 1, η ≤ 1+α < β, η < (1−α/β)^{-1}`: `1/γ = 1/η`.
    InvEtaActive,
    /// `α < 1, η ≤ 1+α < β, η ≥ (1−α/β)^{-1}`: `1/γ > 1 − α/β`.
    OpenActivityHeavy,
    /// Pure Gaussian basis.
    GaussianLil,
    /// `γ = 2` with integrable small jumps.
    FiniteVarLil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalizer {
    /// `t^{1/γ}`
    Power,
    /// `t^{1/γ} log t`
    PowerLog,
    /// `√(2 t log log t)`
    Lil,
}

impl Normalizer {
    pub fn label(self) -> &'static str {
        match self {
            Normalizer::Power => "t^{1/gamma}",
            Normalizer::PowerLog => "t^{1/gamma} log t",
            Normalizer::Lil => "sqrt(2 t log log t)",
        }
    }
}

/// Model facts the classification needs besides the indices.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateFlags {
    pub infinite_pi: bool,
    /// `∫_{|z|≤1} |z| λ(dz) < ∞`.
    pub finite_variation: bool,
    /// `λ ≡ 0` and `b > 0`.
    pub gaussian_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub alpha: Index,
    pub beta: Index,
    pub eta: Index,
    /// Largest admissible `γ` (the supremum when `open_bound`).
    #[serde(with = "serde_f64")]
    pub gamma_max: f64,
    pub open_bound: bool,
    /// Predicted growth exponent `1/γ`.
    #[serde(with = "serde_f64")]
    pub inv_gamma: f64,
    /// Classification case number, 1 to 6 (0 for the Gaussian basis).
    pub case: u8,
    pub regime: Regime,
    /// The hypotheses of the applicable case, e.g. `α ≥ 1, η ≥ 2`.
    pub label: &'static str,
    pub normalizer: Normalizer,
    pub normalizer_label: &'static str,
    pub centering_required: bool,
    /// The classification assumes a finite mixing measure.
    pub partial: bool,
    /// Competing exponents where the literature disagrees on sharpness.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub candidate_rates: Vec<f64>,
}

/// `x ≤ y`, with values within [`BOUNDARY_RTOL`] of each other counted as equal.
fn at_most(x: f64, y: f64) -> bool {
    x <= y || (x.is_finite() && (x - y) <= BOUNDARY_RTOL * x.abs().max(y.abs()))
}

fn usable(alpha: Index, beta: Index, eta: Index) -> (f64, f64, f64) {
    (alpha.usable_below(INDEX_SLACK), beta.usable_above(INDEX_SLACK), eta.usable_below(INDEX_SLACK))
}

/// Growth-rate classification from the model indices. Non-attained indices
/// are replaced by values [`INDEX_SLACK`] on the admissible side.
pub fn classify_rate(alpha: Index, beta: Index, eta: Index, flags: RateFlags) -> RateReport {
    let mut report = RateReport {
        alpha,
        beta,
        eta,
        gamma_max: 2.0,
        open_bound: false,
        inv_gamma: 0.5,
        case: 0,
        regime: Regime::GaussianLil,
        label: "λ = 0, b > 0",
        normalizer: Normalizer::Lil,
        normalizer_label: Normalizer::Lil.label(),
        centering_required: true,
        partial: flags.infinite_pi,
        candidate_rates: Vec::new(),
    };
    if flags.gaussian_only {
        return report;
    }
    let (a, b, e) = usable(alpha, beta, eta);
    let (le, ge) = (at_most, |x: f64, y: f64| at_most(y, x));
    let (case, inv_gamma, open, label) = if ge(a, 1.0) {
        if ge(e, 2.0) {
            (1, 0.5, false, "α ≥ 1, η ≥ 2")
        } else {
            (2, 1.0 / e, false, "α ≥ 1, η < 2")
        }
    } else if le(e, 1.0 + a) && le(b, 1.0 + a) {
        (2, 1.0 / e, false, "α < 1, η ≤ 1 + α, β ≤ 1 + α")
    } else if le(b, 1.0 + a) {
        (3, 1.0 / (1.0 + a), false, "α < 1, η > 1 + α, β ≤ 1 + α")
    } else if !le(e, 1.0 + a) {
        (4, 1.0 - a / b + INDEX_SLACK, true, "α < 1, η > 1 + α, β > 1 + α")
    } else if !ge(e * (b - a), b) {
        // η < (1 − α/β)^{-1}, written without the division
        (5, 1.0 / e, false, "α < 1, η ≤ 1 + α < β, η < (1 − α/β)^{-1}")
    } else {
        (6, 1.0 - a / b + INDEX_SLACK, true, "α < 1, η ≤ 1 + α < β, η ≥ (1 − α/β)^{-1}")
    };
    report.label = label;
    report.case = case;
    report.inv_gamma = inv_gamma;
    report.open_bound = open;
    report.gamma_max = if open { b / (b - a) } else { 1.0 / inv_gamma };
    report.regime = match case {
        1 => Regime::Half,
        2 => Regime::InvEta,
        3 => Regime::InvOnePlusAlpha,
        4 => Regime::OpenActivity,
        5 => Regime::InvEtaActive,
        _ => Regime::OpenActivityHeavy,
    };
    let gamma = 1.0 / inv_gamma;
    report.centering_required = gamma >= 1.0;
    report.normalizer = if case == 1 && flags.finite_variation {
        report.regime = Regime::FiniteVarLil;
        Normalizer::Lil
    } else if !flags.finite_variation && b <= 1.0 + a {
        Normalizer::PowerLog
    } else {
        Normalizer::Power
    };
    report.normalizer_label = report.normalizer.label();
    if case == 5 || case == 6 {
        report.candidate_rates = vec![1.0 / e, 1.0 - a / b];
    }
    report
}

/// `α` from the kernel's and mixing measure's declared shapes.
fn alpha_closed_form(mixing: &MixingMeasure, kernel: &KernelFamily) -> Option<Index> {
    let unbounded = Index::new(f64::INFINITY, true);
    if kernel.is_moving_average() || mixing.atoms().is_some() {
        return Some(unbounded);
    }
    let (lo, _) = mixing.support();
    if lo > 0.0 {
        // f₁ is bounded on the support
        return Some(unbounded);
    }
    let p0 = mixing.declared_exponents().0?;
    match kernel.trawl_function() {
        None => Some(Index::new(p0, false)),
        Some(TrawlFunction::Power { h, .. }) => Some(Index::new(h * (1.0 + p0) - 1.0, false)),
        Some(_) => Some(unbounded),
    }
}

/// `α` by bisection on divergence of `p ↦ ∫ f₁^p 𝟙(f₁ > 1) dπ`.
fn alpha_numeric(mixing: &MixingMeasure, kernel: &KernelFamily) -> Index {
    const P_MAX: f64 = 64.0;
    let opts = QuadOptions::default();
    let j = |p: f64| integrate_over_f1(mixing, kernel, 1.0, f64::INFINITY, |c| c.powf(p), &opts);
    let diverging = |p: f64| {
        let r: Improper = j(p);
        r.slope_zero.map(|s| s >= 0.0).unwrap_or(!r.is_finite())
    };
    if !diverging(P_MAX) {
        return Index::new(f64::INFINITY, true);
    }
    let (mut lo, mut hi) = (1.0, P_MAX);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if diverging(mid) { hi = mid } else { lo = mid }
    }
    let v = 0.5 * (lo + hi);
    Index::new(v - 1.0, j(v).is_finite())
}

fn check_f1_integrable(mixing: &MixingMeasure, kernel: &KernelFamily) -> Result<()> {
    let m = f1_moment(mixing, kernel, 1.0);
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergent { what: "∫ f1 dπ (the kernel is not integrable)".into(), endpoint: m.divergent_at })
    }
}

/// `(α, β, η)`: `α` from closed forms where the families declare them,
/// `β` and `η` from the Lévy measure.
pub fn compute_indices(levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily) -> Result<Indices> {
    check_f1_integrable(mixing, kernel)?;
    let alpha = alpha_closed_form(mixing, kernel).unwrap_or_else(|| alpha_numeric(mixing, kernel));
    Ok(Indices { alpha, beta: levy.bg_index(), eta: levy.tail_index() })
}

/// Indices from divergence scans only.
pub fn compute_indices_numeric(levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily) -> Result<Indices> {
    check_f1_integrable(mixing, kernel)?;
    Ok(Indices { alpha: alpha_numeric(mixing, kernel), beta: levy.bg_index_numeric(), eta: levy.tail_index_numeric() })
}

/// Indices, flags and classification for a full model.
pub fn classify_model(levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily, b: f64) -> Result<RateReport> {
    let ix = compute_indices(levy, mixing, kernel)?;
    let flags = RateFlags {
        infinite_pi: !mixing.is_finite(),
        finite_variation: levy.has_finite_variation(),
        gaussian_only: levy.is_zero() && b > 0.0,
    };
    Ok(classify_rate(ix.alpha, ix.beta, ix.eta, flags))
}
