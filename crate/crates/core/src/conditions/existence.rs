use serde::Serialize;

use super::{f1_moment, integrate_over_f1, kernel_profile, product, IntegralValue};
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelFamily, KernelSpec};
use crate::measures::{LevyMeasure, MixingMeasure, Region, Side};
use crate::quadrature::{Improper, QuadOptions};

/// One named integral of an existence or Fubini check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedIntegral {
    pub name: &'static str,
    #[serde(flatten)]
    pub integral: IntegralValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupfouClause {
    /// `κ > 1/2`
    I,
    /// `κ = 1/2`
    Ii,
    /// `κ < 1/2`
    Iii,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupfouReport {
    pub exists: bool,
    pub clause: SupfouClause,
    /// `m₋₁(π)`
    pub m_minus1: IntegralValue,
    /// `∫_{|z|>1} log|z| λ(dz)`
    pub log_moment: IntegralValue,
    /// `∫_{|z|≤1} z² log(1/|z|) λ(dz)` or `∫_{|z|≤1} |z|^{1/(1−κ)} λ(dz)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_jump: Option<IntegralValue>,
    /// The first requirement that failed, or the clause that settled it.
    pub decided_by: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub exists: bool,
    /// `∫ f₁ dπ`
    pub f1_integral: IntegralValue,
    /// The three integrability integrals, for `U`, `b f²` and `V₀`.
    pub terms: Vec<NamedIntegral>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supfou: Option<SupfouReport>,
}

/// Existence for the supfOU kernel, from the exact criterion in terms of
/// `m₋₁(π)`, the big-jump log-moment, and a `κ`-dependent small-jump moment.
pub fn check_supfou_existence(kappa: f64, levy: &LevyMeasure, mixing: &MixingMeasure) -> Result<SupfouReport> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid("kernel.kappa", format!("must be positive, got {kappa}")));
    }
    let opts = QuadOptions::default();
    let m_minus1 = IntegralValue::from(mixing.moment(-1.0));
    let log_moment = IntegralValue::from(levy.integrate(f64::ln, Region::LARGE, Side::Both, &opts));
    let (clause, small_jump) = if kappa > 0.5 {
        (SupfouClause::I, None)
    } else if kappa == 0.5 {
        let r = levy.integrate(|z| -z * z * z.ln(), Region::SMALL, Side::Both, &opts);
        (SupfouClause::Ii, Some(IntegralValue::from(clause_ii_bound(levy, r))))
    } else {
        let r = levy.partial_moment(1.0 / (1.0 - kappa), Region::SMALL, Side::Both);
        (SupfouClause::Iii, Some(IntegralValue::from(r)))
    };
    let decided_by = if !m_minus1.convergent {
        "m_minus1"
    } else if !log_moment.convergent {
        "log_moment"
    } else {
        match clause {
            SupfouClause::I => "clause-i",
            SupfouClause::Ii => "clause-ii",
            SupfouClause::Iii => "clause-iii",
        }
    };
    let exists = m_minus1.convergent && log_moment.convergent && small_jump.is_none_or(|s| s.convergent);
    Ok(SupfouReport { exists, clause, m_minus1, log_moment, small_jump, decided_by })
}

/// Quadrature misreads `z² log(1/z)` against densities close to `z⁻³` as
/// divergent. When `β < 2` the bound `z² log(1/z) ≤ z^{2-δ}/(eδ)` with
/// `2 − δ` between `β` and 2 settles convergence exactly.
fn clause_ii_bound(levy: &LevyMeasure, quad: Improper) -> Improper {
    if quad.is_finite() {
        return quad;
    }
    let beta = levy.bg_index().value;
    if !(beta < 2.0) {
        return quad;
    }
    let p = 0.5 * (beta.max(0.0) + 2.0);
    let m = levy.partial_moment(p, Region::SMALL, Side::Both);
    if !m.is_finite() {
        return quad;
    }
    let bound = m.value / (std::f64::consts::E * (2.0 - p));
    Improper { error: bound, ..Improper::finite(bound) }
}

/// `U(y)` for `y > 0`.
fn u_fn(levy: &LevyMeasure, a: f64, y: f64) -> f64 {
    let m = if y <= 1.0 {
        levy.signed_first_moment(Region::new(1.0, 1.0 / y))
    } else {
        levy.signed_first_moment(Region::new(1.0 / y, 1.0))
    };
    let m = if m.is_finite() { m.value } else { f64::INFINITY };
    if y <= 1.0 { a * y + y * m } else { a * y - y * m }
}

/// `V₀(y) = ∫ (1 ∧ y²z²) λ(dz)`.
fn v0_fn(levy: &LevyMeasure, y: f64) -> f64 {
    let small = levy.partial_moment(2.0, Region::below(1.0 / y), Side::Both);
    let small = if small.is_finite() { small.value } else { f64::INFINITY };
    y * y * small + levy.tail_mass(1.0 / y, Side::Both)
}

/// Integrability of the kernel against the Lévy basis.
pub fn check_existence(a: f64, b: f64, levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily) -> Result<ExistenceReport> {
    let opts = QuadOptions::default();
    let f1 = f1_moment(mixing, kernel, 1.0);
    let terms = [
        ("U", kernel_profile(kernel, |y| u_fn(levy, a, y).abs(), false, &opts)),
        ("b_f_squared", if b == 0.0 { Improper::finite(0.0) } else { kernel_profile(kernel, |y| y * y, false, &opts).scaled(b) }),
        ("V0", kernel_profile(kernel, |y| v0_fn(levy, y), false, &opts)),
    ]
    .map(|(name, profile)| NamedIntegral { name, integral: product(profile, f1).into() });
    let failing = terms.iter().find(|t| !t.integral.convergent).map(|t| t.name);
    let supfou = match kernel.spec() {
        KernelSpec::Supfou { kappa } => Some(check_supfou_existence(*kappa, levy, mixing)?),
        _ => None,
    };
    let exists = match &supfou {
        Some(s) => s.exists,
        None => failing.is_none(),
    };
    Ok(ExistenceReport { exists, f1_integral: f1.into(), terms: terms.to_vec(), failing, supfou })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FubiniCheck {
    pub name: &'static str,
    /// `None` when neither a sufficient condition nor quadrature could decide.
    pub holds: Option<bool>,
    /// `"bounded-f"`, `"finite-pi"`, `"non-increasing"`, `"quadrature"`,
    /// `"majorant"` or `"unsupported"`.
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<IntegralValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FubiniReport {
    pub holds: bool,
    /// `E|X(1)| < ∞`, via `∫∫∫ |z| f 𝟙(|z| f > 1) dλ ds dπ`.
    pub mean_finite: bool,
    pub mean_integral: IntegralValue,
    /// `(∫ |z| λ(dz)) ∫ f₁ dπ`.
    pub jump_first_moment: IntegralValue,
    pub conditions: Vec<FubiniCheck>,
    /// `∫_{x>1} ∫_{|z|>1} (1 ∧ |z|/x) λ(dz) π(dx)`, evaluated when `E|X(1)| = ∞`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supou_sufficient: Option<IntegralValue>,
    /// The previous integral is only advisory for kernels other than supOU
    /// and supfOU.
    pub supou_sufficient_advisory: bool,
}

fn finite_or_inf(r: Improper) -> f64 {
    if r.is_finite() { r.value } else { f64::INFINITY }
}

/// `c ∫_{1<|z|≤1/c} |z| λ(dz) + λ̄(max(1, 1/c))`, i.e. `∫_{|z|>1} (1 ∧ |z| c) λ(dz)`.
fn big_jump_truncated(levy: &LevyMeasure, c: f64) -> f64 {
    if c >= 1.0 {
        return levy.tail_mass(1.0, Side::Both);
    }
    c * finite_or_inf(levy.partial_moment(1.0, Region::new(1.0, 1.0 / c), Side::Both)) + levy.tail_mass(1.0 / c, Side::Both)
}

/// The interchange conditions for `∫_0^t` and the stochastic integral.
pub fn check_fubini(_a: f64, _b: f64, levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily) -> Result<FubiniReport> {
    let opts = QuadOptions::default();
    let f1 = f1_moment(mixing, kernel, 1.0);

    let mean_profile = kernel_profile(kernel, |y| y * finite_or_inf(levy.partial_moment(1.0, Region::above(1.0 / y), Side::Both)), false, &opts);
    let mean_integral = IntegralValue::from(product(mean_profile, f1));
    let jump_first_moment = IntegralValue::from(product(levy.partial_moment(1.0, Region::ALL, Side::Both), f1));

    let bounded = (0..8).all(|i| kernel.sup_f(10f64.powi(i - 4)).is_finite());
    let cond1 = if bounded {
        FubiniCheck { name: "small-jumps", holds: Some(true), method: "bounded-f", value: None }
    } else {
        let p = kernel_profile(
            kernel,
            |y| if y <= 1.0 { 0.0 } else { y * finite_or_inf(levy.partial_moment(1.0, Region::new(1.0 / y, 1.0), Side::Both)) },
            false,
            &opts,
        );
        let v = IntegralValue::from(product(p, f1));
        FubiniCheck { name: "small-jumps", holds: Some(v.convergent), method: "quadrature", value: Some(v) }
    };

    let cond2 = if mixing.is_finite() {
        FubiniCheck { name: "big-jumps-fast", holds: Some(true), method: "finite-pi", value: None }
    } else {
        let v = IntegralValue::from(integrate_over_f1(mixing, kernel, 0.0, 1.0, |c| big_jump_truncated(levy, c), &opts));
        FubiniCheck { name: "big-jumps-fast", holds: Some(v.convergent), method: "quadrature", value: Some(v) }
    };

    let cond3 = if kernel.is_non_increasing() {
        FubiniCheck { name: "majorant", holds: Some(true), method: "non-increasing", value: None }
    } else if kernel.fubini_majorant(1.0, 1.0).is_err() {
        FubiniCheck { name: "majorant", holds: None, method: "unsupported", value: None }
    } else {
        let p = kernel_profile(kernel, |y| big_jump_truncated(levy, y), true, &opts);
        let v = IntegralValue::from(product(p, f1));
        FubiniCheck { name: "majorant", holds: Some(v.convergent), method: "majorant", value: Some(v) }
    };

    let conditions = vec![cond1, cond2, cond3];
    let all_hold = conditions.iter().all(|c| c.holds == Some(true));
    let mean_finite = mean_integral.convergent;
    let superposition = matches!(kernel.spec(), KernelSpec::Supou {} | KernelSpec::Supfou { .. });
    let supou_sufficient = (!mean_finite).then(|| {
        let phi = |x: f64| big_jump_truncated(levy, 1.0 / x);
        IntegralValue::from(mixing.integrate_with(phi, Region::above(1.0), &mixing.breaks(), &opts))
    });
    Ok(FubiniReport {
        holds: mean_finite || all_hold,
        mean_finite,
        mean_integral,
        jump_first_moment,
        conditions,
        supou_sufficient,
        supou_sufficient_advisory: !superposition,
    })
}
