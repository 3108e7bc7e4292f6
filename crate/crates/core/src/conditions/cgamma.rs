use serde::Serialize;

use super::{integrate_over_f1, product, IntegralValue};
use crate::error::{Error, Result};
use crate::kernels::KernelFamily;
use crate::measures::{LevyMeasure, MixingMeasure, Region, Side};
use crate::quadrature::{self, Endpoint, Improper, QuadOptions};

/// One of the three pieces of `(C_γ)` split at `f₁ = 1` and `|z| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    /// `"slow-small"`: `f₁ > 1`, `|z| ≤ 1`; `"slow-large"`: `f₁ > 1`,
    /// `|z| > 1`; `"fast"`: `f₁ ≤ 1`.
    pub name: &'static str,
    #[serde(flatten)]
    pub integral: IntegralValue,
    /// `"pi"` or `"lambda"`: which measure's integral blew up.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverging_measure: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub gamma: f64,
    #[serde(flatten)]
    pub integral: IntegralValue,
    pub terms: Vec<Term>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverging_term: Option<&'static str>,
    /// Where the first diverging term blows up: `"z→∞"` for the Lévy tail,
    /// `"f₁→∞"` or `"f₁→0"` for the mixing side.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<&'static str>,
}

impl ConditionReport {
    pub fn convergent(&self) -> bool {
        self.integral.convergent
    }

    pub fn value(&self) -> f64 {
        self.integral.value
    }
}

fn term(name: &'static str, r: Improper, measure: Option<&'static str>) -> Term {
    let integral = IntegralValue::from(r);
    let diverging_measure = if integral.convergent { None } else { measure.or(Some("pi")) };
    Term { name, integral, diverging_measure }
}

/// `∫∫ |z|^γ f₁(x)^γ 𝟙(|z| f₁(x) > 1) λ(dz) π(dx)` via the three-way split.
pub fn evaluate_c_gamma(levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily, gamma: f64) -> Result<ConditionReport> {
    if !(0.0..=2.0).contains(&gamma) {
        return Err(Error::invalid("gamma", format!("must lie in [0, 2], got {gamma}")));
    }
    let opts = QuadOptions::default();
    let g = gamma;

    let slow_small = integrate_over_f1(mixing, kernel, 1.0, f64::INFINITY, |c| c.powf(g) * levy.partial_moment(g, Region::new(1.0 / c, 1.0), Side::Both).value, &opts);

    let large = levy.partial_moment(g, Region::LARGE, Side::Both);
    let slow_mass = integrate_over_f1(mixing, kernel, 1.0, f64::INFINITY, |c| c.powf(g), &opts);
    let slow_large = product(slow_mass, large);
    let slow_large_measure = if !large.is_finite() && slow_large.divergent_at.is_some() { Some("lambda") } else { None };

    let (fast, fast_measure) = if large.is_finite() {
        let r = integrate_over_f1(mixing, kernel, 0.0, 1.0, |c| c.powf(g) * levy.partial_moment(g, Region::above(1.0 / c), Side::Both).value, &opts);
        (r, None)
    } else {
        // every x with 0 < f₁ ≤ 1 already sees an infinite z-integral
        let mass = integrate_over_f1(mixing, kernel, 0.0, 1.0, |_| 1.0, &opts);
        if mass.is_finite() && mass.value == 0.0 {
            (Improper::finite(0.0), None)
        } else {
            (Improper::divergent(Endpoint::Infinity), Some("lambda"))
        }
    };

    let terms = vec![
        term("slow-small", slow_small, None),
        term("slow-large", slow_large, slow_large_measure),
        term("fast", fast, fast_measure),
    ];
    let total = quadrature::add(quadrature::add(slow_small, slow_large), fast);
    let first = terms.iter().find(|t| !t.integral.convergent);
    let diverging_term = first.map(|t| t.name);
    let diagnosis = first.map(|t| match (t.name, t.diverging_measure) {
        (_, Some("lambda")) => "z→∞",
        ("fast", _) => "f₁→0",
        _ => "f₁→∞",
    });
    Ok(ConditionReport { gamma, integral: IntegralValue::from(total), terms, diverging_term, diagnosis })
}

/// The same integral without the split: one outer quadrature over `π` of
/// `f₁^γ ∫_{|z| > 1/f₁} |z|^γ λ(dz)`.
pub fn c_gamma_direct(levy: &LevyMeasure, mixing: &MixingMeasure, kernel: &KernelFamily, gamma: f64) -> IntegralValue {
    let opts = QuadOptions::default();
    if !levy.partial_moment(gamma, Region::LARGE, Side::Both).is_finite() {
        let mass = integrate_over_f1(mixing, kernel, 0.0, f64::INFINITY, |_| 1.0, &opts);
        if !(mass.is_finite() && mass.value == 0.0) {
            return IntegralValue::from(Improper::divergent(Endpoint::Infinity));
        }
    }
    let r = integrate_over_f1(mixing, kernel, 0.0, f64::INFINITY, |c| c.powf(gamma) * levy.partial_moment(gamma, Region::above(1.0 / c), Side::Both).value, &opts);
    IntegralValue::from(r)
}
