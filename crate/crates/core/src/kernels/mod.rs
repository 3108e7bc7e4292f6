//! Kernel families `f(x, v)` with their derived functions
//! `f₁(x) = ∫_0^∞ f(x, v) dv` and `f₂(x, u) = ∫_u^∞ f(x, v) dv`.
//!
//! Every kernel is causal: `f(x, v) = 0` for `v < 0`. Moving-average
//! variants ignore `x`.

pub mod assumptions;
pub mod trawl;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::table::parse_two_column_csv;
use crate::quadrature::{integrate_positive, QuadOptions};
use crate::special::{gamma_p, gamma_q, gamma_q_inv, ln_gamma};

pub use assumptions::{check_assumption1, check_assumption2, AssumptionReport, Violation};
pub use trawl::{TrawlFunction, TrawlFunctionSpec};

/// Operations shared by every kernel. Implementations outside this crate
/// are accepted by the assumption checkers.
pub trait Kernel: Send + Sync {
    fn f(&self, x: f64, v: f64) -> f64;

    fn f1(&self, x: f64) -> f64;

    fn f2(&self, x: f64, u: f64) -> f64;

    /// `f₂^←(x, w) = inf{u ≥ 0 : f₂(x, u) ≤ w}` for `0 < w ≤ f₁(x)`.
    fn f2_inverse(&self, x: f64, w: f64) -> Result<f64> {
        let f1 = check_inverse_arg(self.f1(x), w)?;
        if w >= f1 {
            return Ok(0.0);
        }
        let mut hi = f1.max(f64::MIN_POSITIVE);
        while self.f2(x, hi) > w {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Numerical("f2 does not decay below the requested level".into()));
            }
        }
        let mut lo = 0.0;
        let tol = 1e-10 * f1;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.f2(x, mid) > w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// `f₂(x, u) − f₂(x, u + t)`, computed without cancellation where possible.
    fn f2_diff(&self, x: f64, u: f64, t: f64) -> f64 {
        (self.f2(x, u) - self.f2(x, u + t)).max(0.0)
    }

    /// `f₁(x) − f₂(x, u) = ∫_0^u f(x, v) dv`.
    fn f1_minus_f2(&self, x: f64, u: f64) -> f64 {
        (self.f1(x) - self.f2(x, u)).max(0.0)
    }

    /// `∫_u^∞ f₂(x, v) dv`.
    fn f3(&self, x: f64, u: f64) -> f64 {
        let f1 = self.f1(x);
        let r = integrate_positive(|v| self.f2(x, v), u, f64::INFINITY, &self.breaks(x), f1, &QuadOptions::with_rel_tol(1e-10));
        r.value
    }

    /// Points in `v` where `f(x, ·)` has a kink or jump.
    fn breaks(&self, _x: f64) -> Vec<f64> {
        Vec::new()
    }

    /// A function `g(x, s)` bounding `t⁻¹ ∫_0^t f(x, u + s) du` for all `t > 0`.
    fn fubini_majorant(&self, _x: f64, _s: f64) -> Result<f64> {
        Err(Error::Unsupported("this kernel has no declared Fubini majorant".into()))
    }

    fn is_non_increasing(&self) -> bool {
        false
    }

    /// `sup_v f(x, v)`.
    fn sup_f(&self, x: f64) -> f64;
}

pub(crate) fn check_inverse_arg(f1: f64, w: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::invalid("w", "must be positive; the inverse at 0 is +infinity"));
    }
    if w > f1 * (1.0 + 1e-12) {
        return Err(Error::invalid("w", format!("{w} exceeds f1(x) = {f1}")));
    }
    Ok(f1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `f(x, v) = e^{-xv}`.
    Supou {},
    /// `f(x, v) = 𝟙(x ≤ ψ(v))` on `V = (0, ψ(0)]`.
    Trawl { psi: TrawlFunctionSpec },
    /// `f(x, v) = (xv)^{κ-1} e^{-xv} / Γ(κ)`.
    Supfou { kappa: f64 },
    /// `f(v) = e^{-νv}`.
    MaExponential { nu: f64 },
    /// `f(v) = (νv)^{κ-1} e^{-νv} / Γ(κ)`, `κ > 1`.
    MaGamma { nu: f64, kappa: f64 },
    /// `f(v) = 𝟙(0 ≤ v < q)`.
    MaBox { q: f64 },
    /// `f(v) = (1 − v/q)⁺`.
    MaTriangle { q: f64 },
}

/// A validated kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFamily {
    spec: KernelSpec,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Supou,
    Supfou { kappa: f64, ln_g: f64 },
    Trawl(TrawlFunction),
    MaExp { nu: f64 },
    MaGamma { nu: f64, kappa: f64, ln_g: f64 },
    Box { q: f64 },
    Triangle { q: f64 },
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(key, "must be positive and finite"))
    }
}

impl KernelSpec {
    pub fn build(&self) -> Result<KernelFamily> {
        let kind = match self {
            KernelSpec::Supou {} => Kind::Supou,
            KernelSpec::Trawl { psi } => Kind::Trawl(psi.build()?),
            KernelSpec::Supfou { kappa } => {
                let kappa = positive("kernel.kappa", *kappa)?;
                Kind::Supfou { kappa, ln_g: ln_gamma(kappa) }
            }
            KernelSpec::MaExponential { nu } => Kind::MaExp { nu: positive("kernel.nu", *nu)? },
            KernelSpec::MaGamma { nu, kappa } => {
                let nu = positive("kernel.nu", *nu)?;
                let kappa = positive("kernel.kappa", *kappa)?;
                if kappa <= 1.0 {
                    return Err(Error::invalid("kernel.kappa", "ma-gamma requires kappa > 1"));
                }
                Kind::MaGamma { nu, kappa, ln_g: ln_gamma(kappa) }
            }
            KernelSpec::MaBox { q } => Kind::Box { q: positive("kernel.q", *q)? },
            KernelSpec::MaTriangle { q } => Kind::Triangle { q: positive("kernel.q", *q)? },
        };
        Ok(KernelFamily { spec: self.clone(), kind })
    }
}

/// Parse a two-column `v, ψ(v)` CSV into a trawl function.
pub fn parse_psi_table(text: &str) -> Result<TrawlFunction> {
    let rows = parse_two_column_csv(text, "kernel.psi.points")?;
    TrawlFunction::table(&rows)
}

fn gamma_density(kappa: f64, ln_g: f64, y: f64) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    if y == 0.0 {
        return match kappa.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => (-ln_g).exp(),
            _ => 0.0,
        };
    }
    ((kappa - 1.0) * y.ln() - y - ln_g).exp()
}

/// `∫_y^∞ Q(κ, s) ds = (κ − y) Q(κ, y) + y^κ e^{-y} / Γ(κ)`.
fn gamma_q_integral(kappa: f64, ln_g: f64, y: f64) -> f64 {
    let y = y.max(0.0);
    let tail = if y > 0.0 { (kappa * y.ln() - y - ln_g).exp() } else { 0.0 };
    ((kappa - y) * gamma_q(kappa, y) + tail).max(0.0)
}

fn gamma_q_diff(kappa: f64, y0: f64, y1: f64) -> f64 {
    if y1 < kappa + 1.0 {
        (gamma_p(kappa, y1) - gamma_p(kappa, y0)).max(0.0)
    } else {
        (gamma_q(kappa, y0) - gamma_q(kappa, y1)).max(0.0)
    }
}

impl KernelFamily {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn name(&self) -> &'static str {
        match self.spec {
            KernelSpec::Supou {} => "supou",
            KernelSpec::Trawl { .. } => "trawl",
            KernelSpec::Supfou { .. } => "supfou",
            KernelSpec::MaExponential { .. } => "ma-exponential",
            KernelSpec::MaGamma { .. } => "ma-gamma",
            KernelSpec::MaBox { .. } => "ma-box",
            KernelSpec::MaTriangle { .. } => "ma-triangle",
        }
    }

    /// Moving-average kernels do not depend on `x`.
    pub fn is_moving_average(&self) -> bool {
        matches!(self.kind, Kind::MaExp { .. } | Kind::MaGamma { .. } | Kind::Box { .. } | Kind::Triangle { .. })
    }

    /// `(lo, hi)` such that `V = (lo, hi]`; for moving averages `V` is a
    /// single point and `(1, 1)` is returned.
    pub fn v_domain(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Supou | Kind::Supfou { .. } => (0.0, f64::INFINITY),
            Kind::Trawl(psi) => (0.0, psi.psi0()),
            _ => (1.0, 1.0),
        }
    }

    pub fn trawl_function(&self) -> Option<&TrawlFunction> {
        match &self.kind {
            Kind::Trawl(psi) => Some(psi),
            _ => None,
        }
    }

    /// `κ` for the gamma-shaped kernels.
    pub fn kappa(&self) -> Option<f64> {
        match self.kind {
            Kind::Supfou { kappa, .. } | Kind::MaGamma { kappa, .. } => Some(kappa),
            Kind::Supou | Kind::MaExp { .. } => Some(1.0),
            _ => None,
        }
    }

    /// Rate `x` for the exponential and gamma shapes (the fixed `ν` for
    /// moving averages).
    fn rate(&self, x: f64) -> f64 {
        match self.kind {
            Kind::MaExp { nu } | Kind::MaGamma { nu, .. } => nu,
            _ => x,
        }
    }

    /// `f₂(x, H) ≤ tol·f₁(x)` for all `H` at or beyond the returned value.
    pub fn maturity(&self, x: f64, tol: f64) -> f64 {
        let f1 = self.f1(x);
        match self.f2_inverse(x, tol * f1) {
            Ok(h) => h,
            Err(_) => f64::INFINITY,
        }
    }
}

impl Kernel for KernelFamily {
    fn f(&self, x: f64, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Supou | Kind::MaExp { .. } => (-self.rate(x) * v).exp(),
            Kind::Supfou { kappa, ln_g } | Kind::MaGamma { kappa, ln_g, .. } => {
                gamma_density(*kappa, *ln_g, self.rate(x) * v)
            }
            Kind::Trawl(psi) => {
                if x <= psi.psi(v) {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Box { q } => {
                if v < *q {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Triangle { q } => (1.0 - v / q).max(0.0),
        }
    }

    fn f1(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Supou | Kind::MaExp { .. } | Kind::Supfou { .. } | Kind::MaGamma { .. } => 1.0 / self.rate(x),
            Kind::Trawl(psi) => psi.inverse_left(x),
            Kind::Box { q } => *q,
            Kind::Triangle { q } => 0.5 * q,
        }
    }

    fn f2(&self, x: f64, u: f64) -> f64 {
        let u = u.max(0.0);
        match &self.kind {
            Kind::Supou | Kind::MaExp { .. } => {
                let r = self.rate(x);
                (-r * u).exp() / r
            }
            Kind::Supfou { kappa, .. } | Kind::MaGamma { kappa, .. } => {
                let r = self.rate(x);
                gamma_q(*kappa, r * u) / r
            }
            Kind::Trawl(_) | Kind::Box { .. } => (self.f1(x) - u).max(0.0),
            Kind::Triangle { q } => {
                let s = (1.0 - u / q).max(0.0);
                0.5 * q * s * s
            }
        }
    }

    fn f2_inverse(&self, x: f64, w: f64) -> Result<f64> {
        let f1 = check_inverse_arg(self.f1(x), w)?;
        if w >= f1 {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            Kind::Supou | Kind::MaExp { .. } => {
                let r = self.rate(x);
                (-(r * w).ln() / r).max(0.0)
            }
            Kind::Supfou { kappa, .. } | Kind::MaGamma { kappa, .. } => {
                let r = self.rate(x);
                gamma_q_inv(*kappa, r * w) / r
            }
            Kind::Trawl(_) | Kind::Box { .. } => f1 - w,
            Kind::Triangle { q } => q * (1.0 - (2.0 * w / q).sqrt()).max(0.0),
        })
    }

    fn f2_diff(&self, x: f64, u: f64, t: f64) -> f64 {
        let u = u.max(0.0);
        match &self.kind {
            Kind::Supou | Kind::MaExp { .. } => {
                let r = self.rate(x);
                (-r * u).exp() * (-(-r * t).exp_m1()) / r
            }
            Kind::Supfou { kappa, .. } | Kind::MaGamma { kappa, .. } => {
                let r = self.rate(x);
                gamma_q_diff(*kappa, r * u, r * (u + t)) / r
            }
            Kind::Trawl(_) | Kind::Box { .. } => {
                let f1 = self.f1(x);
                (f1 - u).max(0.0) - (f1 - u - t).max(0.0)
            }
            Kind::Triangle { .. } => (self.f2(x, u) - self.f2(x, u + t)).max(0.0),
        }
    }

    fn f1_minus_f2(&self, x: f64, u: f64) -> f64 {
        let u = u.max(0.0);
        match &self.kind {
            Kind::Supou | Kind::MaExp { .. } => {
                let r = self.rate(x);
                -(-r * u).exp_m1() / r
            }
            Kind::Supfou { kappa, .. } | Kind::MaGamma { kappa, .. } => {
                let r = self.rate(x);
                gamma_p(*kappa, r * u) / r
            }
            Kind::Trawl(_) | Kind::Box { .. } => u.min(self.f1(x)),
            Kind::Triangle { q } => {
                let s = (1.0 - u / q).max(0.0);
                0.5 * q * (1.0 - s * s)
            }
        }
    }

    fn f3(&self, x: f64, u: f64) -> f64 {
        let u = u.max(0.0);
        match &self.kind {
            Kind::Supou | Kind::MaExp { .. } => {
                let r = self.rate(x);
                (-r * u).exp() / (r * r)
            }
            Kind::Supfou { kappa, ln_g } | Kind::MaGamma { kappa, ln_g, .. } => {
                let r = self.rate(x);
                gamma_q_integral(*kappa, *ln_g, r * u) / (r * r)
            }
            Kind::Trawl(_) | Kind::Box { .. } => {
                let d = (self.f1(x) - u).max(0.0);
                0.5 * d * d
            }
            Kind::Triangle { q } => {
                let s = (1.0 - u / q).max(0.0);
                q * q * s * s * s / 6.0
            }
        }
    }

    fn breaks(&self, x: f64) -> Vec<f64> {
        match &self.kind {
            Kind::Trawl(_) | Kind::Box { .. } => {
                let f1 = self.f1(x);
                if f1.is_finite() && f1 > 0.0 {
                    vec![f1]
                } else {
                    Vec::new()
                }
            }
            Kind::Triangle { q } => vec![*q],
            Kind::Supfou { kappa, .. } | Kind::MaGamma { kappa, .. } if *kappa > 1.0 => {
                vec![(kappa - 1.0) / self.rate(x)]
            }
            _ => Vec::new(),
        }
    }

    fn fubini_majorant(&self, x: f64, s: f64) -> Result<f64> {
        match self.kind {
            Kind::Supfou { kappa, ln_g } | Kind::MaGamma { kappa, ln_g, .. } if kappa > 1.0 => {
                let r = self.rate(x);
                let mode = (kappa - 1.0) / r;
                if s <= mode {
                    Ok(gamma_density(kappa, ln_g, kappa - 1.0))
                } else {
                    Ok(self.f(x, s))
                }
            }
            _ => Ok(self.f(x, s)),
        }
    }

    fn is_non_increasing(&self) -> bool {
        match self.kind {
            Kind::Supfou { kappa, .. } => kappa <= 1.0,
            Kind::MaGamma { .. } => false,
            _ => true,
        }
    }

    fn sup_f(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Supfou { kappa, ln_g } | Kind::MaGamma { kappa, ln_g, .. } => {
                if *kappa < 1.0 {
                    f64::INFINITY
                } else {
                    gamma_density(*kappa, *ln_g, kappa - 1.0)
                }
            }
            Kind::Trawl(psi) => {
                if x <= psi.psi0() {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 1.0,
        }
    }
}
