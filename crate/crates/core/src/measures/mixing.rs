//! Mixing measures `π` on `V = (0, ∞)`.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::{Ext, Region};
use crate::error::{Error, Result};
use crate::quadrature::{self, Endpoint, Improper, QuadOptions};
use crate::special::{ln_gamma, upper_gamma};

fn one() -> f64 {
    1.0
}

fn zero_ext() -> Ext {
    Ext(0.0)
}

fn inf_ext() -> Ext {
    Ext::INF
}

/// Declarative description of a mixing measure, as written in model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MixingMeasureSpec {
    /// Point masses `[x, mass]`.
    FiniteAtoms { atoms: Vec<[f64; 2]> },
    /// Density `scale · x^{power}` on `(lo, hi)`; `power = 0` is Lebesgue.
    PowerDensity {
        power: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "zero_ext")]
        lo: Ext,
        #[serde(default = "inf_ext")]
        hi: Ext,
    },
    /// Lebesgue measure on `(lo, hi)`.
    Lebesgue {
        #[serde(default = "zero_ext")]
        lo: Ext,
        hi: Ext,
    },
    /// Density `scale · x^{p0} (1 + x)^{-(p0 + p_inf)}`: behaves like `x^{p0}`
    /// near 0 and `x^{-p_inf}` near infinity.
    Density {
        p0: f64,
        p_inf: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `mass ·` Gamma(shape, rate) law.
    GammaDensity {
        shape: f64,
        rate: f64,
        #[serde(default = "one")]
        mass: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Atoms(Vec<(f64, f64)>),
    /// `c x^p` on `(lo, hi)`.
    Power { c: f64, p: f64, lo: f64, hi: f64 },
    /// `c x^{p0} (1+x)^{-(p0+pinf)}`.
    TwoPower { c: f64, p0: f64, pinf: f64 },
    /// `c x^{k-1} e^{-r x}`.
    Gamma { c: f64, k: f64, rate: f64 },
}

/// A validated σ-finite measure on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMeasure {
    spec: Option<MixingMeasureSpec>,
    shape: Shape,
}

fn check_pos(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 { Ok(()) } else { Err(Error::invalid(key, format!("must be positive and finite, got {v}"))) }
}

/// `∫_{r1}^{r2} c x^{e-1} dx`.
fn power_integral(c: f64, e: f64, r1: f64, r2: f64) -> Improper {
    if r2 <= r1 {
        return Improper::finite(0.0);
    }
    if r1 == 0.0 && e <= 0.0 {
        return Improper::divergent(Endpoint::Zero);
    }
    if r2.is_infinite() && e >= 0.0 {
        return Improper::divergent(Endpoint::Infinity);
    }
    if e == 0.0 {
        return Improper::finite(c * (r2 / r1).ln());
    }
    let hi = if r2.is_infinite() { 0.0 } else { r2.powf(e) };
    let lo = if r1 == 0.0 { 0.0 } else { r1.powf(e) };
    Improper::finite(c * (hi - lo) / e)
}

impl MixingMeasureSpec {
    pub fn build(&self) -> Result<MixingMeasure> {
        let shape = match self {
            MixingMeasureSpec::FiniteAtoms { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::invalid("mixing.atoms", "at least one atom is required"));
                }
                let mut out = Vec::new();
                for (i, &[x, m]) in atoms.iter().enumerate() {
                    if !(x.is_finite() && x > 0.0) {
                        return Err(Error::invalid(format!("mixing.atoms[{i}]"), "location must be positive and finite"));
                    }
                    if !(m.is_finite() && m > 0.0) {
                        return Err(Error::invalid(format!("mixing.atoms[{i}]"), "mass must be positive and finite"));
                    }
                    out.push((x, m));
                }
                out.sort_by(|a, b| a.0.total_cmp(&b.0));
                Shape::Atoms(out)
            }
            MixingMeasureSpec::PowerDensity { power, scale, lo, hi } => {
                check_pos("mixing.scale", *scale)?;
                if !power.is_finite() {
                    return Err(Error::invalid("mixing.power", "must be finite"));
                }
                if !(lo.0 >= 0.0 && hi.0 > lo.0 && lo.0.is_finite()) {
                    return Err(Error::invalid("mixing.lo", format!("need 0 <= lo < hi, got ({}, {})", lo.0, hi.0)));
                }
                Shape::Power { c: *scale, p: *power, lo: lo.0, hi: hi.0 }
            }
            MixingMeasureSpec::Lebesgue { lo, hi } => {
                if !(lo.0 >= 0.0 && hi.0 > lo.0 && lo.0.is_finite()) {
                    return Err(Error::invalid("mixing.hi", format!("need 0 <= lo < hi, got ({}, {})", lo.0, hi.0)));
                }
                Shape::Power { c: 1.0, p: 0.0, lo: lo.0, hi: hi.0 }
            }
            MixingMeasureSpec::Density { p0, p_inf, scale } => {
                check_pos("mixing.scale", *scale)?;
                if !(p0.is_finite() && p_inf.is_finite()) {
                    return Err(Error::invalid("mixing.p0", "exponents must be finite"));
                }
                Shape::TwoPower { c: *scale, p0: *p0, pinf: *p_inf }
            }
            MixingMeasureSpec::GammaDensity { shape, rate, mass } => {
                check_pos("mixing.shape", *shape)?;
                check_pos("mixing.rate", *rate)?;
                check_pos("mixing.mass", *mass)?;
                Shape::Gamma { c: mass * (shape * rate.ln() - ln_gamma(*shape)).exp(), k: *shape, rate: *rate }
            }
        };
        Ok(MixingMeasure { spec: Some(self.clone()), shape })
    }
}

impl MixingMeasure {
    /// Unit point mass at `x`.
    pub fn atom(x: f64) -> Self {
        MixingMeasure { spec: Some(MixingMeasureSpec::FiniteAtoms { atoms: vec![[x, 1.0]] }), shape: Shape::Atoms(vec![(x, 1.0)]) }
    }

    pub fn spec(&self) -> Option<&MixingMeasureSpec> {
        self.spec.as_ref()
    }

    pub fn atoms(&self) -> Option<&[(f64, f64)]> {
        match &self.shape {
            Shape::Atoms(a) => Some(a),
            _ => None,
        }
    }

    /// Support as a closed interval hull.
    pub fn support(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Atoms(a) => (a[0].0, a[a.len() - 1].0),
            Shape::Power { lo, hi, .. } => (*lo, *hi),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Is this Lebesgue measure on `(0, hi]`?
    pub fn is_lebesgue_from_zero(&self) -> Option<f64> {
        match self.shape {
            Shape::Power { c, p, lo, hi } if c == 1.0 && p == 0.0 && lo == 0.0 => Some(hi),
            _ => None,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Atoms(_) => 0.0,
            Shape::Power { c, p, lo, hi } => {
                if x > *lo && x < *hi { c * x.powf(*p) } else { 0.0 }
            }
            Shape::TwoPower { c, p0, pinf } => c * x.powf(*p0) * (1.0 + x).powf(-(p0 + pinf)),
            Shape::Gamma { c, k, rate } => c * x.powf(k - 1.0) * (-rate * x).exp(),
        }
    }

    /// `m_p` restricted to `region`.
    pub fn partial_moment(&self, p: f64, region: Region) -> Improper {
        match &self.shape {
            Shape::Atoms(a) => Improper::finite(a.iter().filter(|(x, _)| region.contains(*x)).map(|(x, m)| m * x.powf(p)).sum()),
            Shape::Power { c, p: q, lo, hi } => match region.clip(*lo, *hi) {
                Some((l, h)) => power_integral(*c, p + q + 1.0, l, h),
                None => Improper::finite(0.0),
            },
            Shape::TwoPower { c, p0, pinf } => {
                let (l, h) = (region.lo, region.hi);
                if l == 0.0 && p + p0 <= -1.0 {
                    return Improper::divergent(Endpoint::Zero);
                }
                if h.is_infinite() && p - pinf >= -1.0 {
                    return Improper::divergent(Endpoint::Infinity);
                }
                if l == 0.0 && h.is_infinite() {
                    let (a, b) = (p + p0 + 1.0, pinf - p - 1.0);
                    return Improper::finite(c * (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp());
                }
                self.integrate(|x| x.powf(p), region, &QuadOptions::default())
            }
            Shape::Gamma { c, k, rate } => {
                let s = p + k;
                if region.lo == 0.0 && s <= 0.0 {
                    return Improper::divergent(Endpoint::Zero);
                }
                let v = upper_gamma(s, rate * region.lo) - upper_gamma(s, rate * region.hi);
                Improper::finite(c * rate.powf(-s) * v.max(0.0))
            }
        }
    }

    pub fn moment(&self, p: f64) -> Improper {
        self.partial_moment(p, Region::ALL)
    }

    pub fn total_mass(&self) -> f64 {
        let r = self.moment(0.0);
        if r.is_finite() { r.value } else { f64::INFINITY }
    }

    pub fn is_finite(&self) -> bool {
        self.total_mass().is_finite()
    }

    /// `∫_{region} φ dπ` for non-negative `φ`, with divergence detection at
    /// improper endpoints. `breaks` are interior points where `φ` has kinks.
    pub fn integrate_with<F: Fn(f64) -> f64>(&self, phi: F, region: Region, breaks: &[f64], opts: &QuadOptions) -> Improper {
        match &self.shape {
            Shape::Atoms(a) => Improper::finite(a.iter().filter(|(x, _)| region.contains(*x)).map(|(x, m)| m * phi(*x)).sum()),
            _ => {
                let (slo, shi) = self.support();
                let Some((lo, hi)) = region.clip(slo, shi) else {
                    return Improper::finite(0.0);
                };
                let mut br: Vec<f64> = breaks.to_vec();
                br.extend([slo, shi].into_iter().filter(|v| *v > 0.0 && v.is_finite()));
                quadrature::integrate_positive(|x| phi(x) * self.density(x), lo, hi, &br, 1.0, opts)
            }
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F, region: Region, opts: &QuadOptions) -> Improper {
        self.integrate_with(phi, region, &[], opts)
    }

    /// The measure `x^q π(dx)`.
    pub fn power_tilted(&self, q: f64) -> MixingMeasure {
        let shape = match &self.shape {
            Shape::Atoms(a) => Shape::Atoms(a.iter().map(|(x, m)| (*x, m * x.powf(q))).collect()),
            Shape::Power { c, p, lo, hi } => Shape::Power { c: *c, p: p + q, lo: *lo, hi: *hi },
            Shape::TwoPower { c, p0, pinf } => Shape::TwoPower { c: *c, p0: p0 + q, pinf: pinf - q },
            Shape::Gamma { c, k, rate } => Shape::Gamma { c: *c, k: k + q, rate: *rate },
        };
        MixingMeasure { spec: None, shape }
    }

    /// A draw from `π / π(V)`; requires a finite measure.
    pub fn sampler(&self) -> Result<MixingSampler> {
        let total = self.total_mass();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Divergent { what: "total mass of the mixing measure".into(), endpoint: self.moment(0.0).divergent_at });
        }
        let kind = match &self.shape {
            Shape::Atoms(a) => {
                let mut acc = 0.0;
                let cum = a
                    .iter()
                    .map(|(_, m)| {
                        acc += m;
                        acc
                    })
                    .collect();
                SamplerKind::Atoms { xs: a.iter().map(|p| p.0).collect(), cum }
            }
            Shape::Power { p, lo, hi, .. } => SamplerKind::Power { e: p + 1.0, lo: *lo, hi: *hi },
            Shape::TwoPower { p0, pinf, .. } => SamplerKind::BetaPrime(
                Beta::new(p0 + 1.0, pinf - 1.0).map_err(|e| Error::invalid("mixing", e.to_string()))?,
            ),
            Shape::Gamma { k, rate, .. } => {
                SamplerKind::Gamma(Gamma::new(*k, 1.0 / rate).map_err(|e| Error::invalid("mixing", e.to_string()))?)
            }
        };
        Ok(MixingSampler { total, kind })
    }

    /// Breakpoints of the density (support ends, atoms).
    pub fn breaks(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Atoms(a) => a.iter().map(|p| p.0).collect(),
            Shape::Power { lo, hi, .. } => [*lo, *hi].into_iter().filter(|v| *v > 0.0 && v.is_finite()).collect(),
            _ => Vec::new(),
        }
    }

    /// Declared exponents `(p0, p_inf)` of the density near 0 and near
    /// infinity (`x^{p0}` and `x^{-p_inf}`); `None` where the support stops
    /// short of that end.
    pub fn declared_exponents(&self) -> (Option<f64>, Option<f64>) {
        match &self.shape {
            Shape::Atoms(_) => (None, None),
            Shape::Power { p, lo, hi, .. } => ((*lo == 0.0).then_some(*p), hi.is_infinite().then_some(-p)),
            Shape::TwoPower { p0, pinf, .. } => (Some(*p0), Some(*pinf)),
            Shape::Gamma { k, .. } => (Some(k - 1.0), None),
        }
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Atoms { xs: Vec<f64>, cum: Vec<f64> },
    Power { e: f64, lo: f64, hi: f64 },
    BetaPrime(Beta<f64>),
    Gamma(Gamma<f64>),
}

#[derive(Debug, Clone)]
pub struct MixingSampler {
    total: f64,
    kind: SamplerKind,
}

impl MixingSampler {
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Atoms { xs, cum } => {
                let u = rng.random::<f64>() * cum[cum.len() - 1];
                xs[cum.partition_point(|&c| c <= u).min(xs.len() - 1)]
            }
            SamplerKind::Power { e, lo, hi } => {
                let u = rng.random::<f64>();
                let x = if *e == 0.0 {
                    lo * (hi / lo).powf(u)
                } else {
                    let a = if *lo == 0.0 { 0.0 } else { lo.powf(*e) };
                    let b = if hi.is_infinite() { 0.0 } else { hi.powf(*e) };
                    (a + u * (b - a)).powf(1.0 / e)
                };
                // keep strictly inside the support
                if x <= *lo { lo.max(f64::MIN_POSITIVE) * (1.0 + f64::EPSILON) } else { x.min(*hi) }
            }
            SamplerKind::BetaPrime(b) => {
                let y: f64 = b.sample(rng);
                (y / (1.0 - y)).max(f64::MIN_POSITIVE)
            }
            SamplerKind::Gamma(g) => g.sample(rng).max(f64::MIN_POSITIVE),
        }
    }
}
