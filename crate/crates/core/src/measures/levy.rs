//! Lévy measures: parametric families, tabulated tails, and atom lists.
//!
//! Every family is stored as a list of one-sided components on `|z| > 0`,
//! each tagged with its sign. All queries work on `|z|` and add up the
//! components on the requested side.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Ext, Index, Region, Side, TailTable};
use crate::error::{Error, Result};
use crate::quadrature::{self, Endpoint, Improper, QuadOptions};
use crate::special::{gamma, gamma_p, upper_gamma};

fn one() -> f64 {
    1.0
}

fn full_support() -> [Ext; 2] {
    [Ext(0.0), Ext::INF]
}

/// Declarative description of a Lévy measure, as written in model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LevyMeasureSpec {
    /// Finite measure `rate · P(jump ∈ dz)`.
    CompoundPoisson {
        rate: f64,
        jumps: JumpDistribution,
        #[serde(default = "one")]
        sign_mix: f64,
    },
    /// Density `scale · |z|^{-1-exponent}` on `support`.
    PowerDensity {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        sign_mix: f64,
        #[serde(default = "full_support")]
        support: [Ext; 2],
    },
    /// Density `scale · |z|^{-1-exponent} e^{-tempering |z|}`.
    TemperedPower {
        exponent: f64,
        tempering: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        sign_mix: f64,
    },
    /// Density `shape · |z|^{-1} e^{-decay |z|}`.
    GammaType {
        shape: f64,
        decay: f64,
        #[serde(default = "one")]
        sign_mix: f64,
    },
    /// Point masses `[z, mass]`; an empty list is the zero measure.
    AtomList { atoms: Vec<[f64; 2]> },
    /// Tail function `λ((r, ∞))` sampled at `points = [[r, tail], ...]`.
    Tabulated {
        #[serde(default)]
        points: Vec<[f64; 2]>,
        /// CSV file with the same two columns, resolved by the config loader.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
        #[serde(default = "one")]
        sign_mix: f64,
    },
    /// The zero measure.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JumpDistribution {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Pareto { scale: f64, shape: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// `c z^{-1-a}` on `(lo, hi]`.
    Power { c: f64, a: f64, lo: f64, hi: f64 },
    /// `c z^{-1-a} e^{-θ z}` on `(0, ∞)`.
    Tempered { c: f64, a: f64, theta: f64 },
    /// `(|z|, mass)` pairs.
    Atoms(Vec<(f64, f64)>),
    Table { table: TailTable, weight: f64 },
}

#[derive(Debug, Clone, PartialEq)]
struct Component {
    positive: bool,
    shape: Shape,
}

/// A validated Lévy measure.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    spec: LevyMeasureSpec,
    comps: Vec<Component>,
}

/// `∫_{r1}^{r2} c z^{e-1} dz`.
fn power_integral(c: f64, e: f64, r1: f64, r2: f64) -> Improper {
    if r2 <= r1 || c == 0.0 {
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

/// `∫_{r1}^{r2} c z^{s-1} e^{-θz} dz`.
fn tempered_integral(c: f64, s: f64, theta: f64, r1: f64, r2: f64) -> Improper {
    if r2 <= r1 || c == 0.0 {
        return Improper::finite(0.0);
    }
    if r1 == 0.0 && s <= 0.0 {
        return Improper::divergent(Endpoint::Zero);
    }
    let (x1, x2) = (theta * r1, theta * r2);
    let scale = c * theta.powf(-s);
    let v = if s > 0.0 && x2 < s + 1.0 {
        gamma(s) * (gamma_p(s, x2) - gamma_p(s, x1))
    } else {
        upper_gamma(s, x1) - upper_gamma(s, x2)
    };
    Improper::finite(scale * v.max(0.0))
}

/// Smallest `r ≥ r0` with `tail(r) ≤ tau`, by safeguarded Newton in `log r`.
fn invert_tail(tail: impl Fn(f64) -> f64, dens: impl Fn(f64) -> f64, r0: f64, tau: f64) -> f64 {
    let mut lo = r0;
    let mut hi = r0.max(1e-300) * 2.0;
    while tail(hi) > tau {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut r = (lo.max(1e-300) * hi).sqrt();
    for _ in 0..200 {
        let t = tail(r);
        if t > tau { lo = r } else { hi = r }
        if hi - lo <= 1e-14 * hi {
            break;
        }
        // Newton step on log T against log r
        let d = dens(r) * r;
        let next = if d > 0.0 && t > 0.0 { r * ((t.ln() - tau.ln()) * t / d).exp() } else { f64::NAN };
        r = if next.is_finite() && next > lo && next < hi { next } else if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
    }
    r
}

impl Shape {
    fn support(&self) -> (f64, f64) {
        match self {
            Shape::Power { lo, hi, .. } => (*lo, *hi),
            Shape::Tempered { .. } | Shape::Table { .. } => (0.0, f64::INFINITY),
            Shape::Atoms(a) => {
                let lo = a.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let hi = a.iter().map(|p| p.0).fold(0.0, f64::max);
                (lo, hi)
            }
        }
    }

    fn density(&self, r: f64) -> f64 {
        match self {
            Shape::Power { c, a, lo, hi } => {
                if r > *lo && r <= *hi { c * r.powf(-1.0 - a) } else { 0.0 }
            }
            Shape::Tempered { c, a, theta } => c * r.powf(-1.0 - a) * (-theta * r).exp(),
            Shape::Atoms(_) => 0.0,
            Shape::Table { table, weight } => weight * table.density(r),
        }
    }

    fn breaks(&self) -> Vec<f64> {
        match self {
            Shape::Power { lo, hi, .. } => [*lo, *hi].into_iter().filter(|v| *v > 0.0 && v.is_finite()).collect(),
            Shape::Table { table, .. } => table.knots().to_vec(),
            _ => Vec::new(),
        }
    }

    /// `∫_{(r1, r2]} z^p` against this component.
    fn moment(&self, p: f64, r1: f64, r2: f64) -> Improper {
        match self {
            Shape::Power { c, a, lo, hi } => match Region::new(r1, r2).clip(*lo, *hi) {
                Some((l, h)) => power_integral(*c, p - a, l, h),
                None => Improper::finite(0.0),
            },
            Shape::Tempered { c, a, theta } => tempered_integral(*c, p - a, *theta, r1, r2),
            Shape::Atoms(atoms) => Improper::finite(
                atoms.iter().filter(|(z, _)| *z > r1 && *z <= r2).map(|(z, m)| m * z.powf(p)).sum(),
            ),
            Shape::Table { .. } => {
                let opts = QuadOptions::default();
                self.integrate(|z| z.powf(p), r1, r2, &opts)
            }
        }
    }

    fn tail(&self, r: f64) -> f64 {
        match self {
            Shape::Table { table, weight } => weight * table.tail(r),
            _ => self.moment(0.0, r, f64::INFINITY).value,
        }
    }

    fn integrate<F: Fn(f64) -> f64>(&self, phi: F, r1: f64, r2: f64, opts: &QuadOptions) -> Improper {
        if let Shape::Atoms(atoms) = self {
            let v = atoms.iter().filter(|(z, _)| *z > r1 && *z <= r2).map(|(z, m)| m * phi(*z)).sum();
            return Improper::finite(v);
        }
        let (slo, shi) = self.support();
        let Some((lo, hi)) = Region::new(r1, r2).clip(slo, shi) else {
            return Improper::finite(0.0);
        };
        let breaks = self.breaks();
        quadrature::integrate_positive(|z| phi(z) * self.density(z), lo, hi, &breaks, 1.0, opts)
    }

    fn bg_index(&self) -> Index {
        match self {
            Shape::Power { a, lo, .. } => {
                if *lo > 0.0 { Index::new(0.0, true) } else { Index::new(a.max(0.0), *a < 0.0) }
            }
            Shape::Tempered { a, .. } => Index::new(a.max(0.0), *a < 0.0),
            Shape::Atoms(_) => Index::new(0.0, true),
            Shape::Table { .. } => numeric_bg(|p| self.moment(p, 0.0, 1.0)),
        }
    }

    fn tail_index(&self) -> Index {
        match self {
            Shape::Power { a, hi, .. } => {
                if hi.is_finite() { Index::new(f64::INFINITY, true) } else { Index::new(*a, false) }
            }
            Shape::Tempered { .. } | Shape::Atoms(_) => Index::new(f64::INFINITY, true),
            Shape::Table { .. } => numeric_eta(|p| self.moment(p, 1.0, f64::INFINITY)),
        }
    }

    /// `|z|` from the normalized restriction to `|z| > eps`; `u ∈ (0, 1]`.
    fn sample_above(&self, eps: f64, u: f64) -> f64 {
        match self {
            Shape::Power { c, a, lo, hi } => {
                let r0 = eps.max(*lo);
                let tau = u * self.tail(r0);
                if *a == 0.0 {
                    return (hi * (-tau / c).exp()).max(r0);
                }
                let top = if hi.is_infinite() { 0.0 } else { hi.powf(-a) };
                let r = (a * tau / c + top).powf(-1.0 / a);
                r.clamp(r0, *hi)
            }
            Shape::Tempered { c, a, theta } => {
                let tau = u * self.tail(eps);
                if *a == -1.0 {
                    // exponential jumps: tail (c/θ) e^{-θ r}
                    return (-(tau * theta / c).ln() / theta).max(eps);
                }
                invert_tail(|r| self.tail(r), |r| self.density(r), eps, tau)
            }
            Shape::Atoms(atoms) => {
                let total: f64 = atoms.iter().filter(|(z, _)| *z > eps).map(|p| p.1).sum();
                let mut acc = 0.0;
                let target = (1.0 - u) * total;
                let mut last = eps;
                for (z, m) in atoms.iter().filter(|(z, _)| *z > eps) {
                    acc += m;
                    last = *z;
                    if acc > target {
                        return *z;
                    }
                }
                last
            }
            Shape::Table { table, weight } => {
                let tau = u * table.tail(eps);
                let _ = weight;
                table.inverse(tau, eps)
            }
        }
    }
}

/// Infimum-type index by bisection on the sign of the fitted divergence
/// slope of `p ↦ ∫_{|z|≤1} |z|^p λ(dz)` at 0.
pub(crate) fn numeric_bg(moment: impl Fn(f64) -> Improper) -> Index {
    let at0 = moment(0.0);
    if at0.is_finite() {
        return Index::new(0.0, true);
    }
    let diverging = |p: f64| {
        let r = moment(p);
        r.slope_zero.map(|s| s >= 0.0).unwrap_or(!r.is_finite())
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if diverging(mid) { lo = mid } else { hi = mid }
    }
    let v = 0.5 * (lo + hi);
    Index::new(v, moment(v).is_finite())
}

/// Supremum-type index by bisection on the fitted divergence slope at ∞.
pub(crate) fn numeric_eta(moment: impl Fn(f64) -> Improper) -> Index {
    const P_MAX: f64 = 64.0;
    if moment(P_MAX).is_finite() {
        return Index::new(f64::INFINITY, true);
    }
    let diverging = |p: f64| {
        let r = moment(p);
        r.slope_inf.map(|s| s >= 0.0).unwrap_or(!r.is_finite())
    };
    if diverging(0.0) {
        return Index::new(0.0, moment(0.0).is_finite());
    }
    let (mut lo, mut hi) = (0.0, P_MAX);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if diverging(mid) { hi = mid } else { lo = mid }
    }
    let v = 0.5 * (lo + hi);
    Index::new(v, moment(v).is_finite())
}

fn check_pos(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 { Ok(()) } else { Err(Error::invalid(key, format!("must be positive and finite, got {v}"))) }
}

fn check_mix(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) { Ok(()) } else { Err(Error::invalid("levy.sign_mix", format!("must lie in [0, 1], got {v}"))) }
}

/// Split a one-sided shape builder into weighted positive/negative parts.
fn signed(sign_mix: f64, make: impl Fn(f64) -> Shape) -> Vec<Component> {
    let mut out = Vec::new();
    if sign_mix > 0.0 {
        out.push(Component { positive: true, shape: make(sign_mix) });
    }
    if sign_mix < 1.0 {
        out.push(Component { positive: false, shape: make(1.0 - sign_mix) });
    }
    out
}

impl LevyMeasureSpec {
    pub fn build(&self) -> Result<LevyMeasure> {
        let comps = match self {
            LevyMeasureSpec::None => Vec::new(),
            LevyMeasureSpec::CompoundPoisson { rate, jumps, sign_mix } => {
                check_mix(*sign_mix)?;
                if !(rate.is_finite() && *rate >= 0.0) {
                    return Err(Error::invalid("levy.rate", format!("must be non-negative and finite, got {rate}")));
                }
                let shape = |w: f64| -> Shape {
                    let m = rate * w;
                    match jumps {
                        JumpDistribution::Exponential { rate: th } => Shape::Tempered { c: m * th, a: -1.0, theta: *th },
                        JumpDistribution::Uniform { lo, hi } => Shape::Power { c: m / (hi - lo), a: -1.0, lo: *lo, hi: *hi },
                        JumpDistribution::Pareto { scale, shape } => {
                            Shape::Power { c: m * shape * scale.powf(*shape), a: *shape, lo: *scale, hi: f64::INFINITY }
                        }
                    }
                };
                match jumps {
                    JumpDistribution::Exponential { rate } => check_pos("levy.jumps.rate", *rate)?,
                    JumpDistribution::Uniform { lo, hi } => {
                        if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && hi > lo) {
                            return Err(Error::invalid("levy.jumps", "uniform jumps need 0 <= lo < hi < inf (on |z|)"));
                        }
                    }
                    JumpDistribution::Pareto { scale, shape } => {
                        check_pos("levy.jumps.scale", *scale)?;
                        check_pos("levy.jumps.shape", *shape)?;
                    }
                }
                if *rate == 0.0 { Vec::new() } else { signed(*sign_mix, shape) }
            }
            LevyMeasureSpec::PowerDensity { exponent, scale, sign_mix, support } => {
                check_mix(*sign_mix)?;
                check_pos("levy.scale", *scale)?;
                let (lo, hi) = (support[0].0, support[1].0);
                if !(lo >= 0.0 && hi > lo) || lo.is_infinite() {
                    return Err(Error::invalid("levy.support", format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
                }
                let a = *exponent;
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::invalid("levy.exponent", format!("must be positive, got {a}")));
                }
                if lo == 0.0 && a >= 2.0 {
                    return Err(Error::invalid("levy.exponent", "must be below 2 when the support reaches 0"));
                }
                signed(*sign_mix, |w| Shape::Power { c: scale * w, a, lo, hi })
            }
            LevyMeasureSpec::TemperedPower { exponent, tempering, scale, sign_mix } => {
                check_mix(*sign_mix)?;
                check_pos("levy.scale", *scale)?;
                check_pos("levy.tempering", *tempering)?;
                if !(exponent.is_finite() && *exponent < 2.0) {
                    return Err(Error::invalid("levy.exponent", format!("must be below 2, got {exponent}")));
                }
                signed(*sign_mix, |w| Shape::Tempered { c: scale * w, a: *exponent, theta: *tempering })
            }
            LevyMeasureSpec::GammaType { shape, decay, sign_mix } => {
                check_mix(*sign_mix)?;
                check_pos("levy.shape", *shape)?;
                check_pos("levy.decay", *decay)?;
                signed(*sign_mix, |w| Shape::Tempered { c: shape * w, a: 0.0, theta: *decay })
            }
            LevyMeasureSpec::AtomList { atoms } => {
                let mut pos = Vec::new();
                let mut neg = Vec::new();
                for (i, &[z, m]) in atoms.iter().enumerate() {
                    if !z.is_finite() || z == 0.0 {
                        return Err(Error::invalid(format!("levy.atoms[{i}]"), "jump location must be finite and non-zero"));
                    }
                    if !(m.is_finite() && m >= 0.0) {
                        return Err(Error::invalid(format!("levy.atoms[{i}]"), "mass must be non-negative and finite"));
                    }
                    if m == 0.0 {
                        continue;
                    }
                    if z > 0.0 { pos.push((z, m)) } else { neg.push((-z, m)) }
                }
                let mut out = Vec::new();
                for (positive, mut list) in [(true, pos), (false, neg)] {
                    if !list.is_empty() {
                        list.sort_by(|a, b| a.0.total_cmp(&b.0));
                        out.push(Component { positive, shape: Shape::Atoms(list) });
                    }
                }
                out
            }
            LevyMeasureSpec::Tabulated { points, path, sign_mix } => {
                check_mix(*sign_mix)?;
                if points.is_empty() {
                    let why = match path {
                        Some(p) => format!("table file {p:?} was not loaded"),
                        None => "either `points` or `path` is required".to_string(),
                    };
                    return Err(Error::invalid("levy.points", why));
                }
                let table = TailTable::new(points)?;
                signed(*sign_mix, |w| Shape::Table { table: table.clone(), weight: w })
            }
        };
        let m = LevyMeasure { spec: self.clone(), comps };
        let small = m.partial_moment(2.0, Region::SMALL, Side::Both);
        let big = m.tail_mass(1.0, Side::Both);
        if !small.is_finite() || !big.is_finite() {
            return Err(Error::invalid("levy", "∫(1 ∧ z²) λ(dz) must be finite"));
        }
        Ok(m)
    }
}

impl LevyMeasure {
    pub fn zero() -> Self {
        LevyMeasure { spec: LevyMeasureSpec::None, comps: Vec::new() }
    }

    pub fn spec(&self) -> &LevyMeasureSpec {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// `λ((-∞, 0)) = 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.comps.iter().all(|c| c.positive)
    }

    fn on(&self, side: Side) -> impl Iterator<Item = &Component> {
        self.comps.iter().filter(move |c| side.includes(c.positive))
    }

    /// `λ({|z| > r})` restricted to `side`.
    pub fn tail_mass(&self, r: f64, side: Side) -> f64 {
        self.on(side).map(|c| c.shape.tail(r)).sum()
    }

    /// `∫_{region} |z|^p λ(dz)` restricted to `side`.
    pub fn partial_moment(&self, p: f64, region: Region, side: Side) -> Improper {
        self.on(side).fold(Improper::finite(0.0), |acc, c| quadrature::add(acc, c.shape.moment(p, region.lo, region.hi)))
    }

    /// `∫_{region} z λ(dz)`, keeping signs.
    pub fn signed_first_moment(&self, region: Region) -> Improper {
        let pos = self.partial_moment(1.0, region, Side::Pos);
        let neg = self.partial_moment(1.0, region, Side::Neg);
        if !pos.is_finite() || !neg.is_finite() {
            return quadrature::add(pos, neg);
        }
        Improper { value: pos.value - neg.value, error: pos.error + neg.error, ..pos }
    }

    /// `∫_{region} φ(|z|) λ(dz)` for non-negative `φ`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F, region: Region, side: Side, opts: &QuadOptions) -> Improper {
        self.on(side).fold(Improper::finite(0.0), |acc, c| quadrature::add(acc, c.shape.integrate(&phi, region.lo, region.hi, opts)))
    }

    /// Same as [`partial_moment`](Self::partial_moment) but always by
    /// quadrature against the density; used to cross-check closed forms.
    pub fn partial_moment_numeric(&self, p: f64, region: Region, side: Side) -> Improper {
        self.integrate(|z| z.powf(p), region, side, &QuadOptions::default())
    }

    /// Blumenthal–Getoor index of the small jumps.
    pub fn bg_index(&self) -> Index {
        let per: Vec<Index> = self.comps.iter().map(|c| c.shape.bg_index()).collect();
        let v = per.iter().map(|i| i.value).fold(0.0, f64::max);
        let attained = per.iter().filter(|i| i.value == v).all(|i| i.attained);
        Index::new(v, attained)
    }

    /// Largest finite moment order of the big jumps.
    pub fn tail_index(&self) -> Index {
        let per: Vec<Index> = self.comps.iter().map(|c| c.shape.tail_index()).collect();
        let v = per.iter().map(|i| i.value).fold(f64::INFINITY, f64::min);
        let attained = per.iter().filter(|i| i.value == v).all(|i| i.attained);
        Index::new(v, attained)
    }

    /// Index estimates from divergence scans only, ignoring closed forms.
    pub fn bg_index_numeric(&self) -> Index {
        numeric_bg(|p| self.partial_moment_numeric(p, Region::SMALL, Side::Both))
    }

    pub fn tail_index_numeric(&self) -> Index {
        numeric_eta(|p| self.partial_moment_numeric(p, Region::LARGE, Side::Both))
    }

    /// `∫_{|z|≤1} |z| λ(dz) < ∞`.
    pub fn has_finite_variation(&self) -> bool {
        self.partial_moment(1.0, Region::SMALL, Side::Both).is_finite()
    }

    /// Sampler for jumps with `|z| > eps`.
    pub fn sampler(&self, eps: f64) -> Result<JumpSampler<'_>> {
        if !(eps > 0.0) {
            return Err(Error::invalid("windows.eps", "jump threshold must be positive"));
        }
        let mut cum = Vec::with_capacity(self.comps.len());
        let mut total = 0.0;
        for c in &self.comps {
            let t = c.shape.tail(eps);
            if !t.is_finite() {
                return Err(Error::Divergent { what: format!("λ-mass above ε = {eps}"), endpoint: Some(Endpoint::Zero) });
            }
            total += t;
            cum.push(total);
        }
        Ok(JumpSampler { measure: self, eps, cum, total })
    }

    /// Jump sizes of a Poisson random measure on a window of `λ`-intensity
    /// `rate_window` per unit of `λ`-mass, restricted to `|z| > eps`.
    pub fn sample_jumps<R: Rng + ?Sized>(&self, eps: f64, rate_window: f64, rng: &mut R) -> Result<Vec<f64>> {
        let s = self.sampler(eps)?;
        let n = poisson(s.total() * rate_window, rng);
        Ok((0..n).map(|_| s.sample(rng)).collect())
    }
}

/// Poisson draw that accepts a zero mean.
pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

/// Draws from the normalized restriction of `λ` to `|z| > ε`.
#[derive(Debug, Clone)]
pub struct JumpSampler<'a> {
    measure: &'a LevyMeasure,
    eps: f64,
    cum: Vec<f64>,
    total: f64,
}

impl JumpSampler<'_> {
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let pick = rng.random::<f64>() * self.total;
        let i = self.cum.partition_point(|&c| c <= pick).min(self.cum.len() - 1);
        let c = &self.measure.comps[i];
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let r = c.shape.sample_above(self.eps, u);
        if c.positive { r } else { -r }
    }
}

/// `C_Λ = |a| + b + ∫(1 ∧ z²) λ(dz)`.
pub fn c_lambda(a: f64, b: f64, levy: &LevyMeasure) -> f64 {
    a.abs() + b + levy.partial_moment(2.0, Region::SMALL, Side::Both).value + levy.tail_mass(1.0, Side::Both)
}
