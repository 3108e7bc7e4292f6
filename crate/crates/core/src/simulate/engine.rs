use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{path_from_points, sample_prm, time_grid, GaussianFactor, Model, Plan};
use crate::conditions::check_existence;
use crate::error::{Error, Result};
use crate::measures::ext::serde_f64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOptions {
    pub t_max: f64,
    pub points_per_decade: usize,
    pub seed: u64,
    /// Worker threads; `0` uses the available parallelism.
    pub workers: usize,
}

impl SimOptions {
    /// Grid and seed from the model file, falling back to seed 0.
    pub fn from_model(model: &Model) -> SimOptions {
        SimOptions {
            t_max: model.spec.grid.t_max,
            points_per_decade: model.spec.grid.points_per_decade,
            seed: model.spec.seed.unwrap_or(0),
            workers: 0,
        }
    }
}

/// One simulated path of `X*` and its components. `xstar` is their sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub path_id: u64,
    pub seed: u64,
    pub t: Vec<f64>,
    pub xstar: Vec<f64>,
    pub drift: Vec<f64>,
    pub gaussian: Vec<f64>,
    pub past_jumps: Vec<f64>,
    pub window_jumps: Vec<f64>,
    pub compensator: Vec<f64>,
    /// `Σ z f₁(x)` over window points: the `X*₊,₁` part of `window_jumps`.
    pub subordinator: Vec<f64>,
    pub points: usize,
}

/// Settings and error budget shared by all paths of a run.
#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub plan: Plan,
    pub t_max: f64,
    pub grid_len: usize,
    /// Bound on the mean absolute neglected past at `t_max`; `None` when the
    /// simulated jumps have no finite mean.
    #[serde(serialize_with = "serialize_opt")]
    pub truncation_bound: Option<f64>,
    /// Variance of the dropped small jumps at `t_max`, zero when they are
    /// replaced by a Gaussian.
    #[serde(with = "serde_f64")]
    pub residue_variance: f64,
    #[serde(with = "serde_f64")]
    pub gaussian_jitter: f64,
}

fn serialize_opt<S: serde::Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => serde_f64::serialize(x, s),
        None => s.serialize_none(),
    }
}

/// Path generator for one model and grid.
#[derive(Debug, Clone)]
pub struct Simulator {
    model: Model,
    plan: Plan,
    opts: SimOptions,
    grid: Vec<f64>,
    drift: Vec<f64>,
    compensator: Vec<f64>,
    gaussian: GaussianFactor,
    report: SimReport,
}

impl Simulator {
    pub fn new(model: &Model, opts: SimOptions) -> Result<Simulator> {
        if !(opts.t_max.is_finite() && opts.t_max > 0.0) {
            return Err(Error::invalid("grid.t_max", format!("must be positive and finite, got {}", opts.t_max)));
        }
        if opts.points_per_decade == 0 || opts.points_per_decade > 1000 {
            return Err(Error::invalid("grid.points_per_decade", "must lie in 1..=1000"));
        }
        Self::with_grid(model, opts.clone(), time_grid(opts.t_max, opts.points_per_decade))
    }

    /// Simulator on an explicit grid starting at 0.
    pub fn with_grid(model: &Model, opts: SimOptions, grid: Vec<f64>) -> Result<Simulator> {
        if grid.first() != Some(&0.0) || grid.windows(2).any(|w| w[0] >= w[1]) || !grid.iter().all(|t| t.is_finite()) {
            return Err(Error::invalid("t_grid", "must start at 0 and increase"));
        }
        let ex = check_existence(model.a, model.b, &model.levy, &model.mixing, &model.kernel)?;
        if !ex.exists {
            return Err(Error::Divergent {
                what: format!("existence integral `{}`", ex.failing.unwrap_or("∫ f1 dπ")),
                endpoint: None,
            });
        }
        let plan = Plan::resolve(model)?;
        let drift: Vec<f64> = grid.iter().map(|&t| plan.drift(model, t)).collect();
        let compensator: Vec<f64> = grid.iter().map(|&t| plan.compensator(model, t)).collect();
        let sigma2 = model.b + plan.residue_variance_rate();
        let gaussian = GaussianFactor::new(model, sigma2, &grid)?;
        let t_max = *grid.last().unwrap();
        let residue_variance = if plan.gaussian_residue || plan.residue_second_moment == 0.0 {
            0.0
        } else {
            let v = crate::conditions::gaussian_window_variance(&model.mixing, &model.kernel, t_max);
            if v.is_finite() { plan.residue_second_moment * v.value } else { f64::INFINITY }
        };
        let report = SimReport {
            plan: plan.clone(),
            t_max,
            grid_len: grid.len(),
            truncation_bound: plan.truncation_error_bound(model, t_max),
            residue_variance,
            gaussian_jitter: gaussian.jitter,
        };
        Ok(Simulator { model: model.clone(), plan, opts, grid, drift, compensator, gaussian, report })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    pub fn report(&self) -> &SimReport {
        &self.report
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn path(&self, path_id: u64) -> Result<PathSample> {
        let seed = self.opts.seed;
        let t_max = *self.grid.last().unwrap();
        let points = sample_prm(&self.model, &self.plan, t_max, seed, path_id)?;
        let jumps = path_from_points(&self.model, &points, &self.grid)?;
        let gaussian = self.gaussian.sample(seed, path_id);
        let xstar = (0..self.grid.len())
            .map(|i| self.drift[i] + gaussian[i] + jumps.past[i] + jumps.window[i] + self.compensator[i])
            .collect();
        Ok(PathSample {
            path_id,
            seed,
            t: self.grid.clone(),
            xstar,
            drift: self.drift.clone(),
            gaussian,
            past_jumps: jumps.past,
            window_jumps: jumps.window,
            compensator: self.compensator.clone(),
            subordinator: jumps.subordinator,
            points: points.len(),
        })
    }

    /// Paths `0..n`, computed on `opts.workers` threads and returned in order.
    pub fn simulate_paths(&self, n: u64) -> Result<Vec<PathSample>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.opts.workers)
            .build()
            .map_err(|e| Error::Numerical(format!("worker pool: {e}")))?;
        pool.install(|| (0..n).into_par_iter().map(|i| self.path(i)).collect())
    }
}

/// Paths as CSV, one row per `(path_id, t)`.
pub fn write_csv<W: Write>(paths: &[PathSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Numerical(format!("writing CSV: {e}"));
    w.write_record(["path_id", "t", "xstar", "drift", "gaussian", "past_jumps", "window_jumps", "compensator"]).map_err(io)?;
    for p in paths {
        for i in 0..p.t.len() {
            w.write_record([
                p.path_id.to_string(),
                p.t[i].to_string(),
                p.xstar[i].to_string(),
                p.drift[i].to_string(),
                p.gaussian[i].to_string(),
                p.past_jumps[i].to_string(),
                p.window_jumps[i].to_string(),
                p.compensator[i].to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Numerical(format!("writing CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::ModelSpec;
    use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

    fn model(text: &str) -> Model {
        toml::from_str::<ModelSpec>(text).unwrap().build().unwrap()
    }

    const SUPOU_ATOM: &str = r#"
        [levy]
        family = "atom-list"
        atoms = [[2.0, 0.3]]
        [mixing]
        family = "finite-atoms"
        atoms = [[1.0, 1.0]]
        [kernel]
        variant = "supou"
        [windows]
        s_min = -100.0
    "#;

    fn opts(workers: usize) -> SimOptions {
        SimOptions { t_max: 10.0, points_per_decade: 10, seed: 42, workers }
    }

    #[test]
    fn truncation_bound_examples() {
        let m = model(SUPOU_ATOM);
        let plan = Plan::resolve(&m).unwrap();
        let b = plan.truncation_error_bound(&m, 1.0).unwrap();
        let want = 0.6 * (-100.0f64).exp() * (1.0 - (-1.0f64).exp());
        assert!(b <= 0.6 * (-100.0f64).exp());
        assert!((b / want - 1.0).abs() < 1e-9, "{b} vs {want}");
        let far = model(&SUPOU_ATOM.replace("-100.0", "-200.0"));
        assert!(Plan::resolve(&far).unwrap().truncation_error_bound(&far, 1.0).unwrap() < b);

        let trawl = model(
            r#"
            [levy]
            family = "atom-list"
            atoms = [[2.0, 0.3]]
            [mixing]
            family = "lebesgue"
            hi = 1.0
            [kernel]
            variant = "trawl"
            psi = { form = "table", points = [[0.0, 1.0], [1.0, 0.0]] }
            [windows]
            s_min = -2.0
        "#,
        );
        let p = Plan::resolve(&trawl).unwrap();
        assert_eq!(p.truncation_error_bound(&trawl, 1.0), Some(0.0));
    }

    #[test]
    fn compensator_examples() {
        let m = model(
            r#"
            [levy]
            family = "power-density"
            exponent = 1.3
            support = [0.0, 1.0]
            [mixing]
            family = "finite-atoms"
            atoms = [[1.0, 1.0]]
            [kernel]
            variant = "supou"
            [windows]
            eps = 0.01
            s_min = -60.0
        "#,
        );
        let plan = Plan::resolve(&m).unwrap();
        assert!(plan.compensate);
        let want = -(1.0 / 0.3) * (0.01f64.powf(-0.3) - 1.0);
        let got = plan.compensator(&m, 1.0);
        assert!((got - want).abs() < 1e-6 * want.abs(), "{got} vs {want}");

        let sym = model(
            r#"
            [levy]
            family = "power-density"
            exponent = 1.3
            sign_mix = 0.5
            support = [0.0, 1.0]
            [mixing]
            family = "finite-atoms"
            atoms = [[1.0, 1.0]]
            [kernel]
            variant = "supou"
            [windows]
            eps = 0.01
            s_min = -60.0
        "#,
        );
        let p = Plan::resolve(&sym).unwrap();
        assert!(p.compensator(&sym, 1.0).abs() < 1e-9);

        let fv = model(SUPOU_ATOM);
        let p = Plan::resolve(&fv).unwrap();
        assert!(!p.compensate);
        assert_eq!(p.compensator(&fv, 3.0), 0.0);
    }

    #[test]
    fn poisson_counts() {
        // π atom of mass 1, λ total rate 0.3, window of length 10
        let m = model(&SUPOU_ATOM.replace("s_min = -100.0", "s_min = 0.0"));
        let plan = Plan::resolve(&m).unwrap();
        let n = 10_000u64;
        let kmax = 9usize;
        let mut counts = vec![0u64; kmax + 1];
        for p in 0..n {
            let pts = sample_prm(&m, &plan, 10.0, 5, p).unwrap();
            assert!(pts.iter().all(|q| q.s > 0.0 && q.s <= 10.0 && q.z == 2.0 && q.x == 1.0));
            counts[pts.len().min(kmax)] += 1;
        }
        let pois = Poisson::new(3.0).unwrap();
        let mut chi2 = 0.0;
        for (k, &c) in counts.iter().enumerate() {
            let prob = if k == kmax { 1.0 - (0..kmax as u64).map(|j| pois.pmf(j)).sum::<f64>() } else { pois.pmf(k as u64) };
            let e = prob * n as f64;
            chi2 += (c as f64 - e).powi(2) / e;
        }
        let pval = 1.0 - ChiSquared::new(kmax as f64).unwrap().cdf(chi2);
        assert!(pval > 0.01, "chi2 {chi2}, p {pval}");
        assert!(sample_prm(&m, &plan, 0.0, 5, 0).unwrap().is_empty());
    }

    #[test]
    fn paths_are_deterministic_and_add_up() {
        let m = model(&format!("b = 0.5\n{SUPOU_ATOM}"));
        let one = Simulator::new(&m, opts(1)).unwrap().simulate_paths(8).unwrap();
        let four = Simulator::new(&m, opts(4)).unwrap().simulate_paths(8).unwrap();
        assert_eq!(one, four);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&one, &mut a).unwrap();
        write_csv(&four, &mut b).unwrap();
        assert_eq!(a, b);
        for p in &one {
            assert_eq!(p.xstar[0], 0.0);
            for i in 0..p.t.len() {
                let sum = p.drift[i] + p.gaussian[i] + p.past_jumps[i] + p.window_jumps[i] + p.compensator[i];
                assert_eq!(p.xstar[i], sum);
            }
        }
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("path_id,t,xstar,drift,gaussian,past_jumps,window_jumps,compensator\n"));
    }

    #[test]
    fn nonnegative_finite_variation_paths_increase() {
        let m = model(SUPOU_ATOM);
        let sim = Simulator::new(&m, opts(2)).unwrap();
        for p in sim.simulate_paths(50).unwrap() {
            assert!(p.xstar.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn sample_mean_matches_moments() {
        let m = model(SUPOU_ATOM);
        let sim = Simulator::with_grid(&m, opts(0), vec![0.0, 1.0]).unwrap();
        let xs: Vec<f64> = sim.simulate_paths(10_000).unwrap().iter().map(|p| p.xstar[1]).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let mv = crate::conditions::mean_variance(&m.levy, &m.mixing, &m.kernel, m.a, m.b, m.centering, 1.0);
        assert!((mean - mv.mean).abs() < 3.0 * sd / n.sqrt(), "{mean} vs {}", mv.mean);
    }
}
