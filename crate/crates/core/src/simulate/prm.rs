use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Model, PastWindow, Plan};
use crate::error::{Error, Result};
use crate::measures::MixingMeasure;
use crate::rng::{stream, Substream};

/// A point `(x, s, z)` of the Poisson random measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonPoint {
    pub x: f64,
    pub s: f64,
    pub z: f64,
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::Divergent { what: format!("expected point count {mean}"), endpoint: None });
    }
    let d = Poisson::new(mean).map_err(|e| Error::Numerical(format!("Poisson({mean}): {e}")))?;
    Ok(d.sample(rng) as u64)
}

/// Weighted choice among `(x, weight)` pairs.
fn pick_atom<R: Rng + ?Sized>(cum: &[(f64, f64)], rng: &mut R) -> f64 {
    let total = cum[cum.len() - 1].1;
    let u = rng.random::<f64>() * total;
    let i = cum.partition_point(|p| p.1 <= u).min(cum.len() - 1);
    cum[i].0
}

fn cumulate(weights: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut acc = 0.0;
    weights
        .map(|(x, w)| {
            acc += w;
            (x, acc)
        })
        .collect()
}

/// Points of the Poisson random measure with intensity `π(dx) ds λ(dz)`
/// restricted to `|z| > eps`, over the past window of `plan` and the time
/// window `(0, horizon]`. Past points come first, then window points, each in
/// draw order.
pub fn sample_prm(model: &Model, plan: &Plan, horizon: f64, seed: u64, path: u64) -> Result<Vec<PoissonPoint>> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", format!("must be non-negative and finite, got {horizon}")));
    }
    let mut count_rng = stream(seed, path, Substream::Count);
    let mut time_rng = stream(seed, path, Substream::Time);
    let mut x_rng = stream(seed, path, Substream::Mixing);
    let mut z_rng = stream(seed, path, Substream::Jump);
    let rate = plan.jump_rate;
    if rate == 0.0 {
        return Ok(Vec::new());
    }
    let jumps = model.levy.sampler(plan.eps.max(f64::MIN_POSITIVE))?;
    let pi = &model.mixing;
    let total = pi.total_mass();
    let mut points = Vec::new();

    match plan.past {
        PastWindow::Fixed { s_min } => {
            let n = poisson(rate * total * -s_min, &mut count_rng)?;
            let xs = pi.sampler()?;
            for _ in 0..n {
                let x = xs.sample(&mut x_rng);
                let s = s_min * (1.0 - time_rng.random::<f64>());
                points.push(PoissonPoint { x, s, z: jumps.sample(&mut z_rng) });
            }
        }
        PastWindow::Scaled { c } => {
            let tilted: MixingMeasure = pi.power_tilted(-1.0);
            let mass = tilted.total_mass() * c;
            let n = poisson(rate * mass, &mut count_rng)?;
            if n > 0 {
                let xs = tilted.sampler()?;
                for _ in 0..n {
                    let x = xs.sample(&mut x_rng);
                    let s = -(c / x) * (1.0 - time_rng.random::<f64>());
                    points.push(PoissonPoint { x, s, z: jumps.sample(&mut z_rng) });
                }
            }
        }
        PastWindow::Trawl => {
            let psi = model.kernel.trawl_function().expect("trawl window on a trawl kernel");
            let n = poisson(rate * psi.integral(), &mut count_rng)?;
            for _ in 0..n {
                // (x, u) uniform on {x ≤ ψ(u)}
                let u = psi.sample_time(&mut time_rng);
                let x = psi.psi(u) * (1.0 - x_rng.random::<f64>());
                points.push(PoissonPoint { x, s: -u, z: jumps.sample(&mut z_rng) });
            }
        }
        PastWindow::Constant { len } => {
            let n = poisson(rate * total * len, &mut count_rng)?;
            let xs = pi.sampler()?;
            for _ in 0..n {
                let x = xs.sample(&mut x_rng);
                let s = -len * (1.0 - time_rng.random::<f64>());
                points.push(PoissonPoint { x, s, z: jumps.sample(&mut z_rng) });
            }
        }
        PastWindow::Atoms { .. } => {
            let atoms = pi.atoms().expect("atom window on an atomic π");
            let cum = cumulate(atoms.iter().map(|&(x, m)| (x, m * plan.past_len(model, x))));
            let mass = cum[cum.len() - 1].1;
            let n = poisson(rate * mass, &mut count_rng)?;
            for _ in 0..n {
                let x = pick_atom(&cum, &mut x_rng);
                let s = -plan.past_len(model, x) * (1.0 - time_rng.random::<f64>());
                points.push(PoissonPoint { x, s, z: jumps.sample(&mut z_rng) });
            }
        }
    }

    if horizon > 0.0 {
        let n = poisson(rate * total * horizon, &mut count_rng)?;
        if n > 0 {
            let xs = pi.sampler()?;
            for _ in 0..n {
                let x = xs.sample(&mut x_rng);
                // (0, horizon]
                let s = horizon * (1.0 - time_rng.random::<f64>());
                points.push(PoissonPoint { x, s, z: jumps.sample(&mut z_rng) });
            }
        }
    }
    Ok(points)
}
