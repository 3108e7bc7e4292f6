use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use mma_core::conditions::{
    check_existence, check_fubini, classify_model, compute_indices, compute_indices_numeric, evaluate_c_gamma, Regime,
};
use mma_core::config::{self, Artifact};
use mma_core::experiments::{lil_statistic, mz_check, ExperimentOptions};
use mma_core::simulate::{write_csv, Model, ModelSpec, SimOptions, Simulator};
use mma_core::{Error, Result};

use crate::{Command, ExperimentKind, Format, Io, Outcome, Status};

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| Error::Numerical(format!("serializing output: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

fn tagged<T: Serialize>(command: &str, body: &T) -> Result<Value> {
    let mut v = serde_json::to_value(body).map_err(|e| Error::Numerical(e.to_string()))?;
    match &mut v {
        Value::Object(map) => {
            map.insert("command".into(), json!(command));
            Ok(v)
        }
        _ => Ok(json!({ "command": command, "result": v })),
    }
}

fn load(io: &Io, inline: Option<ModelSpec>) -> Result<(ModelSpec, Model)> {
    let spec = match inline {
        Some(s) => s,
        None => {
            let text = std::fs::read_to_string(&io.model)
                .map_err(|e| Error::invalid("model", format!("cannot read {}: {e}", io.model.display())))?;
            let mut spec = config::parse_model(&text)?;
            config::resolve_tables(&mut spec, io.model.parent().unwrap_or(Path::new(".")))?;
            spec
        }
    };
    let model = spec.build()?;
    Ok((spec, model))
}

fn json_only(io: &Io, command: &str) -> Result<()> {
    match io.format {
        Some(Format::Csv) => Err(Error::invalid("format", format!("`{command}` writes JSON only"))),
        _ => Ok(()),
    }
}

fn seed_of(arg: Option<u64>, spec: &ModelSpec) -> Result<u64> {
    arg.or(spec.seed).ok_or_else(|| Error::invalid("seed", "stochastic commands need --seed or a `seed` key in the model"))
}

/// Runs a command without writing anything. `inline` replaces the model
/// file, as in a replay.
pub fn run(cmd: Command, inline: Option<ModelSpec>, workers: usize) -> Result<Outcome> {
    let name = match &cmd {
        Command::Replay { .. } => return Err(Error::invalid("command", "replay cannot be nested")),
        c => c.name(),
    };
    let io = cmd.io().expect("model commands carry io").clone();
    let (spec, model) = load(&io, inline)?;
    let (m_levy, m_mix, m_ker) = (&model.levy, &model.mixing, &model.kernel);
    let mut extras = Vec::new();
    let mut resolved = cmd.clone();
    let (primary, status) = match &cmd {
        Command::Check { gamma, .. } => {
            json_only(&io, name)?;
            let r = evaluate_c_gamma(m_levy, m_mix, m_ker, *gamma)?;
            let status = if r.convergent() { Status::Pass } else { Status::ConditionFailed };
            (to_json(&tagged(name, &r)?)?, status)
        }
        Command::Classify { .. } => {
            json_only(&io, name)?;
            let r = classify_model(m_levy, m_mix, m_ker, model.b)?;
            let body = json!({
                "command": name,
                "regime": r.label,
                "inv_gamma": r.inv_gamma,
                "open_bound": r.open_bound,
                "rate_report": r,
            });
            (to_json(&body)?, Status::Pass)
        }
        Command::Existence { .. } => {
            json_only(&io, name)?;
            let r = check_existence(model.a, model.b, m_levy, m_mix, m_ker)?;
            let status = if r.exists { Status::Pass } else { Status::ConditionFailed };
            (to_json(&tagged(name, &r)?)?, status)
        }
        Command::Fubini { .. } => {
            json_only(&io, name)?;
            let r = check_fubini(model.a, model.b, m_levy, m_mix, m_ker)?;
            let status = if r.holds { Status::Pass } else { Status::ConditionFailed };
            (to_json(&tagged(name, &r)?)?, status)
        }
        Command::Indices { numeric, .. } => {
            json_only(&io, name)?;
            let ix = if *numeric { compute_indices_numeric(m_levy, m_mix, m_ker)? } else { compute_indices(m_levy, m_mix, m_ker)? };
            (to_json(&tagged(name, &ix)?)?, Status::Pass)
        }
        Command::Simulate { paths, seed, t_max, points_per_decade, .. } => {
            let seed = seed_of(*seed, &spec)?;
            let t_max = t_max.unwrap_or(spec.grid.t_max);
            let ppd = points_per_decade.unwrap_or(spec.grid.points_per_decade);
            let sim = Simulator::new(&model, SimOptions { t_max, points_per_decade: ppd, seed, workers })?;
            let samples = sim.simulate_paths(*paths)?;
            let format = io.format.unwrap_or(Format::Csv);
            resolved = Command::Simulate {
                io: Io { format: Some(format), ..io.clone() },
                paths: *paths,
                seed: Some(seed),
                t_max: Some(t_max),
                points_per_decade: Some(ppd),
            };
            let primary = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_csv(&samples, &mut buf)?;
                    extras.push((".report.json", to_json(&tagged(name, sim.report())?)?));
                    buf
                }
                Format::Json => to_json(&json!({ "command": name, "report": sim.report(), "paths": samples }))?,
            };
            (primary, Status::Pass)
        }
        Command::Experiment { kind, paths, seed, t_max, points_per_decade, tolerance, .. } => {
            let seed = seed_of(*seed, &spec)?;
            let report = classify_model(m_levy, m_mix, m_ker, model.b)?;
            let kind = kind.unwrap_or(if report.regime == Regime::GaussianLil { ExperimentKind::Lil } else { ExperimentKind::Mz });
            let opts = ExperimentOptions {
                n_paths: *paths,
                t_max: *t_max,
                points_per_decade: *points_per_decade,
                seed,
                workers,
                tolerance: *tolerance,
                ..ExperimentOptions::default()
            };
            let r = match kind {
                ExperimentKind::Mz => mz_check(&model, &report, &opts)?,
                ExperimentKind::Lil => lil_statistic(&model, &report, &opts)?,
            };
            eprintln!("{name}: {:.2}s", r.runtime_s);
            let format = io.format.unwrap_or(Format::Json);
            resolved = Command::Experiment {
                io: Io { format: Some(format), ..io.clone() },
                kind: Some(kind),
                paths: *paths,
                seed: Some(seed),
                t_max: *t_max,
                points_per_decade: *points_per_decade,
                tolerance: *tolerance,
            };
            let mut curve = Vec::new();
            {
                let mut w = csv::Writer::from_writer(&mut curve);
                let e = |e: csv::Error| Error::Numerical(format!("writing CSV: {e}"));
                w.write_record(["t", "median_running_max", "normalizer"]).map_err(e)?;
                for p in &r.curve {
                    w.write_record([p.t.to_string(), p.median_running_max.to_string(), p.normalizer.to_string()]).map_err(e)?;
                }
                w.flush().map_err(|e| Error::Numerical(e.to_string()))?;
            }
            let status = if r.pass { Status::Pass } else { Status::ConditionFailed };
            let primary = match format {
                Format::Json => {
                    extras.push((".curve.csv", curve));
                    to_json(&tagged(name, &r)?)?
                }
                Format::Csv => curve,
            };
            (primary, status)
        }
        Command::Replay { .. } => unreachable!(),
    };
    Ok(Outcome { primary, extras, status, resolved, model: Some(spec) })
}

#[derive(Serialize)]
struct ReplayCheck {
    path: String,
    expected: String,
    actual: Option<String>,
    matches: bool,
}

/// Re-runs the command in a manifest with its inlined model and compares
/// every artifact.
pub fn replay(manifest: &Path, out_dir: Option<&Path>, workers: usize) -> Result<Outcome> {
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::invalid("manifest", format!("cannot read {}: {e}", manifest.display())))?;
    let m = config::parse_manifest(&text)?;
    let cmd: Command = serde_json::from_value(m.options.clone()).map_err(|e| Error::Parse(format!("manifest options: {e}")))?;
    if cmd.name() != m.command {
        return Err(Error::invalid("command", format!("manifest says `{}` but its options describe `{}`", m.command, cmd.name())));
    }
    let outcome = run(cmd, m.model.clone(), workers)?;
    let mut produced: Vec<&[u8]> = vec![&outcome.primary];
    produced.extend(outcome.extras.iter().map(|(_, b)| b.as_slice()));
    let mut checks = Vec::new();
    for (i, a) in m.artifacts.iter().enumerate() {
        let actual = produced.get(i).map(|b| Artifact::of(&a.path, b));
        if let (Some(dir), Some(bytes)) = (out_dir, produced.get(i)) {
            let name = a.path.file_name().ok_or_else(|| Error::invalid("manifest", "artifact without a file name"))?;
            config::write_atomic(&dir.join(name), bytes)?;
        }
        checks.push(ReplayCheck {
            path: a.path.display().to_string(),
            expected: a.fnv1a.clone(),
            matches: actual.as_ref() == Some(a),
            actual: actual.map(|x| x.fnv1a),
        });
    }
    let all = checks.iter().all(|c| c.matches) && produced.len() == m.artifacts.len();
    let body = json!({ "command": "replay", "replayed": m.command, "all_match": all, "artifacts": checks });
    Ok(Outcome {
        primary: to_json(&body)?,
        extras: Vec::new(),
        status: if all { Status::Pass } else { Status::ConditionFailed },
        resolved: Command::Replay { manifest: manifest.to_path_buf(), out_dir: out_dir.map(Path::to_path_buf) },
        model: None,
    })
}
