use serde::Serialize;
use serde_json::{json, Value};
use z3tc::analysis::*;
use z3tc::circuit::Circuit;
use z3tc::encoder::{compile, with_hardware_noise, CompileOptions, HardwareNoise, MeasureBasis};
use z3tc::toric::*;
use z3tc::NoiseChannel;

use crate::config::{Command, NoiseMode, RunConfig};
use crate::error::CliError;
use crate::verify;

/// What a command produced, before it is wrapped into the result document.
pub struct Outcome {
    pub preset: Option<String>,
    pub result: Value,
    pub csv: Option<String>,
    /// Set when the run completed but a check inside it failed.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(preset: Option<String>, result: Value, csv: Option<String>) -> Self {
        Outcome { preset, result, csv, failure: None }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Core(e.into()))
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cmd {
        Command::Prepare => prepare(cfg),
        Command::BraidPf => braid(cfg, "pf_braid"),
        Command::BraidCc => braid(cfg, "cc_braid"),
        Command::FusePfPfstar => braid(cfg, "pf_pfstar_braid"),
        Command::TopoQutrit => topo_qutrit(cfg),
        Command::Compile => compile_cmd(cfg),
        Command::Verify => verify::run(cfg),
        Command::Bounds => bounds(cfg),
    }
}

pub fn csv_string(fill: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    fill(&mut w).map_err(|e| z3tc::Error::Serde(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| z3tc::Error::Serde(e.to_string()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn threads(cfg: &RunConfig) -> usize {
    cfg.threads.unwrap_or_else(rayon::current_num_threads)
}

fn channels(cfg: &RunConfig) -> (Option<NoiseChannel>, Option<NoiseChannel>) {
    let p1 = cfg.p1.unwrap_or(0.0);
    let p2 = cfg.p2.unwrap_or(0.0);
    ((p2 > 0.0).then(|| NoiseChannel::depolarizing2(p2)), (p1 > 0.0).then(|| NoiseChannel::depolarizing1(p1)))
}

fn prepare(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (lx, ly) = (cfg.lx.unwrap_or(6), cfg.ly.unwrap_or(4));
    let preset = Some(format!("prepare-{lx}x{ly}"));
    let lattice = TorusLattice::new(lx, ly)?;
    let shots = cfg.shots.unwrap_or(1);
    let seed = cfg.seed.unwrap_or(0);
    let dims = json!({ "lx": lx, "ly": ly });
    match cfg.noise.unwrap_or(NoiseMode::Off) {
        NoiseMode::Off => {
            let mut e = Experiment::new(lattice.clone())?;
            e.prepare()?;
            e.snapshot("ground")?;
            let frames = e.run_noiseless(seed)?;
            let energy = energy_density(&frames[0].snapshots, &lattice)?;
            let logical = logical_values(&lattice, e.state()?)?;
            let result = json!({
                "lattice": dims,
                "energy_density": energy,
                "logical": to_value(&logical)?,
                "frames": to_value(&frames)?,
            });
            Ok(Outcome::new(preset, result, Some(frames_csv(&frames)?)))
        }
        NoiseMode::Depolarizing => {
            let mut e = Experiment::new(lattice.clone())?;
            e.prepare()?;
            e.snapshot("ground")?;
            let (two, one) = channels(cfg);
            let frames = e.run_noisy(two.as_ref(), one.as_ref(), shots, seed)?;
            let energy = energy_density(&frames[0].snapshots, &lattice)?;
            let result = json!({
                "lattice": dims,
                "energy_density": energy,
                "frames": to_value(&frames)?,
            });
            Ok(Outcome::new(preset, result, Some(frames_csv(&frames)?)))
        }
        NoiseMode::Hardware => {
            let noise = HardwareNoise { p2: cfg.p2.unwrap_or(0.0), p1: cfg.p1.unwrap_or(0.0) };
            let circuit = with_hardware_noise(&default_ground_state(&lattice)?, &noise)?;
            let cm = ConfusionMatrix::new(cfg.p01.unwrap_or(0.0), cfg.p10.unwrap_or(0.0))?;
            let herald = cfg.herald_discard.unwrap_or(true);
            let mitigate = cfg.spam_mitigate.unwrap_or(true);
            let n = threads(cfg);
            let z = sample_measure_all_with(&circuit, MeasureBasis::Z, shots, seed, &cm, n, herald)?;
            let x = sample_measure_all_with(&circuit, MeasureBasis::X, shots, seed.wrapping_add(1), &cm, n, herald)?;
            let s = sampled_plaquettes(&lattice, &z, &x, &cm)?;
            let logical = sampled_logical_values(&lattice, &z, &x, None)?;
            let mut result = json!({
                "lattice": dims,
                "energy_density": if mitigate { s.energy_mitigated } else { s.energy },
                "energy_density_raw": s.energy,
                "discard_fraction": s.discard_fraction,
                "heralded": {
                    "z": { "shots": z.shots, "leak": z.leak_heralded, "readout": z.readout_heralded },
                    "x": { "shots": x.shots, "leak": x.leak_heralded, "readout": x.readout_heralded },
                },
                "max_standard_error": s.max_se,
                "logical": to_value(&logical)?,
                "plaquettes": s.labels.iter().zip(&s.pi1).map(|(l, p)| json!({ "label": l, "pi1": p })).collect::<Vec<_>>(),
            });
            if mitigate {
                let logical_m = sampled_logical_values(&lattice, &z, &x, Some(&cm))?;
                result["logical_mitigated"] = to_value(&logical_m)?;
                if let Value::Array(rows) = &mut result["plaquettes"] {
                    for (row, m) in rows.iter_mut().zip(&s.pi1_mitigated) {
                        row["pi1_mitigated"] = json!(m);
                    }
                }
            }
            let csv = plaquette_table_csv(&s.labels, &s.pi1, mitigate.then_some(&s.pi1_mitigated[..]))?;
            Ok(Outcome::new(preset, result, Some(csv)))
        }
    }
}

fn braid(cfg: &RunConfig, name: &str) -> Result<Outcome, CliError> {
    let script = preset(name)?;
    let e = Experiment::from_script(&script)?;
    let seed = cfg.seed.unwrap_or(0);
    let frames = match cfg.noise.unwrap_or(NoiseMode::Off) {
        NoiseMode::Off => e.run_noiseless(seed)?,
        _ => {
            let (two, one) = channels(cfg);
            e.run_noisy(two.as_ref(), one.as_ref(), cfg.shots.unwrap_or(1), seed)?
        }
    };
    let anyons: Vec<Value> = frames
        .iter()
        .map(|f| {
            let a: Vec<Value> = f.anyons(3).into_iter().map(|(l, s)| json!({ "label": l, "species": s })).collect();
            json!({ "step": f.step, "anyons": a })
        })
        .collect();
    let result = json!({
        "lattice": { "lx": script.lx, "ly": script.ly },
        "anyons": anyons,
        "frames": to_value(&frames)?,
    });
    Ok(Outcome::new(Some(name.into()), result, Some(frames_csv(&frames)?)))
}

fn topo_qutrit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let layout = QutritLayout::by_name(cfg.layout.as_deref().unwrap_or("6x4"))?;
    let preset = format!("topo-qutrit-{}", layout.name);
    let q = TopologicalQutrit::build(layout)?;
    let sectors = match cfg.noise.unwrap_or(NoiseMode::Off) {
        NoiseMode::Off => q.ideal()?,
        _ => {
            let (two, one) = channels(cfg);
            q.sample(two.as_ref(), one.as_ref(), cfg.shots.unwrap_or(1), cfg.seed.unwrap_or(0))?
        }
    };
    let bounds: Vec<Value> = sectors
        .iter()
        .map(|s| {
            if s.shots == 0 {
                return Ok(Value::Null);
            }
            to_value(&topological_qutrit_bounds(s.charge_loop, s.flux_loop, s.outcome as usize)?)
        })
        .collect::<Result<_, CliError>>()?;
    // sectors without shots hold NaN, which JSON cannot carry
    let rows: Vec<Value> =
        sectors.iter().map(|s| if s.shots == 0 { json!({ "outcome": s.outcome, "shots": 0 }) } else { json!(s) }).collect();
    let result = json!({ "layout": q.layout.name, "sectors": rows, "bounds": bounds });
    Ok(Outcome::new(Some(preset), result, Some(qutrit_table_csv(&sectors)?)))
}

/// `prepare-LXxLY` names the ground-state preparation on an LX×LY torus.
fn preset_circuit(name: &str) -> Result<Circuit, CliError> {
    let dims = name.strip_prefix("prepare-").and_then(|d| d.split_once('x'));
    let (lx, ly) = dims
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .ok_or_else(|| CliError::Config(format!("unknown compile preset {name}; expected prepare-<lx>x<ly>")))?;
    Ok(default_ground_state(&TorusLattice::new(lx, ly)?)?)
}

fn compile_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let circuit = match (&cfg.circuit, &cfg.preset) {
        (Some(path), _) => Circuit::from_json(&std::fs::read_to_string(path)?)?,
        (None, Some(p)) => preset_circuit(p)?,
        (None, None) => return Err(CliError::Config("compile needs --preset or --circuit".into())),
    };
    let opts = CompileOptions {
        policy: cfg.policy.map(Into::into).unwrap_or_default(),
        final_measure: cfg.basis.and_then(|b| b.measure()),
        peephole: cfg.peephole.unwrap_or(true),
    };
    let out = compile(&circuit, &opts)?;
    if let Some(path) = &cfg.emit {
        let text = if path.extension().is_some_and(|e| e == "qasm") { out.circuit.to_qasm() } else { out.circuit.to_json()? };
        std::fs::write(path, text)?;
    }
    let csv = csv_string(|w| out.report.budget.iter().try_for_each(|row| w.serialize(row)))?;
    let result = json!({ "report": to_value(&out.report)? });
    Ok(Outcome::new(cfg.preset.clone(), result, Some(csv)))
}

fn bounds(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let b = match (&cfg.charge, &cfg.flux, cfg.outcome) {
        (Some(c), Some(f), Some(j)) => topological_qutrit_bounds([c[0], c[1], c[2]], [f[0], f[1], f[2]], j)?,
        _ => {
            let (p, q, n) = (cfg.trp.unwrap_or(0.0), cfg.trq.unwrap_or(0.0), cfg.sites.unwrap_or(0));
            match (cfg.trp_se, cfg.trq_se) {
                (Some(sp), Some(sq)) => fidelity_bounds_with_errors(p, sp, q, sq, n)?,
                _ => fidelity_bounds(p, q, n)?,
            }
        }
    };
    let csv = bounds_csv(std::slice::from_ref(&b))?;
    Ok(Outcome::new(None, json!({ "bound": to_value(&b)? }), Some(csv)))
}
