use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use z3tc::encoder::{MeasureBasis, SchedulePolicy};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Exact noiseless expectations.
    Off,
    /// Qutrit depolarizing noise after every gate, averaged over trajectories.
    Depolarizing,
    /// Encoded two-qubit hardware model with leakage heralding and readout errors.
    Hardware,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Z,
    X,
    None,
}

impl Basis {
    pub fn measure(self) -> Option<MeasureBasis> {
        match self {
            Basis::Z => Some(MeasureBasis::Z),
            Basis::X => Some(MeasureBasis::X),
            Basis::None => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    GreedyAsap,
    PlaquetteParallel,
    GateParallel,
}

impl From<Policy> for SchedulePolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::GreedyAsap => SchedulePolicy::GreedyAsap,
            Policy::PlaquetteParallel => SchedulePolicy::PlaquetteParallel,
            Policy::GateParallel => SchedulePolicy::GateParallel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Prepare,
    BraidPf,
    BraidCc,
    FusePfPfstar,
    TopoQutrit,
    Compile,
    Verify,
    Bounds,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Prepare => "prepare",
            Command::BraidPf => "braid-pf",
            Command::BraidCc => "braid-cc",
            Command::FusePfPfstar => "fuse-pf-pfstar",
            Command::TopoQutrit => "topo-qutrit",
            Command::Compile => "compile",
            Command::Verify => "verify",
            Command::Bounds => "bounds",
        }
    }
}

/// One layer of run settings. Flags and the config file each produce a layer;
/// after resolution the same type holds the effective configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ly: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p01: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p10: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herald_discard: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spam_mitigate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peephole: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emit: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trp_se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trq_se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<usize>,
    /// Execution plumbing; not echoed since it does not affect results.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub csv: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:ident, $lo:ident; $($f:ident),*) => {
        RunConfig { $($f: $hi.$f.or($lo.$f)),* }
    };
}

macro_rules! keep {
    ($src:ident, $dst:ident; $($f:ident),*) => {
        $($dst.$f = $src.$f.clone();)*
    };
}

pub const DEFAULT_P2: f64 = 2e-3;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Values of `self` win over those of `lower`.
    pub fn over(self, lower: RunConfig) -> RunConfig {
        let hi = self;
        let lo = lower;
        overlay!(hi, lo; lx, ly, preset, layout, shots, seed, noise, p1, p2, p01, p10, herald_discard,
            spam_mitigate, basis, policy, peephole, circuit, emit, circuits, trp, trq, sites, trp_se, trq_se,
            charge, flux, outcome, threads, output, csv)
    }

    /// Keeps the settings a command reads, fills defaults and validates them.
    pub fn resolve(self, cmd: Command) -> Result<RunConfig, CliError> {
        let m = self;
        let mut r = RunConfig::default();
        keep!(m, r; threads, output, csv);
        let sim = |r: &mut RunConfig, shots: usize| {
            r.seed = Some(m.seed.unwrap_or(0));
            r.noise = Some(m.noise.unwrap_or(NoiseMode::Off));
            if r.noise != Some(NoiseMode::Off) {
                r.shots = Some(m.shots.unwrap_or(shots));
                r.p1 = Some(m.p1.unwrap_or(0.0));
                r.p2 = Some(m.p2.unwrap_or(DEFAULT_P2));
            }
        };
        match cmd {
            Command::Prepare => {
                r.lx = Some(m.lx.unwrap_or(6));
                r.ly = Some(m.ly.unwrap_or(4));
                sim(&mut r, 10_000);
                if r.noise == Some(NoiseMode::Hardware) {
                    let cm = z3tc::analysis::ConfusionMatrix::calibrated();
                    r.p01 = Some(m.p01.unwrap_or(cm.p01));
                    r.p10 = Some(m.p10.unwrap_or(cm.p10));
                    r.herald_discard = Some(m.herald_discard.unwrap_or(true));
                    r.spam_mitigate = Some(m.spam_mitigate.unwrap_or(true));
                }
            }
            Command::BraidPf | Command::BraidCc | Command::FusePfPfstar | Command::TopoQutrit => {
                sim(&mut r, 1000);
                if r.noise == Some(NoiseMode::Hardware) {
                    return Err(CliError::Config(format!("{} supports --noise off or depolarizing", cmd.name())));
                }
                if cmd == Command::TopoQutrit {
                    r.layout = Some(m.layout.clone().unwrap_or_else(|| "6x4".into()));
                }
            }
            Command::Compile => {
                if m.circuit.is_none() {
                    r.preset = Some(m.preset.clone().unwrap_or_else(|| "prepare-6x4".into()));
                } else if m.preset.is_some() {
                    return Err(CliError::Config("give either --preset or --circuit".into()));
                }
                keep!(m, r; circuit, emit);
                r.basis = Some(m.basis.unwrap_or(Basis::Z));
                r.policy = Some(m.policy.unwrap_or(Policy::GreedyAsap));
                r.peephole = Some(m.peephole.unwrap_or(true));
            }
            Command::Verify => {
                r.circuits = Some(m.circuits.unwrap_or(20));
                r.shots = Some(m.shots.unwrap_or(2000));
                r.seed = Some(m.seed.unwrap_or(0));
            }
            Command::Bounds => {
                if m.outcome.is_some() || m.charge.is_some() || m.flux.is_some() {
                    keep!(m, r; outcome, charge, flux);
                    for (name, v) in [("charge", &r.charge), ("flux", &r.flux)] {
                        match v {
                            Some(v) if v.len() == 3 => {}
                            _ => return Err(CliError::Config(format!("--{name} needs three comma-separated values"))),
                        }
                    }
                    if r.outcome.is_none() {
                        return Err(CliError::Config("--outcome is required with --charge/--flux".into()));
                    }
                } else {
                    keep!(m, r; trp, trq, sites, trp_se, trq_se);
                    if r.trp.is_none() || r.trq.is_none() || r.sites.is_none() {
                        return Err(CliError::Config("bounds needs --trp, --trq and --sites".into()));
                    }
                    if r.trp_se.is_some() != r.trq_se.is_some() {
                        return Err(CliError::Config("give both --trp-se and --trq-se or neither".into()));
                    }
                }
            }
        }
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.shots == Some(0) {
            return bad("shots must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("{name} = {p} outside [0, 1]"));
                }
            }
        }
        for (name, p) in [("p01", self.p01), ("p10", self.p10)] {
            if let Some(p) = p {
                if !(0.0..0.5).contains(&p) {
                    return bad(format!("{name} = {p} outside [0, 0.5)"));
                }
            }
        }
        Ok(())
    }
}
