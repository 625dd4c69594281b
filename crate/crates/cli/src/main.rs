mod commands;
mod config;
mod error;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use config::{Basis, Command, NoiseMode, Policy, RunConfig};
use error::CliError;

pub const RUN_SCHEMA: &str = "z3tc.run/1";

#[derive(Parser)]
#[command(name = "z3tc", version, about = "Z3 toric code simulator: preparation, defect braids, compilation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for shot sampling.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Result document path. Defaults to <output-dir>/<command>.json, else stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Directory for result documents when --output is not given.
    #[arg(long, global = true, env = "Z3TC_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    /// Also write the command's table as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Args, Default)]
struct SimArgs {
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    noise: Option<NoiseMode>,
    /// Single-qutrit depolarizing probability (single-qubit with --noise hardware).
    #[arg(long)]
    p1: Option<f64>,
    /// Two-qutrit depolarizing probability (per entangling gate with --noise hardware).
    #[arg(long)]
    p2: Option<f64>,
    /// Readout P(read 0 | 1).
    #[arg(long)]
    p01: Option<f64>,
    /// Readout P(read 1 | 0).
    #[arg(long)]
    p10: Option<f64>,
    #[arg(long, action = ArgAction::Set)]
    herald_discard: Option<bool>,
    #[arg(long, action = ArgAction::Set)]
    spam_mitigate: Option<bool>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ground-state preparation with plaquette and logical-string estimates.
    Prepare {
        #[arg(long)]
        lx: Option<usize>,
        #[arg(long)]
        ly: Option<usize>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Charge dragged across a parafermion line, ending as a dyon.
    BraidPf {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Flux braided through a charge-conjugation ribbon, then fused.
    BraidCc {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// The charge-conjugation braid through a PF line and a PF* line.
    FusePfPfstar {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Topological qutrit from two charge-conjugation pairs.
    TopoQutrit {
        /// 6x4 or 6x2.
        #[arg(long)]
        layout: Option<String>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Compile a qutrit circuit to the native qubit gate set.
    Compile {
        /// prepare-<lx>x<ly>.
        #[arg(long)]
        preset: Option<String>,
        /// Qutrit circuit JSON file.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Final measurement basis.
        #[arg(long, value_enum)]
        basis: Option<Basis>,
        #[arg(long, value_enum)]
        policy: Option<Policy>,
        #[arg(long, action = ArgAction::Set)]
        peephole: Option<bool>,
        /// Write the compiled circuit (.qasm for text, otherwise JSON).
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run the oracle suites.
    Verify {
        /// Random circuits sampled against the dense simulator.
        #[arg(long)]
        circuits: Option<usize>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fidelity bounds from two projector expectations.
    Bounds {
        #[arg(long)]
        trp: Option<f64>,
        #[arg(long)]
        trq: Option<f64>,
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long)]
        trp_se: Option<f64>,
        #[arg(long)]
        trq_se: Option<f64>,
        /// Charge-loop projector triple, for a topological qutrit bound.
        #[arg(long, value_delimiter = ',')]
        charge: Option<Vec<f64>>,
        /// Flux-loop projector triple.
        #[arg(long, value_delimiter = ',')]
        flux: Option<Vec<f64>>,
        /// Ancilla outcome j.
        #[arg(long)]
        outcome: Option<usize>,
    },
}

fn sim_layer(s: SimArgs) -> RunConfig {
    RunConfig {
        shots: s.shots,
        seed: s.seed,
        noise: s.noise,
        p1: s.p1,
        p2: s.p2,
        p01: s.p01,
        p10: s.p10,
        herald_discard: s.herald_discard,
        spam_mitigate: s.spam_mitigate,
        ..RunConfig::default()
    }
}

/// The command and the settings given as flags.
fn flag_layer(cmd: Cmd) -> (Command, RunConfig) {
    match cmd {
        Cmd::Prepare { lx, ly, sim } => (Command::Prepare, RunConfig { lx, ly, ..sim_layer(sim) }),
        Cmd::BraidPf { sim } => (Command::BraidPf, sim_layer(sim)),
        Cmd::BraidCc { sim } => (Command::BraidCc, sim_layer(sim)),
        Cmd::FusePfPfstar { sim } => (Command::FusePfPfstar, sim_layer(sim)),
        Cmd::TopoQutrit { layout, sim } => (Command::TopoQutrit, RunConfig { layout, ..sim_layer(sim) }),
        Cmd::Compile { preset, circuit, basis, policy, peephole, emit } => {
            (Command::Compile, RunConfig { preset, circuit, basis, policy, peephole, emit, ..RunConfig::default() })
        }
        Cmd::Verify { circuits, shots, seed } => {
            (Command::Verify, RunConfig { circuits, shots, seed, ..RunConfig::default() })
        }
        Cmd::Bounds { trp, trq, sites, trp_se, trq_se, charge, flux, outcome } => (
            Command::Bounds,
            RunConfig { trp, trq, sites, trp_se, trq_se, charge, flux, outcome, ..RunConfig::default() },
        ),
    }
}

#[derive(Serialize)]
struct Document<'a> {
    schema: &'static str,
    command: &'static str,
    preset: Option<String>,
    config: &'a RunConfig,
    result: serde_json::Value,
    metadata: Metadata,
}

#[derive(Serialize)]
struct Metadata {
    generator: String,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let output_dir = cli.output_dir;
    let (cmd, flags) = flag_layer(cli.command);
    let flags = RunConfig { threads: cli.threads, output: cli.output, csv: cli.csv, ..flags };
    let file = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = flags.over(file).resolve(cmd)?;
    if let Some(n) = cfg.threads {
        // only fails when a pool already exists, which then keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let outcome = commands::run(cmd, &cfg)?;
    let doc = Document {
        schema: RUN_SCHEMA,
        command: cmd.name(),
        preset: outcome.preset,
        config: &cfg,
        result: outcome.result,
        metadata: Metadata { generator: format!("z3tc {}", env!("CARGO_PKG_VERSION")) },
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Core(e.into()))?;
    text.push('\n');
    let target = cfg.output.clone().or_else(|| output_dir.map(|d| d.join(format!("{}.json", cmd.name()))));
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let (Some(path), Some(csv)) = (&cfg.csv, &outcome.csv) {
        std::fs::write(path, csv)?;
    }
    eprintln!("{} finished in {:.2}s", cmd.name(), start.elapsed().as_secs_f64());
    match outcome.failure {
        Some(f) => Err(CliError::Failed(f)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
