use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dqw_cli::commands::{self, IrCase, Model};
use dqw_cli::config::Loaded;
use dqw_cli::output::Artifacts;
use dqw_cli::{exit_code, EXIT_CONFIG, EXIT_ORACLE};
use dqw_core::Error;

#[derive(Parser)]
#[command(name = "dqw", version, about = "Double-quantum-well dark-resonance IR detector pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel stages (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Accepted for interface stability; every stage is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Bound states and resonances of the structure.
    Solve,
    /// Probe susceptibility and transmission spectra.
    Spectrum {
        #[arg(long, value_enum, default_value_t = Ir::Both)]
        ir: Ir,
    },
    /// Signal, efficiency, minimum detectable power and QWIP ratio.
    Detect,
    /// Grid over one four-level parameter.
    Sweep,
    /// Closed-form susceptibility against the master-equation steady state.
    OracleCheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ir {
    Off,
    On,
    Both,
    Detuned,
    All,
}

impl Ir {
    fn cases(self) -> &'static [IrCase] {
        match self {
            Ir::Off => &[IrCase::Off],
            Ir::On => &[IrCase::On],
            Ir::Both => &[IrCase::Off, IrCase::On],
            Ir::Detuned => &[IrCase::Detuned],
            Ir::All => &[IrCase::Off, IrCase::On, IrCase::Detuned],
        }
    }
}

enum Failure {
    Core(Error),
    Oracle(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let loaded = Loaded::from_path(config, cli.out.as_deref())?;
    let mut out = Artifacts::create(&loaded.output_dir, &loaded.hash)?;
    match cli.command {
        Command::Solve => {
            let s = commands::solve(&loaded, &mut out)?;
            println!("bound states: {}, resonances: {}", s.bound, s.resonances);
        }
        Command::Spectrum { ir } => {
            let model = Model::resolve(&loaded)?;
            for s in commands::spectra(&loaded, &model, ir.cases(), &mut out)? {
                println!(
                    "ir {}: min transmission {:.6} at {:.4} meV, {} singular points",
                    s.case.name(),
                    s.min_transmission.1,
                    s.min_transmission.0,
                    s.flagged
                );
            }
        }
        Command::Detect => {
            let model = Model::resolve(&loaded)?;
            let r = commands::detect(&loaded, &model, &mut out)?;
            println!("efficiency {:.4e}", r.efficiency.value);
            println!("P_min {:.4e} W", r.min_power.watts);
            println!("QWIP ratio {:.4e}", r.qwip.value);
        }
        Command::Sweep => {
            let model = Model::resolve(&loaded)?;
            let s = commands::sweep(&loaded, &model, &mut out)?;
            println!("{}: {} points, {} failed", s.parameter, s.points, s.failed);
        }
        Command::OracleCheck => {
            let model = Model::resolve(&loaded)?;
            let s = commands::oracle_check(&loaded, &model, &mut out)?;
            println!(
                "compared {} points, skipped {}, max relative error {:.3e} (tolerance {:.1e})",
                s.compared, s.skipped, s.max_rel_err, s.tolerance
            );
            if s.compared == 0 {
                println!("no point could be compared; see oracle.skipped.log");
            }
            if let Some(sat) = s.saturation_max_rel_err {
                println!("strong-probe deviation {sat:.3e} (informational)");
            }
            if !s.passed() {
                return Err(Failure::Oracle(format!(
                    "max relative error {:.3e} exceeds {:.1e}",
                    s.max_rel_err, s.tolerance
                )));
            }
        }
    }
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = cli.seed;
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: cannot start thread pool: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
        Err(Failure::Oracle(msg)) => {
            eprintln!("oracle mismatch: {msg}");
            ExitCode::from(EXIT_ORACLE as u8)
        }
    }
}
