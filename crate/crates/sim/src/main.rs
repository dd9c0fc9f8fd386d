use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vlcsec::commands::{self, SingleShot};
use vlcsec::{CliError, Config, CsiMode, Design, Table};

#[derive(Parser, Debug)]
#[command(
    name = "vlcsec",
    version,
    about = "Secrecy energy-efficiency sweeps for indoor VLC downlinks"
)]
struct Cli {
    /// TOML scenario file; built-in reference values when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// EE, SEE, feasibility and SINR gap against the emitted power.
    SweepPower,
    /// Feasibility probability against the AN power knob ρ.
    Feasibility,
    /// Max-min SEE against the number of Eves (known CSI).
    EvesSweep,
    /// Per-iteration Dinkelbach and CCP errors.
    Convergence,
    /// Run one design on given receiver positions and print it as JSON.
    Design {
        #[arg(long, default_value = "selective_siso")]
        scheme: String,
        #[arg(long, value_enum, default_value = "unknown")]
        csi: CsiArg,
        #[arg(long, default_value_t = 30.0)]
        p_t_dbm: f64,
        /// Bob's floor position `x,y` (m).
        #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
        bob: (f64, f64),
        /// Eve floor position `x,y`; repeat for several Eves.
        #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
        eve: Vec<(f64, f64)>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum CsiArg {
    Unknown,
    Known,
}

fn parse_xy(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got '{s}'"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok((p(x)?, p(y)?))
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.realizations {
        cfg.realizations = n;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load(&cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let table: Table = match &cli.command {
        Command::SweepPower => pool.install(|| commands::sweep_power(&cfg))?,
        Command::Feasibility => pool.install(|| commands::feasibility(&cfg))?,
        Command::EvesSweep => pool.install(|| commands::eves_sweep(&cfg))?,
        Command::Convergence => pool.install(|| commands::convergence(&cfg))?,
        Command::Design {
            scheme,
            csi,
            p_t_dbm,
            bob,
            eve,
        } => {
            let shot = SingleShot {
                design: scheme.parse::<Design>().map_err(CliError::Config)?,
                csi_mode: match csi {
                    CsiArg::Unknown => CsiMode::Unknown,
                    CsiArg::Known => CsiMode::Known,
                },
                p_t_dbm: *p_t_dbm,
                bob: *bob,
                eves: eve.clone(),
            };
            let report = commands::design(&cfg, &shot)?;
            let mut w = sink(&cli.out)?;
            serde_json::to_writer_pretty(&mut w, &report)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            writeln!(w)?;
            w.flush()?;
            return Ok(());
        }
    };
    table.write(cfg.seed, sink(&cli.out)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vlcsec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
