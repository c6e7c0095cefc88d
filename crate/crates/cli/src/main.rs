use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polariton_cli::{run, CliError, Format, Mode, RawConfig, SweepSpec};

#[derive(Parser)]
#[command(name = "polariton", version, about = "Exact-diagonalization sweeps of the multi-connected Jaynes-Cummings ring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config file.
    Run(Overrides),
    /// Ground state, gap and correlations of single sectors.
    Sector(Overrides),
    /// Charge and excitation gaps extrapolated in 1/M.
    Gaps(Overrides),
    /// Grand-canonical density staircase.
    Gce(Overrides),
    /// Mott-lobe boundaries against the coupling asymmetry.
    PhaseLambda(Overrides),
    /// Mott-lobe boundaries against detuning.
    PhaseDelta(Overrides),
    /// Isolated-cell closed forms.
    Analytic(Overrides),
    /// Coupling ratio at which the unit-filling gap closes.
    CriticalRatio(Overrides),
    /// Print the resolved defaults of a mode.
    Defaults {
        #[arg(value_enum)]
        mode: Mode,
    },
}

#[derive(Args)]
struct Overrides {
    /// INI-style configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Seed of the eigensolver start block.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write a plot description.
    #[arg(long)]
    plot: bool,
    /// Override any config key, e.g. `--set model.g_r=5:295:10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl Overrides {
    fn resolve(&self, mode: Option<Mode>) -> Result<SweepSpec, CliError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        if let Some(out) = &self.out {
            raw.set(&format!("output.dir={}", out.display()))?;
        }
        if let Some(w) = self.workers {
            raw.set(&format!("output.workers={w}"))?;
        }
        if let Some(s) = self.seed {
            raw.set(&format!("eigen.seed={s}"))?;
        }
        if let Some(f) = self.format {
            let name = match f {
                Format::Csv => "csv",
                Format::Json => "json",
                Format::Both => "both",
            };
            raw.set(&format!("output.format={name}"))?;
        }
        if self.plot {
            raw.set("output.plot=true")?;
        }
        for s in &self.sets {
            raw.set(s)?;
        }
        SweepSpec::from_raw(&raw, mode)
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    let (overrides, mode) = match cli.command {
        Command::Defaults { mode } => {
            for line in SweepSpec::defaults(mode).echo() {
                println!("{line}");
            }
            return Ok(0);
        }
        Command::Run(o) => (o, None),
        Command::Sector(o) => (o, Some(Mode::Sector)),
        Command::Gaps(o) => (o, Some(Mode::Gaps)),
        Command::Gce(o) => (o, Some(Mode::Gce)),
        Command::PhaseLambda(o) => (o, Some(Mode::PhaseLambda)),
        Command::PhaseDelta(o) => (o, Some(Mode::PhaseDelta)),
        Command::Analytic(o) => (o, Some(Mode::Analytic)),
        Command::CriticalRatio(o) => (o, Some(Mode::CriticalRatio)),
    };
    let spec = overrides.resolve(mode)?;
    let result = run(&spec)?;
    let written = result.write()?;
    for path in [written.csv, written.json, written.plot].into_iter().flatten() {
        println!("{}", path.display());
    }
    for f in &result.failures {
        eprintln!("failed grid point {}: {}", f.point.index, f.error);
    }
    Ok(result.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
