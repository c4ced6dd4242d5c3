use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coupled_cavities::experiments::{
    self, export, run_array, run_evolve, run_figure, run_master, run_sweep, CrossDamping, ExportFormat,
    FigureDataset, FigureId, RunConfig, SweepSpec, SweepVariable,
};
use coupled_cavities::{Error, Result};

#[derive(Parser)]
#[command(name = "cavity-sim", version, about = "Two-photon dynamics in coupled cavities and cavity arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regenerate a figure dataset (fig1, fig2, fig3, fig7, fig8, fig9a, fig9b, fig10, fig11, fig12)
    Figure {
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep one parameter (delta, epsilon, time, k, gamma_d)
    Sweep {
        #[arg(long)]
        variable: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        stop: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        /// Explicit comma-separated sweep values instead of start/stop/count
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Closed two-cavity evolution
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Master-equation evolution with decay and dephasing
    Master {
        #[command(flatten)]
        common: Common,
    },
    /// Coincidence matrix of a linear cavity array
    Array {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    omega1: Option<f64>,
    #[arg(long = "J")]
    coupling: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    chi1: Option<f64>,
    #[arg(long)]
    chi2: Option<f64>,
    #[arg(long)]
    gamma11: Option<f64>,
    #[arg(long)]
    gamma22: Option<f64>,
    /// off | max | value (value reads --gamma12/--gamma21)
    #[arg(long)]
    cross_damping: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma12: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma21: Option<f64>,
    #[arg(long)]
    gamma_d: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// JSON file with the same keys as the flags; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn run_config(&self) -> Result<RunConfig> {
        let flags = RunConfig {
            omega1: self.omega1,
            coupling: self.coupling,
            k: self.k,
            delta: self.delta,
            chi1: self.chi1,
            chi2: self.chi2,
            gamma11: self.gamma11,
            gamma22: self.gamma22,
            cross_damping: self.cross_damping.as_deref().map(str::parse::<CrossDamping>).transpose()?,
            gamma12: self.gamma12,
            gamma21: self.gamma21,
            gamma_d: self.gamma_d,
            theta: self.theta,
            phi: self.phi,
            epsilon: self.epsilon,
            n: self.n,
            r: self.r,
            s: self.s,
            t_end: self.t_end,
            dt: self.dt,
            ..RunConfig::default()
        };
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.merge(flags))
    }

    fn emit(&self, ds: &FigureDataset) -> Result<()> {
        let format: ExportFormat = self.format.parse()?;
        match &self.out {
            Some(path) => export(ds, format, path),
            None => {
                let text = match format {
                    ExportFormat::Csv => experiments::to_csv(ds),
                    ExportFormat::Json => experiments::to_json(ds),
                };
                match std::io::stdout().write_all(text.as_bytes()) {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                        path: PathBuf::from("<stdout>"),
                        source: e,
                    }),
                    _ => Ok(()),
                }
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Figure { id, common } => {
            let id: FigureId = id.parse()?;
            common.format.parse::<ExportFormat>()?;
            common.emit(&run_figure(id)?)
        }
        Command::Sweep {
            variable,
            start,
            stop,
            count,
            values,
            common,
        } => {
            let sweep = RunConfig {
                variable: variable.as_deref().map(str::parse::<SweepVariable>).transpose()?,
                start,
                stop,
                count,
                values,
                ..RunConfig::default()
            };
            let cfg = common.run_config()?.merge(sweep);
            common.emit(&run_sweep(&SweepSpec::from_config(&cfg)?)?)
        }
        Command::Evolve { common } => common.emit(&run_evolve(&common.run_config()?)?),
        Command::Master { common } => common.emit(&run_master(&common.run_config()?)?),
        Command::Array { common } => common.emit(&run_array(&common.run_config()?)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
