//! `rmtlab` experiment runner.
//!
//! Each subcommand writes CSV tables, SVG figures drawn from those tables and
//! a JSON summary into the output directory. Exit status 2 means the
//! configuration was rejected, 3 a numerical or accuracy failure (with JSON
//! diagnostics on stderr).

mod artifacts;
mod commands;
mod plot;

use clap::{Args, Parser, Subcommand};
use commands::*;
use rmtlab::config::{parse_f64_list, parse_usize_list, ExperimentConfig};
use serde_json::Value;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "RMTLAB_OUT_DIR";
const DEFAULT_OUT: &str = "rmtlab-out";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lab(rmtlab::Error),
    Io(std::io::Error),
}

impl From<rmtlab::Error> for CliError {
    fn from(e: rmtlab::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Lab(e)
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

#[derive(Parser, Debug)]
#[command(name = "rmtlab", version, about = "Finite-N experiments for the deformed GUE")]
struct Cli {
    /// Output directory [default: $RMTLAB_OUT_DIR, else the config's `output`, else ./rmtlab-out].
    #[arg(long, global = true, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Key-value config file supplying law, a, N, seed and trials.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct EnsembleOpts {
    /// Entry law: bernoulli, uniform, gaussian or two_point.
    #[arg(long)]
    law: Option<String>,
    /// Law parameters as k=v pairs, e.g. q=0.3.
    #[arg(long)]
    params: Option<String>,
    /// Strength of the GUE component.
    #[arg(long)]
    a: Option<f64>,
    /// Matrix size, or a comma-separated ladder.
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl EnsembleOpts {
    fn flags(&self, trials: Option<usize>) -> EnsembleFlags {
        EnsembleFlags {
            law: self.law.clone(),
            params: self.params.clone(),
            a: self.a,
            n: self.n.clone(),
            seed: self.seed,
            trials,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw one matrix M = (W + aV)/sqrt(N) and export it.
    Sample {
        #[command(flatten)]
        ens: EnsembleOpts,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        /// bin, csv or both.
        #[arg(long, default_value = "bin")]
        format: String,
        /// Also export the eigenvalues.
        #[arg(long)]
        spectrum: bool,
    },
    /// Eigenvalue histogram against the semicircle.
    Spectrum {
        #[command(flatten)]
        ens: EnsembleOpts,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Rescaled correlation kernel on a tau grid against the sine kernel.
    KernelScan {
        #[command(flatten)]
        ens: EnsembleOpts,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u: f64,
        /// Number of Wigner spectra averaged per N.
        #[arg(long, default_value_t = 1)]
        spectra: usize,
        #[arg(long = "tau-max", default_value_t = 4.0)]
        tau_max: f64,
        #[arg(long = "tau-step", default_value_t = 0.1)]
        tau_step: f64,
    },
    /// Monte Carlo spacing statistic against the limiting CDF.
    SpacingMc {
        #[command(flatten)]
        ens: EnsembleOpts,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long = "s-grid", default_value = "0.25,0.5,0.75,1,1.5,2,3")]
        s_grid: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u: f64,
        /// Window scale(s): a number, a list, or `sweep` for N^(1/3), N^(1/2), N^(2/3).
        #[arg(long = "tN")]
        t_n: Option<String>,
        /// Use V/sqrt(N) alone instead of the deformed ensemble.
        #[arg(long)]
        control: bool,
    },
    /// Sine-kernel gap probability, spacing density and CDF.
    Fredholm {
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[arg(long, default_value_t = 6.0)]
        smax: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Gap between the conditional path density and its large-T limit.
    KmCheck {
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        #[arg(long = "S", default_value_t = 1.0)]
        s: f64,
        #[arg(long = "T-grid", default_value = "10,100,1000,10000,100000,1000000")]
        t_grid: String,
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        y: String,
        /// Points per axis of the evaluation grid.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Terminal configurations of Dyson's eigenvalue SDE.
    Dyson {
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        y: String,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Final time [default: a^2/N].
        #[arg(long)]
        t: Option<f64>,
        /// Step size [default: 1e-4 (min gap)^2].
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Eigenvalues of diag(y) + (a/sqrt N) V against the exact density (N = 2).
    Prop11Check {
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        y: String,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fredholm ratio by brute-force quadrature against the finite-rank determinant.
    Prop22Check {
        #[arg(long = "N", default_value = "2,3")]
        n: String,
    },
    /// Run the experiment named in a config file.
    Run { config: PathBuf },
    /// Re-run a command from its JSON summary.
    Replay { summary: PathBuf },
    /// Redraw every figure listed in a JSON summary from its CSV.
    Plot { summary: PathBuf },
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            Ok(ExperimentConfig::parse(&text)?)
        }
    }
}

fn read_summary(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad summary {}: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<Value, CliError> {
    let cfg = load_config(&cli.config)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let out = out.as_path();
    match cli.command {
        Command::Sample { ens, trial, format, spectrum } => {
            let ens = ens.flags(None).resolve(&cfg)?;
            commands::sample(out, SampleArgs { ens, trial, format, spectrum })
        }
        Command::Spectrum { ens, trials, bins } => commands::spectrum(out, ens.flags(trials).resolve(&cfg)?, bins),
        Command::KernelScan { ens, u, spectra, tau_max, tau_step } => {
            let ens = ens.flags(None).resolve(&cfg)?;
            kernel_scan(out, KernelScanArgs { ens, u, spectra, tau_max, tau_step })
        }
        Command::SpacingMc { ens, trials, s_grid, u, t_n, control } => {
            let ens = ens.flags(trials).resolve(&cfg)?;
            spacing_mc(out, SpacingArgs { ens, s_grid: parse_f64_list("s-grid", &s_grid)?, u, t_n, control })
        }
        Command::Fredholm { nodes, smax, step } => fredholm(out, nodes, smax, step),
        Command::KmCheck { n, s, t_grid, y, grid, seed } => {
            let t_grid = parse_f64_list("T-grid", &t_grid)?;
            km_check(out, KmArgs { n, s, t_grid, y: parse_f64_list("y", &y)?, grid, seed })
        }
        Command::Dyson { y, a, t, dt, paths, seed } => {
            dyson(out, DysonArgs { y: parse_f64_list("y", &y)?, a, t, dt, paths, seed })
        }
        Command::Prop11Check { y, a, samples, seed } => prop11_check(out, parse_f64_list("y", &y)?, a, samples, seed),
        Command::Prop22Check { n } => prop22_check(out, parse_usize_list("N", &n)?),
        Command::Run { config } => {
            let cfg = load_config(&Some(config.clone()))?;
            let name = cfg.experiment.clone().ok_or_else(|| CliError::Usage("config has no 'experiment' key".into()))?;
            if ["run", "replay", "plot"].contains(&name.as_str()) {
                return Err(CliError::Usage(format!("'{name}' cannot be run from a config file")));
            }
            let mut argv = vec!["rmtlab".to_string(), "--config".into(), config.display().to_string()];
            if let Some(o) = &cli.out {
                argv.push(format!("--out={}", o.display()));
            }
            argv.push(name);
            dispatch(Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        Command::Replay { summary } => {
            let s = read_summary(&summary)?;
            let argv: Vec<String> = serde_json::from_value(s["argv"].clone()).map_err(|_| CliError::Usage("summary has no argv".into()))?;
            let mut full = vec!["rmtlab".to_string(), format!("--out={}", out.display())];
            full.extend(argv);
            dispatch(Cli::try_parse_from(full).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        Command::Plot { summary } => {
            let s = read_summary(&summary)?;
            let dir = summary.parent().unwrap_or(Path::new("."));
            let plots = s["plots"].as_array().cloned().unwrap_or_default();
            for p in &plots {
                let csv = dir.join(p["csv"].as_str().unwrap_or_default());
                let spec: plot::PlotSpec = serde_json::from_value(p["spec"].clone())?;
                let text = std::fs::read_to_string(&csv)?;
                let svg = plot::render_svg(&text, &spec).map_err(CliError::Usage)?;
                let file = dir.join(p["file"].as_str().unwrap_or_default());
                let old = std::fs::read_to_string(&file).unwrap_or_default();
                // keep the metadata comment written with the original figure
                let head = old.lines().next().filter(|l| l.starts_with("<!--")).map(|l| format!("{l}\n")).unwrap_or_default();
                std::fs::write(file, head + &svg)?;
            }
            Ok(serde_json::json!({ "redrawn": plots.len() }))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli) {
        Ok(summary) => {
            // a closed pipe on stdout is not an error worth reporting
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Lab(e)) => {
            eprintln!("{}", serde_json::to_string_pretty(&e.to_json()).unwrap_or_default());
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
