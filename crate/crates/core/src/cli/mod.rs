//! Command-line front end: `beltrami <verb> --config run.toml`.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_build, cmd_eval, cmd_helicity, cmd_lattice, cmd_norms, cmd_rates, cmd_section, cmd_trace, eval_points, section_spec,
    Context, Outcome, BUILD_EIGEN_TOLERANCE,
};
pub use config::{
    AnnulusConfig, AnnulusShape, ChartConfig, DynamicsConfig, EvalConfig, FlowSpace, Format, HelicityConfig, LatticeConfig,
    Manifold, NormsConfig, OutputConfig, PipelineConfig, RatesConfig, SectionConfig, TorusConfig,
};

use crate::error::{BeltramiError, Result};

#[derive(Debug, Parser)]
#[command(name = "beltrami", version, about = "Build and analyze Beltrami fields on S³ and T³")]
pub struct Cli {
    /// worker threads; 1 gives bit-reproducible output, 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// run configuration (TOML)
    #[arg(short, long)]
    pub config: PathBuf,
    /// overrides the config seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// overrides output.dir
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// overrides output.field
    #[arg(long)]
    pub field: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// reference → atoms → field descriptor and build report
    Build(RunArgs),
    /// sample a descriptor on a grid (CSV and/or VTK)
    Eval(RunArgs),
    /// integrate field lines from the configured seeds
    Trace(RunArgs),
    /// Poincaré section and closed-orbit report
    Section(RunArgs),
    /// C^m error of the rescaled field against the reference
    Norms(RunArgs),
    Helicity(RunArgs),
    /// lattice point counts on spheres of integer radius
    Lattice(RunArgs),
    /// error at each degree of the sweep and the ratio per doubling
    Rates(RunArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Build(a) => ("build", a),
            Command::Eval(a) => ("eval", a),
            Command::Trace(a) => ("trace", a),
            Command::Section(a) => ("section", a),
            Command::Norms(a) => ("norms", a),
            Command::Helicity(a) => ("helicity", a),
            Command::Lattice(a) => ("lattice", a),
            Command::Rates(a) => ("rates", a),
        }
    }
}

/// Loads the config, applies overrides and runs the command on a pool of `cli.threads` workers.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let (name, args) = cli.command.split();
    let mut config = PipelineConfig::load(&args.config).map_err(|e| e.at_stage("config"))?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(o) = &args.out {
        config.output.dir = o.clone();
    }
    if let Some(f) = &args.field {
        config.output.field = Some(f.clone());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| BeltramiError::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let ctx = Context::new(name, config, rayon::current_num_threads())?;
        match &cli.command {
            Command::Build(_) => cmd_build(&ctx),
            Command::Eval(_) => cmd_eval(&ctx),
            Command::Trace(_) => cmd_trace(&ctx),
            Command::Section(_) => cmd_section(&ctx),
            Command::Norms(_) => cmd_norms(&ctx),
            Command::Helicity(_) => cmd_helicity(&ctx),
            Command::Lattice(_) => cmd_lattice(&ctx),
            Command::Rates(_) => cmd_rates(&ctx),
        }
    })
}
