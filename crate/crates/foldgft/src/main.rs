use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use foldgft::config::{Command, ConfigOverrides, ExperimentConfig, Redraw, Scheme};
use foldgft::error::{exit, AppError};
use foldgft::experiment::{run_sweep, run_table1, summarize, ExperimentResult};
use foldgft::io;
use foldgft::verify::{run_verify, VerifyOptions};
use foldgft_core::graph::build_knn_graph;
use foldgft_core::interp::ReconstructionMethod;
use foldgft_core::seed::{derive_seed, stream};
use foldgft_core::sensor::place_sensors;

#[derive(Parser)]
#[command(
    name = "foldgft",
    version,
    about = "Graph signal interpolation with spectral-folding GFTs on simulated sensor networks",
    after_help = io::COLUMNS_HELP,
    after_long_help = concat!(
        "EXIT STATUS:\n  0 success\n  1 verification failure\n  2 usage, configuration or I/O error\n  3 numerical failure\n\n",
        "Run `foldgft <command> --help` for the output columns of each command."
    )
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Deploy a random sensor field and write it as `id,x,y` CSV.
    #[command(
        after_help = "OUTPUT: CSV with header id,x,y; ids are 0..n-1.\nThe field seed is derived from --seed."
    )]
    GenField(Common),
    /// Build the KNN graph of a field and write it as `i,j,w` CSV (i < j).
    #[command(after_help = "OUTPUT: CSV with header i,j,w, one row per undirected edge, i < j.")]
    GenGraph {
        #[command(flatten)]
        common: Common,
        /// Read sensor positions from this `id,x,y` file instead of generating them.
        #[arg(long)]
        positions: Option<PathBuf>,
    },
    /// Reconstruction comparison at a single operating point (defaults: ω = 1, |S| = 100, no noise, both schemes).
    #[command(after_help = io::COLUMNS_HELP)]
    Table1(Common),
    /// Noise sweep over ω × σ × |S| (defaults: uniform sampling, ω ∈ {0.5,1,2,3}, σ ∈ {0.1,0.2,0.4}, |S| ∈ {50..150}).
    #[command(after_help = io::COLUMNS_HELP)]
    Sweep(Common),
    /// Check transform and interpolator invariants on random small graphs; --trials sets the instance count.
    #[command(
        after_help = "OUTPUT: one line per failed check naming the instance seed, then a summary.\nExits 1 if any check fails."
    )]
    Verify {
        #[command(flatten)]
        common: Common,
        /// Corrupt one eigenvalue per instance (exercises the folding check).
        #[arg(long, hide = true)]
        inject_fault: bool,
        /// Print every check, not only failures.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_sensors: Option<usize>,
    /// Neighbors per vertex in the KNN graph.
    #[arg(long)]
    knn_k: Option<usize>,
    /// Gaussian kernel width for edge weights.
    #[arg(long)]
    sigma_d: Option<f64>,
    /// Signal frequencies, comma-separated.
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<f64>>,
    /// Noise standard deviations, comma-separated.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    /// Sampling-set sizes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// random, uniform, or both comma-separated.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<Scheme>>,
    /// Subset of SF_Q, BL_I, BL_D, comma-separated.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<ReconstructionMethod>>,
    /// Output directory (table1, sweep) or file (gen-field, gen-graph).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sensor field per trial or shared: auto, shared, per_trial.
    #[arg(long)]
    field_policy: Option<Redraw>,
    /// Random sampling set per trial or shared: auto, shared, per_trial.
    #[arg(long)]
    sampling_policy: Option<Redraw>,
}

impl Common {
    fn resolve(&self, command: Command) -> Result<ExperimentConfig, AppError> {
        let file = match &self.config {
            Some(p) => ConfigOverrides::from_file(p)?,
            None => ConfigOverrides::default(),
        };
        let mut methods = self.methods.clone();
        if let Some(m) = methods.as_mut() {
            m.sort();
            m.dedup();
        }
        let flags = ConfigOverrides {
            n_sensors: self.n_sensors,
            knn_k: self.knn_k,
            sigma_d: self.sigma_d,
            omega: self.omega.clone(),
            sigma: self.sigma.clone(),
            sizes: self.sizes.clone(),
            schemes: self.scheme.clone(),
            methods,
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
            field_policy: self.field_policy,
            sampling_policy: self.sampling_policy,
        };
        file.merge(flags).resolve(command)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32, AppError> {
    match cli.command {
        Cmd::GenField(common) => {
            let cfg = common.resolve(Command::Generate)?;
            let seed = derive_seed(cfg.master_seed, &[stream::FIELD]);
            let field = place_sensors(cfg.n_sensors, seed)?;
            io::write_positions(&cfg.output_path, field.positions())?;
            println!(
                "wrote {} sensors (field seed {seed}) to {}",
                field.len(),
                cfg.output_path.display()
            );
        }
        Cmd::GenGraph { common, positions } => {
            let mut common = common;
            if common.out.is_none() {
                common.out = Some(PathBuf::from("graph.csv"));
            }
            let cfg = common.resolve(Command::Generate)?;
            let points = match &positions {
                Some(p) => io::read_positions(p)?,
                None => {
                    let seed = derive_seed(cfg.master_seed, &[stream::FIELD]);
                    place_sensors(cfg.n_sensors, seed)?.positions().to_vec()
                }
            };
            let g = build_knn_graph(&points, cfg.knn_k, cfg.sigma_d)?;
            io::write_edges(&cfg.output_path, &g)?;
            println!(
                "wrote {} edges over {} vertices to {}",
                g.edges().count(),
                g.vertex_count(),
                cfg.output_path.display()
            );
        }
        Cmd::Table1(common) => {
            let cfg = common.resolve(Command::Table1)?;
            report(&cfg, &run_table1(&cfg))?;
        }
        Cmd::Sweep(common) => {
            let cfg = common.resolve(Command::Sweep)?;
            report(&cfg, &run_sweep(&cfg))?;
        }
        Cmd::Verify {
            common,
            inject_fault,
            verbose,
        } => {
            let cfg = common.resolve(Command::Verify)?;
            let rep = run_verify(&VerifyOptions {
                instances: cfg.n_trials,
                master_seed: cfg.master_seed,
                inject_fault,
            });
            for o in &rep.outcomes {
                if verbose || !o.passed {
                    println!("{o}");
                }
            }
            for (idx, seed) in &rep.skipped {
                println!("SKIP instance {idx} seed {seed:#018x}: no admissible partition found");
            }
            let failed = rep.failures().count();
            println!(
                "{} instances, {} checks, {} failed",
                rep.instances_checked,
                rep.outcomes.len(),
                failed
            );
            if failed > 0 {
                return Err(AppError::ChecksFailed(failed));
            }
        }
    }
    Ok(exit::SUCCESS)
}

fn report(cfg: &ExperimentConfig, result: &ExperimentResult) -> Result<(), AppError> {
    let files = io::write_results(result, &cfg.output_path)?;
    println!(
        "{:<8} {:<5} {:>6} {:>6} {:>5} {:>10} {:>9} {:>6} {:>6}",
        "scheme", "method", "omega", "sigma", "|S|", "mean_dB", "std", "trials", "failed"
    );
    for s in summarize(result) {
        println!(
            "{:<8} {:<6} {:>6} {:>6} {:>5} {:>10.3} {:>9.3} {:>6} {:>6}",
            s.scheme.as_str(),
            s.method.as_str(),
            s.omega,
            s.sigma,
            s.sample_size,
            s.mean_snr,
            s.std_snr,
            s.trials,
            s.failures
        );
    }
    println!("raw: {}", files.raw.display());
    println!("summary: {}", files.summary.display());
    println!("plot panels: {}", files.plots.len());
    Ok(())
}
