use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use hfce::bench::{self, SplitFilter, SweepSpec, SynthContext};
use hfce::config::{DictionaryKind, ExperimentConfig};
use hfce::Error;

#[derive(Parser)]
#[command(name = "hfce", version, about = "Hybrid-field channel estimation workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DictArg {
    Polar,
    Angular,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    All,
    Train,
    Validation,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the sweep grid and export an HFCT dataset with manifest.
    Synth {
        /// Experiment config (TOML or JSON); desk profile when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sweep grid (TOML or JSON); built-in defaults when omitted.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `system.rng_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Overrides the sweep's dictionary.
        #[arg(long, value_enum)]
        dictionary: Option<DictArg>,
    },
    /// Score a dataset (and optionally denoised estimates) as NMSE CSV.
    Eval {
        manifest: PathBuf,
        /// Directory holding `<sample id>.hfct` denoised estimates.
        #[arg(long)]
        denoised_dir: Option<PathBuf>,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        split: SplitArg,
    },
    /// Split an eval CSV into one plot-data file per series.
    Report {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 3,
        Error::Io { .. } => 4,
        Error::Validation(_) | Error::Format { .. } | Error::ShapeMismatch { .. } => 5,
        Error::InvalidArgument(_) | Error::DegenerateGeometry { .. } => 1,
    }
}

fn synth(
    config: Option<&Path>,
    sweep: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    jobs: usize,
    dictionary: Option<DictArg>,
) -> hfce::Result<()> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::desk(),
    };
    if let Some(s) = seed {
        cfg.system.rng_seed = s;
    }
    let mut spec = match sweep {
        Some(p) => SweepSpec::load(p)?,
        None => SweepSpec::default(),
    };
    if let Some(d) = dictionary {
        spec.dictionary = match d {
            DictArg::Polar => DictionaryKind::Polar,
            DictArg::Angular => DictionaryKind::Angular,
        };
    }
    let ctx = SynthContext::new(cfg, spec)?;
    let manifest = bench::run_synth(&ctx, out, jobs)?;
    println!("{}", manifest.display());
    Ok(())
}

fn eval(manifest: &Path, denoised_dir: Option<&Path>, out: Option<&Path>, split: SplitArg) -> hfce::Result<()> {
    let split = match split {
        SplitArg::All => SplitFilter::All,
        SplitArg::Train => SplitFilter::Train,
        SplitArg::Validation => SplitFilter::Validation,
    };
    let report = bench::evaluate(manifest, denoised_dir, split)?;
    match out {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| Error::Io { path: p.into(), source: e })?;
            bench::eval::write_csv(&report.rows, file)?;
            info!("wrote {}", p.display());
        }
        None => bench::eval::write_csv(&report.rows, io::stdout().lock())?,
    }
    if !report.errors.is_empty() {
        let mut err = io::stderr().lock();
        for e in &report.errors {
            let _ = writeln!(err, "sample {}: {}", e.id, e.message);
        }
        return Err(Error::Validation(format!(
            "{} sample(s) had no usable denoised estimate",
            report.errors.len()
        )));
    }
    Ok(())
}

fn report(csv: &Path, out: &Path) -> hfce::Result<()> {
    let rows = bench::read_summary_csv(csv)?;
    for p in bench::write_series(&rows, out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth {
            config,
            sweep,
            out,
            seed,
            jobs,
            dictionary,
        } => synth(config.as_deref(), sweep.as_deref(), out, *seed, *jobs, *dictionary),
        Command::Eval {
            manifest,
            denoised_dir,
            out,
            split,
        } => eval(manifest, denoised_dir.as_deref(), out.as_deref(), *split),
        Command::Report { csv, out } => report(csv, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hfce: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
