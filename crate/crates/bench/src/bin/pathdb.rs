use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pdg_bench::config::Experiment;
use pdg_bench::pipeline::{self, run_dir};
use pdg_core::pathdb::{curate, CurationSpec, Interpolation, PathDatabase, Strategy};
use pdg_core::seed::rng_for;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "pathdb", about = "Build, curate and inspect path databases")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Interp {
    Interpolated,
    Uninterpolated,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan every training task of an experiment and save the full database.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        results: PathBuf,
    },
    /// Draw curated databases from an existing one.
    Curate {
        #[arg(long)]
        db: PathBuf,
        /// Output directory; files are named `<stem>-<i>.pdb`.
        #[arg(long)]
        out: PathBuf,
        /// Random-subset fraction; ignored with --dtw-threshold.
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
        /// Cluster with this DTW threshold instead of random subsets.
        #[arg(long)]
        dtw_threshold: Option<f64>,
        /// Paths drawn per cluster.
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Number of databases drawn.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "interpolated")]
        interpolation: Interp,
        /// Resampling step for interpolated output.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print size statistics of a database file.
    Stats { db: PathBuf },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().cmd {
        Cmd::Build { config, results } => {
            let mut exp = Experiment::load(&config)?;
            exp.database.candidates.clear();
            let prep = pipeline::prepare(&exp)?;
            let dir = run_dir(&results, &exp);
            pipeline::write_databases(&dir, &exp, &prep)?;
            println!(
                "{} paths ({} failed) -> {}",
                prep.build.solved,
                prep.build.failed.len(),
                PathDatabase::file_path(&dir.join("db"), exp.dataset.distribution.name(), "train").display()
            );
        }
        Cmd::Curate {
            db,
            out,
            fraction,
            dtw_threshold,
            m,
            k,
            interpolation,
            step,
            seed,
        } => {
            let src = PathDatabase::load(&db).with_context(|| format!("loading {}", db.display()))?;
            let strategy = match dtw_threshold {
                Some(threshold) => Strategy::DtwCluster { threshold, m, k },
                None => Strategy::RandomSubset { fraction, k },
            };
            let interpolation = match interpolation {
                Interp::Interpolated => Interpolation::Interpolated,
                Interp::Uninterpolated => Interpolation::Uninterpolated,
            };
            let spec = CurationSpec { strategy, interpolation };
            let drawn = curate(src.space(), src.paths(), &spec, step, &mut rng_for(seed, &[]))?;
            let stem = db.file_stem().and_then(|s| s.to_str()).unwrap_or("db");
            for (i, d) in drawn.iter().enumerate() {
                let path = out.join(format!("{stem}-{i}.pdb"));
                d.save(&path)?;
                println!("{} paths -> {}", d.len(), path.display());
            }
        }
        Cmd::Stats { db } => {
            let d = PathDatabase::load(&db).with_context(|| format!("loading {}", db.display()))?;
            let lengths: Vec<f64> = d.paths().iter().map(|p| p.length()).collect();
            let n = d.len().max(1) as f64;
            println!("paths: {}", d.len());
            println!("states: {}", d.state_count());
            println!("mean states per path: {:.2}", d.state_count() as f64 / n);
            println!("mean length: {:.3}", lengths.iter().sum::<f64>() / n);
            println!("dimension: {}", d.space().dim());
        }
    }
    Ok(())
}
