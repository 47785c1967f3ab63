use std::fs;
use std::path::{Path as FsPath, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pdg_bench::config::{Cell, Experiment};
use pdg_bench::dataset::Split;
use pdg_bench::pipeline::{self, run_dir};
use pdg_bench::planner::PlannerId;
use pdg_bench::report::{emit_report, read_records_csv, write_records_csv};
use pdg_core::pathdb::PathDatabase;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "bench", about = "Planning benchmark harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Root under which `<run-id>/` is created.
    #[arg(long, default_value = "results")]
    results: PathBuf,
}

#[derive(Args, Default)]
struct Overrides {
    /// Run only this planner.
    #[arg(long)]
    planner: Option<PlannerId>,
    #[arg(long)]
    delta_goal: Option<f64>,
    #[arg(long)]
    delta_value: Option<f64>,
    /// Path database file for database planners.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Lightning retrieval count.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p_goal: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    r_attach: Option<f64>,
    /// Edge discretization step override.
    #[arg(long)]
    edge_step: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the dataset and write environments.
    GenData(Common),
    /// Build databases and grid-search every planner on the validation split.
    Tune(Common),
    /// Evaluate tuned planners (or one planner with overrides) on the test split.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Rebuild report tables from a run's records.
    Report {
        /// Run directory holding `records.csv`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 4)]
        drop_worst: usize,
    },
    /// Database-size sweep with the tuned (or base) parameters.
    SweepDbsize(Common),
}

fn tuned_path(dir: &FsPath) -> PathBuf {
    dir.join("tuned.json")
}

fn load_tuned(dir: &FsPath) -> Result<Option<Vec<(PlannerId, Cell)>>> {
    let p = tuned_path(dir);
    if !p.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&fs::read_to_string(&p)?)?))
}

fn apply(o: &Overrides, cell: &mut Cell) {
    let p = &mut cell.params;
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = o.$f { p.$f = v; } )* };
    }
    set!(delta_goal, delta_value, k, p_goal, tau, batch, r_attach);
    if o.edge_step.is_some() {
        p.edge_step = o.edge_step;
    }
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().cmd {
        Cmd::GenData(c) => {
            let exp = Experiment::load(&c.config)?;
            let dir = run_dir(&c.results, &exp);
            let ds = pipeline::make_experiment_dataset(&exp);
            ds.materialize(&dir)?;
            for split in [Split::Train, Split::Validate, Split::Test] {
                let (p, errors) = ds.problems(split);
                println!("{split:?}: {} envs, {} problems, {} failures", ds.seeds(split).len(), p.len(), errors.len());
            }
            println!("{}", dir.display());
        }
        Cmd::Tune(c) => {
            let exp = Experiment::load(&c.config)?;
            let dir = run_dir(&c.results, &exp);
            let prep = pipeline::prepare(&exp)?;
            let grids = pipeline::tune(&exp, &prep)?;
            let tuned: Vec<_> = grids.iter().map(|g| (g.planner, g.best_cell().clone())).collect();
            pipeline::write_artifacts(&dir, &exp, &prep, &grids, &tuned)?;
            for g in &grids {
                let b = &g.table[g.best];
                let db = b.db.map(|i| prep.db_names[i].as_str()).unwrap_or("-");
                println!("{}: {} db={db} success={}/{}", g.planner, b.params, b.successes, b.trials);
            }
        }
        Cmd::Run { common: c, overrides: o } => {
            let exp = Experiment::load(&c.config)?;
            let dir = run_dir(&c.results, &exp);
            let mut prep = pipeline::prepare(&exp)?;
            let mut tuned = match load_tuned(&dir)? {
                Some(t) => t,
                None => {
                    let grids = pipeline::tune(&exp, &prep)?;
                    let t: Vec<_> = grids.iter().map(|g| (g.planner, g.best_cell().clone())).collect();
                    pipeline::write_artifacts(&dir, &exp, &prep, &grids, &t)?;
                    t
                }
            };
            if let Some(p) = o.planner {
                let mut cell = tuned
                    .iter()
                    .find(|(q, _)| *q == p)
                    .map(|(_, c)| c.clone())
                    .unwrap_or(Cell { params: Default::default(), db: None });
                if let Some(file) = &o.db {
                    prep.dbs.push(PathDatabase::load(file).with_context(|| format!("loading {}", file.display()))?);
                    cell.db = Some(prep.dbs.len() - 1);
                }
                if p.uses_database() && cell.db.is_none() {
                    bail!("{p} needs --db or a tuned database");
                }
                apply(&o, &mut cell);
                tuned = vec![(p, cell)];
            }
            let records = pipeline::evaluate(&exp, &prep, &tuned);
            write_records_csv(&dir.join("records.csv"), &records)?;
            let files = emit_report(&dir.join("report"), exp.dataset.distribution.name(), &records, exp.eval.drop_worst)?;
            print!("{}", fs::read_to_string(&files.cost_md)?);
            print!("{}", fs::read_to_string(&files.length_md)?);
        }
        Cmd::Report { run, drop_worst } => {
            let records = read_records_csv(&run.join("records.csv"))?;
            let env = fs::read_to_string(run.join("config.toml"))
                .ok()
                .and_then(|t| Experiment::from_toml(&t).ok())
                .map(|e| e.dataset.distribution.name().to_string())
                .unwrap_or_else(|| "env".into());
            let files = emit_report(&run.join("report"), &env, &records, drop_worst)?;
            print!("{}", fs::read_to_string(&files.cost_md)?);
            print!("{}", fs::read_to_string(&files.length_md)?);
        }
        Cmd::SweepDbsize(c) => {
            let exp = Experiment::load(&c.config)?;
            let Some(sweep) = exp.sweep.clone() else {
                bail!("config has no [sweep] section");
            };
            let dir = run_dir(&c.results, &exp);
            let prep = pipeline::prepare(&exp)?;
            let base = load_tuned(&dir)?
                .and_then(|t| t.into_iter().find(|(p, _)| *p == sweep.planner))
                .map(|(_, c)| c)
                .unwrap_or_else(|| {
                    let grid = exp.planners.iter().find(|p| p.id == sweep.planner);
                    Cell {
                        params: grid.map(|g| g.grid.base.clone()).unwrap_or_default(),
                        db: None,
                    }
                });
            let points = pipeline::sweep_dbsize(&exp, &prep, &sweep, &base)?;
            pipeline::write_sweep(&dir.join("sweep"), &points)?;
            println!("size,median_time_s,median_configs,mean_ee_ratio,successes/trials");
            for p in &points {
                println!(
                    "{},{:.5},{},{:.3},{}/{}",
                    p.size, p.median_time_s, p.median_configs, p.mean_ee_ratio, p.successes, p.trials
                );
            }
        }
    }
    Ok(())
}
