//! Subcommands, flag handling and file emission.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails, 2 for
//! configuration errors (including unreadable config files and unwritable
//! output paths).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{apply_env_overrides, parse_table, resolve, ConfigError, Mode, RunConfig};
use crate::record::{
    fmt_f64, write_atomic, write_plot_csv, write_results_csv, write_table_csv, ResultRecord, WriteError,
};
use crate::suites::{run_mode, SuiteOutput};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Header of the sweep summary table.
pub const SWEEP_HEADER: [&str; 7] = ["p", "p_gamma", "classification", "time", "final_sup", "plot_file", "note"];

#[derive(Debug, Parser)]
#[command(name = "fracmem", version, about = "Fractional memory wave model: verification suites, runs and sweeps")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default `results`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the mode named in the configuration.
    Run,
    /// Check the fractional integral operators.
    VerifyFracops,
    /// Check the Volterra inequality tools.
    VerifyVolterra,
    /// Check the power-law test function and its fractional Laplacian.
    VerifyTestfn,
    /// Integrate the wave equation until blow-up or `T_max`.
    Simulate,
    /// Classify runs over `p_values`.
    Sweep,
    /// Print the resolved configuration.
    EchoConfig,
}

impl Command {
    fn forced_mode(self) -> Option<Mode> {
        match self {
            Command::Run | Command::EchoConfig => None,
            Command::VerifyFracops => Some(Mode::VerifyFracops),
            Command::VerifyVolterra => Some(Mode::VerifyVolterra),
            Command::VerifyTestfn => Some(Mode::VerifyTestfn),
            Command::Simulate => Some(Mode::Simulate),
            Command::Sweep => Some(Mode::Sweep),
        }
    }
}

/// Reads the config file, applies `FRACMEM_*` variables, then the flags.
pub fn load_config<I>(cli: &Cli, env: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut table = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            parse_table(&text)?
        }
        None => toml::Table::new(),
    };
    apply_env_overrides(&mut table, env)?;
    let mut cfg = resolve(table, cli.command.forced_mode())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = Some(jobs);
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.display().to_string());
    }
    let bad = cfg.violations();
    if bad.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(bad))
    }
}

pub fn execute<I>(cli: &Cli, env: I) -> i32
where
    I: IntoIterator<Item = (String, String)>,
{
    let cfg = match load_config(cli, env) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if cli.command == Command::EchoConfig {
        print!("{}", cfg.to_toml());
        return EXIT_PASS;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        pool = pool.num_threads(jobs);
    }
    let output = match pool.build() {
        Ok(pool) => pool.install(|| run_mode(&cfg)),
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let records: Vec<ResultRecord> = output
        .checks
        .iter()
        .map(|c| ResultRecord::from_check(&cfg.run_id, cfg.mode.as_str(), c))
        .collect();
    print_summary(&cfg, &output, &records);
    let dir = PathBuf::from(cfg.output.as_deref().unwrap_or("results"));
    if let Err(e) = emit(&dir, &cfg, &output, &records) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    if records.iter().all(|r| r.pass) {
        EXIT_PASS
    } else {
        EXIT_FAILED_CHECK
    }
}

fn print_summary(cfg: &RunConfig, output: &SuiteOutput, records: &[ResultRecord]) {
    println!("{} [{}]", cfg.mode, cfg.run_id);
    for r in records {
        println!(
            "{} {} (lhs {:.6e}, rhs {:.6e}, residual {:.3e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.lhs,
            r.rhs,
            r.residual
        );
    }
    if let Some(sim) = &output.simulation {
        println!(
            "{} at t = {:.6}, sup|u| = {:.6e}, A = {:.6e}, B = {:.6e}, max boundary share {:.3}",
            sim.classification,
            sim.blowup_time.unwrap_or(sim.final_time),
            sim.final_sup,
            sim.a_const,
            sim.b_const,
            sim.max_boundary_fraction
        );
    }
    let failed = records.iter().filter(|r| !r.pass).count();
    println!("{} checks, {} passed, {} failed", records.len(), records.len() - failed, failed);
}

fn plot_name(run_id: &str, index: usize) -> String {
    format!("{run_id}.plot.p{index}.csv")
}

/// Writes the result table, its JSON mirror and any plot data into `dir`.
pub fn emit(dir: &Path, cfg: &RunConfig, output: &SuiteOutput, records: &[ResultRecord]) -> Result<(), WriteError> {
    fs::create_dir_all(dir).map_err(|e| WriteError {
        path: dir.to_path_buf(),
        source: e.into(),
    })?;
    let id = &cfg.run_id;
    write_atomic(&dir.join(format!("{id}.csv")), |out| Ok(write_results_csv(out, records)?))?;
    if let Some(sim) = &output.simulation {
        write_atomic(&dir.join(format!("{id}.plot.csv")), |out| Ok(write_plot_csv(out, &sim.plot_rows())?))?;
    }
    let mut summary = Vec::new();
    let mut index = 0;
    for row in &output.sweep {
        let plot = if row.is_warning() {
            String::new()
        } else {
            index += 1;
            let name = plot_name(id, index);
            let rows = row.result.as_ref().map(|r| r.plot_rows()).unwrap_or_default();
            write_atomic(&dir.join(&name), |out| Ok(write_plot_csv(out, &rows)?))?;
            name
        };
        summary.push(vec![
            fmt_f64(row.p),
            fmt_f64(row.p_gamma),
            row.classification.map(|c| c.label().to_string()).unwrap_or_else(|| "WARNING".into()),
            fmt_f64(row.time),
            fmt_f64(row.final_sup),
            plot,
            row.note.clone(),
        ]);
    }
    if cfg.mode == Mode::Sweep {
        write_atomic(&dir.join(format!("{id}.sweep.csv")), |out| {
            Ok(write_table_csv(out, &SWEEP_HEADER, &summary)?)
        })?;
    }
    let simulation = output.simulation.as_ref().map(|s| {
        json!({
            "classification": s.classification,
            "blowup_time": s.blowup_time,
            "final_time": s.final_time,
            "final_sup": s.final_sup,
            "steps": s.steps,
            "A": s.a_const,
            "B": s.b_const,
            "max_boundary_fraction": s.max_boundary_fraction,
        })
    });
    let report = json!({
        "run_id": id,
        "mode": cfg.mode,
        "config": cfg,
        "records": records,
        "simulation": simulation,
        "sweep": if cfg.mode == Mode::Sweep { Some(&output.sweep) } else { None },
    });
    write_atomic(&dir.join(format!("{id}.json")), |out| {
        serde_json::to_writer_pretty(&mut *out, &report)?;
        out.write_all(b"\n")?;
        Ok(())
    })
}
