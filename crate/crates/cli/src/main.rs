use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use pbf_vda::calibrate::{self, error_metrics};
use pbf_vda::config::SimulationConfig;
use pbf_vda::output;
use pbf_vda::probes::ProbeSeries;
use pbf_vda::simulation::Simulation;

#[derive(Parser)]
#[command(
    name = "pbf-vda",
    version,
    about = "Part-scale thermal simulation of powder-bed fusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write probes, energy ledger, snapshots and summary.
    Run {
        config: PathBuf,
        /// Cap on worker threads used within a step.
        #[arg(long)]
        threads: Option<usize>,
        /// Override a config value, e.g. `--set boundary.bed_part.thickness=0.012`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Per-channel MAE / MRE between two probe files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Time window `t0:t1` in seconds.
        #[arg(long)]
        window: Option<String>,
        /// Also write the table as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit the parameters named in the config's calibration block.
    Calibrate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn parse_window(s: &str) -> Result<[f64; 2]> {
    let (a, b) = s.split_once(':').context("window must look like t0:t1")?;
    let w = [a.trim().parse::<f64>()?, b.trim().parse::<f64>()?];
    if !(w[1] > w[0]) {
        bail!("window end must come after its start");
    }
    Ok(w)
}

fn cmd_run(path: &Path, threads: Option<usize>, overrides: &[String]) -> Result<()> {
    let mut cfg = SimulationConfig::load(path, overrides)?;
    if threads.is_some() {
        cfg.solver.threads = threads;
    }
    let dir = output::output_dir(&cfg, &config_dir(path))?;
    let every = cfg.output.snapshot_every;
    let sim = Simulation::new(&cfg)?;
    let result = sim.run_with(|solver, report| {
        if every > 0 && (report.index + 1) % every == 0 {
            let p = output::snapshot_path(&dir, report.index + 1);
            output::write_snapshot(&p, solver.mesh(), solver.temperatures(), report.time)?;
        }
        Ok(())
    })?;
    let written = output::write_results(&cfg, &dir, &result)?;
    print!("{}", output::summary_text(&result.summary));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_compare(a: &Path, b: &Path, window: Option<&str>, out: Option<&Path>) -> Result<()> {
    let sa = ProbeSeries::read_csv(a)?;
    let sb = ProbeSeries::read_csv(b)?;
    let window = window.map(parse_window).transpose()?;
    let channels: Vec<String> = sa
        .names()
        .iter()
        .filter(|n| sb.index_of(n).is_some())
        .cloned()
        .collect();
    if channels.is_empty() {
        bail!("{} and {} share no probe names", a.display(), b.display());
    }
    let mut table = String::from("probe,mae_degC,mre_percent,samples\n");
    println!(
        "{:<20} {:>12} {:>12} {:>8}",
        "probe", "MAE [degC]", "MRE [%]", "samples"
    );
    for ch in &channels {
        let m = error_metrics(&sa, &sb, std::slice::from_ref(ch), window)?;
        println!(
            "{:<20} {:>12.4} {:>12.4} {:>8}",
            ch, m.mae, m.mre, m.samples
        );
        table.push_str(&format!("{ch},{:?},{:?},{}\n", m.mae, m.mre, m.samples));
    }
    if let Some(out) = out {
        std::fs::write(out, table).with_context(|| format!("writing {}", out.display()))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_calibrate(path: &Path, overrides: &[String]) -> Result<()> {
    let cfg = SimulationConfig::load(path, overrides)?;
    let base = config_dir(path);
    let dir = output::output_dir(&cfg, &base)?;
    let outcome = calibrate::calibrate(&cfg, &base, &dir)?;
    for (name, v) in outcome.parameters.iter().zip(&outcome.search.best.x) {
        println!("{name} = {v}");
    }
    println!(
        "evaluations = {}, converged = {}",
        outcome.search.history.len(),
        outcome.search.converged
    );
    println!(
        "calibration MAE = {:.4} degC, MRE = {:.4} %",
        outcome.calibration_error.mae, outcome.calibration_error.mre
    );
    if let Some(v) = outcome.validation_error {
        println!("validation MAE = {:.4} degC, MRE = {:.4} %", v.mae, v.mre);
    }
    println!("wrote {}", outcome.trace_path.display());
    println!("wrote {}", outcome.overlay_path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run {
            config,
            threads,
            overrides,
        } => cmd_run(config, *threads, overrides),
        Command::Compare {
            a,
            b,
            window,
            output,
        } => cmd_compare(a, b, window.as_deref(), output.as_deref()),
        Command::Calibrate { config, overrides } => cmd_calibrate(config, overrides),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
