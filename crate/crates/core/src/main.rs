use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdd2d::analytic::{collaboration_probs, TopPopularProfile};
use fdd2d::harness::{layer_config, run_scenario, write_results, write_svg_plots, ScenarioKind};
use fdd2d::popularity::zipf_pmf;
use fdd2d::topology::cluster_ratio;
use fdd2d::{Error, Result};

#[derive(Parser)]
#[command(name = "fdd2d", version, about = "Full-duplex D2D caching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo scenario and write `<scenario>.csv` into the output directory
    Simulate {
        /// fig2, fig3, fig4, fig5, fig6 or custom
        #[arg(long)]
        scenario: String,
        /// key = value configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one parameter, e.g. --set n=300 (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every core
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Also write one SVG plot per metric
        #[arg(long)]
        plot: bool,
    },
    /// Print closed-form collaboration probabilities for each sweep point
    Analytic {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Start from a scenario preset
        #[arg(long, default_value = "custom")]
        scenario: String,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::UnknownScenario { .. } => 2,
        Error::InfeasiblePlacement { .. } => 3,
        _ => 1,
    }
}

fn simulate(
    scenario: &str,
    config: Option<PathBuf>,
    set: &[String],
    out: PathBuf,
    seed: Option<u64>,
    workers: usize,
    plot: bool,
) -> Result<()> {
    let kind: ScenarioKind = scenario.parse()?;
    let cfg = layer_config(kind, config.as_deref(), set, seed)?;
    cfg.validate()?;
    let table = run_scenario(&cfg, kind, workers)?;
    fs::create_dir_all(&out).map_err(|source| Error::Io {
        path: out.clone(),
        source,
    })?;
    let path = out.join(format!("{kind}.csv"));
    write_results(&table, &path)?;
    println!("wrote {}", path.display());
    if plot {
        for p in write_svg_plots(&table, &out, kind.name())? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn analytic(scenario: &str, config: Option<PathBuf>, set: &[String]) -> Result<()> {
    let kind: ScenarioKind = scenario.parse()?;
    let cfg = layer_config(kind, config.as_deref(), set, None)?;
    let pmf = zipf_pmf(cfg.m, cfg.gamma_r)?;
    println!("sweep_var,sweep_value,P_FD,P_HD,P_self");
    for x in cfg.grid() {
        let point = cfg.at(x)?;
        point.validate_point()?;
        let probs = collaboration_probs(
            point.n,
            cluster_ratio(point.l_km, point.a_km),
            &TopPopularProfile::new(&pmf, point.h),
        )?;
        println!(
            "{},{x},{:.8e},{:.8e},{:.8e}",
            cfg.sweep.var, probs.fd, probs.hd, probs.self_
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            scenario,
            config,
            set,
            out,
            seed,
            workers,
            plot,
        } => simulate(&scenario, config, &set, out, seed, workers, plot),
        Command::Analytic {
            config,
            set,
            scenario,
        } => analytic(&scenario, config, &set),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
