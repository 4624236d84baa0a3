use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capops_core::harness::{
    emit_plots, emit_plots_in, read_report, run_experiment, run_suite, ExperimentConfig, ExperimentReport, RunOptions,
};
use clap::{Parser, Subcommand};

/// Run capacity and approximation-number experiments.
#[derive(Debug, Parser)]
#[command(name = "capops", version)]
struct Cli {
    /// Output root; each experiment writes into `<out>/<name>`.
    #[arg(long, global = true, env = "CAPOPS_OUT", default_value = "capops-out")]
    out: PathBuf,

    /// Seed for every experiment, overriding config seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Experiments run in parallel by `suite`.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        /// Also write plot scripts next to the CSV files.
        #[arg(long)]
        plots: bool,
    },
    /// Run every `*.toml` config in a directory.
    Suite { dir: PathBuf },
    /// Write plot scripts for a report.
    Plot {
        report: PathBuf,
        /// Directory for the scripts; defaults to the report's directory.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn print_report(report: &ExperimentReport) {
    println!("{} [{}] seed {}", report.name, report.kind, report.seed);
    for v in &report.verdicts {
        println!(
            "  {} {}: observed {:.6e} expected {:.6e} tol {:e} ({:?})",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.observed,
            v.expected,
            v.tolerance,
            v.comparison
        );
    }
    println!(
        "  report: {}",
        report.output_dir.join(capops_core::harness::REPORT_FILE).display()
    );
}

fn run(cli: &Cli) -> Result<bool, capops_core::Error> {
    let options = RunOptions {
        out_root: cli.out.clone(),
        seed: cli.seed,
    };
    match &cli.command {
        Command::Run { config, plots } => {
            let config = ExperimentConfig::load(config)?;
            let report = run_experiment(&config, &options)?;
            print_report(&report);
            if *plots {
                for p in emit_plots(&report)? {
                    println!("  plot: {}", p.display());
                }
            }
            Ok(report.passed)
        }
        Command::Suite { dir } => {
            let suite = run_suite(dir, &options, cli.workers)?;
            for e in &suite.entries {
                match &e.error {
                    Some(err) => println!("ERROR {} ({}): {err}", e.name, e.config.display()),
                    None => println!("{} {}", if e.passed { "PASS " } else { "FAIL " }, e.name),
                }
            }
            println!("suite: {}", cli.out.join(capops_core::harness::SUITE_FILE).display());
            Ok(suite.passed)
        }
        Command::Plot { report, dir } => {
            let loaded = read_report(report)?;
            let target = dir
                .clone()
                .unwrap_or_else(|| report.parent().map(Path::to_path_buf).unwrap_or_default());
            let written = emit_plots_in(&loaded, &target)?;
            if written.is_empty() {
                println!("no plottable artifacts in {}", report.display());
            }
            for p in written {
                println!("{}", p.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
