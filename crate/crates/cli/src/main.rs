use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::warn;

use mixfleet::model::BehaviorParams;
use mixfleet::scenario::{
    self, files, CalibrationTarget, CheckKind, InstanceFiles, ScenarioError, ScenarioParams, SweepSpec,
    SweepVariable,
};

/// Pricing and fleet sizing for ride-sourcing markets with autonomous and
/// human-driven vehicles.
#[derive(Debug, Parser)]
#[command(name = "mixfleet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic city with default parameters.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Number of zones, at most 19.
        #[arg(long, default_value_t = 19, value_parser = clap::value_parser!(u64).range(1..=19))]
        zones: u64,
    },
    /// Fit potential demand and outside-option costs to the no-AV targets.
    Calibrate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Where to write the calibrated instance; defaults to the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relaxed bound and refined decision; writes summary.csv and solution.csv.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Enforce the wage floor and allow hiring part of the willing supply.
        #[arg(long)]
        regulated: bool,
    },
    /// Solve over a range of AV costs or wage floors ($/hour).
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = ["D", "q_min"])]
        var: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
        /// Regulated model for AV-cost sweeps; wage-floor sweeps always are.
        #[arg(long)]
        regulated: bool,
    },
    /// Validate the files and run one solve with the full residual suite.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        regulated: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<u8, ScenarioError> {
    match command {
        Command::Generate { seed, out, zones } => {
            let instance = scenario::generate_instance(seed, zones as usize, &Default::default());
            let files = InstanceFiles { instance, params: ScenarioParams::new(BehaviorParams::san_francisco()) };
            scenario::write_instance_dir(&out, &files)?;
            println!("wrote {} zones to {}", zones, out.display());
            Ok(0)
        }
        Command::Calibrate { input, out } => {
            let files = scenario::read_instance_dir(&input)?;
            let (instance, report) = scenario::calibrate(&files.instance, &files.params, &CalibrationTarget::default())?;
            let out = out.unwrap_or(input);
            std::fs::create_dir_all(&out).map_err(|source| ScenarioError::Io { path: out.clone(), source })?;
            scenario::write_instance(&out, &instance)?;
            if !out.join(files::PARAMS_FILE).exists() {
                let path = out.join(files::PARAMS_FILE);
                std::fs::write(&path, files::params_to_json(&files.params))
                    .map_err(|source| ScenarioError::Io { path, source })?;
            }
            write_json(&out.join("calibration.json"), &report)?;
            println!(
                "demand {:.2}/min, mode share {:.4}, drivers {:.0} (ref {}), wage {:.2} $/h (ref {}), mean fare {:.2} $ (ref {})",
                report.total_demand,
                report.mode_share,
                report.drivers,
                report.reference_drivers,
                report.wage,
                report.reference_wage,
                report.mean_fare,
                report.reference_fare,
            );
            println!("demand scale {}, outside-cost shift {} $", report.demand_scale, report.outside_shift);
            if !report.on_target {
                warn!("targets not reached; closest point written");
            }
            Ok(0)
        }
        Command::Solve { input, out, regulated } => {
            let files = scenario::read_instance_dir(&input)?;
            let sol = scenario::solve(&files.instance, &files.params, regulated, None)?;
            scenario::write_solution(&out, &sol)?;
            let s = &sol.summary;
            println!(
                "profit {:.2} $/h, bound {:.2} $/h, gap {:.4}, AVs {:.1}, drivers {:.1}, wage {:.2} $/h, demand {:.2}/min",
                s.profit, s.upper_bound, s.gap, s.n_a, s.n_h, s.wage, s.demand
            );
            Ok(0)
        }
        Command::Sweep { input, var, lo, hi, step, out, regulated } => {
            let files = scenario::read_instance_dir(&input)?;
            let variable: SweepVariable = var.parse()?;
            let mut spec = SweepSpec::new(variable, lo, hi, step);
            spec.regulated |= regulated;
            let result = scenario::run_sweep(&files.instance, &files.params, &spec)?;
            scenario::write_sweep(&out, &files.instance, &result)?;
            let r = &result.regimes;
            for span in &r.spans {
                println!("{:?}: {} .. {}", span.regime, span.from, span.to);
            }
            if variable == SweepVariable::AvCost {
                println!("D_low {:?}, D_high {:?}", r.d_low, r.d_high);
            }
            if !r.failures.is_empty() {
                println!("failed points: {:?}", r.failures);
            }
            Ok(0)
        }
        Command::Check { input, regulated } => {
            let files = match scenario::read_instance_dir(&input) {
                Ok(f) => f,
                Err(e) => {
                    println!("FAIL load: {e}");
                    return Ok(e.exit_code() as u8);
                }
            };
            let report = scenario::check(&files, regulated);
            for i in &report.items {
                println!("{} {}: {}", if i.passed { "PASS" } else { "FAIL" }, i.name, i.detail);
            }
            if let Some(ex) = &report.existence {
                println!(
                    "existence conditions (sufficient only): {}",
                    if ex.all_pass() { "hold".to_string() } else { format!("fail in zone indices {:?}", ex.failing_zones()) }
                );
            }
            Ok(match report.first_failure() {
                None => 0,
                Some(_) if report.items.iter().any(|i| !i.passed && i.kind == CheckKind::Data) => 2,
                Some(_) => 3,
            })
        }
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), ScenarioError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    std::fs::write(path, text).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })
}
