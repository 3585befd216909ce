use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pseudo_dce::scenario::{
    parse_config_over, run_to_dir, sweep, write_sweep, Preset, ScenarioConfig,
};
use pseudo_dce::verify::{verify, Level, VerifyOptions};
use pseudo_dce::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_SIMULATION: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(name = "pseudo-dce", version, about = "Pseudo-Hermitian dynamical Casimir effect simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (or a figure preset) and write CSV, JSON and plot files.
    Run {
        /// Scenario file; keys override the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = ["fig1", "fig2", "fig3"])]
        preset: Option<String>,
        /// Output directory.
        #[arg(long, env = "PSEUDO_DCE_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Run the verification suite and print a JSON report.
    Verify {
        #[arg(long, default_value = "fast", value_parser = ["fast", "full"])]
        level: String,
        /// Reverse the sign of dr/dt in the squeeze-growth checks.
        #[arg(long)]
        inject_fault: bool,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a scenario once per value of one numeric key.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, env = "PSEUDO_DCE_OUT", default_value = "out")]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Validation(_) | Error::Io(_) => EXIT_VALIDATION,
        _ => EXIT_SIMULATION,
    }
}

fn load(config: Option<&Path>, base: ScenarioConfig) -> Result<ScenarioConfig, Error> {
    let text = match config {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config_over(&text, base)
}

fn cmd_run(config: Option<&Path>, preset: Option<&str>, out: &Path) -> Result<u8, Error> {
    let preset = preset.map(str::parse::<Preset>).transpose()?;
    let base = preset.map(Preset::base).unwrap_or_default();
    let cfg = load(config, base)?;
    let records = run_to_dir(&cfg, preset, out)?;
    let mut code = 0;
    for rec in &records {
        match (&rec.summary, &rec.error) {
            (Some(s), _) => println!(
                "{}: r = {:.6}, N = {:.6e}, R = {}, {:.2}s",
                rec.label,
                s.final_r,
                s.final_n,
                s.amplification.map_or("n/a".to_string(), |r| format!("{r:.6}")),
                rec.wall_time_s
            ),
            (None, Some(e)) => {
                eprintln!("{}: simulation failed: {e}", rec.label);
                code = EXIT_SIMULATION;
            }
            (None, None) => {}
        }
    }
    println!("wrote {}", out.display());
    Ok(code)
}

fn cmd_verify(level: &str, inject_fault: bool, report: Option<&Path>) -> Result<u8, Error> {
    let level: Level = level.parse()?;
    let rep = verify(VerifyOptions { level, inject_fault });
    for c in &rep.checks {
        eprintln!(
            "{} {:<28} {:>11.3e} (threshold {:.1e}, {:.2}s) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold,
            c.seconds,
            c.detail
        );
    }
    let json = serde_json::to_string_pretty(&rep).map_err(|e| Error::Io(e.to_string()))?;
    println!("{json}");
    if let Some(p) = report {
        fs::write(p, &json)?;
    }
    Ok(if rep.passed { 0 } else { EXIT_VERIFICATION })
}

fn cmd_sweep(
    config: Option<&Path>,
    axis: &str,
    values: &[String],
    workers: usize,
    out: &Path,
) -> Result<u8, Error> {
    let cfg = load(config, ScenarioConfig::default())?;
    let res = sweep(&cfg, axis, values, workers)?;
    let path = write_sweep(out, &res)?;
    print!("{}", res.summary_csv());
    println!("wrote {}", path.display());
    Ok(if res.all_ok() { 0 } else { EXIT_SIMULATION })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run { config, preset, out } => cmd_run(config.as_deref(), preset.as_deref(), out),
        Command::Verify {
            level,
            inject_fault,
            report,
        } => cmd_verify(level, *inject_fault, report.as_deref()),
        Command::Sweep {
            config,
            axis,
            values,
            workers,
            out,
        } => cmd_sweep(config.as_deref(), axis, values, *workers, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
