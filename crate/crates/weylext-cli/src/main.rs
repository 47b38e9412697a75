use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use weylext::scenarios::{run, Relation, Report, Scenario};
use weylext::Error;

/// Reproducible Weyl-extension experiments. Each run writes `<subcommand>.json`
/// and one CSV per table into the output directory.
///
/// Exit status: 0 all checks pass, 1 a tolerance check failed, 2 usage or config error.
#[derive(Parser)]
#[command(name = "weylext", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-dimensional oscillator spectrum against 2j+1.
    HoSpectrum(Common),
    /// Landau extension: clustered spectrum, direct route and eigenvector transfer.
    Landau(Common),
    /// Bopp extension: spectrum, closed forms and agreement with the Bopp shift.
    Bopp(Common),
    /// Op(a∘s) against S⁻¹ Op(a) S for random free symplectic s.
    Covariance(Common),
    /// Gram, partial isometry and intertwining residuals of the intertwiners.
    IntertwineCheck(Common),
    /// Sampled growth and derivative diagnostics.
    Shubin(Common),
    /// Non-hypoellipticity witness and kernel checks.
    Witness(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; the WEYLEXT_OUT environment variable takes precedence.
    #[arg(long, default_value = "weylext_out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for dense linear algebra. Reports are bit-reproducible with 1.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

impl Command {
    fn split(self) -> (Scenario, Common) {
        match self {
            Command::HoSpectrum(c) => (Scenario::HoSpectrum, c),
            Command::Landau(c) => (Scenario::Landau, c),
            Command::Bopp(c) => (Scenario::Bopp, c),
            Command::Covariance(c) => (Scenario::Covariance, c),
            Command::IntertwineCheck(c) => (Scenario::IntertwineCheck, c),
            Command::Shubin(c) => (Scenario::Shubin, c),
            Command::Witness(c) => (Scenario::Witness, c),
        }
    }
}

enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn write_outputs(report: &Report, dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = report.scenario.name();
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
    for t in &report.tables {
        let path = dir.join(format!("{name}_{}.csv", t.name));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(&t.headers)?;
        for row in &t.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    let (scenario, common) = cli.command.split();
    let raw = fs::read_to_string(&common.config)
        .with_context(|| format!("reading config {}", common.config.display()))
        .map_err(Failure::Usage)?;
    faer::set_global_parallelism(if common.jobs == 1 { faer::Par::Seq } else { faer::Par::rayon(common.jobs as usize) });
    let report = run(scenario, &raw, common.seed).map_err(|e| match e {
        Error::NotHermitian { .. } | Error::Degenerate(_) | Error::Numerical(_) => Failure::Run(e.into()),
        _ => Failure::Usage(e.into()),
    })?;
    let out = std::env::var_os("WEYLEXT_OUT").map(PathBuf::from).unwrap_or(common.out);
    write_outputs(&report, &out).map_err(Failure::Usage)?;
    for c in &report.checks {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Holds => "==",
        };
        println!("{:<4} {} = {:.3e} ({rel} {:.1e})", if c.pass { "ok" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    println!("{}: {} -> {}", scenario.name(), if report.pass { "pass" } else { "fail" }, out.display());
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
