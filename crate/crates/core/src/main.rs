use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quantlab::report::{from_json, render, Format};
use quantlab::suite::{all_pass, run_suite, Suite, SuiteConfig};
use quantlab::{CheckReport, Error};

#[derive(Parser)]
#[command(
    name = "quantlab",
    version,
    about = "Verification suites for Kähler quantization of T*G"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run certificate suites and write a report.
    Run(RunArgs),
    /// Convert a JSON report to json, csv or svg.
    Emit(EmitArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in model (u1, t2, su2) or file:<path>.
    #[arg(long)]
    model: Option<String>,
    /// kahler, psh, transform, reduction, density or all.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Label cutoff; defaults per model.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Grid size per axis for the density demo.
    #[arg(long)]
    grid: Option<usize>,
    /// Tolerance override `check_id=value`; repeatable.
    #[arg(long = "tol", value_name = "ID=VALUE")]
    tol: Vec<String>,
    /// Flat key=value config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct EmitArgs {
    /// JSON report from `quantlab run`.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    #[arg(long, default_value = "json")]
    format: String,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config_from(args: &RunArgs) -> quantlab::Result<SuiteConfig> {
    let mut c = match &args.config {
        Some(p) => SuiteConfig::load(p)?,
        None => SuiteConfig::default(),
    };
    if let Some(m) = &args.model {
        c.model = m.clone();
    }
    if let Some(s) = &args.suite {
        c.suite = s.parse::<Suite>()?;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if args.cutoff.is_some() {
        c.cutoff = args.cutoff;
    }
    if let Some(g) = args.grid {
        c.grid = g;
    }
    if let Some(o) = &args.out {
        c.out = Some(o.clone());
    }
    for t in &args.tol {
        let (id, v) = t
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--tol expects ID=VALUE, got '{t}'")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Usage(format!("--tol value '{v}' is not a number")))?;
        c.tolerances.insert(id.to_string(), v);
    }
    Ok(c)
}

fn write_output(text: &str, out: Option<&PathBuf>) -> quantlab::Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summarize(reports: &[CheckReport]) {
    for r in reports {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        eprintln!(
            "{tag} {:<48} err={:.3e} tol={:.1e}",
            r.check_id, r.max_error, r.tolerance
        );
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    eprintln!("{} checks, {failed} failed", reports.len());
}

fn run(args: RunArgs) -> quantlab::Result<ExitCode> {
    let format: Format = args.format.parse()?;
    let config = config_from(&args)?;
    let reports = run_suite(&config)?;
    write_output(&render(&reports, format)?, config.out.as_ref())?;
    summarize(&reports);
    Ok(if all_pass(&reports) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn emit(args: EmitArgs) -> quantlab::Result<ExitCode> {
    let format: Format = args.format.parse()?;
    let reports = from_json(&std::fs::read_to_string(&args.input)?)?;
    write_output(&render(&reports, format)?, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Emit(a) => emit(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            // Status 1 is reserved for failing checks.
            eprintln!("quantlab: {e}");
            ExitCode::from(2)
        }
    }
}
