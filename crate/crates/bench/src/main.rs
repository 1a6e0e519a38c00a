use clap::{ArgGroup, Parser};
use rbt_bench::{
    generate_workload, parse_range, report_emit, run_ops, run_trace, BenchError, Mix, Pattern, RunOptions, ValidateMode,
    WorkloadSpec,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Replay or generate workloads against the bucketed relaxed red-black tree.
#[derive(Parser, Debug)]
#[command(name = "rbt-bench", version)]
#[command(group(ArgGroup::new("source").required(true).args(["trace", "random"])))]
struct Cli {
    /// Trace file with `I k`, `D k`, `Q k` and `V` lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Generate COUNT random operations instead of reading a trace.
    #[arg(long, value_name = "COUNT")]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Operation weights I:D:Q.
    #[arg(long, default_value = "2:1:1")]
    mix: String,
    /// Inclusive key range LO:HI.
    #[arg(long, default_value = "0:1000000", allow_hyphen_values = true)]
    range: String,
    /// uniform, grow-shrink or sawtooth.
    #[arg(long, default_value = "uniform")]
    pattern: String,
    /// Fix-ups the global scan may spend per bucket.
    #[arg(long, default_value_t = 11, value_parser = parse_scan_fixups)]
    scan_fixups: usize,
    #[arg(long, default_value_t = 12)]
    hmin: u32,
    /// none, every or periodic:K.
    #[arg(long, default_value = "none")]
    validate: String,
    /// Shadow every operation with a sorted-list oracle.
    #[arg(long, default_value = "off", value_parser = ["on", "off"])]
    oracle: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the generated trace to this file.
    #[arg(long)]
    emit_trace: Option<PathBuf>,
}

fn parse_scan_fixups(s: &str) -> Result<usize, String> {
    match s {
        "3" => Ok(3),
        "11" => Ok(11),
        _ => Err("expected 3 or 11".into()),
    }
}

fn run(cli: Cli) -> Result<bool, BenchError> {
    let opts = RunOptions {
        scan_fixups: cli.scan_fixups,
        hmin: cli.hmin,
        validate: cli.validate.parse::<ValidateMode>()?,
        oracle: cli.oracle == "on",
    };
    let report = match (&cli.trace, cli.random) {
        (Some(path), _) => run_trace(path, &opts)?,
        (None, Some(count)) => {
            let (lo, hi) = parse_range(&cli.range)?;
            let spec = WorkloadSpec {
                seed: cli.seed,
                count,
                mix: cli.mix.parse::<Mix>()?,
                lo,
                hi,
                pattern: cli.pattern.parse::<Pattern>()?,
            };
            let ops = generate_workload(&spec);
            if let Some(p) = &cli.emit_trace {
                std::fs::write(p, rbt_bench::format_trace(&ops)).map_err(|e| BenchError::Io(format!("{}: {e}", p.display())))?;
            }
            run_ops(&ops, &opts)?
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    report_emit(&report, cli.report.as_deref())?;
    Ok(!report.failed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("rbt-bench: validation failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("rbt-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
