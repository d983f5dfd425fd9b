use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use splitstudy::data::{Basis, OffsetCalendar};
use splitstudy::report::Hypothesis;
use splitstudy::returns::BetaVariant;
use splitstudy::synthetic::{generate_universe, write_universe, UniverseSpec};
use splitstudy::{emit, run_pipeline, Error, RunConfig, Selector};

#[derive(Parser)]
#[command(name = "splitstudy", version, about = "Event-study analytics for stock splits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze split events and write the selected outputs.
    Run(Box<RunArgs>),
    /// Write a synthetic nine-sample universe as CSV inputs.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the output selectors.
    Selectors,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bars: Option<PathBuf>,
    #[arg(long)]
    splits: Option<PathBuf>,
    #[arg(long)]
    fundamentals: Option<PathBuf>,
    #[arg(long)]
    rates: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// h1, h2, h3 or all.
    #[arg(long)]
    hypothesis: Option<String>,
    /// Price basis: raw or adjusted.
    #[arg(long)]
    basis: Option<String>,
    /// Volume basis: raw or adjusted.
    #[arg(long)]
    volume_basis: Option<String>,
    /// cov or corr.
    #[arg(long)]
    beta_variant: Option<String>,
    #[arg(long)]
    month_days: Option<i64>,
    #[arg(long)]
    min_coverage: Option<f64>,
    /// Offset calendar: weekdays or rows.
    #[arg(long)]
    calendar: Option<String>,
    /// Run on a synthetic universe with this seed when no bars are given.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated selectors, or `all`.
    #[arg(long, value_delimiter = ',')]
    emit: Option<Vec<String>>,
    /// Pinned timestamp recorded in the report metadata.
    #[arg(long)]
    timestamp: Option<String>,
}

fn build_config(a: RunArgs) -> splitstudy::Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let set = &mut cfg.analysis;
    if let Some(v) = a.hypothesis {
        set.hypothesis = v.parse::<Hypothesis>()?;
    }
    if let Some(v) = a.basis {
        set.price_basis = v.parse::<Basis>()?;
    }
    if let Some(v) = a.volume_basis {
        set.volume_basis = v.parse::<Basis>()?;
    }
    if let Some(v) = a.beta_variant {
        set.beta_variant = v.parse::<BetaVariant>()?;
    }
    if let Some(v) = a.calendar {
        set.calendar = match v.as_str() {
            "weekdays" => OffsetCalendar::Weekdays,
            "rows" => OffsetCalendar::Rows,
            other => return Err(Error::InvalidParameter(format!("unknown calendar `{other}`"))),
        };
    }
    if let Some(v) = a.month_days {
        set.month_days = v;
    }
    if let Some(v) = a.min_coverage {
        set.min_coverage = v;
    }
    for (slot, v) in [
        (&mut cfg.bars, a.bars),
        (&mut cfg.splits, a.splits),
        (&mut cfg.fundamentals, a.fundamentals),
        (&mut cfg.rates, a.rates),
    ] {
        if v.is_some() {
            *slot = v;
        }
    }
    if let Some(v) = a.out {
        cfg.out = v;
    }
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    if let Some(v) = a.emit {
        cfg.emit = v;
    }
    if a.timestamp.is_some() {
        cfg.timestamp = a.timestamp;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn selectors(names: &[String]) -> splitstudy::Result<Vec<Selector>> {
    if names.iter().any(|n| n == "all") {
        return Ok(Selector::all());
    }
    names.iter().map(|n| n.trim().parse()).collect()
}

fn run(command: Command) -> splitstudy::Result<()> {
    match command {
        Command::Run(args) => {
            let cfg = build_config(*args)?;
            let sels = selectors(&cfg.emit)?;
            let report = run_pipeline(&cfg)?;
            let written = emit(&report, &cfg.out, &sels)?;
            eprintln!(
                "{} samples analyzed, {} excluded; wrote {} files to {}",
                report.aggregate.samples_analyzed,
                report.aggregate.samples_excluded,
                written.len(),
                cfg.out.display()
            );
        }
        Command::Generate { out, seed } => {
            let u = generate_universe(&UniverseSpec { seed, ..Default::default() })?;
            let files = write_universe(&u, &out)?;
            for p in [files.bars, files.splits, files.fundamentals, files.rates] {
                println!("{}", p.display());
            }
        }
        Command::Selectors => {
            for s in Selector::all() {
                println!("{s}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
