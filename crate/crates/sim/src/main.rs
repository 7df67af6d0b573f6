use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use frontrun_core::harness::catalog;
use frontrun_sim::emit::{self, Format};
use frontrun_sim::{load, sweep, Error};

/// `println!` that stops quietly when stdout is closed early.
macro_rules! say {
    ($($t:tt)*) => {
        if writeln!(std::io::stdout().lock(), $($t)*).is_err() {
            return Ok(());
        }
    };
}

#[derive(Parser)]
#[command(name = "frontrun-sim", version, about = "Deterministic mempool front-running simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario with one seed.
    Run {
        /// Built-in scenario name or path to a JSON config.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "FRONTRUN_OUT", default_value = "out")]
        out: PathBuf,
        /// Run with every attacker made passive.
        #[arg(long)]
        control: bool,
    },
    /// Run one scenario over a range of seeds, e.g. `0..500`.
    Sweep {
        #[arg(long)]
        scenario: String,
        #[arg(long, value_parser = parse_range)]
        seeds: std::ops::Range<u64>,
        #[arg(long, env = "FRONTRUN_OUT", default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        control: bool,
    },
    /// Convert the reports in a run or sweep directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Fmt::Csv)]
        format: Fmt,
        /// Defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    ListScenarios {
        /// Print the JSON config of this scenario instead.
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

impl From<Fmt> for Format {
    fn from(f: Fmt) -> Self {
        match f {
            Fmt::Csv => Format::Csv,
            Fmt::Json => Format::Json,
        }
    }
}

fn parse_range(s: &str) -> Result<std::ops::Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if a >= b {
        return Err("empty range".into());
    }
    Ok(a..b)
}

fn load_scenario(arg: &str, control: bool) -> Result<frontrun_core::harness::ScenarioConfig, Error> {
    let c = load::scenario(arg)?;
    Ok(if control { c.without_attackers() } else { c })
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
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { scenario, seed, out, control } => {
            let config = load_scenario(&scenario, control)?;
            let reports = sweep::run(&config, seed..seed + 1)?;
            emit::emit(&reports, &out, Format::Json)?;
            emit::emit(&reports, &out, Format::Csv)?;
            let r = &reports[0];
            say!(
                "{} seed={} outcome={} victim_succeeded={} attacker_net_profit={} -> {}",
                r.scenario,
                r.seed,
                r.outcome.name(),
                r.victim_succeeded.map_or("n/a".into(), |v| v.to_string()),
                r.attacker_net_profit,
                out.display()
            );
        }
        Command::Sweep { scenario, seeds, out, control } => {
            let config = load_scenario(&scenario, control)?;
            let reports = sweep::run(&config, seeds)?;
            let agg = sweep::aggregate(&config.name, &reports);
            emit::emit(&reports, &out, Format::Json)?;
            emit::emit(&reports, &out, Format::Csv)?;
            emit::emit_aggregate(&agg, &out)?;
            say!(
                "{} runs={} success_rate={:.4} ci95=[{:.4}, {:.4}] mean_profit={:.0} stddev={:.0} -> {}",
                agg.scenario,
                agg.runs,
                agg.success_rate,
                agg.success_ci95.0,
                agg.success_ci95.1,
                agg.mean_profit,
                agg.stddev_profit,
                out.display()
            );
        }
        Command::Report { input, format, out } => {
            let reports = emit::read_reports(&input)?;
            let out = out.unwrap_or(input);
            for path in emit::emit(&reports, &out, format.into())? {
                say!("{}", path.display());
            }
        }
        Command::ListScenarios { show: Some(name) } => {
            let c = catalog::builtin(&name).ok_or_else(|| {
                Error::Config(frontrun_core::harness::ConfigError { path: String::new(), message: format!("no built-in scenario `{name}`") })
            })?;
            say!("{}", load::to_json(&c));
        }
        Command::ListScenarios { show: None } => {
            for (name, about) in catalog::BUILTINS {
                say!("{name:<38} {about}");
            }
        }
    }
    Ok(())
}
