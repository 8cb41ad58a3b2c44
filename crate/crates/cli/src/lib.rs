//! Front end for the realization engine: replays scenarios, compares the two
//! tax regimes, and prints the worked tables.

pub mod golden;
pub mod render;

use std::ffi::OsString;
use std::io::{self, Write};
use std::num::NonZeroU64;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use realize_core::scenario::BUILTIN_NAMES;
use realize_core::{
    builtin, compare, parse_scenario, run, ComparisonReport, NettingWindow, RateSchedule, Regime,
    RunReport, Scenario,
};

use render::OutputFormat;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SCENARIO: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// The worked tables as shipped; `check` diffs fresh output against this.
pub const PAPER_TABLES_FIXTURE: &str = include_str!("../fixtures/paper_tables.txt");

#[derive(Debug, Parser)]
#[command(name = "realize", version, about = "Capital-gains realization engine for short sales against the box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Scenarios {
    /// Scenario files or built-in names (strategy1, strategy2, strategy3,
    /// proposed_demo, death_avoidance, offset_grid).
    #[arg(required = true, value_name = "FILE-OR-BUILTIN")]
    scenarios: Vec<String>,
}

#[derive(Debug, Args)]
struct TaxFlags {
    /// Rate schedule: `paper` (flat 10%) or `statutory` (5% / 10% tiers).
    #[arg(long, default_value = "paper", value_parser = parse_rates)]
    rates: RateSchedule,
    /// Netting window: `per-tick`, `annual:N` or `whole-run`.
    #[arg(long, default_value = "per-tick", value_parser = parse_window)]
    window: NettingWindow,
}

#[derive(Debug, Args)]
struct FormatFlag {
    /// Output format: table, csv or json.
    #[arg(long, env = "REALIZE_FORMAT", default_value = "table")]
    format: OutputFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay scenarios under one regime.
    Run {
        #[command(flatten)]
        scenarios: Scenarios,
        /// Tax regime: `current` or `proposed`.
        #[arg(long, default_value = "current", value_parser = parse_regime)]
        regime: Regime,
        #[command(flatten)]
        tax: TaxFlags,
        #[command(flatten)]
        format: FormatFlag,
    },
    /// Replay scenarios under both regimes, side by side.
    Compare {
        #[command(flatten)]
        scenarios: Scenarios,
        #[command(flatten)]
        tax: TaxFlags,
        #[command(flatten)]
        format: FormatFlag,
    },
    /// Print every worked table.
    PaperTables,
    /// Print the offsetting grid of ordinary and short sales.
    Grid {
        #[command(flatten)]
        format: FormatFlag,
    },
    /// Diff the worked tables against the shipped fixture and check that
    /// output is reproducible.
    Check,
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    match s {
        "current" => Ok(Regime::Current),
        "proposed" => Ok(Regime::Proposed),
        _ => Err("expected `current` or `proposed`".into()),
    }
}

fn parse_rates(s: &str) -> Result<RateSchedule, String> {
    match s {
        "paper" | "flat" => Ok(RateSchedule::Flat),
        "statutory" => Ok(RateSchedule::Statutory),
        _ => Err("expected `paper` or `statutory`".into()),
    }
}

fn parse_window(s: &str) -> Result<NettingWindow, String> {
    match s {
        "per-tick" => Ok(NettingWindow::PerTick),
        "whole-run" => Ok(NettingWindow::WholeRun),
        _ => {
            let n = s
                .strip_prefix("annual:")
                .ok_or("expected `per-tick`, `annual:N` or `whole-run`")?;
            let ticks_per_year = n
                .parse::<NonZeroU64>()
                .map_err(|_| format!("`{n}` is not a positive tick count"))?;
            Ok(NettingWindow::Annual { ticks_per_year })
        }
    }
}

/// Resolves a command-line argument to a scenario. An existing path wins over
/// a built-in name; the diagnostic is ready to print.
pub fn load_scenario(arg: &str) -> Result<Scenario, String> {
    let path = Path::new(arg);
    if !path.exists() {
        return builtin(arg).map_err(|_| {
            format!(
                "{arg}: error: no such file or built-in scenario (built-ins: {})",
                BUILTIN_NAMES.join(", ")
            )
        });
    }
    let text = std::fs::read_to_string(path).map_err(|e| format!("{arg}: error: {e}"))?;
    let mut scenario = parse_scenario(&text)
        .map_err(|e| format!("{arg}:{}:{}: error: {}", e.line, e.col, e.kind))?;
    if !text.lines().any(|l| l.split_whitespace().next() == Some("scenario")) {
        if let Some(stem) = path.file_stem() {
            scenario.name = stem.to_string_lossy().into_owned();
        }
    }
    Ok(scenario)
}

/// Loads and replays every argument, one thread each; results come back in
/// argument order.
fn fan_out<T: Send>(args: &[String], job: impl Fn(&str, &Scenario) -> Result<T, String> + Sync) -> Vec<Result<T, String>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .iter()
            .map(|arg| {
                let job = &job;
                scope.spawn(move || load_scenario(arg).and_then(|s| job(arg, &s)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario worker panicked"))
            .collect()
    })
}

fn emit(out: &mut dyn Write, s: &str) -> io::Result<()> {
    out.write_all(s.as_bytes())
}

fn split<T>(results: Vec<Result<T, String>>, err: &mut dyn Write) -> io::Result<Option<Vec<T>>> {
    let mut ok = Vec::new();
    let mut failed = false;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(diag) => {
                failed = true;
                writeln!(err, "{diag}")?;
            }
        }
    }
    Ok((!failed).then_some(ok))
}

fn joined_tables<T>(reports: &[T], render: fn(&T) -> String) -> String {
    reports.iter().map(render).collect::<Vec<_>>().join("\n")
}

fn cmd_run(
    args: &[String],
    regime: Regime,
    tax: &TaxFlags,
    format: OutputFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let results = fan_out(args, |arg, s| {
        run(s, regime, tax.rates, tax.window).map_err(|e| format!("{arg}: error: {e}"))
    });
    let Some(reports) = split::<RunReport>(results, err)? else {
        return Ok(EXIT_SCENARIO);
    };
    let text = match format {
        OutputFormat::Table => joined_tables(&reports, render::run_table),
        OutputFormat::Csv => render::runs_csv(&reports),
        OutputFormat::Json => render::json(&reports),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_compare(
    args: &[String],
    tax: &TaxFlags,
    format: OutputFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let results = fan_out(args, |arg, s| {
        compare(s, tax.rates, tax.window).map_err(|e| format!("{arg}: error: {e}"))
    });
    let Some(reports) = split::<ComparisonReport>(results, err)? else {
        return Ok(EXIT_SCENARIO);
    };
    let text = match format {
        OutputFormat::Table => joined_tables(&reports, render::compare_table),
        OutputFormat::Csv => render::compares_csv(&reports),
        OutputFormat::Json => render::json(&reports),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_grid(format: OutputFormat, out: &mut dyn Write) -> io::Result<i32> {
    let rows = golden::offset_grid();
    let text = match format {
        OutputFormat::Table => golden::grid_table(&rows),
        OutputFormat::Csv => golden::grid_csv(&rows),
        OutputFormat::Json => render::json(&[rows]),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

/// First differing line between two texts, 1-based, if any.
pub fn first_difference(expected: &str, actual: &str) -> Option<(usize, String, String)> {
    let mut e = expected.lines();
    let mut a = actual.lines();
    for n in 1.. {
        match (e.next(), a.next()) {
            (None, None) => {
                return (expected != actual).then(|| (n, "<end>".into(), "<end>".into()));
            }
            (x, y) if x == y => continue,
            (x, y) => {
                let show = |l: Option<&str>| l.map_or("<end>".to_string(), str::to_string);
                return Some((n, show(x), show(y)));
            }
        }
    }
    unreachable!()
}

/// Serialized reports for every built-in under both regimes.
fn all_reports() -> String {
    let mut s = String::new();
    for name in BUILTIN_NAMES {
        let scenario = builtin(name).expect("built-in");
        for regime in [Regime::Current, Regime::Proposed] {
            let r = run(&scenario, regime, RateSchedule::Flat, NettingWindow::PerTick)
                .expect("built-in scenario runs");
            s.push_str(&serde_json::to_string(&r).expect("reports serialize"));
            s.push('\n');
        }
    }
    s
}

fn cmd_check(out: &mut dyn Write) -> io::Result<i32> {
    let mut failures = 0;
    let first = golden::paper_tables();
    match first_difference(PAPER_TABLES_FIXTURE, &first) {
        None => writeln!(out, "ok    paper tables match the fixture")?,
        Some((line, want, got)) => {
            failures += 1;
            writeln!(out, "FAIL  paper tables differ from the fixture at line {line}")?;
            writeln!(out, "      expected: {want}")?;
            writeln!(out, "      actual:   {got}")?;
        }
    }
    let again = golden::paper_tables();
    if first == again && all_reports() == all_reports() {
        writeln!(out, "ok    two runs produce identical output")?;
    } else {
        failures += 1;
        writeln!(out, "FAIL  two runs produced different output")?;
    }
    Ok(if failures == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Run {
            scenarios,
            regime,
            tax,
            format,
        } => cmd_run(&scenarios.scenarios, *regime, tax, format.format, out, err),
        Command::Compare {
            scenarios,
            tax,
            format,
        } => cmd_compare(&scenarios.scenarios, tax, format.format, out, err),
        Command::PaperTables => emit(out, &golden::paper_tables()).map(|_| EXIT_OK),
        Command::Grid { format } => cmd_grid(format.format, out),
        Command::Check => cmd_check(out),
    };
    match result {
        Ok(code) => code,
        // A closed pipe downstream is not our failure.
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "realize: error: {e}");
            EXIT_SCENARIO
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_parse() {
        assert_eq!(parse_window("per-tick"), Ok(NettingWindow::PerTick));
        assert_eq!(
            parse_window("annual:4"),
            Ok(NettingWindow::Annual {
                ticks_per_year: NonZeroU64::new(4).unwrap()
            })
        );
        assert!(parse_window("annual:0").is_err());
        assert!(parse_window("weekly").is_err());
    }

    #[test]
    fn rates_accept_both_spellings() {
        assert_eq!(parse_rates("paper"), Ok(RateSchedule::Flat));
        assert_eq!(parse_rates("flat"), Ok(RateSchedule::Flat));
        assert_eq!(parse_rates("statutory"), Ok(RateSchedule::Statutory));
    }

    #[test]
    fn first_difference_reports_line() {
        assert_eq!(first_difference("a\nb\n", "a\nb\n"), None);
        assert_eq!(
            first_difference("a\nb\n", "a\nc\n"),
            Some((2, "b".into(), "c".into()))
        );
        assert_eq!(first_difference("a\n", "a"), Some((2, "<end>".into(), "<end>".into())));
    }
}
