//! Command-line interface.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::provider::cache::{write_atomic, ResponseCache};
use crate::provider::Hub;
use crate::report::{default_pairs, emit_correlations, emit_tables, parse_pair, Report, TableFormat};
use crate::run::{run_evaluation, RunOptions};
use crate::suite::{load_suite, save_suite, validate_file};
use crate::suite_tools::{apply_tool, split_suite, suite_complexity, Tool, ToolOptions};

/// Exit status when some samples or records failed but the command finished.
pub const EXIT_PARTIAL: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "locot2v", version, about = "Evaluate long-form text-to-video generation")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set run.workers=4`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score videos and analyse reports.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Check and augment prompt suites.
    #[command(subcommand)]
    Suite(SuiteCommand),
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Evaluate every sample of a suite and write report.json.
    Run {
        #[arg(long)]
        suite: PathBuf,
        /// Directory holding `<sample id>.<ext>` videos.
        #[arg(long)]
        videos: PathBuf,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        /// Method name recorded in the report.
        #[arg(long)]
        method: Option<String>,
        /// Ignore checkpoints from an earlier interrupted run.
        #[arg(long)]
        fresh: bool,
    },
    /// Percent tables and radar series for one or more reports.
    Tables {
        #[arg(long = "report", required = true)]
        reports: Vec<PathBuf>,
        /// csv or markdown.
        #[arg(long, default_value = "markdown")]
        format: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Correlation table and scatter data over per-sample scores.
    Correlate {
        /// Reports whose samples are pooled.
        #[arg(long = "report", required = true)]
        reports: Vec<PathBuf>,
        /// Metric pair `a:b` by metric or dimension id; defaults to the
        /// standard eight pairs.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ToolArgs {
    #[arg(long)]
    pub suite: PathBuf,
    /// Print the augmented suite instead of rewriting the file.
    #[arg(long)]
    pub dry_run: bool,
    /// Leave records whose field is already filled in.
    #[arg(long)]
    pub only_missing: bool,
}

#[derive(Debug, Subcommand)]
pub enum SuiteCommand {
    /// Check a suite file against the record rules.
    Validate {
        #[arg(long)]
        suite: PathBuf,
    },
    /// Score prompt complexity.
    Complexity(ToolArgs),
    /// Extract human actions from prompts.
    Actions(ToolArgs),
    /// Extract ground-truth events from prompt bases.
    Events(ToolArgs),
    /// Generate HERD questions and annotate their polarity.
    HerdQuestions {
        #[command(flatten)]
        tool: ToolArgs,
        /// JSON object of sample id to expectation text; prompt text is
        /// used for samples not listed.
        #[arg(long)]
        evaluations: Option<PathBuf>,
    },
    /// Split prompts into one prompt per ground-truth event.
    SplitEvents {
        #[arg(long)]
        suite: PathBuf,
        /// Output JSON of sample id to prompt list.
        #[arg(long, required_unless_present = "dry_run")]
        out: Option<PathBuf>,
        #[arg(long)]
        dry_run: bool,
    },
}

fn load_config(cli: &Cli) -> Result<Config> {
    Config::load(cli.config.as_deref(), std::env::vars(), &cli.overrides)
}

fn hub_for(cfg: &Config) -> Hub {
    let cache = cfg.run.cache_dir.as_ref().map(|d| ResponseCache::new(d.clone()));
    Hub::new(cfg.provider_specs(), cache, cfg.run.max_parallel_calls)
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn load_reports(paths: &[PathBuf]) -> Result<Vec<Report>> {
    paths.iter().map(|p| Report::load(p)).collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn eval(cli: &Cli, cmd: &EvalCommand) -> Result<ExitCode> {
    match cmd {
        EvalCommand::Run {
            suite,
            videos,
            out,
            method,
            fresh,
        } => {
            let cfg = load_config(cli)?;
            let outcome = run_evaluation(
                &cfg,
                &RunOptions {
                    suite: suite.clone(),
                    videos: videos.clone(),
                    out: out.clone(),
                    method: method.clone(),
                    resume: !fresh,
                },
            )?;
            let r = &outcome.report;
            println!(
                "{}: {} samples, overall {}",
                r.method,
                r.samples.len(),
                crate::report::percent_cell(r.overall_mean)
            );
            println!("wrote {}", out.display());
            if outcome.failed_samples.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("samples with errors: {}", outcome.failed_samples.join(", "));
                Ok(ExitCode::from(EXIT_PARTIAL))
            }
        }
        EvalCommand::Tables {
            reports,
            format,
            out_dir,
        } => {
            let format = TableFormat::parse(format)?;
            let reports = load_reports(reports)?;
            ensure_dir(out_dir)?;
            print_paths(&emit_tables(&reports, format, out_dir)?);
            Ok(ExitCode::SUCCESS)
        }
        EvalCommand::Correlate {
            reports,
            pairs,
            out_dir,
        } => {
            let pairs = if pairs.is_empty() {
                default_pairs()
            } else {
                pairs.iter().map(|p| parse_pair(p)).collect::<Result<_>>()?
            };
            let reports = load_reports(reports)?;
            let pooled = reports.len() > 1;
            let samples: Vec<_> = reports
                .iter()
                .flat_map(|r| {
                    r.samples.iter().map(move |s| {
                        let mut s = s.clone();
                        if pooled {
                            s.sample_id = format!("{}/{}", r.method, s.sample_id);
                        }
                        s
                    })
                })
                .collect();
            ensure_dir(out_dir)?;
            let (rows, paths) = emit_correlations(&samples, &pairs, out_dir)?;
            for r in rows.iter().filter(|r| r.note.is_some()) {
                eprintln!("{} x {}: {}", r.metric_1, r.metric_2, r.note.as_deref().unwrap_or_default());
            }
            print_paths(&paths);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn finish_tool(suite_path: &Path, suite: &crate::suite::Suite, dry_run: bool, report: &crate::suite_tools::ToolReport) -> Result<ExitCode> {
    for f in &report.flags {
        eprintln!("flag: {f}");
    }
    for f in &report.failures {
        eprintln!("failed: {f}");
    }
    if dry_run {
        std::io::stdout()
            .write_all(suite.to_json()?.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))?;
    } else {
        save_suite(suite_path, suite)?;
        eprintln!("updated {} records in {}", report.updated, suite_path.display());
    }
    Ok(if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    })
}

fn suite_cmd(cli: &Cli, cmd: &SuiteCommand) -> Result<ExitCode> {
    let cfg = load_config(cli)?;
    let (tool, args, evaluations) = match cmd {
        SuiteCommand::Validate { suite } => {
            let problems = validate_file(suite, &cfg.suite.rules())?;
            if problems.is_empty() {
                println!("{}: ok", suite.display());
                return Ok(ExitCode::SUCCESS);
            }
            for p in &problems {
                println!("{p}");
            }
            return Err(Error::Suite(format!("{}: {} problems", suite.display(), problems.len())));
        }
        SuiteCommand::SplitEvents { suite, out, dry_run } => {
            let s = load_suite(suite)?;
            let (prompts, failures) = split_suite(&hub_for(&cfg), &s, cfg.run.workers);
            for f in &failures {
                eprintln!("failed: {f}");
            }
            let mut body = serde_json::to_vec_pretty(&prompts).map_err(|e| Error::json("split prompts", e))?;
            body.push(b'\n');
            match out.as_ref().filter(|_| !dry_run) {
                Some(path) => {
                    write_atomic(path, &body)?;
                    println!("wrote {}", path.display());
                }
                None => std::io::stdout().write_all(&body).map_err(|e| Error::io("<stdout>", e))?,
            }
            return Ok(if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_PARTIAL)
            });
        }
        SuiteCommand::Complexity(a) => (Tool::Complexity, a, None),
        SuiteCommand::Actions(a) => (Tool::Actions, a, None),
        SuiteCommand::Events(a) => (Tool::Events, a, None),
        SuiteCommand::HerdQuestions { tool, evaluations } => (Tool::HerdQuestions, tool, evaluations.as_ref()),
    };
    let evaluations: BTreeMap<String, String> = match evaluations {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::json(p.display().to_string(), e))?
        }
        None => BTreeMap::new(),
    };
    let mut suite = load_suite(&args.suite)?;
    let report = apply_tool(
        &hub_for(&cfg),
        &mut suite,
        tool,
        &ToolOptions {
            workers: cfg.run.workers,
            herd_questions_per_dimension: cfg.suite.herd_questions_per_dimension,
            evaluations,
            only_missing: args.only_missing,
        },
    );
    if tool == Tool::Complexity {
        if let Some(m) = suite_complexity(&suite) {
            eprintln!("mean complexity: {m:.2}");
        }
    }
    finish_tool(&args.suite, &suite, args.dry_run, &report)
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Eval(c) => eval(cli, c),
        Command::Suite(c) => suite_cmd(cli, c),
    }
}

/// Entry point for the binary: parses arguments, sets up logging and maps
/// errors to exit status 1.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_tree_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_nested_commands() {
        let cli = Cli::try_parse_from([
            "locot2v", "eval", "run", "--suite", "s.json", "--videos", "v", "--set", "run.workers=3",
        ])
        .unwrap();
        assert_eq!(cli.overrides, vec!["run.workers=3"]);
        assert!(matches!(cli.command, Command::Eval(EvalCommand::Run { fresh: false, .. })));
        let cli = Cli::try_parse_from(["locot2v", "suite", "herd-questions", "--suite", "s.json", "--dry-run"]).unwrap();
        assert!(matches!(cli.command, Command::Suite(SuiteCommand::HerdQuestions { .. })));
        assert!(Cli::try_parse_from(["locot2v", "suite", "split-events", "--suite", "s.json"]).is_err());
    }
}
