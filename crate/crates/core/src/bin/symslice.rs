// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symslice::driver::{
    analyze_plan, extract_spec, plan_slices, run_bench, target_cfg, AnalyzeOptions, DriverError, ReportVerdict, SlicePlan,
};
use symslice::frontend::{parse_unit, Language, SourceUnit};
use symslice::oracle::{HoareSpec, HttpOracle, MockOracle, Oracle, OracleConfig};
use symslice::partition::{gen_partitions, PartitionLimits};
use symslice::render::{default_tokenizer, tokenizer_by_name, RenderOptions, Tokenizer};

#[derive(Parser)]
#[command(name = "symslice", version, about = "Slice-based symbolic execution with a language-model oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one function against its pre/post-conditions.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write every rendered slice into this directory.
        #[arg(long)]
        emit_slices: Option<PathBuf>,
        /// Ask about every slice instead of stopping at the first FAIL.
        #[arg(long)]
        exhaustive: bool,
        /// Print the control-flow graph as JSON and exit.
        #[arg(long)]
        dump_cfg: bool,
        /// Print the partitions as JSON and exit.
        #[arg(long)]
        dump_partitions: bool,
    },
    /// Render the slices without asking an oracle.
    Slices {
        file: PathBuf,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        emit_slices: Option<PathBuf>,
    },
    /// Run a manifest of subjects with expected verdicts and print accuracy.
    Bench {
        manifest: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Stop enumerating partitions after this many.
        #[arg(long, default_value_t = 10_000)]
        max_partitions: usize,
        #[arg(long)]
        tokenizer: Option<String>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Language tag (mini, python, c); taken from the extension otherwise.
    #[arg(long)]
    lang: Option<String>,
    /// Function to analyse; the last one in the file by default.
    #[arg(long)]
    function: Option<String>,
    /// Pre-condition, added to any marked in the file.
    #[arg(long)]
    pre: Option<String>,
    /// Post-condition, replacing any marked in the file.
    #[arg(long)]
    post: Option<String>,
    /// Comma-separated slicing criterion overriding the post-condition's names.
    #[arg(long, value_delimiter = ',')]
    post_vars: Option<Vec<String>>,
    /// Stop enumerating partitions after this many.
    #[arg(long, default_value_t = 10_000)]
    max_partitions: usize,
    /// Token counter: simple or cl100k.
    #[arg(long)]
    tokenizer: Option<String>,
    /// Leave out declarations of called functions and globals.
    #[arg(long)]
    no_context: bool,
    /// Longest declaration copied whole into the context.
    #[arg(long, default_value_t = 40)]
    context_lines: usize,
}

#[derive(Args)]
struct OracleArgs {
    /// JSON map from slice fingerprint to PASS/FAIL/ERROR, used instead of a model.
    #[arg(long)]
    mock_oracle: Option<PathBuf>,
    /// JSON oracle configuration; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Chat-completions URL.
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent with every request.
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    /// Oracle queries in flight at once.
    #[arg(long)]
    parallel: Option<usize>,
    /// Retries after a transport failure or an unreadable answer.
    #[arg(long)]
    retries: Option<u32>,
    /// Per-request timeout in seconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Samples per query; majority vote above one.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("{0}")]
    Other(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

fn other(e: impl std::fmt::Display) -> CliError {
    CliError::Other(e.to_string())
}

fn load_unit(file: &Path, lang: Option<&str>) -> Result<SourceUnit, CliError> {
    let language = match lang {
        Some(tag) => Language::from_tag(tag),
        None => Language::from_path(file),
    }
    .map_err(other)?;
    let bytes = std::fs::read(file).map_err(|e| other(format!("{}: {e}", file.display())))?;
    parse_unit(&bytes, language, 0).map_err(other)
}

fn tokenizer(name: Option<&str>) -> Result<Box<dyn Tokenizer>, CliError> {
    match name {
        None => Ok(default_tokenizer()),
        Some(n) => tokenizer_by_name(n).ok_or_else(|| other(format!("unknown tokenizer `{n}`"))),
    }
}

fn options(source: &SourceArgs, parallelism: usize, exhaustive: bool) -> AnalyzeOptions {
    AnalyzeOptions {
        limits: PartitionLimits { max_partitions: source.max_partitions, ..Default::default() },
        parallelism,
        exhaustive,
        function: source.function.clone(),
        render: RenderOptions { include_context: !source.no_context, context_line_cap: source.context_lines },
    }
}

fn oracle_config(args: &OracleArgs) -> Result<OracleConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?).map_err(|e| other(format!("{}: {e}", p.display())))?,
        None => OracleConfig::default(),
    };
    if let Some(v) = &args.endpoint {
        cfg.endpoint = v.clone();
    }
    if let Some(v) = &args.model {
        cfg.model = v.clone();
    }
    if let Some(v) = &args.api_key_env {
        cfg.api_key_env = Some(v.clone());
    }
    if let Some(v) = args.parallel {
        cfg.parallelism = v;
    }
    if let Some(v) = args.retries {
        cfg.max_retries = v;
    }
    if let Some(v) = args.timeout {
        cfg.timeout_secs = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    Ok(cfg)
}

fn make_oracle(args: &OracleArgs) -> Result<(Box<dyn Oracle>, String, usize), CliError> {
    let cfg = oracle_config(args)?;
    let parallelism = cfg.parallelism.max(1);
    if let Some(path) = &args.mock_oracle {
        let text = std::fs::read_to_string(path).map_err(|e| other(format!("{}: {e}", path.display())))?;
        let mock = MockOracle::from_json(&text).map_err(DriverError::from)?;
        return Ok((Box::new(mock), format!("mock:{}", path.display()), parallelism));
    }
    let label = format!("{} @ {}", cfg.model, cfg.endpoint);
    let oracle = HttpOracle::new(cfg).map_err(DriverError::from)?;
    Ok((Box::new(oracle), label, parallelism))
}

fn emit_slices(dir: &Path, plan: &SlicePlan) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let ext = match plan.language {
        Language::Mini => "mini",
        Language::Python => "py",
        Language::C => "c",
    };
    for s in &plan.slices {
        std::fs::write(dir.join(format!("{:03}-p{}.{ext}", s.rank, s.partition)), &s.rendered.text)?;
    }
    std::fs::write(dir.join("index.json"), serde_json::to_string_pretty(plan).map_err(other)?)?;
    Ok(())
}

fn print_plan(plan: &SlicePlan) {
    println!(
        "{} partitions, {} vacuous, {} duplicates, {} slices; criterion {:?} ({:?})",
        plan.partitions, plan.vacuous, plan.duplicates, plan.slices.len(), plan.criterion.vars, plan.criterion.source
    );
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { file, source, oracle, report, emit_slices: emit, exhaustive, dump_cfg, dump_partitions } => {
            let unit = load_unit(&file, source.lang.as_deref())?;
            if dump_cfg || dump_partitions {
                let cfg = target_cfg(&unit, source.function.as_deref())?;
                if dump_cfg {
                    let nodes: Vec<_> = cfg
                        .nodes
                        .iter()
                        .map(|n| serde_json::json!({"node": n, "succs": cfg.succs[n.id]}))
                        .collect();
                    let dump = serde_json::json!({"function": cfg.function, "nodes": nodes, "back_edges": cfg.back_edges});
                    println!("{}", serde_json::to_string_pretty(&dump).map_err(other)?);
                }
                if dump_partitions {
                    let limits = PartitionLimits { max_partitions: source.max_partitions, ..Default::default() };
                    println!("{}", gen_partitions(&cfg, limits).to_json());
                }
                return Ok(());
            }
            let spec = extract_spec(&unit, source.pre.as_deref(), source.post.as_deref(), source.post_vars.clone())?;
            let tok = tokenizer(source.tokenizer.as_deref())?;
            let (oracle, label, parallelism) = make_oracle(&oracle)?;
            let opts = options(&source, parallelism, exhaustive);
            let plan = plan_slices(&unit, &spec, tok.as_ref(), &opts)?;
            print_plan(&plan);
            if let Some(dir) = &emit {
                emit_slices(dir, &plan)?;
            }
            let rep = analyze_plan(&plan, &spec, oracle.as_ref(), &label, tok.name(), &opts)?;
            match &rep.verdict {
                ReportVerdict::Holds => println!("HOLDS after {} queries", rep.totals.queries),
                ReportVerdict::Counterexample { rank, partition, .. } => {
                    println!("COUNTEREXAMPLE: slice {rank} (partition {partition}) after {} queries", rep.totals.queries);
                    if let Some(c) = &rep.counterexample {
                        println!("{}", c.text);
                    }
                }
                ReportVerdict::Inconclusive => println!("INCONCLUSIVE after {} queries", rep.totals.queries),
            }
            if let Some(path) = report {
                std::fs::write(&path, rep.to_json())?;
            }
            Ok(())
        }
        Command::Slices { file, source, emit_slices: emit } => {
            let unit = load_unit(&file, source.lang.as_deref())?;
            let spec = match extract_spec(&unit, source.pre.as_deref(), source.post.as_deref(), source.post_vars.clone()) {
                Ok(s) => s,
                // Without a post-condition every assigned variable is kept.
                Err(DriverError::NoPostCondition) => {
                    HoareSpec { pre: source.pre.clone().unwrap_or_default(), post: String::new(), post_vars: source.post_vars.clone() }
                }
                Err(e) => return Err(e.into()),
            };
            let tok = tokenizer(source.tokenizer.as_deref())?;
            let plan = plan_slices(&unit, &spec, tok.as_ref(), &options(&source, 1, false))?;
            print_plan(&plan);
            match &emit {
                Some(dir) => emit_slices(dir, &plan)?,
                None => {
                    for s in &plan.slices {
                        println!(
                            "--- slice {} (partition {}, {} statements, {} {} tokens, {})",
                            s.rank,
                            s.partition,
                            s.rendered.stmt_count,
                            s.rendered.token_count,
                            s.rendered.tokenizer,
                            s.fingerprint
                        );
                        println!("{}", s.rendered.text);
                    }
                }
            }
            Ok(())
        }
        Command::Bench { manifest, oracle, max_partitions, tokenizer: tok_name, report } => {
            let tok = tokenizer(tok_name.as_deref())?;
            let (oracle, label, parallelism) = make_oracle(&oracle)?;
            let opts = AnalyzeOptions {
                limits: PartitionLimits { max_partitions, ..Default::default() },
                parallelism,
                ..Default::default()
            };
            let rep = run_bench(&manifest, oracle.as_ref(), &label, tok.as_ref(), &opts).map_err(other)?;
            print!("{}", rep.table());
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&rep).map_err(other)?)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
