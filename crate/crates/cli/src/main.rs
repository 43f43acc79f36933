//! `pitcap`: credit portfolio VaR and economic capital under TTC and PIT assumptions.

mod error;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pitcap_core::table1;
use pitcap_core::{
    gauss_hermite_rule, pit_to_ttc, run_analysis_with, ttc_to_pit, validate_portfolio, AnalysisMode, Confidence,
    Engine, McConfig, Portfolio, Scenario, DEFAULT_QUADRATURE_NODES,
};

use crate::error::{CliError, CliResult};
use crate::input::LoadOptions;
use crate::report::{Format, Meta};

#[derive(Parser)]
#[command(name = "pitcap", version, about = "Credit portfolio VaR and economic capital under TTC and PIT assumptions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Loss distribution, VaR and capital for a portfolio file.
    Analyze(AnalyzeArgs),
    /// Recompute the built-in 100-asset table and compare with the published values.
    #[command(name = "reproduce-table1")]
    ReproduceTable1(TableArgs),
    /// Check a portfolio file against the model invariants.
    Validate(ValidateArgs),
    /// Transform a single PD between TTC and PIT.
    #[command(name = "transform-pd")]
    TransformPd(TransformArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Ttc,
    PitInput,
    PitCalc,
}

impl From<ModeArg> for AnalysisMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ttc => AnalysisMode::Ttc,
            ModeArg::PitInput => AnalysisMode::PitInputTtcCalc,
            ModeArg::PitCalc => AnalysisMode::TtcInputPitCalc,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Auto,
    Quadrature,
    Exact,
    Mc,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum, default_value = "auto")]
    engine: EngineArg,
    /// Monte Carlo paths.
    #[arg(long, default_value_t = 1_000_000)]
    sims: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Monte Carlo worker threads (defaults to the available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Pair each Monte Carlo path with its antithetic mirror.
    #[arg(long)]
    antithetic: bool,
    /// Gauss-Hermite nodes for factor integration.
    #[arg(long, default_value_t = DEFAULT_QUADRATURE_NODES)]
    nodes: usize,
}

impl EngineArgs {
    fn mc_config(&self) -> McConfig {
        let mut cfg = McConfig::new(self.sims, self.seed);
        if let Some(w) = self.workers {
            cfg.n_workers = w;
        }
        cfg.antithetic = self.antithetic;
        cfg
    }

    fn exact(&self) -> CliResult<Engine> {
        Ok(Engine::Exact(gauss_hermite_rule(self.nodes).map_err(|e| CliError::Config(e.to_string()))?))
    }

    fn resolve(&self, p: Option<(&Portfolio, AnalysisMode)>) -> CliResult<Engine> {
        match self.engine {
            EngineArg::Quadrature | EngineArg::Exact => self.exact(),
            EngineArg::Mc => Ok(Engine::MonteCarlo(self.mc_config())),
            EngineArg::Auto => match p {
                Some((p, mode)) => match Engine::auto(p, mode, self.mc_config()) {
                    Engine::Exact(_) => self.exact(),
                    mc => Ok(mc),
                },
                None => self.exact(),
            },
        }
    }

    fn meta(&self, engine: &Engine, meta: &mut Meta) {
        match engine {
            Engine::Exact(rule) => meta.nodes = Some(rule.len()),
            Engine::MonteCarlo(cfg) => {
                meta.sims = Some(cfg.n_sims);
                meta.seed = Some(cfg.seed);
                meta.workers = Some(cfg.n_workers);
            }
        }
    }
}

#[derive(Args)]
struct PortfolioArgs {
    /// Portfolio CSV: id,exposure,ttc_pd,rho,w1[,w2,...]
    #[arg(long)]
    portfolio: PathBuf,
    /// Factor covariance sidecar JSON, e.g. {"k":1,"cov":[[1.0]]}
    #[arg(long)]
    factors: Option<PathBuf>,
    /// Rescale exposures to sum to one.
    #[arg(long)]
    normalize: bool,
    /// Rescale factor weights to unit composite variance.
    #[arg(long)]
    normalize_weights: bool,
}

impl PortfolioArgs {
    fn load(&self) -> CliResult<Portfolio> {
        input::load_portfolio(
            &self.portfolio,
            self.factors.as_deref(),
            LoadOptions {
                normalize_exposures: self.normalize,
                normalize_weights: self.normalize_weights,
            },
        )
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    portfolio: PortfolioArgs,
    #[arg(long, value_enum, default_value = "ttc")]
    mode: ModeArg,
    /// `fixed:s1[,s2,...]` or `trunc:f1=lo..hi[,f2=lo..hi]` (required in PIT modes).
    #[arg(long)]
    scenario: Option<String>,
    /// Confidence level, repeatable: a probability such as 0.999, or
    /// `target:PD@RHO[@S]` for the level implied by a bank target PD.
    #[arg(long = "alpha", default_value = "0.999")]
    alphas: Vec<String>,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    portfolio: PortfolioArgs,
}

#[derive(Args)]
struct TransformArgs {
    /// TTC PD to transform to PIT.
    #[arg(long, conflicts_with = "pit_pd", required_unless_present = "pit_pd")]
    ttc_pd: Option<f64>,
    /// PIT PD to transform back to TTC.
    #[arg(long)]
    pit_pd: Option<f64>,
    #[arg(long)]
    rho: f64,
    /// Composite factor value w'S.
    #[arg(long, allow_hyphen_values = true)]
    factor: f64,
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
}

fn parse_number(s: &str, what: &str) -> CliResult<f64> {
    let t = s.trim();
    match t {
        "-inf" => Ok(f64::NEG_INFINITY),
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("{what}: cannot parse {t:?} as a number"))),
    }
}

fn parse_scenario(spec: &str) -> CliResult<Scenario> {
    let bad = |msg: &str| CliError::Config(format!("scenario {spec:?}: {msg}"));
    if let Some(rest) = spec.strip_prefix("fixed:") {
        let values = rest
            .split(',')
            .map(|v| parse_number(v, "scenario"))
            .collect::<CliResult<Vec<f64>>>()?;
        return Scenario::fixed(values).map_err(|e| bad(&e.to_string()));
    }
    if let Some(rest) = spec.strip_prefix("trunc:") {
        let mut bounds: Vec<Option<(f64, f64)>> = Vec::new();
        for part in rest.split(',') {
            let (name, range) = part.split_once('=').ok_or_else(|| bad("expected fN=lo..hi"))?;
            let index: usize = name
                .trim()
                .strip_prefix('f')
                .and_then(|n| n.parse().ok())
                .filter(|n| *n >= 1)
                .ok_or_else(|| bad("factor names are f1, f2, ..."))?;
            let (lo, hi) = range.split_once("..").ok_or_else(|| bad("expected lo..hi"))?;
            if bounds.len() < index {
                bounds.resize(index, None);
            }
            if bounds[index - 1].is_some() {
                return Err(bad(&format!("f{index} given twice")));
            }
            bounds[index - 1] = Some((parse_number(lo, "scenario")?, parse_number(hi, "scenario")?));
        }
        // factors left out are unrestricted
        let bounds = bounds
            .into_iter()
            .map(|b| b.unwrap_or((f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        return Scenario::truncated(bounds).map_err(|e| bad(&e.to_string()));
    }
    Err(bad("expected fixed:... or trunc:..."))
}

fn parse_alpha(spec: &str, scenario: Option<&Scenario>) -> CliResult<Confidence> {
    let Some(rest) = spec.strip_prefix("target:") else {
        let level = parse_number(spec, "alpha")?;
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::Config(format!("alpha {level} must lie in (0, 1)")));
        }
        return Ok(Confidence::ttc(level));
    };
    let parts: Vec<&str> = rest.split('@').collect();
    let (pd, rho) = match parts.as_slice() {
        [pd, rho] | [pd, rho, _] => (parse_number(pd, "alpha target PD")?, parse_number(rho, "alpha target rho")?),
        _ => return Err(CliError::Config(format!("alpha {spec:?}: expected target:PD@RHO[@S]"))),
    };
    let s = match (parts.get(2), scenario) {
        (Some(s), _) => parse_number(s, "alpha target factor")?,
        (None, Some(Scenario::Fixed(v))) if v.len() == 1 => v[0],
        _ => {
            return Err(CliError::Config(format!(
                "alpha {spec:?}: give the bank's factor value as target:PD@RHO@S unless the scenario is a one-factor fixed value"
            )))
        }
    };
    Confidence::pit_target(pd, rho, s).map_err(|e| CliError::Config(format!("alpha {spec:?}: {e}")))
}

fn emit(text: &str, output: Option<&PathBuf>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let mode = AnalysisMode::from(args.mode);
    let scenario = match (&args.scenario, mode) {
        (None, AnalysisMode::Ttc) => Scenario::Unconditional,
        (Some(_), AnalysisMode::Ttc) => {
            return Err(CliError::Config("--scenario is not used in ttc mode".into()));
        }
        (None, _) => return Err(CliError::Config(format!("--scenario is required in {mode} mode"))),
        (Some(spec), _) => parse_scenario(spec)?,
    };
    let truncated = matches!(scenario, Scenario::Truncated(_));
    if truncated && matches!(args.engine.engine, EngineArg::Exact | EngineArg::Quadrature) {
        return Err(CliError::Config("truncated scenarios are only simulated; use --engine mc or auto".into()));
    }
    let confidences = args
        .alphas
        .iter()
        .map(|a| parse_alpha(a, Some(&scenario)))
        .collect::<CliResult<Vec<_>>>()?;
    let portfolio = args.portfolio.load()?;
    let engine = if truncated {
        Engine::MonteCarlo(args.engine.mc_config())
    } else {
        args.engine.resolve(Some((&portfolio, mode)))?
    };
    let report = run_analysis_with(&portfolio, mode, &scenario, &confidences, &engine)?;

    let mut meta = Meta {
        mode: mode.to_string(),
        scenario: scenario.to_string(),
        engine: engine.name().to_string(),
        nodes: None,
        sims: None,
        seed: None,
        workers: None,
        obligors: portfolio.len(),
        factors: portfolio.factor_model().k(),
    };
    args.engine.meta(&engine, &mut meta);
    for w in report::warnings_for_stderr(&report) {
        eprintln!("warning: {w}");
    }
    emit(&report::render_report(&meta, &report, args.format)?, args.output.as_ref())
}

fn cmd_reproduce_table1(args: &TableArgs) -> CliResult<()> {
    let engine = args.engine.resolve(None)?;
    let t = table1::reproduce(&engine)?;
    let label = match &engine {
        Engine::Exact(rule) => format!("exact, {} nodes", rule.len()),
        Engine::MonteCarlo(cfg) => format!("mc, {} paths, seed {}", cfg.n_sims, cfg.seed),
    };
    emit(&report::render_table1(&t, &label, args.format)?, None)?;
    let mismatches = t.mismatches();
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(mismatches.into_iter().map(report::cell_diff).collect()))
    }
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    let p = args.portfolio.load()?;
    debug_assert!(validate_portfolio(&p).is_valid());
    let total: f64 = p.obligors().iter().map(|o| o.exposure).sum();
    println!(
        "valid: {} obligors, {} factor(s), exposure sum {total}",
        p.len(),
        p.factor_model().k()
    );
    Ok(())
}

fn cmd_transform(args: &TransformArgs) -> CliResult<()> {
    let (from, to, input, output) = match (args.ttc_pd, args.pit_pd) {
        (Some(pd), _) => ("ttc", "pit", pd, ttc_to_pit(pd, args.rho, args.factor)?),
        (None, Some(pd)) => ("pit", "ttc", pd, pit_to_ttc(pd, args.rho, args.factor)?),
        (None, None) => unreachable!("clap requires one input"),
    };
    let text = match args.format {
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "from": from, "to": to, "input": input, "rho": args.rho, "factor": args.factor,
                "output": output, "output_display": report::display_capital(output),
            })
        ),
        Format::Csv => format!("from,to,input,rho,factor,output\n{from},{to},{input},{},{},{output}\n", args.rho, args.factor),
        Format::Md => format!(
            "{} PD {input} -> {} PD {output} ({})\n",
            from.to_uppercase(),
            to.to_uppercase(),
            report::display_capital(output)
        ),
    };
    emit(&text, None)
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::ReproduceTable1(a) => cmd_reproduce_table1(a),
        Command::Validate(a) => cmd_validate(a),
        Command::TransformPd(a) => cmd_transform(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Mismatch(diffs) = &e {
                for d in diffs {
                    eprintln!("mismatch: {d}");
                }
            }
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
