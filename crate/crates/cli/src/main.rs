use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qdt_core::calibration::feasible_q_range;
use qdt_core::paradox::Proposition;
use qdt_core::sampler::{run_suite, Constraints, SampleConfig, SUITE_PROPOSITIONS};
use qdt_core::scenario::{
    builtin_file, canonical_hash, evaluate_document, load_scenario, to_canonical_string, AmplitudeEntry, AmplitudeSpec,
    ModeRef, ProspectSpec, Provenance, Scenario, BUILTINS,
};
use qdt_core::{Category, Error, Tolerances};
use serde::Serialize;

mod render;

#[derive(Parser, Debug)]
#[command(name = "qdt", version, about = "Evaluate prospect lattices and check decision paradoxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prospect probabilities, utility and attraction factors
    Evaluate(Common),
    /// Run paradox checks
    Check(Common),
    /// Solve calibration targets into explicit amplitudes
    Calibrate(Common),
    /// Monte Carlo suite over random lattices
    Sample(SampleArgs),
    /// Print a built-in scenario
    Builtin {
        /// One of: allais, ellsberg, kahneman-tversky, disjunction-template, conjunction-template
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reachable attraction range of partial-probability rows
    FeasibleRange {
        /// A single row, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        partials: Option<Vec<f64>>,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug, Clone)]
#[group(multiple = false)]
struct Source {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
struct Tol {
    #[arg(long)]
    tol_identity: Option<f64>,
    #[arg(long)]
    tol_aggregate: Option<f64>,
}

#[derive(Args, Debug)]
struct Common {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    tol: Tol,
    /// Comma-separated proposition ids or names
    #[arg(long, value_delimiter = ',')]
    prop: Option<Vec<String>>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    prop: Option<Vec<String>>,
    /// Mode counts per factor, comma separated
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    shape: Vec<usize>,
    #[arg(long)]
    alternation: bool,
    #[arg(long)]
    majorization: bool,
    #[arg(long)]
    equal_conditionals: bool,
    #[arg(long)]
    leading_half: bool,
    #[arg(long, default_value_t = 1.0)]
    q_scale: f64,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    tol: Tol,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Table,
    Raw,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.category() {
            Category::Input => 2,
            Category::Infeasible => 3,
            Category::Request => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

fn request(message: impl Into<String>) -> Failure {
    Failure { code: 4, message: message.into() }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Evaluate(c) => {
            let (scenario, tol) = (load(&c.source)?, tolerances(&c.tol)?);
            let doc = evaluate_document(&scenario, None, &tol, false)?;
            let optimal = scenario.optimal(&doc.reports, &tol);
            emit(&c.output, &doc, || render::evaluation(&doc, &optimal))
        }
        Command::Check(c) => {
            let (scenario, tol) = (load(&c.source)?, tolerances(&c.tol)?);
            let filter = c.prop.as_deref().map(parse_props).transpose()?;
            let doc = evaluate_document(&scenario, filter.as_deref(), &tol, true)?;
            emit(&c.output, &doc, || render::checks(&doc))
        }
        Command::Calibrate(c) => {
            let scenario = load(&c.source)?;
            if scenario.file().targets.is_none() {
                return Err(request("calibrate needs a scenario with `targets`"));
            }
            let file = explicit_file(&scenario)?;
            emit(&c.output, &file, || render::calibration(&scenario))
        }
        Command::Sample(s) => sample(s),
        Command::Builtin { name, list, out } => {
            if list {
                return write(&out, BUILTINS.iter().map(|b| format!("{b}\n")).collect());
            }
            let name = name.ok_or_else(|| request("name a built-in scenario or pass --list"))?;
            write(&out, to_canonical_string(&builtin_file(&name)?))
        }
        Command::FeasibleRange { partials, source, output } => {
            let rows = match (partials, source.scenario.is_some() || source.builtin.is_some()) {
                (Some(_), true) => return Err(request("pass either --partials or a scenario, not both")),
                (Some(row), false) => vec![row],
                (None, true) => load(&source)?
                    .file()
                    .targets
                    .as_ref()
                    .map(|t| t.partials.clone())
                    .ok_or_else(|| request("scenario has no `targets`"))?,
                (None, false) => return Err(request("pass --partials or a scenario")),
            };
            let ranges = rows
                .iter()
                .enumerate()
                .map(|(k, row)| {
                    let r = feasible_q_range(row)?;
                    Ok(render::RangeRow { row: k + 1, q_min: r.q_min, q_max: r.q_max, theta_min: r.theta_min })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            emit(&output, &ranges, || render::ranges(&ranges))
        }
    }
}

fn load(source: &Source) -> Result<Scenario, Failure> {
    match (&source.scenario, &source.builtin) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure { code: 2, message: format!("cannot read {}: {e}", path.display()) })?;
            Ok(load_scenario(&text)?)
        }
        (None, Some(name)) => Ok(qdt_core::scenario::builtin(name)?),
        _ => Err(request("pass --scenario PATH or --builtin NAME")),
    }
}

fn tolerances(t: &Tol) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    for (value, slot, flag) in
        [(t.tol_identity, &mut tol.identity, "--tol-identity"), (t.tol_aggregate, &mut tol.aggregate, "--tol-aggregate")]
    {
        if let Some(v) = value {
            if !(v.is_finite() && v > 0.0) {
                return Err(request(format!("{flag} must be a positive number")));
            }
            *slot = v;
        }
    }
    Ok(tol)
}

fn parse_props(list: &[String]) -> Result<Vec<Proposition>, Failure> {
    list.iter().map(|p| p.parse::<Proposition>().map_err(Failure::from)).collect()
}

fn write(out: &Option<PathBuf>, text: String) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure { code: 4, message: format!("cannot write {}: {e}", path.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit<T: Serialize>(output: &Output, value: &T, table: impl FnOnce() -> String) -> Result<(), Failure> {
    let text = match output.format {
        Format::Raw => to_canonical_string(value),
        Format::Table => table(),
    };
    write(&output.out, text)
}

/// The scenario with its targets replaced by the calibrated amplitudes.
fn explicit_file(scenario: &Scenario) -> Result<qdt_core::scenario::ScenarioFile, Failure> {
    let frame = scenario.frame();
    let entry = |k: usize, z: Complex64| AmplitudeEntry {
        index: frame.index_at(k).0.into_iter().map(ModeRef::Position).collect(),
        re: z.re,
        im: z.im,
    };
    let strategic = scenario.state().amplitudes().iter().enumerate().map(|(k, c)| entry(k, *c)).collect();
    let prospects = scenario
        .lattice()
        .prospects()
        .iter()
        .map(|p| ProspectSpec {
            label: p.label().to_string(),
            support: p.support().into_iter().map(|k| entry(k, p.amplitudes()[k])).collect(),
        })
        .collect();
    let mut file = scenario.file().clone();
    file.targets = None;
    file.amplitudes = Some(AmplitudeSpec { strategic, prospects });
    Ok(file)
}

#[derive(Serialize)]
struct SampleDocument<'a> {
    summary: &'a qdt_core::sampler::SampleSummary,
    provenance: Provenance,
}

fn sample(s: SampleArgs) -> Result<(), Failure> {
    let tol = tolerances(&s.tol)?;
    let props = match &s.prop {
        Some(list) => parse_props(list)?,
        None => SUITE_PROPOSITIONS.iter().filter_map(|&id| Proposition::new(id)).collect(),
    };
    let constraints = Constraints {
        alternation: s.alternation,
        majorization: s.majorization,
        equal_conditionals: s.equal_conditionals,
        leading_half: s.leading_half,
    };
    let mut config = SampleConfig::new(s.shape, s.samples, s.seed).with_constraints(constraints).with_q_scale(s.q_scale);
    config.workers = s.workers;
    let summary = run_suite(&config, &props)?;
    // the worker count never changes results, so it stays out of the output
    let mut echoed = summary.clone();
    echoed.config.workers = None;
    let mut hashed = config.clone();
    hashed.workers = None;
    let provenance = Provenance::new(canonical_hash(&hashed), Some(s.seed), tol);
    let doc = SampleDocument { summary: &echoed, provenance };
    emit(&s.output, &doc, || render::summary(&echoed))
}
