//! Command-line front end: reads a scenario, runs one command and writes
//! its artifacts plus a `manifest.json` into the output directory.
//!
//! Exit status: 0 success, 1 I/O or other failure, 2 invalid input,
//! 3 linear solver failure, 4 failed verification under `--strict`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::anisotropy::lsc::{lsc_experiment, ConvergentFamily};
use crate::anisotropy::AnisotropyField;
use crate::elastic::ElasticError;
use crate::evolution::study::{default_sample_times, delta_convergence_study};
use crate::evolution::{run_evolution, verify_trace, EvolutionError, EvolutionTrace, Scenario, SearchStrategy, VerifyOptions};
use crate::report::parse_f64_list;
use crate::scenario::{ScenarioConfig, ScenarioError};
use crate::svg::{crack_svg, SvgOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fractura", version, about = "Quasi-static brittle fracture on crack graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the elastic problem for the initial crack at one load time.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Load time in [0, 1].
        #[arg(long, default_value_t = 1.0)]
        time: f64,
    },
    /// Run the time-discrete evolution for every step size.
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check evolution traces: a stored one (`--trace`) or fresh runs.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Trace JSON written by `evolve`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Surface energy along convergent crack families.
    Lsc {
        #[command(flatten)]
        common: CommonArgs,
        /// Built-in family name; all families when omitted.
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 64)]
        n_max: usize,
    },
    /// Convergence of the evolution as the step size shrinks.
    Study {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated step sizes, decimals or fractions such as `1/16`.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub strategy: Option<SearchStrategy>,
    /// Exit with status 4 when a verification check fails.
    #[arg(long)]
    pub strict: bool,
    /// Byte-identical outputs: no timestamps or timings.
    #[arg(long)]
    pub reproducible: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Multiply the cell counts of a generated mesh.
    #[arg(long, default_value_t = 1)]
    pub refine: usize,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn elastic_code(e: &ElasticError) -> i32 {
    match e {
        ElasticError::NotSpd { .. } | ElasticError::SolveTolerance { .. } => EXIT_SOLVER,
        _ => EXIT_VALIDATION,
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Io { .. } => EXIT_OTHER,
            _ => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        let code = match &e {
            EvolutionError::Step { source, .. } | EvolutionError::Elastic(source) => elastic_code(source),
            _ => EXIT_VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ElasticError> for CliError {
    fn from(e: ElasticError) -> Self {
        CliError::new(elastic_code(&e), e.to_string())
    }
}

/// The resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(flatten)]
    pub common: CommonArgs,
    pub time: Option<f64>,
    pub trace: Option<PathBuf>,
    pub family: Option<String>,
    pub n_max: Option<usize>,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let base = |command: &str, common: CommonArgs| RunConfig {
            command: command.into(),
            common,
            time: None,
            trace: None,
            family: None,
            n_max: None,
        };
        match cli.command {
            Command::Solve { common, time } => RunConfig {
                time: Some(time),
                ..base("solve", common)
            },
            Command::Evolve { common } => base("evolve", common),
            Command::Verify { common, trace } => RunConfig {
                trace,
                ..base("verify", common)
            },
            Command::Lsc { common, family, n_max } => RunConfig {
                family,
                n_max: Some(n_max),
                ..base("lsc", common)
            },
            Command::Study { common } => base("study", common),
        }
    }
}

/// Collects output files and timings for the manifest.
struct Artifacts {
    out: PathBuf,
    files: Vec<String>,
    timings: BTreeMap<String, f64>,
}

impl Artifacts {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.out.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::new(EXIT_OTHER, format!("cannot create {}: {e}", parent.display())))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::new(EXIT_OTHER, format!("cannot write {}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?;
        self.write(name, &(text + "\n"))
    }

    fn time<T>(&mut self, label: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let r = f();
        self.timings.insert(label.into(), start.elapsed().as_secs_f64() * 1e3);
        r
    }
}

struct Loaded {
    config: ScenarioConfig,
    scenario: Scenario,
}

fn load_scenario(cfg: &RunConfig) -> Result<Loaded, CliError> {
    let path = cfg
        .common
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::new(EXIT_VALIDATION, format!("`{}` needs --scenario", cfg.command)))?;
    let config = ScenarioConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let scenario = config.build(base, cfg.common.refine.max(1), cfg.common.seed)?;
    Ok(Loaded { config, scenario })
}

fn deltas(cfg: &RunConfig, config: &ScenarioConfig) -> Result<Vec<f64>, CliError> {
    match &cfg.common.delta {
        Some(s) => {
            let d = parse_f64_list(s).map_err(|e| CliError::new(EXIT_VALIDATION, format!("--delta: {e}")))?;
            if d.is_empty() {
                return Err(CliError::new(EXIT_VALIDATION, "--delta: empty list"));
            }
            Ok(d)
        }
        None => Ok(config.deltas.clone()),
    }
}

fn delta_tag(delta: f64) -> String {
    format!("{delta}")
}

fn svg_options(cfg: &RunConfig, title: String) -> SvgOptions {
    SvgOptions {
        title: Some(title),
        reproducible: cfg.common.reproducible,
        width_px: None,
    }
}

fn write_trace(art: &mut Artifacts, cfg: &RunConfig, scenario: &Scenario, trace: &EvolutionTrace) -> Result<(), CliError> {
    let tag = delta_tag(trace.delta);
    art.write(&format!("trace-{tag}.csv"), &trace.to_csv())?;
    art.write_json(&format!("trace-{tag}.json"), trace)?;
    let domain = scenario.mesh().domain();
    for (i, step) in trace.steps.iter().enumerate() {
        let k = scenario.graph.crack_set(&trace.edge_set(i));
        let svg = crack_svg(&k, &domain, &svg_options(cfg, format!("{} t = {}", scenario.name, step.t)));
        art.write(&format!("snapshots-{tag}/step-{i:04}.svg"), &svg)?;
    }
    Ok(())
}

/// Runs one command; returns the exit status to report.
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    fs::create_dir_all(&cfg.common.out)
        .map_err(|e| CliError::new(EXIT_OTHER, format!("cannot create output directory {}: {e}", cfg.common.out.display())))?;
    let mut art = Artifacts {
        out: cfg.common.out.clone(),
        files: Vec::new(),
        timings: BTreeMap::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.common.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::new(EXIT_OTHER, format!("--threads: {e}")))?;
    let started = Instant::now();
    let (status, scenario_echo, seed) = pool.install(|| execute(cfg, &mut art))?;
    art.timings.insert("total".into(), started.elapsed().as_secs_f64() * 1e3);

    let mut manifest = json!({
        "tool": "fractura",
        "version": env!("CARGO_PKG_VERSION"),
        "manifest_format": 1,
        "command": cfg.command,
        "seed": seed,
        "run": cfg,
        "scenario": scenario_echo,
        "outputs": art.files,
        "exit_status": status,
    });
    if !cfg.common.reproducible {
        manifest["timings_ms"] = json!(art.timings);
    }
    art.write_json("manifest.json", &manifest)?;
    Ok(status)
}

fn execute(cfg: &RunConfig, art: &mut Artifacts) -> Result<(i32, Value, u64), CliError> {
    if cfg.command == "lsc" {
        return run_lsc(cfg, art);
    }
    let Loaded { config, scenario } = load_scenario(cfg)?;
    let seed = cfg.common.seed.unwrap_or(config.seed);
    let echo = serde_json::to_value(&config).map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?;
    let strategy = cfg.common.strategy.unwrap_or(config.strategy);
    let mut status = EXIT_OK;
    match cfg.command.as_str() {
        "solve" => {
            let t = cfg.time.unwrap_or(1.0);
            if !(0.0..=1.0).contains(&t) {
                return Err(CliError::new(EXIT_VALIDATION, format!("--time must lie in [0, 1] (got {t})")));
            }
            let ev = art.time("solve", || scenario.evaluate(&scenario.initial_crack, &scenario.load.at(t)))?;
            art.write("solution.csv", &ev.result.dof_csv(&ev.disc))?;
            art.write_json(
                "solve.json",
                &json!({
                    "seed": seed,
                    "t": t,
                    "edges": scenario.initial_crack,
                    "energy": ev.energy,
                    "solve": ev.result.summary(&ev.disc),
                }),
            )?;
            let k = scenario.graph.crack_set(&scenario.initial_crack);
            let svg = crack_svg(&k, &scenario.mesh().domain(), &svg_options(cfg, scenario.name.clone()));
            art.write("crack.svg", &svg)?;
        }
        "evolve" => {
            for d in deltas(cfg, &config)? {
                let trace = art.time(format!("evolve {d}"), || run_evolution(&scenario, d, strategy))?;
                write_trace(art, cfg, &scenario, &trace)?;
            }
        }
        "verify" => {
            let traces = match &cfg.trace {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| CliError::new(EXIT_OTHER, format!("cannot read {}: {e}", path.display())))?;
                    let trace: EvolutionTrace = serde_json::from_str(&text)
                        .map_err(|e| CliError::new(EXIT_VALIDATION, format!("trace {}: {e}", path.display())))?;
                    vec![(String::from("verification.json"), trace)]
                }
                None => deltas(cfg, &config)?
                    .into_iter()
                    .map(|d| {
                        let trace = art.time(format!("evolve {d}"), || run_evolution(&scenario, d, strategy))?;
                        Ok((format!("verification-{}.json", delta_tag(d)), trace))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?,
            };
            for (name, trace) in traces {
                let report = art.time(format!("verify {}", trace.delta), || {
                    verify_trace(&trace, &scenario, &VerifyOptions::default())
                })?;
                if !report.passed {
                    log::warn!("{name}: verification failed");
                    if cfg.common.strict {
                        status = EXIT_VERIFICATION;
                    }
                }
                art.write_json(&name, &json!({"seed": seed, "delta": trace.delta, "report": report}))?;
            }
        }
        "study" => {
            let ds = deltas(cfg, &config)?;
            let report = art.time("study", || {
                delta_convergence_study(&scenario, &ds, strategy, &default_sample_times())
            })?;
            art.write("study.csv", &report.to_csv())?;
            art.write_json("study.json", &json!({"seed": seed, "study": report}))?;
            if !report.gaps_nonincreasing && cfg.common.strict {
                status = EXIT_VERIFICATION;
            }
        }
        other => return Err(CliError::new(EXIT_VALIDATION, format!("unknown command `{other}`"))),
    }
    Ok((status, echo, seed))
}

fn run_lsc(cfg: &RunConfig, art: &mut Artifacts) -> Result<(i32, Value, u64), CliError> {
    let families: Vec<(String, ConvergentFamily)> = match &cfg.family {
        Some(name) => vec![(
            name.clone(),
            ConvergentFamily::by_name(name).ok_or_else(|| CliError::new(EXIT_VALIDATION, format!("--family: unknown family `{name}`")))?,
        )],
        None => ConvergentFamily::builtin()
            .into_iter()
            .map(|(n, f)| (n.to_string(), f))
            .collect(),
    };
    let mut phis: Vec<(String, AnisotropyField)> = vec![
        ("euclidean".into(), AnisotropyField::euclidean()),
        (
            "crystalline".into(),
            AnisotropyField::crystalline([1.0, 0.0], [0.0, 1.0]).map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?,
        ),
    ];
    let mut echo = Value::Null;
    let mut seed = cfg.common.seed.unwrap_or(0);
    if cfg.common.scenario.is_some() {
        let Loaded { config, scenario } = load_scenario(cfg)?;
        seed = cfg.common.seed.unwrap_or(config.seed);
        echo = serde_json::to_value(&config).map_err(|e| CliError::new(EXIT_OTHER, e.to_string()))?;
        phis.push(("scenario".into(), scenario.phi.clone()));
    }
    let n_max = cfg.n_max.unwrap_or(64);
    let mut summary = Vec::new();
    let mut status = EXIT_OK;
    for (fname, family) in &families {
        for (pname, phi) in &phis {
            let report = art.time(format!("lsc {fname} {pname}"), || lsc_experiment(family, phi, n_max));
            art.write(&format!("lsc-{fname}-{pname}.csv"), &report.to_csv())?;
            if !report.lower_semicontinuous && cfg.common.strict {
                status = EXIT_VERIFICATION;
            }
            summary.push(json!({
                "family": fname,
                "phi": pname,
                "limit_energy": report.limit_energy,
                "tail_start": report.tail_start,
                "tail_infimum": report.tail_infimum,
                "gap": report.gap,
                "lower_semicontinuous": report.lower_semicontinuous,
                "hausdorff_nonincreasing": report.hausdorff_nonincreasing,
            }));
        }
    }
    art.write_json("lsc.json", &json!({"seed": seed, "n_max": n_max, "experiments": summary}))?;
    Ok((status, echo, seed))
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let cfg = RunConfig::from(cli);
    match run(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
