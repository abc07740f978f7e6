//! Command-line front end: argument parsing, input files and report output.
//!
//! System files are JSON:
//!
//! ```json
//! {
//!   "world": [0.5, 0.5],
//!   "agents": {
//!     "v": { "coder": [[1, 0], [0, 1]], "decoder": [[1, 0], [0, 1]] },
//!     "u": { "coder": [[1, 0], [0, 1]], "decoder": [[1, 0], [0, 1]] }
//!   },
//!   "channel": [[0.9, 0.1], [0.1, 0.9]],
//!   "sender": "v",
//!   "receiver": "u"
//! }
//! ```
//!
//! Matrices are row-major nested arrays. An optional `"normalize": true`
//! rescales the world and every matrix row by its sum before validation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capacity::{channel_capacity, CapacityResult, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::case_study;
use crate::error::CoreError;
use crate::evolve::{evolve, EvolutionConfig, Fitness, Population};
use crate::measures::{directed_report, symmetric_report, InfoReport};
use crate::structure::{classify, Classification};
use crate::system::{Agent, CommSystem, Direction, Distribution, Label, Role, StochasticMatrix};

#[derive(Debug, Parser)]
#[command(name = "coninfo", version, about = "Consistent information of coder/channel/decoder systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropies, mutual and consistent information, dissipation and classification of a system file.
    Analyze(AnalyzeArgs),
    /// Capacity of a channel given as a file or inline.
    Capacity(CapacityArgs),
    /// Reproduce the binary symmetric channel case study.
    CaseStudy(CaseStudyArgs),
    /// Run the evolutionary simulation and write its trajectory.
    Evolve(EvolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub path: PathBuf,
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    pub direction: DirectionArg,
    #[arg(long)]
    pub json: bool,
    /// Require every referent to be producible by each agent's decoder.
    #[arg(long)]
    pub check_world_coverage: bool,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// JSON file holding a nested array or an object with a "channel" field.
    #[arg(required_unless_present = "matrix", conflicts_with = "matrix")]
    pub path: Option<PathBuf>,
    /// Inline matrix: rows separated by ';', entries by ',' or whitespace.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Rescale each row by its sum before validating.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CaseStudyArgs {
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    pub config: PathBuf,
    pub output: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0} case-study value(s) outside tolerance")]
    CaseStudyMismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::CaseStudyMismatch(_) => 5,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::NonConvergence(_) => "non-convergence",
            CliError::CaseStudyMismatch(_) => "case-study",
        }
    }

    /// `error[<category>]: <message>` on a single line.
    pub fn one_line(&self) -> String {
        format!("error[{}]: {}", self.category(), self.to_string().replace('\n', " "))
    }

    fn parse(path: &Path, err: serde_json::Error) -> Self {
        CliError::Parse {
            path: path.display().to_string(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

fn invalid(context: impl std::fmt::Display, err: CoreError) -> CliError {
    CliError::Validation(format!("{context}: {err}"))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub coder: Vec<Vec<f64>>,
    pub decoder: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub world: Vec<f64>,
    pub agents: BTreeMap<String, AgentSpec>,
    pub channel: Vec<Vec<f64>>,
    pub sender: String,
    pub receiver: String,
    #[serde(default)]
    pub normalize: bool,
}

fn build_agent(id: &str, spec: &AgentSpec, normalize: bool) -> Result<Agent, CliError> {
    let coder = StochasticMatrix::validate(spec.coder.clone(), Role::Coder, normalize)
        .map_err(|e| invalid(format!("agent '{id}' coder"), e))?;
    let decoder = StochasticMatrix::validate(spec.decoder.clone(), Role::Decoder, normalize)
        .map_err(|e| invalid(format!("agent '{id}' decoder"), e))?;
    Agent::new(id, coder, decoder).map_err(|e| invalid(format!("agent '{id}'"), e))
}

impl SystemFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::parse(path, e))
    }

    pub fn into_system(self) -> Result<CommSystem, CliError> {
        let world = Distribution::validate(self.world, Label::World, self.normalize).map_err(|e| invalid("world", e))?;
        let channel =
            StochasticMatrix::validate(self.channel, Role::Channel, self.normalize).map_err(|e| invalid("channel", e))?;
        let lookup = |name: &str, role: &str| {
            self.agents
                .get(name)
                .ok_or_else(|| CliError::Validation(format!("{role} '{name}' is not among the defined agents")))
                .and_then(|spec| build_agent(name, spec, self.normalize))
        };
        let sender = lookup(&self.sender, "sender")?;
        let receiver = lookup(&self.receiver, "receiver")?;
        CommSystem::new(world, sender, receiver, channel).map_err(|e| invalid("system", e))
    }
}

pub fn load_system(path: &Path) -> Result<CommSystem, CliError> {
    SystemFile::parse(&read(path)?, path)?.into_system()
}

#[derive(Debug, Serialize)]
struct DirectedOutput {
    report: InfoReport,
    classification: Classification,
}

#[derive(Debug, Serialize)]
struct AnalyzeOutput {
    n: usize,
    sender: String,
    receiver: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    forward: Option<DirectedOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    backward: Option<DirectedOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetric: Option<SymmetricSummary>,
}

#[derive(Debug, Serialize)]
struct SymmetricSummary {
    avg_mutual_info: f64,
    avg_consistent_info: f64,
    avg_payoff: f64,
}

fn render_directed(out: &mut String, heading: &str, d: &DirectedOutput) {
    let r = &d.report;
    writeln!(out, "[{heading}]").unwrap();
    writeln!(out, "H(X) = {:.3} bits", r.h_input).unwrap();
    writeln!(out, "H(X') = {:.3} bits", r.h_output).unwrap();
    writeln!(out, "H(X,X') = {:.3} bits", r.h_joint).unwrap();
    writeln!(out, "H(X|X') = {:.3} bits", r.h_cond_input_given_output).unwrap();
    writeln!(out, "I = {:.3} bits", r.mutual_info).unwrap();
    writeln!(out, "sigma = {:.3}", r.sigma).unwrap();
    writeln!(out, "consistent = {:.3} bits", r.consistent_info).unwrap();
    writeln!(out, "payoff F = {:.3}", r.payoff_fraction).unwrap();
    writeln!(
        out,
        "dissipation = {:.3} physical + {:.3} referential bits",
        r.dissipation_physical, r.dissipation_referential
    )
    .unwrap();
    writeln!(out, "classification = {:?}", d.classification.kind).unwrap();
    let witnesses: Vec<String> = d
        .classification
        .witnesses
        .named()
        .iter()
        .map(|(name, v)| format!("{name}={v}"))
        .collect();
    writeln!(out, "witnesses = {}", witnesses.join(" ")).unwrap();
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let system = load_system(&args.path)?;
    if args.check_world_coverage {
        system
            .check_world_coverage()
            .map_err(|e| invalid("world coverage", e))?;
    }
    let directed = |dir| DirectedOutput {
        report: directed_report(&system, dir),
        classification: classify(&system, dir),
    };
    let want_fwd = args.direction != DirectionArg::Backward;
    let want_bwd = args.direction != DirectionArg::Forward;
    let symmetric = (args.direction == DirectionArg::Both).then(|| {
        let s = symmetric_report(&system);
        SymmetricSummary {
            avg_mutual_info: s.avg_mutual_info,
            avg_consistent_info: s.avg_consistent_info,
            avg_payoff: s.avg_payoff,
        }
    });
    let output = AnalyzeOutput {
        n: system.dim(),
        sender: system.sender().id.clone(),
        receiver: system.receiver().id.clone(),
        forward: want_fwd.then(|| directed(Direction::SenderToReceiver)),
        backward: want_bwd.then(|| directed(Direction::ReceiverToSender)),
        symmetric,
    };

    let text = if args.json {
        serde_json::to_string_pretty(&output).expect("report serializes") + "\n"
    } else {
        let mut s = String::new();
        writeln!(
            s,
            "system: n = {}, sender '{}', receiver '{}'",
            output.n, output.sender, output.receiver
        )
        .unwrap();
        if let Some(f) = &output.forward {
            s.push('\n');
            render_directed(&mut s, &format!("forward: {} -> {}", output.sender, output.receiver), f);
        }
        if let Some(b) = &output.backward {
            s.push('\n');
            render_directed(&mut s, &format!("backward: {} -> {}", output.receiver, output.sender), b);
        }
        if let Some(sym) = &output.symmetric {
            s.push_str("\n[symmetric]\n");
            writeln!(s, "<I> = {:.3} bits", sym.avg_mutual_info).unwrap();
            writeln!(s, "F consistent = {:.3} bits", sym.avg_consistent_info).unwrap();
            writeln!(s, "F payoff = {:.3}", sym.avg_payoff).unwrap();
        }
        s
    };
    emit(out, &text)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

/// Parses `"0.9, 0.1; 0.1 0.9"` into rows.
pub fn parse_inline_matrix(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (r, row) in text.split(';').enumerate() {
        let mut parsed = Vec::new();
        for (c, tok) in row
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .enumerate()
        {
            let v = tok.parse::<f64>().map_err(|e| CliError::Parse {
                path: "--matrix".into(),
                line: r + 1,
                column: c + 1,
                message: format!("'{tok}': {e}"),
            })?;
            parsed.push(v);
        }
        rows.push(parsed);
    }
    Ok(rows)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ChannelFile {
    Bare(Vec<Vec<f64>>),
    Wrapped { channel: Vec<Vec<f64>> },
}

#[derive(Debug, Serialize)]
struct CapacityOutput<'a> {
    capacity: f64,
    upper_bound: f64,
    optimal_input: &'a [f64],
    iterations: usize,
    converged: bool,
    gap_bound: f64,
}

pub fn cmd_capacity(args: &CapacityArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = match (&args.path, &args.matrix) {
        (_, Some(m)) => parse_inline_matrix(m)?,
        (Some(path), None) => {
            let parsed: ChannelFile = serde_json::from_str(&read(path)?).map_err(|e| CliError::parse(path, e))?;
            match parsed {
                ChannelFile::Bare(rows) | ChannelFile::Wrapped { channel: rows } => rows,
            }
        }
        (None, None) => return Err(CliError::Validation("no channel given".into())),
    };
    let channel = StochasticMatrix::validate(rows, Role::Channel, args.normalize).map_err(|e| invalid("channel", e))?;
    let result: CapacityResult =
        channel_capacity(&channel, args.tol, args.max_iter).map_err(|e| invalid("capacity", e))?;

    let text = if args.json {
        let o = CapacityOutput {
            capacity: result.capacity,
            upper_bound: result.upper_bound(),
            optimal_input: result.optimal_input.probs(),
            iterations: result.iterations,
            converged: result.converged,
            gap_bound: result.gap_bound,
        };
        serde_json::to_string_pretty(&o).expect("serializable") + "\n"
    } else {
        let input: Vec<String> = result.optimal_input.probs().iter().map(|p| format!("{p:.3}")).collect();
        format!(
            "capacity = {:.3} bits\noptimal input = [{}]\niterations = {}\nconverged = {}\ngap = {:e} bits\n",
            result.capacity,
            input.join(", "),
            result.iterations,
            result.converged,
            result.gap_bound
        )
    };
    emit(out, &text)?;
    if !result.converged {
        return Err(CliError::NonConvergence(format!(
            "capacity bounds still {:e} apart after {} iterations (tol {:e})",
            result.gap_bound, result.iterations, args.tol
        )));
    }
    Ok(())
}

pub fn cmd_case_study(args: &CaseStudyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let study = case_study::run();
    let text = if args.json {
        serde_json::to_string_pretty(&study).expect("serializable") + "\n"
    } else {
        study.render()
    };
    emit(out, &text)?;
    match study.failures() {
        0 => Ok(()),
        k => Err(CliError::CaseStudyMismatch(k)),
    }
}

/// Evolution config file: the run parameters plus world, channel and an
/// optional explicit initial population.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveFile {
    pub world: Vec<f64>,
    pub channel: Vec<Vec<f64>>,
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub mutation_scale: f64,
    pub fitness: Fitness,
    pub elitism: usize,
    pub seed: u64,
    #[serde(default)]
    pub initial_agents: Option<Vec<AgentSpec>>,
}

impl EvolveFile {
    pub fn config(&self) -> EvolutionConfig {
        EvolutionConfig {
            population_size: self.population_size,
            generations: self.generations,
            mutation_rate: self.mutation_rate,
            mutation_scale: self.mutation_scale,
            fitness: self.fitness,
            elitism: self.elitism,
            seed: self.seed,
        }
    }

    /// Explicit agents if given, otherwise random agents drawn from stream 1
    /// of the seed.
    pub fn initial_population(&self) -> Result<Population, CliError> {
        let world = Distribution::new(self.world.clone(), Label::World).map_err(|e| invalid("world", e))?;
        let channel = StochasticMatrix::new(self.channel.clone(), Role::Channel).map_err(|e| invalid("channel", e))?;
        match &self.initial_agents {
            Some(specs) => {
                let agents = specs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| build_agent(&format!("a{i}"), s, false))
                    .collect::<Result<Vec<_>, _>>()?;
                Population::new(agents, world, channel).map_err(|e| invalid("population", e))
            }
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(1);
                Population::random(self.population_size, world, channel, &mut rng)
                    .map_err(|e| invalid("population", e))
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct EvolveSummary {
    seed: u64,
    generations: usize,
    initial_max_fitness: f64,
    final_mean_fitness: f64,
    final_max_fitness: f64,
    final_mean_sigma: f64,
    final_mean_consistent: f64,
    trajectory: String,
}

pub fn cmd_evolve(args: &EvolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut file: EvolveFile = serde_json::from_str(&read(&args.config)?).map_err(|e| CliError::parse(&args.config, e))?;
    if let Some(seed) = args.seed {
        file.seed = seed;
    }
    let config = file.config();
    config.validate().map_err(|e| invalid("config", e))?;
    let initial = file.initial_population()?;
    let (trajectory, _) = evolve(initial, &config).map_err(|e| invalid("evolve", e))?;
    std::fs::write(&args.output, trajectory.to_csv()).map_err(|source| CliError::Io {
        path: args.output.clone(),
        source,
    })?;

    let last = trajectory.last();
    let summary = EvolveSummary {
        seed: trajectory.seed,
        generations: config.generations,
        initial_max_fitness: trajectory.initial().max_fitness,
        final_mean_fitness: last.mean_fitness,
        final_max_fitness: last.max_fitness,
        final_mean_sigma: last.mean_sigma,
        final_mean_consistent: last.mean_consistent,
        trajectory: args.output.display().to_string(),
    };
    let text = if args.json {
        serde_json::to_string_pretty(&summary).expect("serializable") + "\n"
    } else {
        format!(
            "seed = {}\ngenerations = {}\ninitial max fitness = {:.3}\nfinal mean fitness = {:.3}\n\
             final max fitness = {:.3}\nfinal mean sigma = {:.3}\nfinal mean F = {:.3} bits\ntrajectory = {}\n",
            summary.seed,
            summary.generations,
            summary.initial_max_fitness,
            summary.final_mean_fitness,
            summary.final_max_fitness,
            summary.final_mean_sigma,
            summary.final_mean_consistent,
            summary.trajectory
        )
    };
    emit(out, &text)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Capacity(a) => cmd_capacity(a, out),
        Command::CaseStudy(a) => cmd_case_study(a, out),
        Command::Evolve(a) => cmd_evolve(a, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_matrix_parsing() {
        assert_eq!(
            parse_inline_matrix("0.9,0.1; 0.1 0.9").unwrap(),
            vec![vec![0.9, 0.1], vec![0.1, 0.9]]
        );
        let err = parse_inline_matrix("1,0;0,x").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, column: 2, .. }));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = SystemFile::parse("{\n  \"world\": [0.5,\n  oops]\n}", Path::new("s.json")).unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(err_code("{}"), 2);
    }

    fn err_code(text: &str) -> u8 {
        SystemFile::parse(text, Path::new("x")).unwrap_err().exit_code()
    }

    #[test]
    fn unknown_agent_is_a_validation_error() {
        let text = r#"{"world":[1.0],"agents":{"a":{"coder":[[1]],"decoder":[[1]]}},
                      "channel":[[1]],"sender":"a","receiver":"b"}"#;
        let err = SystemFile::parse(text, Path::new("x")).unwrap().into_system().unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("receiver 'b'"));
    }

    #[test]
    fn normalize_flag_in_file() {
        let text = r#"{"world":[1,1],"agents":{"a":{"coder":[[2,0],[0,2]],"decoder":[[1,1],[1,1]]}},
                      "channel":[[1,0],[0,1]],"sender":"a","receiver":"a","normalize":true}"#;
        let sys = SystemFile::parse(text, Path::new("x")).unwrap().into_system().unwrap();
        assert_eq!(sys.world().probs(), &[0.5, 0.5]);
        assert_eq!(sys.sender().decoder().row(0), &[0.5, 0.5]);
    }

    #[test]
    fn distinct_exit_codes() {
        let errs = [
            CliError::Io {
                path: "p".into(),
                source: std::io::Error::from(std::io::ErrorKind::NotFound),
            },
            CliError::Parse {
                path: "p".into(),
                line: 1,
                column: 1,
                message: "m".into(),
            },
            CliError::Validation("v".into()),
            CliError::NonConvergence("n".into()),
            CliError::CaseStudyMismatch(1),
        ];
        let mut codes: Vec<u8> = errs.iter().map(CliError::exit_code).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), errs.len());
        assert!(!codes.contains(&0));
        for e in &errs {
            assert!(!e.one_line().contains('\n'));
            assert!(e.one_line().starts_with(&format!("error[{}]", e.category())));
        }
    }
}
