//! Command dispatch.
//!
//! Exit statuses follow sysexits: 64 for bad flags or flag values, 65 for
//! malformed or inconsistent input files, 66 for missing files and 74 for
//! write failures. `check-eq` exits with 0, 1 or 2 for equivalent,
//! conditionally equivalent and not equivalent, and with 3 when the models
//! load but cannot be compared.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use metamodel_core::adaptation::{evolve_rules, AdaptationConfig, Mutation, Strategy};
use metamodel_core::ann::{
    ann_to_system_model_with, learn, system_model_to_ann, ActivationFamily, LearnConfig,
    LearnSettings, NeuralNetwork,
};
use metamodel_core::ca::{
    ca_to_system_model, life_rule_table, moore_milieu, ring_milieu_with, Boundary,
    CellularAutomaton,
};
use metamodel_core::equivalence::{check_equivalence, CheckConfig, Conclusion};
use metamodel_core::{
    actualize, step, AdaptationEnd, AdaptationFunction, Regime, RuleTable, StateSet, SystemModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FileError, Result};
use crate::formats::{dataset, log, model, pbm, read_file, report, trajectory, write_file};

pub const EX_USAGE: i32 = 64;
pub const EX_DATAERR: i32 = 65;
pub const EX_NOINPUT: i32 = 66;
pub const EX_IOERR: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "metamodel", version, about = "Build, run, adapt and compare system models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a cellular automaton model.
    CreateCa(CreateCa),
    /// Create a neural network model.
    CreateAnn(CreateAnn),
    /// Run a model for a number of time steps.
    Run(Run),
    /// Evolve the rule table of a model towards a target state.
    Adapt(Adapt),
    /// Train the weights of a neural network model.
    Train(Train),
    /// Compare two models.
    CheckEq(CheckEq),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Ring,
    Fixed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ActivationArg {
    Threshold,
    Logistic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Hill,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct CreateCa {
    /// Rule number; elementary for radius 1.
    #[arg(long, required_unless_present = "life", conflicts_with = "life")]
    pub rule: Option<u64>,
    /// Number of cells (grid width with --life).
    #[arg(long)]
    pub width: usize,
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
    #[arg(long, value_enum, default_value = "ring")]
    pub boundary: BoundaryArg,
    /// Game of Life on a width x height torus instead of a ring.
    #[arg(long, requires = "height")]
    pub life: bool,
    #[arg(long)]
    pub height: Option<usize>,
    /// Initial cells: `center`, `random`, or one digit per cell.
    #[arg(long, default_value = "center")]
    pub init: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Default number of time steps stored in the model.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Output model file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CreateAnn {
    /// Layer sizes of a feed-forward network, input layer first.
    #[arg(long, value_delimiter = ',', required_unless_present = "ring", conflicts_with = "ring")]
    pub layers: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "logistic")]
    pub activation: ActivationArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ring lattice of threshold units with this many units.
    #[arg(long)]
    pub ring: Option<usize>,
    /// Lattice neighborhood radius.
    #[arg(long, default_value_t = 1)]
    pub radius: usize,
    /// Lattice weights from the leftmost neighbor through the unit itself to
    /// the rightmost neighbor; all ones by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub weights: Option<Vec<f64>>,
    /// Lattice threshold; a majority of the neighborhood by default.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Initial lattice units: `center`, `random`, or one digit per unit.
    #[arg(long, default_value = "center")]
    pub init: String,
    /// Lattice time steps stored in the model.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
    #[arg(long, default_value_t = 1000)]
    pub g: usize,
    #[arg(long, default_value_t = 0.0)]
    pub l: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Run {
    #[arg(long)]
    pub model: PathBuf,
    /// Steps to run; the model's own `t` if absent.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Trajectory file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the executed model.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Also write a P1 bitmap of the trajectory.
    #[arg(long)]
    pub pbm: Option<PathBuf>,
    /// Draw the bitmap as WxH grid frames instead of a spacetime diagram.
    #[arg(long, value_parser = parse_grid, requires = "pbm")]
    pub grid: Option<(usize, usize)>,
}

#[derive(Debug, Args)]
pub struct Adapt {
    #[arg(long)]
    pub model: PathBuf,
    /// Target state file (its last line of states is used).
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_enum, default_value = "hill")]
    pub strategy: StrategyArg,
    /// Maximum iterations; the model's `g` if absent.
    #[arg(long)]
    pub g: Option<usize>,
    /// Loss tolerance; the model's `l` if absent.
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entries flipped per mutation.
    #[arg(long, default_value_t = 1)]
    pub flips: usize,
    /// Steps per evaluation; the model's `t` if absent.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Adapted model file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Adaptation log file; standard output if absent.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Train {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset of `inputs | targets` lines.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckEq {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Format written to standard output.
    #[arg(long, value_enum, default_value = "table")]
    pub format: ReportFormat,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WxH")?;
    let parse = |v: &str| v.parse::<usize>().ok().filter(|n| *n > 0).ok_or("expected WxH with positive sizes");
    Ok((parse(w)?, parse(h)?))
}

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub status: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            status: EX_USAGE,
            message: message.into(),
        }
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        use metamodel_core::Error as E;
        let status = match &e {
            FileError::NotFound(_) => EX_NOINPUT,
            FileError::Io { .. } => EX_IOERR,
            FileError::Malformed(_) => EX_DATAERR,
            FileError::Core(E::Precondition(_) | E::Range(_) | E::Size(_)) => EX_USAGE,
            FileError::Core(_) => EX_DATAERR,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<metamodel_core::Error> for Failure {
    fn from(e: metamodel_core::Error) -> Self {
        FileError::from(e).into()
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Diagnostics go to standard error.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EX_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(status) => status,
        Err(f) => {
            eprintln!("metamodel: {}", f.message);
            f.status
        }
    }
}

pub fn dispatch(command: Command) -> std::result::Result<i32, Failure> {
    match command {
        Command::CreateCa(args) => create_ca(&args).map(|_| 0),
        Command::CreateAnn(args) => create_ann(&args).map(|_| 0),
        Command::Run(args) => run(&args).map(|_| 0),
        Command::Adapt(args) => adapt(&args).map(|_| 0),
        Command::Train(args) => train(&args).map(|_| 0),
        Command::CheckEq(args) => Ok(check_eq(&args).unwrap_or_else(|f| {
            eprintln!("metamodel: {}", f.message);
            if matches!(f.status, EX_USAGE | EX_NOINPUT | EX_DATAERR) {
                f.status
            } else {
                3
            }
        })),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| FileError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Loads a model file; anything wrong inside the file is malformed input.
fn load_model(path: &Path) -> Result<SystemModel> {
    let text = read_file(path)?;
    model::read_model(&text).map_err(|e| match e {
        FileError::Core(inner) => FileError::Malformed(format!("{}: {inner}", path.display())),
        FileError::Malformed(msg) => FileError::Malformed(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn load_text<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    parse(&read_file(path)?).map_err(|e| match e {
        FileError::Malformed(msg) => FileError::Malformed(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Initial binary cells from `center`, `random` or a digit string.
fn initial_cells(init: &str, n: usize, seed: u64) -> std::result::Result<Vec<f64>, Failure> {
    match init {
        "center" => {
            let mut cells = vec![0.0; n];
            cells[n / 2] = 1.0;
            Ok(cells)
        }
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..n).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect())
        }
        bits => {
            let cells: Option<Vec<f64>> = bits
                .chars()
                .map(|c| match c {
                    '0' => Some(0.0),
                    '1' => Some(1.0),
                    _ => None,
                })
                .collect();
            match cells {
                Some(cells) if cells.len() == n => Ok(cells),
                _ => Err(Failure::usage(format!(
                    "--init must be center, random or {n} binary digits"
                ))),
            }
        }
    }
}

fn nonzero_steps(steps: usize) -> std::result::Result<usize, Failure> {
    if steps == 0 {
        Err(Failure::usage("--steps must be at least 1"))
    } else {
        Ok(steps)
    }
}

fn with_steps(model: &SystemModel, t: usize) -> Result<SystemModel> {
    let mut params = model.params().clone();
    params.t = t;
    Ok(SystemModel::metastable(
        model.structures().to_vec(),
        model.operations().to_vec(),
        params,
    )?)
}

pub fn create_ca(args: &CreateCa) -> std::result::Result<(), Failure> {
    let steps = nonzero_steps(args.steps)?;
    if args.width == 0 {
        return Err(Failure::usage("--width must be at least 1"));
    }
    let ca = if args.life {
        let height = args.height.unwrap_or(0);
        if height == 0 {
            return Err(Failure::usage("--height must be at least 1"));
        }
        let cells = initial_cells(&args.init, args.width * height, args.seed)?;
        CellularAutomaton::new(
            cells,
            StateSet::binary(),
            moore_milieu(args.width, height)?,
            life_rule_table(),
        )?
    } else {
        let rule = args.rule.expect("clap requires --rule without --life");
        let boundary = match args.boundary {
            BoundaryArg::Ring => Boundary::Periodic,
            BoundaryArg::Fixed => Boundary::Fixed,
        };
        let milieus = ring_milieu_with(args.width, args.radius, boundary)?;
        let table = RuleTable::from_wolfram(2, 2 * args.radius + 1, args.radius, rule)?;
        let cells = initial_cells(&args.init, args.width, args.seed)?;
        CellularAutomaton::new(cells, StateSet::binary(), milieus, table)?
    };
    let model = with_steps(&ca_to_system_model(&ca), steps)?;
    emit(args.out.as_deref(), &model::write_model(&model)?)?;
    Ok(())
}

pub fn create_ann(args: &CreateAnn) -> std::result::Result<(), Failure> {
    let settings = LearnSettings {
        learning_rate: args.rate,
        seed: args.seed,
    };
    let model = if let Some(units) = args.ring {
        if !matches!(args.activation, ActivationArg::Threshold) {
            return Err(Failure::usage("lattice networks use threshold units"));
        }
        let steps = nonzero_steps(args.steps)?;
        let span = 2 * args.radius + 1;
        let weights = args.weights.clone().unwrap_or_else(|| vec![1.0; span]);
        if weights.len() != span {
            return Err(Failure::usage(format!("--weights needs {span} values")));
        }
        let theta = args.theta.unwrap_or((args.radius + 1) as f64);
        let incoming = ring_milieu_with(units, args.radius, Boundary::Periodic)?
            .to_indices()
            .expect("periodic rings have no boundary");
        let mut neighbor_weights = weights.clone();
        let self_weight = neighbor_weights.remove(args.radius);
        let net = NeuralNetwork::threshold_lattice(
            initial_cells(&args.init, units, args.seed)?,
            incoming,
            self_weight,
            &neighbor_weights,
            theta,
        )?;
        with_steps(&ann_to_system_model_with(&net, settings, args.g, args.l), steps)?
    } else {
        let sizes = args.layers.as_deref().expect("clap requires --layers without --ring");
        let family = match args.activation {
            ActivationArg::Threshold => ActivationFamily::Threshold,
            ActivationArg::Logistic => ActivationFamily::Logistic,
        };
        let net = NeuralNetwork::layered(sizes, family, args.seed)?;
        ann_to_system_model_with(&net, settings, args.g, args.l)
    };
    emit(args.out.as_deref(), &model::write_model(&model)?)?;
    Ok(())
}

pub fn run(args: &Run) -> std::result::Result<(), Failure> {
    if args.steps == Some(0) {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    let model = load_model(&args.model)?;
    let executed = match model.regime() {
        Regime::Virtual => {
            return Err(FileError::malformed("a virtual model cannot be run").into());
        }
        Regime::Metastable => actualize(&model, args.steps.unwrap_or(model.params().t))?,
        Regime::Actual => {
            let mut current = model;
            for _ in 0..args.steps.unwrap_or(current.params().t) {
                current = step(&current)?;
            }
            current
        }
    };
    let trajectory = executed.trajectory().expect("executed models carry a trajectory");
    let states = &executed.params().state_set;
    if let Some(path) = &args.pbm {
        let image = match args.grid {
            Some((w, h)) => pbm::frames(trajectory.rows(), states, w, h)?,
            None => pbm::spacetime(trajectory.rows(), states)?,
        };
        write_file(path, &image)?;
    }
    if let Some(path) = &args.model_out {
        write_file(path, &model::write_model(&executed)?)?;
    }
    emit(args.out.as_deref(), &trajectory::write_trajectory(trajectory, states))?;
    Ok(())
}

pub fn adapt(args: &Adapt) -> std::result::Result<(), Failure> {
    if args.steps == Some(0) || args.g == Some(0) {
        return Err(Failure::usage("--steps and --g must be at least 1"));
    }
    let mutation = match args.flips {
        0 => return Err(Failure::usage("--flips must be at least 1")),
        1 => Mutation::SingleBitFlip,
        k => Mutation::KBitFlip(k),
    };
    let model = load_model(&args.model)?;
    if model.regime() != Regime::Metastable {
        return Err(FileError::malformed("only metastable models can be adapted").into());
    }
    let target = load_text(&args.target, trajectory::read_target)?;
    let params = model.params();
    let strategy = match args.strategy {
        StrategyArg::Hill => Strategy::HillClimb,
        StrategyArg::Exhaustive => Strategy::Exhaustive,
    };
    let cfg = AdaptationConfig {
        g: args.g.unwrap_or(params.g),
        l: args.l.unwrap_or(params.l),
        seed: args.seed,
        mutation,
        strategy,
    };
    let t = args.steps.unwrap_or(params.t);
    let end = AdaptationEnd::final_state(target);
    let (best, records) = evolve_rules(&model, Some(&end), &cfg, t)?;
    // Record what was searched for and how, so the output model replays it.
    let mut params = best.params().clone();
    params.adaptation_end = Some(end);
    params.adaptation_fn = Some(AdaptationFunction::EvolveRules {
        strategy,
        mutation,
        seed: args.seed,
    });
    params.g = cfg.g;
    params.l = cfg.l;
    let adapted = SystemModel::metastable(best.structures().to_vec(), best.operations().to_vec(), params)?;
    if let Some(path) = &args.out {
        write_file(path, &model::write_model(&adapted)?)?;
    }
    emit(args.log.as_deref(), &log::write_log(&records))?;
    Ok(())
}

pub fn train(args: &Train) -> std::result::Result<(), Failure> {
    if args.g == Some(0) {
        return Err(Failure::usage("--g must be at least 1"));
    }
    let model = load_model(&args.model)?;
    if model.regime() == Regime::Virtual {
        return Err(FileError::malformed("a virtual model cannot be trained").into());
    }
    let data = load_text(&args.data, dataset::read_dataset)?;
    let params = model.params();
    let bound_rate = match &params.adaptation_fn {
        Some(AdaptationFunction::Learn(s)) => Some(s.learning_rate),
        _ => None,
    };
    let cfg = LearnConfig {
        g: args.g.unwrap_or(params.g),
        l: args.l.unwrap_or(params.l),
        learning_rate: args.rate.or(bound_rate).unwrap_or(0.5),
        seed: args.seed,
    };
    let net = system_model_to_ann(&model)?;
    let (trained, records) = learn(&net, &data, &cfg)?;
    let settings = LearnSettings {
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
    };
    let trained = ann_to_system_model_with(&trained, settings, cfg.g, cfg.l);
    if let Some(path) = &args.out {
        write_file(path, &model::write_model(&trained)?)?;
    }
    emit(args.log.as_deref(), &log::write_log(&records))?;
    Ok(())
}

/// Returns the conclusion status (0, 1 or 2).
pub fn check_eq(args: &CheckEq) -> std::result::Result<i32, Failure> {
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) || args.samples == 0 {
        return Err(Failure::usage("--tolerance must be >= 0 and --samples >= 1"));
    }
    let left = load_model(&args.left)?;
    let right = load_model(&args.right)?;
    let cfg = CheckConfig {
        tolerance: args.tolerance,
        sample_budget: args.samples,
        seed: args.seed,
        ..CheckConfig::default()
    };
    let result = check_equivalence(&left, &right, &cfg).map_err(|e| Failure {
        status: 3,
        message: e.to_string(),
    })?;
    if let Some(path) = &args.report {
        write_file(path, &report::report_json(&result))?;
    }
    let text = match args.format {
        ReportFormat::Table => report::report_table(&result),
        ReportFormat::Json => report::report_json(&result),
    };
    emit(None, &text)?;
    Ok(match result.conclusion {
        Conclusion::Equivalent => 0,
        Conclusion::ConditionallyEquivalent(_) => 1,
        Conclusion::NotEquivalent => 2,
    })
}
