//! `l0swap` command-line interface.

mod table;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use l0swap::binarize::{binarize, Direction, Encoding, ThresholdMap};
use l0swap::metrics::{accuracy, auc};
use l0swap::path::{DEFAULT_LAMBDA0_GRID, DEFAULT_LAMBDA2_GRID};
use l0swap::scorecard::{export_linear, export_scorecard, ModelFile};
use l0swap::synth::{gen_classification, SynthSpec};
use l0swap::{fit, fit_path, CutMode, DesignMatrix, FitResult, HyperParams, Loss, ModelState, Ordering, PathSpec};

use table::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The reader of our output went away; not worth reporting.
    #[error("broken pipe")]
    BrokenPipe,
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] l0swap::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        fn core(e: &l0swap::Error) -> u8 {
            match e {
                l0swap::Error::InvalidConfig(_) => 3,
                l0swap::Error::Numeric(_) => 4,
                l0swap::Error::GridPoint { source, .. } => core(source),
                _ => 2,
            }
        }
        match self {
            CliError::BrokenPipe => 0,
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Config(_) => 3,
            CliError::Core(e) => core(e),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe => CliError::BrokenPipe,
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Sparse classification with an L0 penalty.
#[derive(Debug, Parser)]
#[command(name = "l0swap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one model and write it as JSON.
    Fit(FitCmd),
    /// Score a data file with a saved model.
    Predict(PredictCmd),
    /// Fit a grid of penalties and write one row per grid point.
    Path(PathCmd),
    /// Run every cut/ordering/loss configuration over one grid.
    Bench(BenchCmd),
    /// Generate a synthetic classification dataset.
    Synth(SynthCmd),
}

/// A positive count, or `all` for no limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Limit(Option<usize>);

fn parse_limit(s: &str) -> Result<Limit, String> {
    if s == "all" {
        return Ok(Limit(None));
    }
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(Limit(Some(v))),
        Err(e) => Err(format!("expected a positive integer or `all`: {e}")),
    }
}

/// Training data and its optional threshold binarization.
#[derive(Debug, Clone, Args)]
struct DataArgs {
    /// CSV with a header row and a label column `y` in {-1,1} or {0,1}.
    #[arg(long)]
    data: PathBuf,
    /// Replace each feature by threshold indicators.
    #[arg(long)]
    binarize: bool,
    /// Thresholds per feature when binarizing (`all` keeps every distinct value).
    #[arg(long, default_value = "all", value_parser = parse_limit)]
    max_thresholds: Limit,
    /// Indicator values: `01` or `pm1` (default `pm1` for the exponential loss, else `01`).
    #[arg(long)]
    encoding: Option<Encoding>,
    /// Indicator direction: `le` (x <= t) or `ge` (x >= t).
    #[arg(long, default_value = "le")]
    direction: Direction,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value = "logistic")]
    loss: Loss,
    /// Swap screening bounds: `lin`, `quad` or `auto` (quad iff lambda2 > 0).
    #[arg(long, default_value = "auto")]
    cut: CutMode,
    /// Support visiting order: `dynamic` or `sequential`.
    #[arg(long, default_value = "dynamic")]
    ordering: Ordering,
    /// Swap candidates tried per support feature (`all` tries every one).
    #[arg(long, default_value = "all", value_parser = parse_limit)]
    candidate_limit: Limit,
}

impl SolverArgs {
    fn params(&self, lambda0: f64, lambda2: f64) -> HyperParams {
        let mut hp = match self.loss {
            Loss::Logistic => HyperParams::logistic(lambda0, lambda2),
            Loss::Exponential => HyperParams { lambda2, ..HyperParams::exponential(lambda0) },
        };
        hp.cut = self.cut;
        hp.candidate_limit = self.candidate_limit.0;
        hp
    }
}

#[derive(Debug, Args)]
struct FitCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    lambda0: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda2: f64,
    /// Where to write the model JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictCmd {
    #[arg(long)]
    model: PathBuf,
    /// CSV whose columns include the model's features (`y` is ignored).
    #[arg(long)]
    data: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Comma-separated lambda0 values, fitted in descending order.
    #[arg(long, value_delimiter = ',')]
    lambda0_grid: Option<Vec<f64>>,
    /// Comma-separated lambda2 values (logistic default 1e-5,1e-3; exponential 0).
    #[arg(long, value_delimiter = ',')]
    lambda2_grid: Option<Vec<f64>>,
}

impl GridArgs {
    fn lambda0(&self) -> Result<Vec<f64>, CliError> {
        let mut grid = self.lambda0_grid.clone().unwrap_or_else(|| DEFAULT_LAMBDA0_GRID.to_vec());
        grid.sort_by(|a, b| b.total_cmp(a));
        if grid.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("lambda0 grid has repeated values".into()));
        }
        Ok(grid)
    }

    fn lambda2(&self, loss: Loss) -> Vec<f64> {
        self.lambda2_grid.clone().unwrap_or_else(|| match loss {
            Loss::Logistic => DEFAULT_LAMBDA2_GRID.to_vec(),
            Loss::Exponential => vec![0.0],
        })
    }
}

#[derive(Debug, Args)]
struct PathCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Swap candidates tried per support feature (`all` tries every one).
    #[arg(long, default_value = "all", value_parser = parse_limit)]
    candidate_limit: Limit,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthCmd {
    #[arg(long, default_value_t = SynthSpec::default().n)]
    n: usize,
    #[arg(long, default_value_t = SynthSpec::default().p)]
    p: usize,
    #[arg(long, default_value_t = SynthSpec::default().k)]
    k: usize,
    #[arg(long, default_value_t = SynthSpec::default().rho)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Data CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Planted-support file (default: `<out stem>.truth.csv` next to `--out`).
    #[arg(long)]
    truth: Option<PathBuf>,
}

/// Training matrix, possibly binarized, with the map that produced it.
struct Training {
    table: Table,
    matrix: DesignMatrix,
    map: Option<ThresholdMap>,
}

fn load_training(args: &DataArgs, loss: Loss) -> Result<Training, CliError> {
    let table = Table::read(&args.data)?;
    let raw = table.design()?;
    if !args.binarize {
        if loss == Loss::Exponential && !raw.is_binary() {
            return Err(CliError::Config(
                "the exponential loss needs {-1, +1} features; pass --binarize".into(),
            ));
        }
        return Ok(Training { table, matrix: raw, map: None });
    }
    let encoding = args.encoding.unwrap_or(match loss {
        Loss::Exponential => Encoding::PlusMinusOne,
        Loss::Logistic => Encoding::ZeroOne,
    });
    if loss == Loss::Exponential && encoding != Encoding::PlusMinusOne {
        return Err(CliError::Config("the exponential loss needs --encoding pm1".into()));
    }
    let (matrix, map) = binarize(&raw, args.direction, encoding, args.max_thresholds.0)?;
    if matrix.p() == 0 {
        return Err(CliError::Input("every feature is constant; nothing to fit".into()));
    }
    Ok(Training { table, matrix, map: Some(map) })
}

fn export(training: &Training, state: &ModelState, hp: &HyperParams) -> Result<ModelFile, CliError> {
    let names = training.matrix.feature_names();
    Ok(match &training.map {
        Some(map) => ModelFile::Scorecard(export_scorecard(state, map, names, hp)?),
        None => ModelFile::Linear(export_linear(state, names, hp)?),
    })
}

/// Scores `y_i * margin_i` of the fitted matrix.
fn train_scores(state: &ModelState, data: &DesignMatrix) -> Vec<f64> {
    state.margins().iter().zip(data.labels()).map(|(m, y)| m * y).collect()
}

/// Shortest text that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

fn cmd_fit(cmd: &FitCmd) -> Result<(), CliError> {
    let hp = cmd.solver.params(cmd.lambda0, cmd.lambda2);
    hp.validate()?;
    let training = load_training(&cmd.data, hp.loss)?;
    let result = fit(&training.matrix, &hp, cmd.solver.ordering)?;
    let model = export(&training, &result.state, &hp)?;

    // training metrics go through the exported model, as `predict` does
    let bound = model.bind(&training.table.features)?;
    let scores = training.table.rows.iter().map(|r| bound.score(r)).collect::<l0swap::Result<Vec<_>>>()?;
    let labels = training.matrix.labels();
    println!("loss: {}", hp.loss);
    println!("lambda0: {}", num(hp.lambda0));
    println!("lambda2: {}", num(hp.lambda2));
    println!("objective: {}", num(result.objective));
    println!("support_size: {}", result.state.support().len());
    println!("intercept: {}", num(result.state.intercept()));
    println!("wall_ms: {:.3}", result.wall_ms);
    println!("train_accuracy: {}", num(accuracy(&scores, labels, 0.0)?));
    match auc(&scores, labels) {
        Ok(v) => println!("train_auc: {}", num(v)),
        Err(_) => println!("train_auc: NA"),
    }
    if let Some(out) = &cmd.out {
        write_text(out, &model.to_json()?)?;
    }
    Ok(())
}

fn cmd_predict(cmd: &PredictCmd) -> Result<(), CliError> {
    let text = fs::read_to_string(&cmd.model).map_err(|e| CliError::Io { path: cmd.model.clone(), source: e })?;
    let model = ModelFile::from_json(&text)?;
    let table = Table::read(&cmd.data)?;
    let bound = model.bind(&table.features)?;
    let mut out = table::writer(cmd.out.as_ref())?;
    out.write_record(["score", "probability", "label"])?;
    for row in &table.rows {
        let score = bound.score(row)?;
        let label = if score >= 0.0 { "1" } else { "-1" };
        out.write_record([num(score), num(bound.probability(row)?), label.into()])?;
    }
    table::finish(out)?;
    Ok(())
}

fn core_message(e: &l0swap::Error) -> String {
    match e {
        l0swap::Error::GridPoint { source, .. } => source.to_string(),
        other => other.to_string(),
    }
}

fn fit_columns(r: &FitResult, data: &DesignMatrix) -> [String; 6] {
    let train_auc = auc(&train_scores(&r.state, data), data.labels()).map(num).unwrap_or_default();
    [
        r.state.support().len().to_string(),
        num(r.objective),
        train_auc,
        format!("{:.3}", r.wall_ms),
        r.swap_evals.to_string(),
        r.cut_prunes.to_string(),
    ]
}

const FIT_HEADER: [&str; 7] = ["support_size", "objective", "train_auc", "wall_ms", "swap_evals", "cut_prunes", "error"];

fn cmd_path(cmd: &PathCmd) -> Result<(), CliError> {
    let lambda2_grid = cmd.grid.lambda2(cmd.solver.loss);
    let template = cmd.solver.params(1.0, lambda2_grid.first().copied().unwrap_or(0.0));
    let spec = PathSpec::new(cmd.grid.lambda0()?, lambda2_grid, template, cmd.solver.ordering)?;
    let training = load_training(&cmd.data, cmd.solver.loss)?;
    let path = fit_path(&training.matrix, &spec)?;

    let mut out = table::writer(cmd.out.as_ref())?;
    out.write_record(["lambda0", "lambda2"].iter().chain(&FIT_HEADER))?;
    let mut first_error = None;
    let mut succeeded = 0;
    for point in path.points {
        let mut row = vec![num(point.lambda0), num(point.lambda2)];
        match point.result {
            Ok(r) => {
                row.extend(fit_columns(&r, &training.matrix));
                row.push(String::new());
                succeeded += 1;
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(core_message(&e));
                first_error.get_or_insert(e);
            }
        }
        out.write_record(&row)?;
    }
    table::finish(out)?;
    // rows are written either way; fail only when no grid point could be fitted
    match first_error {
        Some(e) if succeeded == 0 => Err(e.into()),
        _ => Ok(()),
    }
}

struct Cell {
    loss: Loss,
    cut: Option<CutMode>,
    ordering: Ordering,
}

fn cmd_bench(cmd: &BenchCmd) -> Result<(), CliError> {
    // one shared matrix: pm1 indicators so both losses see the same features
    let data_args = DataArgs { encoding: cmd.data.encoding.or(Some(Encoding::PlusMinusOne)), ..cmd.data.clone() };
    let training = load_training(&data_args, Loss::Logistic)?;
    let lambda0_grid = cmd.grid.lambda0()?;
    let mut cells = Vec::new();
    for cut in [CutMode::Lin, CutMode::Quad] {
        for ordering in [Ordering::Sequential, Ordering::Dynamic] {
            cells.push(Cell { loss: Loss::Logistic, cut: Some(cut), ordering });
        }
    }
    if training.matrix.is_binary() {
        for ordering in [Ordering::Sequential, Ordering::Dynamic] {
            cells.push(Cell { loss: Loss::Exponential, cut: None, ordering });
        }
    } else {
        eprintln!("note: features are not all -1/+1; skipping exponential cells");
    }

    let mut out = table::writer(cmd.out.as_ref())?;
    out.write_record(["loss", "cut", "ordering", "lambda0", "lambda2"].iter().chain(&FIT_HEADER))?;
    for cell in &cells {
        let mut template = match cell.loss {
            Loss::Logistic => HyperParams::logistic(1.0, 0.0),
            Loss::Exponential => HyperParams::exponential(1.0),
        };
        template.cut = cell.cut.unwrap_or_default();
        template.candidate_limit = cmd.candidate_limit.0;
        let lambda2_grid = match cell.loss {
            Loss::Logistic => cmd.grid.lambda2(Loss::Logistic),
            Loss::Exponential => vec![0.0],
        };
        let spec = PathSpec::new(lambda0_grid.clone(), lambda2_grid, template, cell.ordering)?;
        let path = fit_path(&training.matrix, &spec)?;
        let cut = cell.cut.map(|c| c.to_string()).unwrap_or_else(|| "none".into());
        for point in path.points {
            let mut row = vec![
                cell.loss.to_string(),
                cut.clone(),
                cell.ordering.to_string(),
                num(point.lambda0),
                num(point.lambda2),
            ];
            match point.result {
                Ok(r) => {
                    row.extend(fit_columns(&r, &training.matrix));
                    row.push(String::new());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 6));
                    row.push(core_message(&e));
                }
            }
            out.write_record(&row)?;
        }
    }
    table::finish(out)?;
    Ok(())
}

fn truth_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into());
    out.with_file_name(format!("{stem}.truth.csv"))
}

fn cmd_synth(cmd: &SynthCmd) -> Result<(), CliError> {
    let spec = SynthSpec { n: cmd.n, p: cmd.p, k: cmd.k, rho: cmd.rho, seed: cmd.seed };
    let (data, truth) = gen_classification(&spec)?;

    let mut out = table::writer(Some(&cmd.out))?;
    out.write_record(data.feature_names().iter().map(String::as_str).chain([table::LABEL]))?;
    for i in 0..data.n() {
        let mut row: Vec<String> = data.row(i).into_iter().map(num).collect();
        row.push(if data.labels()[i] > 0.0 { "1" } else { "0" }.into());
        out.write_record(&row)?;
    }
    table::finish(out)?;

    let truth_file = cmd.truth.clone().unwrap_or_else(|| truth_path(&cmd.out));
    let mut sidecar = table::writer(Some(&truth_file))?;
    sidecar.write_record(["index", "feature"])?;
    for j in truth {
        sidecar.write_record([j.to_string(), data.feature_names()[j].clone()])?;
    }
    table::finish(sidecar)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(c) => cmd_fit(c),
        Command::Predict(c) => cmd_predict(c),
        Command::Path(c) => cmd_path(c),
        Command::Bench(c) => cmd_bench(c),
        Command::Synth(c) => cmd_synth(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) | Err(CliError::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
