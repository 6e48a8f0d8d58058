//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 when a checked
//! inequality fails. Reports embed the run configuration and the crate
//! version; the output path and format are not part of the configuration.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::constructions::{
    block_partition, main_theorem_sequence, main_theorem_weights, BlockModel, ExponentPair, NormFamily, Perturbation,
    TransformBound,
};
use crate::cotype::{
    cotype_ratio, cotype_ratio_sampled, holder_rows, necessary_condition_check, sup_functional_bound, Consistency,
    HolderSummary,
};
use crate::error::{Error, Result};
use crate::plank::{
    coverage_mc, counterexample_demo, planks_from_sequence, witness_margins, witness_search, WitnessConfig,
};
use crate::report::{emit_report, fmt_float, write_output, CsvTable, Format, Report};
use crate::seed;
use crate::space::{Coords, Functional, SpaceModel, Vector};
use crate::summability::{p_limit_trend, validate_weights, ScalarSequence, TrendReport, ValidationReport, WeightMatrix};

/// Largest number of dense coordinates a command materialises.
const MAX_DENSE_ENTRIES: usize = 50_000_000;

#[derive(Debug, Parser)]
#[command(name = "plankforge", version, about = "Weighted weak convergence, plank coverings and cotype experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a weight-matrix file for nonnegativity, row sums and column decay.
    Validate(ValidateArgs),
    /// Build weights and the matching sequence for a norm family.
    Construct(ConstructArgs),
    /// Weighted transforms of a scalar sequence or of |f(x_m)|^q.
    Transform(TransformArgs),
    /// Search for a point separating a sequence from its planks.
    Witness(WitnessArgs),
    /// Monte Carlo coverage of a ball by the planks of a sequence.
    Coverage(CoverageArgs),
    /// Cylinder covering demo for three-component points.
    Counterexample(CounterexampleArgs),
    /// Exhaustive or sampled sign-pattern cotype ratio.
    Cotype(CotypeArgs),
    /// Compare the divergence verdict for sum a_n^-q with partial sums.
    Necessary(NecessaryArgs),
    /// Row-by-row Hölder split for a weight matrix and sequence norms.
    Holder(HolderArgs),
    /// Check the weighted transform bound on seeded functionals.
    Bound(BoundArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Main,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long, default_value_t = 1e-12)]
    pub row_tol: f64,
    #[arg(long, default_value_t = 0.5)]
    pub column_threshold: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BlockArgs {
    /// Dual exponent of the block weights.
    #[arg(long, default_value_t = 2.0)]
    pub p_prime: f64,
    #[arg(long, default_value_t = 5)]
    pub blocks: usize,
    #[arg(long, default_value_t = 1.0)]
    pub growth: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub cap: usize,
    /// Use a seeded perturbation of the block basis.
    #[arg(long)]
    pub perturb: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long, value_enum, default_value = "main")]
    pub mode: Mode,
    /// Horizon for main mode.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub space: Option<String>,
    /// Apply a seeded rotation to the main sequence.
    #[arg(long)]
    pub rotate: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub column_threshold: f64,
    #[command(flatten)]
    pub block: BlockArgs,
    /// Output directory for weights.txt, sequence.csv and the report.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    #[serde(skip)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransformArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Scalar sequence file (comma or whitespace separated).
    #[arg(long, conflicts_with = "vectors")]
    pub sequence: Option<PathBuf>,
    /// Vector file for the |f(x_m)|^q pipeline.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Functional file (first row used); seeded Gaussian when absent.
    #[arg(long, requires = "vectors")]
    pub functional: Option<PathBuf>,
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub p_prime: f64,
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SequenceSource {
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long, conflicts_with = "vectors")]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub rotate: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub source: SequenceSource,
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Search-ball radius (defaults to R + 0.1).
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub target: f64,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub source: SequenceSource,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long, default_value = "power:1:0.5")]
    pub family: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Number of probes.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CotypeArgs {
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Sample this many patterns instead of enumerating (lower bound).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NecessaryArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = 2.0)]
    pub p_prime: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HolderArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Vector file supplying the norms.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// Family supplying the norms a_n.
    #[arg(long, conflicts_with = "vectors")]
    pub family: Option<String>,
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long, value_enum, default_value = "main")]
    pub mode: Mode,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub rotate: bool,
    /// Number of seeded functionals.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub block: BlockArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 1;
    }
    match execute(&cli.command) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_invariant_violation() { 2 } else { 1 }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("PLANKFORGE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("PLANKFORGE_THREADS must be a nonnegative integer, got `{raw}`")))?;
    if threads > 0 {
        // A pool that already exists keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

/// Runs one command; `Ok(false)` means a checked inequality failed after the
/// report was written.
pub fn execute(command: &Command) -> Result<bool> {
    match command {
        Command::Validate(a) => validate(a),
        Command::Construct(a) => construct(a),
        Command::Transform(a) => transform(a),
        Command::Witness(a) => witness(a),
        Command::Coverage(a) => coverage(a),
        Command::Counterexample(a) => counterexample(a),
        Command::Cotype(a) => cotype(a),
        Command::Necessary(a) => necessary(a),
        Command::Holder(a) => holder(a),
        Command::Bound(a) => bound(a),
    }
}

fn config_value<T: Serialize>(args: &T) -> Result<Value> {
    serde_json::to_value(args).map_err(|e| Error::InvalidInput(format!("config serialisation: {e}")))
}

fn emit<A: Serialize, R: Report>(command: &str, args: &A, report: &R, output: &OutputArgs) -> Result<()> {
    emit_report(command, config_value(args)?, report, output.format.into(), output.out.as_deref())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_space(desc: &Option<String>) -> Result<Option<SpaceModel>> {
    desc.as_deref().map(str::parse).transpose()
}

fn family_arg(desc: &str) -> Result<NormFamily> {
    NormFamily::parse(desc).map_err(|e| Error::InvalidInput(format!("--family: {e}")))
}

fn check_dense(rows: usize, dimension: usize) -> Result<()> {
    if rows.saturating_mul(dimension) > MAX_DENSE_ENTRIES {
        return Err(Error::Resource(format!(
            "{rows} dense vectors of dimension {dimension} exceed {MAX_DENSE_ENTRIES} stored coordinates"
        )));
    }
    Ok(())
}

/// Parses a vector file: one vector per line, comma separated, with an
/// optional `complex=true|false` header; complex rows alternate re,im.
pub fn parse_vectors(text: &str, space: Option<SpaceModel>) -> Result<(Option<SpaceModel>, Vec<Vector>)> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let mut complex = space.is_some_and(|s| s.is_complex());
    if let Some((_, header)) = lines.peek() {
        if let Some(flag) = header.strip_prefix("complex=") {
            complex = match flag.trim() {
                "true" => true,
                "false" => false,
                other => return Err(Error::Parse(format!("vector header: complex={other}"))),
            };
            lines.next();
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines {
        let row = line
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("vector file line {}: `{}` is not a number", i + 1, c.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if complex && row.len() % 2 != 0 {
            return Err(Error::Parse(format!("vector file line {}: complex rows need re,im pairs", i + 1)));
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!("vector file line {}: ragged row", i + 1)));
            }
        }
        rows.push(row);
    }
    let dimension = rows.first().map(|r| if complex { r.len() / 2 } else { r.len() });
    let space = match (space, dimension) {
        (Some(s), Some(d)) => {
            if s.dimension() != d || s.is_complex() != complex {
                return Err(Error::SpaceMismatch(format!(
                    "vector file has {} rows of dimension {d}, model is {s}",
                    if complex { "complex" } else { "real" }
                )));
            }
            Some(s)
        }
        (Some(s), None) => Some(s),
        (None, Some(d)) if complex => Some(SpaceModel::euclidean_complex(d)?),
        (None, Some(d)) => Some(SpaceModel::euclidean_real(d)?),
        (None, None) => None,
    };
    let vectors = match space {
        None => Vec::new(),
        Some(s) => rows
            .into_iter()
            .map(|r| {
                if complex {
                    let coords = r.chunks(2).map(|c| num_complex::Complex64::new(c[0], c[1])).collect();
                    Vector::from_complex(s, coords)
                } else {
                    Vector::from_real(s, r)
                }
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok((space, vectors))
}

/// Inverse of [`parse_vectors`].
pub fn format_vectors(xs: &[Vector]) -> String {
    let complex = xs.first().is_some_and(|x| x.space().is_complex());
    let mut out = format!("complex={complex}\n");
    for x in xs {
        let cells: Vec<String> = match x.coords() {
            Coords::Real(c) => c.iter().map(|v| fmt_float(*v)).collect(),
            Coords::Complex(c) => c.iter().flat_map(|z| [fmt_float(z.re), fmt_float(z.im)]).collect(),
        };
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn read_vectors(path: &Path, space: Option<SpaceModel>) -> Result<(Option<SpaceModel>, Vec<Vector>)> {
    parse_vectors(&read_text(path)?, space)
}

fn read_weights(path: &Path) -> Result<WeightMatrix> {
    WeightMatrix::parse(&read_text(path)?)
}

/// Sequence from a vector file, or `x_n = a_n e_n` (optionally rotated) for
/// a family in `euclidean-real(N)` or the given Euclidean model.
fn load_sequence(source: &SequenceSource, seed_value: u64) -> Result<(Option<SpaceModel>, Vec<Vector>)> {
    let space = parse_space(&source.space)?;
    if let Some(path) = &source.vectors {
        return read_vectors(path, space);
    }
    let Some(desc) = &source.family else {
        return match space {
            Some(s) => Ok((Some(s), Vec::new())),
            None => Err(Error::InvalidInput("give --vectors, --family with --n, or --space".into())),
        };
    };
    let family = family_arg(desc)?;
    let n = source.n.ok_or_else(|| Error::InvalidInput("--n is required with --family".into()))?;
    let space = match space {
        Some(s) => s,
        None => SpaceModel::euclidean_real(n)?,
    };
    check_dense(n, space.dimension())?;
    let rotation = if source.rotate { Some(space.random_rotation(seed_value)?) } else { None };
    let xs = main_theorem_sequence(space, &family, n, rotation.as_ref())?;
    Ok((Some(space), xs))
}

impl Report for ValidationReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["row", "row_sum_error"]);
        for (i, e) in self.row_sum_errors.iter().enumerate() {
            t.push(vec![(i + 1).to_string(), fmt_float(*e)]);
        }
        t
    }
}

impl Report for TrendReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["row", "value"]);
        for (i, v) in self.values.iter().enumerate() {
            t.push(vec![(i + 1).to_string(), fmt_float(*v)]);
        }
        t
    }
}

impl Report for HolderSummary {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["rows", "failures", "min_product", "argmin_row", "pass"]);
        t.push(vec![
            self.rows.to_string(),
            self.failures.len().to_string(),
            fmt_float(self.min_product),
            self.argmin_row.to_string(),
            self.pass.to_string(),
        ]);
        t
    }
}

fn validate(a: &ValidateArgs) -> Result<bool> {
    let w = read_weights(&a.weights)?;
    let report = validate_weights(&w, a.row_tol, a.column_threshold)?;
    emit("validate", a, &report, &a.output)?;
    Ok(report.pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructReport {
    pub mode: Mode,
    pub family: String,
    pub space: String,
    pub horizon: usize,
    pub rows: usize,
    pub weights_file: String,
    pub sequence_file: String,
    pub validation_pass: bool,
    pub max_row_sum_error: f64,
    pub max_late_column_weight: f64,
    pub block_boundaries: Option<Vec<usize>>,
    pub block_sums: Option<Vec<f64>>,
    pub distortion: Option<f64>,
}

impl Report for ConstructReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["mode", "family", "space", "horizon", "rows", "validation_pass", "max_row_sum_error"]);
        t.push(vec![
            format!("{:?}", self.mode).to_lowercase(),
            self.family.clone(),
            self.space.clone(),
            self.horizon.to_string(),
            self.rows.to_string(),
            self.validation_pass.to_string(),
            fmt_float(self.max_row_sum_error),
        ]);
        t
    }
}

fn block_model(family: &NormFamily, block: &BlockArgs, space: &Option<String>, seed_value: u64) -> Result<BlockModel> {
    let partition = block_partition(family, block.p_prime, block.blocks, block.growth, block.cap)?;
    let horizon = partition.horizon();
    let space = match parse_space(space)? {
        Some(s) => s,
        None => SpaceModel::lp(ExponentPair::from_p_prime(block.p_prime)?.p(), horizon)?,
    };
    check_dense(horizon, space.dimension())?;
    let perturbation = block.perturb.then(|| Perturbation::new(seed_value));
    BlockModel::new(space, family, partition, perturbation)
}

struct MainModel {
    space: SpaceModel,
    weights: WeightMatrix,
    xs: Vec<Vector>,
}

fn main_model(family: &NormFamily, n: Option<usize>, space: &Option<String>, rotate: bool, seed_value: u64) -> Result<MainModel> {
    let n = n.ok_or_else(|| Error::InvalidInput("--n is required in main mode".into()))?;
    let space = match parse_space(space)? {
        Some(s) => s,
        None => SpaceModel::euclidean_real(n)?,
    };
    check_dense(n, space.dimension())?;
    let rotation = if rotate { Some(space.random_rotation(seed_value)?) } else { None };
    let xs = main_theorem_sequence(space, family, n, rotation.as_ref())?;
    let weights = main_theorem_weights(family, n)?;
    Ok(MainModel { space, weights, xs })
}

fn construct(a: &ConstructArgs) -> Result<bool> {
    let family = family_arg(&a.family)?;
    let (space, weights, xs, partition, distortion) = match a.mode {
        Mode::Main => {
            let m = main_model(&family, a.n, &a.space, a.rotate, a.seed)?;
            (m.space, m.weights, m.xs, None, None)
        }
        Mode::Block => {
            let m = block_model(&family, &a.block, &a.space, a.seed)?;
            let space = *m.xs[0].space();
            (space, m.weights, m.xs, Some(m.partition), Some(m.basis.distortion))
        }
    };
    let validation = validate_weights(&weights, 1e-12, a.column_threshold)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let weights_file = "weights.txt";
    let sequence_file = "sequence.csv";
    write_output(Some(&a.out.join(weights_file)), &weights.to_text(1e-12))?;
    write_output(Some(&a.out.join(sequence_file)), &format_vectors(&xs))?;
    let report = ConstructReport {
        mode: a.mode,
        family: family.to_string(),
        space: space.to_string(),
        horizon: xs.len(),
        rows: weights.num_rows(),
        weights_file: weights_file.into(),
        sequence_file: sequence_file.into(),
        validation_pass: validation.pass,
        max_row_sum_error: validation.max_row_sum_error,
        max_late_column_weight: validation.max_late_column_weight,
        block_boundaries: partition.as_ref().map(|p| p.boundaries().to_vec()),
        block_sums: partition.as_ref().map(|p| p.sums().to_vec()),
        distortion,
    };
    let format: Format = a.format.into();
    let name = match format {
        Format::Json => "report.json",
        Format::Csv => "report.csv",
    };
    emit_report("construct", config_value(a)?, &report, format, Some(&a.out.join(name)))?;
    Ok(validation.pass)
}

fn transform(a: &TransformArgs) -> Result<bool> {
    let w = read_weights(&a.weights)?;
    let sequence = match (&a.sequence, &a.vectors) {
        (Some(path), _) => ScalarSequence::parse(&read_text(path)?)?,
        (None, Some(path)) => {
            let (space, xs) = read_vectors(path, parse_space(&a.space)?)?;
            let space = space.ok_or_else(|| Error::InvalidInput("--vectors file is empty".into()))?;
            let f = match &a.functional {
                Some(fp) => {
                    let (_, fs) = read_vectors(fp, Some(space))?;
                    fs.into_iter()
                        .next()
                        .ok_or_else(|| Error::InvalidInput("--functional file is empty".into()))?
                }
                None => space.gaussian(seed::derive(a.seed, seed::stream::FUNCTIONAL, 0)),
            };
            crate::constructions::functional_powers(&xs, &Functional::new(f), a.p_prime)?
        }
        (None, None) => return Err(Error::InvalidInput("give --sequence or --vectors".into())),
    };
    let report = p_limit_trend(&w, &sequence, a.threshold)?;
    emit("transform", a, &report, &a.output)?;
    Ok(true)
}

fn witness(a: &WitnessArgs) -> Result<bool> {
    let (_, xs) = load_sequence(&a.source, a.seed)?;
    let config = WitnessConfig {
        target_margin: a.target,
        restarts: a.restarts,
        budget: a.budget,
        seed: a.seed,
        delta: a.delta,
        search_radius: a.radius,
        ..WitnessConfig::default()
    };
    let report = witness_search(&xs, &config)?;
    let recheck = witness_margins(&xs, &report.witness, a.target)?;
    let sound = !report.success || recheck.iter().all(|&m| m > 0.0);
    emit("witness", a, &report, &a.output)?;
    if !sound {
        eprintln!("error: reported witness fails an independent margin re-check");
    }
    Ok(sound)
}

fn coverage(a: &CoverageArgs) -> Result<bool> {
    let (space, xs) = load_sequence(&a.source, a.seed)?;
    let space = space.ok_or_else(|| Error::InvalidInput("--space is required for an empty plank family".into()))?;
    let planks = planks_from_sequence(&xs)?;
    let report = coverage_mc(space, &planks, a.radius, a.samples, a.seed)?;
    emit("coverage", a, &report, &a.output)?;
    Ok(true)
}

fn counterexample(a: &CounterexampleArgs) -> Result<bool> {
    let family = family_arg(&a.family)?;
    let report = counterexample_demo(&family, a.n, a.samples, a.seed)?;
    emit("counterexample", a, &report, &a.output)?;
    Ok(report.all_probes_covered && !report.any_probe_separates)
}

fn cotype(a: &CotypeArgs) -> Result<bool> {
    let (space, xs) = read_vectors(&a.vectors, parse_space(&a.space)?)?;
    let space = space.ok_or_else(|| Error::InvalidInput("--vectors file is empty".into()))?;
    let report = match a.samples {
        Some(s) => cotype_ratio_sampled(&space, &xs, a.p, s, a.seed)?,
        None => cotype_ratio(&space, &xs, a.p)?,
    };
    emit("cotype", a, &report, &a.output)?;
    Ok(true)
}

fn necessary(a: &NecessaryArgs) -> Result<bool> {
    let family = family_arg(&a.family)?;
    let pair = ExponentPair::from_p_prime(a.p_prime)?;
    let report = necessary_condition_check(&family, pair, a.n)?;
    emit("necessary", a, &report, &a.output)?;
    Ok(report.consistency != Consistency::Inconsistent)
}

fn holder(a: &HolderArgs) -> Result<bool> {
    let w = read_weights(&a.weights)?;
    let horizon = w.rows().filter_map(|r| r.max_column()).max().unwrap_or(0);
    let norms: Vec<f64> = match (&a.vectors, &a.family) {
        (Some(path), _) => read_vectors(path, parse_space(&a.space)?)?.1.iter().map(|x| x.norm()).collect(),
        (None, Some(desc)) => family_arg(desc)?.values(horizon)?,
        (None, None) => return Err(Error::InvalidInput("give --vectors or --family".into())),
    };
    let pair = ExponentPair::from_p(a.p)?;
    let report = holder_rows(&w, &norms, pair)?;
    emit("holder", a, &report, &a.output)?;
    Ok(report.pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub mode: Mode,
    pub family: String,
    pub space: String,
    pub rows: usize,
    pub functionals: usize,
    pub constant: f64,
    /// Largest `lhs · S / ‖f‖^q` seen.
    pub max_implied_constant: f64,
    pub worst_row: usize,
    /// Sample maximum of `Σ_m p_{n,m}|f(x_m)|^q / ‖f‖^q` over rows and functionals.
    pub empirical_constant: f64,
    pub violations: usize,
    pub pass: bool,
}

impl Report for BoundReport {
    fn csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["rows", "functionals", "constant", "max_implied_constant", "worst_row", "empirical_constant", "violations", "pass"]);
        t.push(vec![
            self.rows.to_string(),
            self.functionals.to_string(),
            fmt_float(self.constant),
            fmt_float(self.max_implied_constant),
            self.worst_row.to_string(),
            fmt_float(self.empirical_constant),
            self.violations.to_string(),
            self.pass.to_string(),
        ]);
        t
    }
}

fn tally(results: Vec<Result<TransformBound>>) -> Result<(usize, f64, usize, f64)> {
    let mut violations = 0;
    let mut worst = (f64::NEG_INFINITY, 0usize);
    let mut constant = 1.0;
    for r in results {
        match r {
            Ok(b) => {
                constant = b.constant;
                if b.implied_constant > worst.0 {
                    worst = (b.implied_constant, b.row);
                }
            }
            Err(Error::InvariantViolation(msg)) => {
                eprintln!("violation: {msg}");
                violations += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((violations, worst.0, worst.1, constant))
}

fn bound(a: &BoundArgs) -> Result<bool> {
    use rayon::prelude::*;
    let family = family_arg(&a.family)?;
    if a.samples == 0 {
        return Err(Error::InvalidInput("--samples must be positive".into()));
    }
    let (space, weights, xs, exponent, results): (SpaceModel, WeightMatrix, Vec<Vector>, f64, Vec<_>) = match a.mode {
        Mode::Main => {
            let m = main_model(&family, a.n, &a.space, a.rotate, a.seed)?;
            let rows = m.weights.num_rows();
            let results = (0..a.samples)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let f = Functional::new(m.space.gaussian(seed::derive(a.seed, seed::stream::FUNCTIONAL, i as u64)));
                    let powers = crate::constructions::functional_powers(&m.xs, &f, 2.0);
                    let rows_out: Vec<Result<TransformBound>> = match powers {
                        Ok(b) => (1..=rows)
                            .map(|n| crate::constructions::main_transform_bound_from_powers(&m.weights, &b, &family, &f, n))
                            .collect(),
                        Err(e) => vec![Err(e)],
                    };
                    rows_out
                })
                .collect();
            (m.space, m.weights, m.xs, 2.0, results)
        }
        Mode::Block => {
            let m = block_model(&family, &a.block, &a.space, a.seed)?;
            let space = *m.xs[0].space();
            let rows = m.weights.num_rows();
            let results = (0..a.samples)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let f = Functional::new(space.gaussian(seed::derive(a.seed, seed::stream::FUNCTIONAL, i as u64)));
                    (1..=rows).map(|k| m.wpp_transform_bound(&f, k)).collect::<Vec<_>>()
                })
                .collect();
            (space, m.weights, m.xs, a.block.p_prime, results)
        }
    };
    let checks = results.len();
    let (violations, max_implied_constant, worst_row, constant) = tally(results)?;
    let functionals: Vec<Functional> = (0..a.samples)
        .map(|i| Functional::new(space.gaussian(seed::derive(a.seed, seed::stream::FUNCTIONAL, i as u64))))
        .collect();
    let empirical = sup_functional_bound(&weights, &xs, &functionals, exponent)?;
    let report = BoundReport {
        mode: a.mode,
        family: family.to_string(),
        space: space.to_string(),
        rows: checks / a.samples,
        functionals: a.samples,
        constant,
        max_implied_constant,
        worst_row,
        empirical_constant: empirical.value,
        violations,
        pass: violations == 0,
    };
    emit("bound", a, &report, &a.output)?;
    Ok(report.pass)
}
