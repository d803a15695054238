use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ratnet::factor::{factor_binary_form, factor_multilinear, FactorOptions, FactorReport};
use ratnet::geometry::{self, CensusOptions};
use ratnet::network::{eval_network, forward_binary, forward_recursive, TupleJson, WeightsJson};
use ratnet::polyalg::{JsonScalar, PolyJson};
use ratnet::reconstruct::{membership_binary_multioutput, reconstruct_binary, reconstruct_shallow, ReconstructOptions};
use ratnet::train::{run_experiment, TrainConfig};
use ratnet::{Architecture, Complex, HomPoly, PrimeField, RandomScalar, RationalTuple, Real, Weights};

#[derive(Parser)]
#[command(name = "ratnet", version, about = "Algebra of networks with the reciprocal activation 1/x")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Degrees of numerators and denominator, parameter count, ambient and expected dimension.
    Degrees(ArchArg),
    /// Coefficients (P_1, …, P_k, Q) of a network.
    Forward(ForwardArgs),
    /// Evaluate a network at a point.
    Eval(EvalArgs),
    /// Factor a homogeneous polynomial into linear forms.
    Factor(FactorArgs),
    /// Recover weights from a tuple (shallow or binary single-output).
    Reconstruct(TupleArgs),
    /// Decide whether a tuple lies in the model of an architecture.
    Membership(MembershipArgs),
    /// Dimension of the neurovariety by a finite-field Jacobian rank.
    Dim(DimArgs),
    /// Jacobian ranks of every architecture within bounds, as CSV.
    Census(CensusArgs),
    /// The polynomial H(x, z) of a shallow network.
    Hpoly(WeightsArg),
    /// Train (2, 2, 1) networks on 1/(x+y) + 1/(x-y).
    Train(TrainArgs),
}

#[derive(Args)]
struct ArchArg {
    /// Widths, e.g. 3,3,3,3
    #[arg(long)]
    arch: Architecture,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
    Gfp,
}

#[derive(Args)]
struct WeightsSource {
    /// Weights JSON file; otherwise random weights for --arch.
    #[arg(long, conflicts_with = "arch")]
    weights: Option<PathBuf>,
    #[arg(long, required_unless_present = "weights")]
    arch: Option<Architecture>,
    #[arg(long, value_enum, default_value = "real")]
    field: FieldArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = ratnet::field::DEFAULT_PRIME)]
    prime: u64,
}

#[derive(Args)]
struct ForwardArgs {
    #[command(flatten)]
    src: WeightsSource,
    /// Use the closed form for all-2 hidden layers.
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    src: WeightsSource,
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Vec<f64>,
}

#[derive(Args)]
struct FactorArgs {
    /// Polynomial JSON file.
    #[arg(long)]
    poly: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the binary-form root method (two variables only).
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct TupleArgs {
    /// Tuple JSON file: {"numerators": [...], "denominator": {...}}.
    #[arg(long)]
    tuple: PathBuf,
    #[arg(long)]
    arch: Architecture,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Require real weights.
    #[arg(long)]
    real: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Reconstruction (or the resultant screen for binary multi-output).
    Reconstruct,
    /// Rank of the moment matrix (one hidden layer).
    Rank,
}

#[derive(Args)]
struct MembershipArgs {
    #[command(flatten)]
    tuple: TupleArgs,
    #[arg(long, value_enum, default_value = "reconstruct")]
    method: Method,
}

#[derive(Args)]
struct DimArgs {
    #[arg(long)]
    arch: Architecture,
    #[arg(long, default_value_t = ratnet::field::DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long, default_value_t = 30)]
    max_params: usize,
    #[arg(long, default_value_t = 5)]
    max_layers: usize,
    #[arg(long, default_value_t = 9)]
    max_width: usize,
    /// Per-architecture timeout in seconds.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    #[arg(long, default_value_t = ratnet::field::DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WeightsArg {
    #[arg(long)]
    weights: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 100)]
    inits: usize,
    #[arg(long, default_value_t = 20_000)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    exclusion_radius: f64,
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Negative verdicts exit with 2, errors with 1.
enum Outcome {
    Success,
    Negative,
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
        None => Ok(f()),
    }
}

fn load_weights<F: JsonScalar + RandomScalar>(src: &WeightsSource, field: F) -> Result<Weights<F>> {
    match (&src.weights, &src.arch) {
        (Some(path), _) => Ok(Weights::from_json(field, &read_json::<WeightsJson>(path)?)?),
        (None, Some(arch)) => Ok(Weights::random(field, arch, &mut ChaCha8Rng::seed_from_u64(src.seed))),
        (None, None) => bail!("either --weights or --arch is required"),
    }
}

/// The field named in a weights file wins over `--field`.
fn resolve_field(src: &WeightsSource) -> Result<(FieldArg, u64)> {
    if let Some(path) = &src.weights {
        let j: WeightsJson = read_json(path)?;
        let f = match j.field.as_str() {
            "real" => FieldArg::Real,
            "complex" => FieldArg::Complex,
            "gfp" => FieldArg::Gfp,
            other => bail!("unknown field {other:?}"),
        };
        return Ok((f, j.p.unwrap_or(src.prime)));
    }
    Ok((src.field, src.prime))
}

#[derive(Serialize)]
struct ForwardOut {
    weights: WeightsJson,
    tuple: TupleJson,
}

fn forward_with<F: JsonScalar + RandomScalar>(args: &ForwardArgs, field: F) -> Result<()> {
    let w = load_weights(&args.src, field)?;
    let t = if args.binary { forward_binary(&w)? } else { forward_recursive(&w)? };
    print_json(&ForwardOut { weights: w.to_json(), tuple: t.to_json() })
}

fn forward(args: &ForwardArgs) -> Result<Outcome> {
    match resolve_field(&args.src)? {
        (FieldArg::Real, _) => forward_with(args, Real::default())?,
        (FieldArg::Complex, _) => forward_with(args, Complex::default())?,
        (FieldArg::Gfp, p) => forward_with(args, PrimeField::new(p)?)?,
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct EvalOut {
    output: Vec<[f64; 2]>,
}

fn eval(args: &EvalArgs) -> Result<Outcome> {
    let (field, _) = resolve_field(&args.src)?;
    let output: Vec<Complex64> = match field {
        FieldArg::Real => eval_network(&load_weights(&args.src, Real::default())?, &args.point)?
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
        FieldArg::Complex => {
            let x: Vec<Complex64> = args.point.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            eval_network(&load_weights(&args.src, Complex::default())?, &x)?
        }
        FieldArg::Gfp => bail!("eval works over real or complex weights"),
    };
    print_json(&EvalOut { output: output.iter().map(|c| [c.re, c.im]).collect() })?;
    Ok(Outcome::Success)
}

fn factor(args: &FactorArgs) -> Result<Outcome> {
    let q = HomPoly::from_json(Complex::default(), &read_json::<PolyJson>(&args.poly)?)?;
    let mut opts = FactorOptions { seed: args.seed, ..FactorOptions::default() };
    if let Some(t) = args.tol {
        opts.tol = t;
    }
    let report = if args.binary {
        match factor_binary_form(&q, opts.root_tol) {
            Ok(fz) => FactorReport {
                decomposable: true,
                all_real: fz.is_real(opts.real_tol),
                factorization: Some(fz),
                failure_reason: None,
            },
            Err(e) => return Err(e.into()),
        }
    } else {
        factor_multilinear(&q, &opts)
    };
    print_json(&report.to_json())?;
    Ok(if report.decomposable { Outcome::Success } else { Outcome::Negative })
}

/// Accepts a bare tuple or the output of `forward`.
fn load_tuple(path: &Path) -> Result<RationalTuple<Complex>> {
    let mut v: serde_json::Value = read_json(path)?;
    if let Some(inner) = v.get_mut("tuple") {
        v = inner.take();
    }
    let j: TupleJson = serde_json::from_value(v).with_context(|| format!("parsing {}", path.display()))?;
    Ok(RationalTuple::from_json(Complex::default(), &j)?)
}

fn reconstruct_options(args: &TupleArgs) -> ReconstructOptions {
    let mut opts = ReconstructOptions { real_only: args.real, ..ReconstructOptions::default() };
    opts.factor.seed = args.seed;
    if let Some(t) = args.tol {
        opts.tol = t;
    }
    opts
}

fn reconstruct(args: &TupleArgs) -> Result<Outcome> {
    let t = load_tuple(&args.tuple)?;
    let opts = reconstruct_options(args);
    let verdict = if args.arch.is_shallow() {
        reconstruct_shallow(&t.numerators, &t.denominator, &args.arch, &opts)
    } else if args.arch.is_binary() && args.arch.output_dim() == 1 && t.numerators.len() == 1 {
        reconstruct_binary(&t.numerators[0], &t.denominator, args.arch.layers(), &opts)
    } else {
        bail!("reconstruction covers one hidden layer or (2, …, 2, 1); got {}", args.arch)
    };
    print_json(&verdict.to_json())?;
    Ok(if verdict.in_model { Outcome::Success } else { Outcome::Negative })
}

fn membership(args: &MembershipArgs) -> Result<Outcome> {
    let a = &args.tuple.arch;
    match args.method {
        Method::Rank => {
            let t = load_tuple(&args.tuple.tuple)?;
            let r = geometry::rank_test_membership(&t.numerators, &t.denominator, a, args.tuple.tol.unwrap_or(1e-10))?;
            print_json(&r)?;
            Ok(if r.passed { Outcome::Success } else { Outcome::Negative })
        }
        Method::Reconstruct if a.is_binary() && !a.is_shallow() && a.output_dim() > 1 => {
            let t = load_tuple(&args.tuple.tuple)?;
            let v = membership_binary_multioutput(&t.numerators, &t.denominator, a.layers(), args.tuple.tol.unwrap_or(1e-8));
            print_json(&v.to_json())?;
            Ok(if v.in_model { Outcome::Success } else { Outcome::Negative })
        }
        Method::Reconstruct => reconstruct(&args.tuple),
    }
}

#[derive(Serialize)]
struct DegreesOut {
    arch: Vec<usize>,
    n: usize,
    m: usize,
    param_count: usize,
    ambient_dim: usize,
    expected_dim: usize,
}

fn degrees(a: &Architecture) -> Result<Outcome> {
    let d = a.degrees();
    print_json(&DegreesOut {
        arch: a.dims().to_vec(),
        n: d.numerator,
        m: d.denominator,
        param_count: a.param_count(),
        ambient_dim: a.ambient_dim(),
        expected_dim: geometry::expected_dim(a),
    })?;
    Ok(Outcome::Success)
}

fn census(args: &CensusArgs) -> Result<Outcome> {
    if !(args.timeout >= 0.0) {
        bail!("timeout must be non-negative");
    }
    let opts = CensusOptions {
        max_params: args.max_params,
        max_layers: args.max_layers,
        max_width: args.max_width,
        prime: args.prime,
        seed: args.seed,
        timeout: Duration::from_secs_f64(args.timeout),
        workers: args.workers,
    };
    let rows = geometry::census(&opts)?;
    match &args.out {
        Some(path) => geometry::write_census_csv(&rows, fs::File::create(path)?)?,
        None => geometry::write_census_csv(&rows, io::stdout().lock())?,
    }
    Ok(Outcome::Success)
}

fn hpoly(args: &WeightsArg) -> Result<Outcome> {
    let j: WeightsJson = read_json(&args.weights)?;
    let h = match j.field.as_str() {
        "real" => ratnet::factor::build_h(&Weights::from_json(Real::default(), &j)?)?.to_json(),
        "complex" => ratnet::factor::build_h(&Weights::from_json(Complex::default(), &j)?)?.to_json(),
        "gfp" => {
            let f = PrimeField::new(j.p.unwrap_or(ratnet::field::DEFAULT_PRIME))?;
            ratnet::factor::build_h(&Weights::from_json(f, &j)?)?.to_json()
        }
        other => bail!("unknown field {other:?}"),
    };
    print_json(&h)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct TrainOut {
    inits: usize,
    full_successes: usize,
    partial_successes: usize,
    best_loss: f64,
}

fn train(args: &TrainArgs) -> Result<Outcome> {
    let cfg = TrainConfig {
        lr: args.lr,
        epochs: args.epochs,
        seed: args.seed,
        exclusion_radius: args.exclusion_radius,
        clip: args.clip,
        ..TrainConfig::default()
    };
    let summary = with_workers(args.workers, || run_experiment(&cfg, args.inits, args.out_dir.as_deref()))??;
    print_json(&TrainOut {
        inits: args.inits,
        full_successes: summary.full_successes,
        partial_successes: summary.partial_successes,
        best_loss: summary.runs.iter().map(|r| r.final_loss).fold(f64::INFINITY, f64::min),
    })?;
    Ok(Outcome::Success)
}

fn dim(args: &DimArgs) -> Result<Outcome> {
    print_json(&geometry::jacobian_rank_mod_p(&args.arch, args.seed, args.prime)?)?;
    Ok(Outcome::Success)
}

fn run(cli: Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Degrees(a) => degrees(&a.arch),
        Command::Forward(a) => forward(a),
        Command::Eval(a) => eval(a),
        Command::Factor(a) => factor(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Membership(a) => membership(a),
        Command::Dim(a) => dim(a),
        Command::Census(a) => census(a),
        Command::Hpoly(a) => hpoly(a),
        Command::Train(a) => train(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
