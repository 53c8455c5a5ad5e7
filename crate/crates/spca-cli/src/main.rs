//! `spca`: sparse principal components from the command line.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 on numeric
//! failures. `SPCA_THREADS` caps the worker pool (0 or unset = automatic);
//! results are identical for any thread count.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use spannogram::baselines::brute_force_oracle;
use spannogram::elimination::eliminate_features;
use spannogram::experiments::{
    bound_curve, recovery_experiment, spectrum_report, RecoveryConfig, RecoveryMethod,
};
use spannogram::io::{
    csv_twin_path, read_matrix, write_recovery_csv, write_result, ComponentRecord, MatrixFormat,
    ReadOptions, ResultDocument,
};
use spannogram::solver::{
    multi_component, sparse_pca, Deflation, MatrixInput, NonnegMode, SolveOptions,
};
use spannogram::spannogram::LowRankFactor;
use spannogram::{leading_eigenpair_on_support, top_eigenpairs, Error};

#[derive(Parser)]
#[command(
    name = "spca",
    version,
    about = "k-sparse principal components via exact search on a low-rank approximation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the k-sparse leading principal component of a matrix
    Solve(SolveArgs),
    /// Extract several components, deflating between solves
    Multi(MultiArgs),
    /// Approximation-bound table ε_d for d = 1..dmax
    Bound(BoundArgs),
    /// Exhaustive-search optimum (guarded; small instances only)
    Oracle(OracleArgs),
    /// Spiked-covariance support-recovery experiment
    Spiked(SpikedArgs),
    /// Leading eigenvalues with a power-law fit
    Spectrum(SpectrumArgs),
    /// Report how many features survive safe elimination
    Eliminate(EliminateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input matrix path
    #[arg(long)]
    input: PathBuf,
    /// Input format: coo, dense-csv, or docword
    #[arg(long)]
    format: String,
    /// Keep docword counts instead of binarizing occurrences to 0/1
    #[arg(long)]
    keep_counts: bool,
    /// Relative symmetry tolerance for dense-csv input
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl InputArgs {
    fn read(&self) -> Result<MatrixInput, Error> {
        let format = MatrixFormat::from_str(&self.format)?;
        let opts = ReadOptions { keep_counts: self.keep_counts, symmetry_tol: self.tol };
        read_matrix(&self.input, format, &opts)
    }
}

fn parse_nonneg(p: &str) -> Result<NonnegMode, Error> {
    match p {
        "auto" => Ok(NonnegMode::Auto),
        "0" => Ok(NonnegMode::Mixed),
        "1" => Ok(NonnegMode::Nonnegative),
        other => Err(Error::InvalidArgument(format!("--p must be auto, 0, or 1 (got {other})"))),
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Sparsity: number of nonzero loadings
    #[arg(long)]
    k: usize,
    /// Approximation rank
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Nonnegativity flag: auto, 0 (mixed), or 1 (nonnegative)
    #[arg(long, default_value = "auto")]
    p: String,
    /// Seed for the degeneracy-breaking perturbation
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the safe feature-elimination step
    #[arg(long)]
    no_elimination: bool,
    /// Result file (text; a CSV twin is written alongside)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MultiArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Number of components to extract
    #[arg(long = "L", alias = "l", value_name = "L")]
    l: usize,
    /// Deflation between components: projection or strip
    #[arg(long, default_value = "projection")]
    deflation: String,
    #[arg(long, default_value = "auto")]
    p: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_elimination: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    /// Largest rank to tabulate
    #[arg(long, default_value_t = 5)]
    dmax: usize,
    /// CSV output path
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SpikedArgs {
    /// Dimension of the spiked covariance
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Samples per trial
    #[arg(long, default_value_t = 50)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Approximation rank of the spannogram method
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap for the truncated power method
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// CSV output path (one row per method)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of leading eigenvalues to report
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Power-law fit range (1-based, inclusive)
    #[arg(long, default_value_t = 1)]
    fit_from: usize,
    #[arg(long)]
    fit_to: Option<usize>,
    /// CSV output path
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EliminateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let threads = std::env::var("SPCA_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    spannogram::configure_threads(threads);

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 1 for usage/input problems, 2 for numeric failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } | Error::DegenerateIntersection { .. } => 2,
        _ => 1,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Multi(args) => cmd_multi(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Spiked(args) => cmd_spiked(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Eliminate(args) => cmd_eliminate(args),
    }
}

fn format_support(support: &[usize]) -> String {
    support.iter().map(|&i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let input = args.input.read()?;
    let view = input.view();
    let opts = SolveOptions {
        nonneg: parse_nonneg(&args.p)?,
        elimination: !args.no_elimination,
        seed: args.seed,
    };
    let pc = sparse_pca(&view, args.k, args.d, &opts)?;
    let ratio = if pc.bound.lambda_1 > 0.0 {
        (pc.value / pc.bound.lambda_1).clamp(0.0, 1.0)
    } else {
        0.0
    };
    println!("sparse PC  k={} d={} (rank used {})", args.k, args.d, pc.rank_used);
    println!("value                    {}", pc.value);
    println!("support (1-based)        {}", format_support(&pc.support));
    println!("epsilon_d                {}", pc.bound.epsilon_d);
    println!("guaranteed ratio ≥       {}", pc.bound.ratio_lower);
    println!("explained variance ratio {ratio}");
    println!("features retained        {}/{}", pc.retained_features, view.dim());
    println!("candidates re-scored     {}", pc.candidates);
    if let Some(path) = args.output {
        let doc = ResultDocument {
            k: args.k,
            explained_variance_ratio: Some(ratio),
            components: vec![ComponentRecord::from_component(&pc)],
        };
        write_result(&doc, &path)?;
        println!("wrote {} and {}", path.display(), csv_twin_path(&path).display());
    }
    Ok(())
}

fn cmd_multi(args: MultiArgs) -> Result<(), Error> {
    let input = args.input.read()?;
    let deflation = match args.deflation.as_str() {
        "projection" => Deflation::Projection,
        "strip" => Deflation::Strip,
        other => {
            return Err(Error::InvalidArgument(format!(
                "--deflation must be projection or strip (got {other})"
            )))
        }
    };
    let opts = SolveOptions {
        nonneg: parse_nonneg(&args.p)?,
        elimination: !args.no_elimination,
        seed: args.seed,
    };
    let result = multi_component(&input, args.k, args.l, args.d, deflation, &opts)?;
    for (i, pc) in result.components.iter().enumerate() {
        println!(
            "component {}  value {}  support {}",
            i + 1,
            result.original_values[i],
            format_support(&pc.support)
        );
    }
    println!("explained variance ratio {}", result.explained_variance_ratio);
    if let Some(path) = args.output {
        let doc = ResultDocument {
            k: args.k,
            explained_variance_ratio: Some(result.explained_variance_ratio),
            components: result.components.iter().map(ComponentRecord::from_component).collect(),
        };
        write_result(&doc, &path)?;
        println!("wrote {} and {}", path.display(), csv_twin_path(&path).display());
    }
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<(), Error> {
    let input = args.input.read()?;
    let view = input.view();
    let curve = bound_curve(&view, args.k, args.dmax)?;
    println!("d,lambda_d_plus_1,term_spectral,term_diagonal,epsilon_d,ratio_lower");
    let mut csv = String::from("d,lambda_d_plus_1,term_spectral,term_diagonal,epsilon_d,ratio_lower\n");
    for b in &curve {
        let line = format!(
            "{},{},{},{},{},{}",
            b.d, b.lambda_d_plus_1, b.term_spectral, b.term_diagonal, b.epsilon_d, b.ratio_lower
        );
        println!("{line}");
        csv.push_str(&line);
        csv.push('\n');
    }
    if let Some(path) = args.output {
        std::fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Error> {
    let input = args.input.read()?;
    let view = input.view();
    let (support, value) = brute_force_oracle(&view, args.k)?;
    let (_, loadings) = leading_eigenpair_on_support(&view, &support)?;
    println!("exhaustive optimum  k={}", args.k);
    println!("value             {value}");
    println!("support (1-based) {}", format_support(&support));
    if let Some(path) = args.output {
        let doc = ResultDocument {
            k: args.k,
            explained_variance_ratio: None,
            components: vec![ComponentRecord {
                rank_used: view.dim(),
                support: support.clone(),
                loadings: support.iter().map(|&i| loadings[i]).collect(),
                value,
                epsilon_d: None,
                ratio_lower: None,
            }],
        };
        write_result(&doc, &path)?;
        println!("wrote {} and {}", path.display(), csv_twin_path(&path).display());
    }
    Ok(())
}

fn cmd_spiked(args: SpikedArgs) -> Result<(), Error> {
    let config = RecoveryConfig {
        n: args.n,
        m: args.m,
        k: args.k,
        trials: args.trials,
        seed: args.seed,
        methods: vec![
            RecoveryMethod::Thresholding,
            RecoveryMethod::TruncatedPower,
            RecoveryMethod::Spannogram { d: args.d },
        ],
        tpower_iters: args.max_iters,
    };
    let report = recovery_experiment(&config)?;
    println!("method,n,m,k,trials,successes,p_rec");
    for (i, method) in report.config.methods.iter().enumerate() {
        println!(
            "{},{},{},{},{},{},{}",
            method.label(),
            config.n,
            config.m,
            config.k,
            config.trials,
            report.successes[i],
            report.p_rec(i)
        );
    }
    if let Some(path) = args.output {
        write_recovery_csv(&report, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), Error> {
    let input = args.input.read()?;
    let view = input.view();
    let count = args.count.min(view.dim());
    let fit_to = args.fit_to.unwrap_or(count).min(count);
    let report = spectrum_report(&view, count, args.fit_from, fit_to)?;
    println!(
        "power-law fit over [{}, {}]: C = {}, alpha = {}, r2 = {}",
        args.fit_from, fit_to, report.fit.c, report.fit.alpha, report.fit.r2
    );
    if report.fit.excluded > 0 {
        println!("warning: {} nonpositive eigenvalues excluded from the fit", report.fit.excluded);
    }
    println!("lambda_1_diag = {}", report.lambda_1_diag);
    let mut csv = format!(
        "# C {}\n# alpha {}\n# r2 {}\n# lambda_1_diag {}\ni,lambda\n",
        report.fit.c, report.fit.alpha, report.fit.r2, report.lambda_1_diag
    );
    for (i, v) in report.eigenvalues.iter().enumerate() {
        println!("{:4}  {v}", i + 1);
        csv.push_str(&format!("{},{v}\n", i + 1));
    }
    if let Some(path) = args.output {
        std::fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_eliminate(args: EliminateArgs) -> Result<(), Error> {
    let input = args.input.read()?;
    let view = input.view();
    let pairs = top_eigenpairs(&view, args.d.min(view.dim()))?;
    let nonneg = view.is_entrywise_nonnegative();
    let factor = LowRankFactor::from_eigenpairs(&pairs, nonneg)?;
    let result = eliminate_features(&factor, args.k)?;
    println!("retained {} of {} features", result.retained.len(), view.dim());
    Ok(())
}
