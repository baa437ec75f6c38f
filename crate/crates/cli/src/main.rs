//! `arbias`: order-1/n bias and variance coefficients for AR estimators,
//! with a Monte Carlo cross-check.
//!
//! Subcommands: `bias` (derive coefficients for a shipped estimator),
//! `expr` (expand a user-supplied expression over `S[m,k,i]` atoms),
//! `mc` (simulate and compare against the predictions), `table` (bias
//! coefficients over a parameter grid with the Burg-vs-LS deviation).
//!
//! Exit codes: 0 success, 2 usage or expression-parse error, 3 domain error
//! (inadmissible model, singular expansion point, degenerate input),
//! 4 convergence failure of a truncated series sum.

mod output;

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use arbias_core::{
    estimator_def, mc_bias, ArModel, Error, EstimatorExpr, EstimatorKind, McConfig, MeanMode,
    MomentContext,
};
use output::{Cell, Table};

#[derive(Parser)]
#[command(
    name = "arbias",
    version,
    about = "Asymptotic bias derivation for AR estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to a file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mean {
    Known,
    Unknown,
}

impl From<Mean> for MeanMode {
    fn from(m: Mean) -> Self {
        match m {
            Mean::Known => MeanMode::KnownZero,
            Mean::Unknown => MeanMode::Unknown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Est {
    Burg,
    Ls,
    Yw,
}

impl From<Est> for EstimatorKind {
    fn from(e: Est) -> Self {
        match e {
            Est::Burg => EstimatorKind::Burg,
            Est::Ls => EstimatorKind::LeastSquares,
            Est::Yw => EstimatorKind::YuleWalker,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// AR coefficients: phi1 or phi1,phi2
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    phi: Vec<f64>,
    /// Innovation variance (bias/variance coefficients are invariant to it)
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Mean assumption for the statistics
    #[arg(long, value_enum, default_value_t = Mean::Known)]
    mean: Mean,
    /// Absolute truncation tolerance for infinite sums
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<ArModel, CliError> {
        if self.phi.is_empty() || self.phi.len() > 2 {
            return Err(CliError::Usage(format!(
                "--phi takes one or two comma-separated values, got {}",
                self.phi.len()
            )));
        }
        Ok(ArModel::new(&self.phi, self.sigma2)?)
    }

    fn context(&self) -> Result<MomentContext, CliError> {
        Ok(MomentContext::with_tolerance(self.model()?, self.tol)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Derive bias and variance coefficients for a shipped estimator
    Bias {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Est::Burg)]
        est: Est,
    },
    /// Expand an expression over S[m,k,i] statistics
    Expr {
        /// Expression, e.g. "2*S[0,1,2]/(S[0,0,2]+S[1,1,2])"
        expression: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Monte Carlo comparison of an estimator against its predictions
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Est::Burg)]
        est: Est,
        /// Series length per replication
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Number of replications
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        reps: u64,
        /// Master seed; replications use derived substreams
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Bias coefficients for burg and ls over a (phi1, phi2) grid
    Table {
        /// Grid values for phi1
        #[arg(long, value_delimiter = ',', default_values_t = vec![-0.9, -0.45, 0.0, 0.45, 0.9], allow_negative_numbers = true)]
        phi1_grid: Vec<f64>,
        /// Grid values for phi2
        #[arg(long, value_delimiter = ',', default_values_t = vec![-0.85, -0.6, -0.35, -0.1, 0.05], allow_negative_numbers = true)]
        phi2_grid: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Mean::Known)]
        mean: Mean,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Add Yule-Walker columns
        #[arg(long)]
        include_yw: bool,
    },
}

enum CliError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::Parse { .. } | Error::InvalidAtom { .. }) => 2,
            CliError::Core(Error::Convergence { .. }) => 4,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    if let Ok(workers) = std::env::var("ARBIAS_WORKERS") {
        match workers.parse::<usize>() {
            Ok(k) if k > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => {
                eprintln!("error: ARBIAS_WORKERS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(table) => match write_output(&cli, &table) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {}", e.message());
                ExitCode::from(e.exit_code())
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn write_output(cli: &Cli, table: &Table) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let res = match cli.format {
        Format::Csv => table.write_csv(&mut sink),
        Format::Json => table.write_json(&mut sink),
    };
    match res {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn run(cli: &Cli) -> Result<Table, CliError> {
    match &cli.command {
        Command::Bias { model, est } => cmd_bias(model, *est),
        Command::Expr { expression, model } => cmd_expr(expression, model),
        Command::Mc {
            model,
            est,
            n,
            reps,
            seed,
        } => cmd_mc(model, *est, *n, *reps as usize, *seed),
        Command::Table {
            phi1_grid,
            phi2_grid,
            mean,
            sigma2,
            tol,
            include_yw,
        } => cmd_table(
            phi1_grid,
            phi2_grid,
            (*mean).into(),
            *sigma2,
            *tol,
            *include_yw,
        ),
    }
}

fn coeff_name(j: usize) -> String {
    format!("phi{}", j + 1)
}

fn cmd_bias(margs: &ModelArgs, est: Est) -> Result<Table, CliError> {
    let model = margs.model()?;
    let ctx = margs.context()?;
    let mode: MeanMode = margs.mean.into();
    let def = estimator_def(est.into(), model.order(), mode)?;
    let results = def.expand(&ctx)?;
    let closed = def.closed_form_bias(&model);

    let mut table = Table::new(vec![
        "estimator",
        "mean",
        "phi1",
        "phi2",
        "sigma2",
        "near_boundary",
        "coeff",
        "value_at_mean",
        "bias_coefficient",
        "variance_coefficient",
        "closed_form_bias",
        "abs_deviation",
    ]);
    for (j, r) in results.iter().enumerate() {
        let cf = closed.as_ref().map(|v| v[j]);
        table.push(vec![
            def.kind.name().into(),
            mode_name(mode).into(),
            Cell::Num(model.phi()[0]),
            Cell::OptNum(model.phi().get(1).copied()),
            Cell::Num(model.sigma2()),
            model.near_boundary().into(),
            coeff_name(j).into(),
            r.value_at_mean.into(),
            r.bias_coefficient.into(),
            r.variance_coefficient.into(),
            Cell::OptNum(cf),
            Cell::OptNum(cf.map(|c| (c - r.bias_coefficient).abs())),
        ]);
    }
    Ok(table)
}

fn cmd_expr(expression: &str, margs: &ModelArgs) -> Result<Table, CliError> {
    let expr = EstimatorExpr::parse(expression)?;
    let ctx = margs.context()?;
    let mode: MeanMode = margs.mean.into();
    let r = expr.expand(&ctx, mode)?;
    let mut table = Table::new(vec![
        "expression",
        "mean",
        "atoms",
        "value_at_mean",
        "bias_coefficient",
        "variance_coefficient",
    ]);
    table.push(vec![
        expr.to_string().into(),
        mode_name(mode).into(),
        Cell::Int(r.derivatives.atoms.len() as i64),
        r.value_at_mean.into(),
        r.bias_coefficient.into(),
        r.variance_coefficient.into(),
    ]);
    Ok(table)
}

fn cmd_mc(
    margs: &ModelArgs,
    est: Est,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<Table, CliError> {
    let model = margs.model()?;
    let mode: MeanMode = margs.mean.into();
    let config = McConfig {
        model,
        n,
        reps,
        estimator: estimator_def(est.into(), model.order(), mode)?,
        seed,
    };
    let report = mc_bias(&config)?;
    let mut table = Table::new(vec![
        "estimator",
        "mean",
        "n",
        "reps",
        "seed",
        "coeff",
        "truth",
        "empirical_bias",
        "std_error",
        "z_score",
        "empirical_variance",
        "predicted_bias",
        "predicted_variance",
        "reps_used",
        "failures",
        "status",
    ]);
    let status = if report.warnings.is_empty() {
        "ok".to_string()
    } else {
        format!("warning: {}", report.warnings.join("; "))
    };
    for c in &report.coeffs {
        table.push(vec![
            config.estimator.kind.name().into(),
            mode_name(mode).into(),
            Cell::Int(n as i64),
            Cell::Int(reps as i64),
            Cell::Int(seed as i64),
            coeff_name(c.index).into(),
            c.truth.into(),
            c.empirical_bias.into(),
            c.std_error.into(),
            c.z_score.into(),
            c.empirical_variance.into(),
            c.predicted_bias.into(),
            c.predicted_variance.into(),
            Cell::Int(report.reps_used as i64),
            Cell::Int(report.failures as i64),
            status.clone().into(),
        ]);
    }
    Ok(table)
}

fn cmd_table(
    phi1_grid: &[f64],
    phi2_grid: &[f64],
    mode: MeanMode,
    sigma2: f64,
    tol: f64,
    include_yw: bool,
) -> Result<Table, CliError> {
    if phi1_grid.is_empty() || phi2_grid.is_empty() {
        return Err(CliError::Usage("the grid must not be empty".into()));
    }
    let mut columns = vec![
        "phi1",
        "phi2",
        "admissible",
        "near_boundary",
        "burg_bias_phi1",
        "burg_bias_phi2",
        "ls_bias_phi1",
        "ls_bias_phi2",
    ];
    if include_yw {
        columns.push("yw_bias_phi1");
        columns.push("yw_bias_phi2");
    }
    columns.push("burg_ls_max_dev");
    let mut table = Table::new(columns);

    for &p1 in phi1_grid {
        for &p2 in phi2_grid {
            let model = ArModel::ar2(p1, p2, sigma2)?;
            let mut row: Vec<Cell> = vec![
                p1.into(),
                p2.into(),
                model.is_admissible().into(),
                model.near_boundary().into(),
            ];
            if !model.is_admissible() {
                let blanks = if include_yw { 7 } else { 5 };
                row.extend(std::iter::repeat_n(Cell::OptNum(None), blanks));
                table.push(row);
                continue;
            }
            let ctx = MomentContext::with_tolerance(model, tol)?;
            let bias = |kind: EstimatorKind| -> Result<Vec<f64>, CliError> {
                Ok(estimator_def(kind, 2, mode)?
                    .expand(&ctx)?
                    .iter()
                    .map(|r| r.bias_coefficient)
                    .collect())
            };
            let burg = bias(EstimatorKind::Burg)?;
            let ls = bias(EstimatorKind::LeastSquares)?;
            row.push(burg[0].into());
            row.push(burg[1].into());
            row.push(ls[0].into());
            row.push(ls[1].into());
            if include_yw {
                let yw = bias(EstimatorKind::YuleWalker)?;
                row.push(yw[0].into());
                row.push(yw[1].into());
            }
            let dev = (burg[0] - ls[0]).abs().max((burg[1] - ls[1]).abs());
            row.push(dev.into());
            table.push(row);
        }
    }
    Ok(table)
}

fn mode_name(mode: MeanMode) -> &'static str {
    match mode {
        MeanMode::KnownZero => "known",
        MeanMode::Unknown => "unknown",
    }
}
