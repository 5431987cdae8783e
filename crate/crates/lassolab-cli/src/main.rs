//! Command-line front end: design generation, condition checking, solving,
//! bound verification, Monte Carlo simulation, and support-recovery sweeps.
//!
//! Exit codes: 0 success, 2 argument/precondition/parse problems, 3
//! enumeration refusals, 4 solver non-convergence.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lassolab::bounds::{
    cone_parameter, support_recovery_check, verify_bounds,
    verify_bounds_noiseless, LambdaRule, NoiseModel,
};
use lassolab::conditions::{
    adaptive_restricted_eigenvalue_at, compatibility_constant, implication_checks,
    mutual_incoherence, restricted_eigenvalue_at, restricted_nullspace_holds, rip_constant,
    strong_restricted_eigenvalue_at, uniform_irrepresentable, ConditionReport, ConeSpec,
    DEFAULT_SUBSET_CAP,
};
use lassolab::design::{generate_design, DesignFamily, DesignSpec};
use lassolab::error::Error;
use lassolab::experiment::{run_experiment, Beta0Spec, ExperimentConfig, REPORT_SCHEMA_VERSION};
use lassolab::io;
use lassolab::model::{gram, DesignMatrix, Support};
use lassolab::solver::{kkt_report, solve_lasso, LassoProblem, SolverOptions};

#[derive(Parser)]
#[command(name = "lassolab", version, about = "Sparse-regression laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct DesignArgs {
    /// CSV file with the design matrix (rows = observations).
    #[arg(long, conflicts_with = "family")]
    design: Option<PathBuf>,
    /// Built-in family: identity, orthonormal, equicorrelated, toeplitz,
    /// example1, example2, gaussian.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Correlation parameter for the equicorrelated/toeplitz families.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    /// Seed for seeded families and noise draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Center columns and rescale them to unit mean-square norm.
    #[arg(long, default_value_t = false)]
    standardize: bool,
}

impl DesignArgs {
    fn spec(&self) -> Result<DesignSpec, Error> {
        let family: DesignFamily = self
            .family
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("need --design or --family".into()))?
            .parse()?;
        Ok(DesignSpec {
            family,
            n: self.n,
            p: self.p,
            rho: self.rho,
            seed: self.seed,
        })
    }

    fn resolve(&self) -> Result<DesignMatrix, Error> {
        let x = if let Some(path) = &self.design {
            io::ingest_matrix(path)?.0
        } else {
            generate_design(&self.spec()?)?
        };
        if self.standardize {
            standardize(&x)
        } else {
            Ok(x)
        }
    }
}

/// Centers every column and rescales it to unit mean-square norm.
fn standardize(x: &DesignMatrix) -> Result<DesignMatrix, Error> {
    let n = x.n() as f64;
    let mut m = x.entries().clone();
    for (j, mut col) in m.column_iter_mut().enumerate() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        let norm = col.norm();
        if norm <= 1e-12 {
            return Err(Error::Precondition(format!(
                "column {} is constant and cannot be standardized",
                j + 1
            )));
        }
        col *= n.sqrt() / norm;
    }
    DesignMatrix::new(m)
}

fn parse_support(text: &str, p: usize) -> Result<Support, Error> {
    let indices = text
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad support index '{tok}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Support::new(indices, p)
}

#[derive(Subcommand)]
enum Command {
    /// Generate a design matrix from one of the built-in families.
    GenDesign {
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compute the design-condition battery for a support.
    CheckConditions {
        #[command(flatten)]
        design: DesignArgs,
        /// Comma-separated 1-based support indices, e.g. "1,2,3,4".
        #[arg(long)]
        support: String,
        /// Cone opening parameter L.
        #[arg(long, default_value_t = 3.0)]
        l: f64,
        #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
        subset_cap: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve one penalized least-squares instance.
    Solve {
        #[command(flatten)]
        design: DesignArgs,
        /// CSV file with the response vector.
        #[arg(long)]
        response: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1e-7)]
        kkt_tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Draw one noisy replication and score every bound cell.
    VerifyBounds {
        #[command(flatten)]
        design: DesignArgs,
        /// Sparse truth: number of leading active coordinates.
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 1.0)]
        magnitude: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 12.0)]
        tau: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        /// Solve the noiseless problem at this penalty instead of drawing
        /// noise.
        #[arg(long)]
        noiseless_lambda: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a seeded Monte Carlo experiment and emit the full report.
    Simulate {
        /// JSON experiment configuration; overrides the individual flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 1.0)]
        magnitude: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 12.0)]
        tau: f64,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Noiseless support-recovery check over one penalty or a sweep.
    RecoveryCheck {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, default_value_t = 1)]
        s: usize,
        #[arg(long, default_value_t = 1.0)]
        magnitude: f64,
        #[arg(long)]
        lambda: Option<f64>,
        /// Geometric sweep bounds; used with --grid-points.
        #[arg(long)]
        grid_min: Option<f64>,
        #[arg(long)]
        grid_max: Option<f64>,
        #[arg(long, default_value_t = 10)]
        grid_points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn write_output(output: &OutputArgs, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

fn reports_to_csv(reports: &[ConditionReport]) -> String {
    let mut out = String::from("name,value,satisfied\n");
    for r in reports {
        let _ = writeln!(out, "{},{:?},{}", r.name, r.value, r.satisfied);
    }
    out
}

fn run_gen_design(design: DesignArgs, output: OutputArgs) -> Result<(), Error> {
    let x = design.resolve()?;
    let text = match output.format {
        Format::Csv => io::matrix_to_csv(&x),
        Format::Json => {
            let rows: Vec<Vec<f64>> = (0..x.n())
                .map(|i| (0..x.p()).map(|j| x.entries()[(i, j)]).collect())
                .collect();
            to_pretty_json(&serde_json::json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "n": x.n(),
                "p": x.p(),
                "entries": rows,
            }))?
        }
    };
    write_output(&output, &text)
}

fn run_check_conditions(
    design: DesignArgs,
    support: String,
    l: f64,
    subset_cap: usize,
    output: OutputArgs,
) -> Result<(), Error> {
    let x = design.resolve()?;
    let support = parse_support(&support, x.p())?;
    let cone = ConeSpec::new(support.clone(), l)?;
    let sigma = gram(&x);

    let mut reports = Vec::new();
    reports.push(mutual_incoherence(&x)?);
    reports.push(rip_constant(&x, support.len(), subset_cap)?);
    reports.push(restricted_nullspace_holds(&x, &support, l)?);
    reports.push(compatibility_constant(&x, &cone)?);
    reports.push(restricted_eigenvalue_at(&x, &support, l)?);
    reports.push(adaptive_restricted_eigenvalue_at(&x, &support, l)?);
    reports.push(strong_restricted_eigenvalue_at(&x, &support, l)?);
    reports.push(uniform_irrepresentable(&sigma, &support)?);
    reports.extend(implication_checks(&x, support.len(), l)?);

    let text = match output.format {
        Format::Csv => reports_to_csv(&reports),
        Format::Json => to_pretty_json(&serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "condition_reports": reports,
        }))?,
    };
    write_output(&output, &text)
}

fn run_solve(
    design: DesignArgs,
    response: PathBuf,
    lambda: f64,
    max_iters: usize,
    tol: f64,
    kkt_tol: f64,
    output: OutputArgs,
) -> Result<(), Error> {
    let x = design.resolve()?;
    let y = io::ingest_vector(&response)?;
    let opts = SolverOptions {
        max_iters,
        tol,
        kkt_tol,
    };
    let problem = LassoProblem::new(x.clone(), y.values().to_vec(), lambda)?;
    let solution = solve_lasso(&problem, &opts)?;
    if !solution.converged {
        return Err(Error::NonConvergence(format!(
            "stopping rule did not fire within {max_iters} sweeps"
        )));
    }
    let certificate = kkt_report(&x, y.values(), &solution.beta, lambda, kkt_tol);
    let text = match output.format {
        Format::Csv => io::vector_to_csv(&solution.beta),
        Format::Json => to_pretty_json(&serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "beta": solution.beta.values(),
            "objective": solution.objective,
            "kkt_residual": solution.kkt_residual,
            "iterations": solution.iterations,
            "converged": solution.converged,
            "kkt": certificate,
        }))?,
    };
    write_output(&output, &text)
}

#[allow(clippy::too_many_arguments)]
fn run_verify_bounds(
    design: DesignArgs,
    s: usize,
    magnitude: f64,
    sigma: f64,
    tau: f64,
    c: f64,
    noiseless_lambda: Option<f64>,
    output: OutputArgs,
) -> Result<(), Error> {
    let seed = design.seed;
    let x = design.resolve()?;
    let beta0 = Beta0Spec::Sparse {
        s,
        magnitude,
        support: None,
        signs: None,
    }
    .realize(x.p())?;
    let rule = LambdaRule::new(c, tau)?;
    let support = Support::new((1..=s).collect(), x.p())?;
    let outcome = match noiseless_lambda {
        Some(lambda) => {
            let cone = ConeSpec::new(support, 1.0)?;
            verify_bounds_noiseless(&x, &beta0, lambda, &cone)?
        }
        None => {
            let cone = ConeSpec::new(support, cone_parameter(c)?)?;
            let noise = NoiseModel::new(sigma, seed)?;
            verify_bounds(&x, &beta0, &noise, &rule, &cone)?
        }
    };
    let text = match output.format {
        Format::Csv => {
            let mut out =
                String::from("bound,theoretical,empirical,holds,applicable,lambda\n");
            for b in &outcome.bounds {
                let _ = writeln!(
                    out,
                    "{},{:?},{:?},{},{},{:?}",
                    b.bound_name, b.theoretical, b.empirical, b.holds, b.applicable, b.lambda_used
                );
            }
            out
        }
        Format::Json => to_pretty_json(&serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "outcome": outcome,
        }))?,
    };
    write_output(&output, &text)
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    config: Option<PathBuf>,
    design: DesignArgs,
    s: usize,
    magnitude: f64,
    sigma: f64,
    tau: f64,
    c: f64,
    reps: usize,
    output: OutputArgs,
) -> Result<(), Error> {
    let config = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig {
            design: design.spec()?,
            beta0: Beta0Spec::Sparse {
                s,
                magnitude,
                support: None,
                signs: None,
            },
            noise: NoiseModel::new(sigma, design.seed)?,
            rule: LambdaRule::new(c, tau)?,
            reps,
        },
    };
    let report = run_experiment(&config)?;
    let text = match output.format {
        Format::Csv => {
            let mut out = String::from(
                "rep,lambda,stochastic,good_event,cone_holds,basic_inequality_holds,converged,\
                 pred,l1,l2sq,selection,bound,theoretical,empirical,holds\n",
            );
            for r in &report.replications {
                for b in &r.bounds {
                    let _ = writeln!(
                        out,
                        "{},{:?},{:?},{},{},{},{},{:?},{:?},{:?},{},{},{:?},{:?},{}",
                        r.rep,
                        r.lambda,
                        r.stochastic,
                        r.good_event,
                        r.cone_holds,
                        r.basic_inequality_holds,
                        r.converged,
                        r.losses.pred,
                        r.losses.l1,
                        r.losses.l2sq,
                        r.losses.selection,
                        b.bound_name,
                        b.theoretical,
                        b.empirical,
                        b.holds
                    );
                }
            }
            out
        }
        Format::Json => to_pretty_json(&report)?,
    };
    write_output(&output, &text)
}

#[allow(clippy::too_many_arguments)]
fn run_recovery_check(
    design: DesignArgs,
    s: usize,
    magnitude: f64,
    lambda: Option<f64>,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    grid_points: usize,
    output: OutputArgs,
) -> Result<(), Error> {
    let x = design.resolve()?;
    let beta0 = Beta0Spec::Sparse {
        s,
        magnitude,
        support: None,
        signs: None,
    }
    .realize(x.p())?;

    let lambdas: Vec<f64> = match (lambda, grid_min, grid_max) {
        (Some(l), None, None) => vec![l],
        (None, Some(lo), Some(hi)) => {
            if !(lo > 0.0 && hi > lo && grid_points >= 2) {
                return Err(Error::InvalidArgument(
                    "sweep needs 0 < grid-min < grid-max and at least two points".into(),
                ));
            }
            let ratio = (hi / lo).powf(1.0 / (grid_points - 1) as f64);
            (0..grid_points).map(|k| lo * ratio.powi(k as i32)).collect()
        }
        _ => {
            return Err(Error::InvalidArgument(
                "pass either --lambda or both --grid-min and --grid-max".into(),
            ))
        }
    };

    #[derive(serde::Serialize)]
    struct SweepEntry {
        lambda: f64,
        #[serde(flatten)]
        report: lassolab::bounds::RecoveryReport,
    }
    let mut entries = Vec::new();
    for l in lambdas {
        entries.push(SweepEntry {
            lambda: l,
            report: support_recovery_check(&x, &beta0, l)?,
        });
    }
    let text = match output.format {
        Format::Csv => {
            let mut out =
                String::from("lambda,subset_of_support,linf_bound,linf_ok,betamin_threshold\n");
            for e in &entries {
                let _ = writeln!(
                    out,
                    "{:?},{},{:?},{},{:?}",
                    e.lambda,
                    e.report.subset_of_support,
                    e.report.linf_bound,
                    e.report.linf_ok,
                    e.report.betamin_threshold
                );
            }
            out
        }
        Format::Json => to_pretty_json(&serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "sweep": entries,
        }))?,
    };
    write_output(&output, &text)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::GenDesign { design, output } => run_gen_design(design, output),
        Command::CheckConditions {
            design,
            support,
            l,
            subset_cap,
            output,
        } => run_check_conditions(design, support, l, subset_cap, output),
        Command::Solve {
            design,
            response,
            lambda,
            max_iters,
            tol,
            kkt_tol,
            output,
        } => run_solve(design, response, lambda, max_iters, tol, kkt_tol, output),
        Command::VerifyBounds {
            design,
            s,
            magnitude,
            sigma,
            tau,
            c,
            noiseless_lambda,
            output,
        } => run_verify_bounds(design, s, magnitude, sigma, tau, c, noiseless_lambda, output),
        Command::Simulate {
            config,
            design,
            s,
            magnitude,
            sigma,
            tau,
            c,
            reps,
            output,
        } => run_simulate(config, design, s, magnitude, sigma, tau, c, reps, output),
        Command::RecoveryCheck {
            design,
            s,
            magnitude,
            lambda,
            grid_min,
            grid_max,
            grid_points,
            output,
        } => run_recovery_check(
            design,
            s,
            magnitude,
            lambda,
            grid_min,
            grid_max,
            grid_points,
            output,
        ),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
