mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use epd_hodograph::elliptic::{
    catastrophe_uv_conditions, find_catastrophe, solve_elliptic, uv_coefficient_report,
};
use epd_hodograph::epd::CoeffTable;
use epd_hodograph::flows::{flow_convergence, FlowGrid};
use epd_hodograph::hodograph::{
    classify, compare_closed_forms, scan_singular, solve_regular, solve_singular, trace_locus, ScanBox,
    SingularSeed, SolveOptions, Unknown,
};
use epd_hodograph::operator::verify_identities;
use epd_hodograph::{Error, Hierarchy, RiemannPoint, TimeVector};

use output::Emitter;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Lib(Error),
    Io(String),
    /// A verification ran but found a nonzero residual.
    Failed(String),
}

impl CliError {
    pub fn flag(flag: &str, msg: impl Into<String>) -> Self {
        CliError::Invalid(format!("{flag}: {}", msg.into()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_solver_failure() => 1,
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Failed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

/// Hodograph solutions and Euler-Poisson-Darboux identities for the Benney
/// and dToda hierarchies.
///
/// Results go to stdout as one JSON record per line; a short summary goes
/// to stderr. Exit status: 0 success, 1 solver or verification failure,
/// 2 invalid input.
#[derive(Parser, Debug)]
#[command(name = "epd-hodograph", version, args_override_self = true)]
struct Cli {
    /// Newton residual tolerance.
    #[arg(long, global = true, env = "EPD_HODOGRAPH_TOL", default_value_t = 1e-12)]
    tol: f64,
    /// Worker threads for grid evaluations.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// File of `key = value` lines mirroring the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Suppress the stderr summary.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Problem {
    /// `benney`, `dtoda`, or a rational index such as `3/2`.
    #[arg(long, default_value = "benney", value_parser = parse::hierarchy)]
    hier: Hierarchy,
    /// Times as `name=value` pairs, e.g. `x=0,t2=0,t4=1`; missing ones are zero.
    #[arg(long = "t", default_value = "", allow_hyphen_values = true)]
    t: String,
    /// Series truncation order.
    #[arg(long)]
    order: Option<usize>,
}

impl Problem {
    fn times(&self) -> Result<TimeVector, CliError> {
        parse::times(self.hier, &self.t)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients `C_k` of the generating series.
    Series {
        /// EPD index, `p/q`.
        #[arg(long, value_parser = parse::rational, allow_hyphen_values = true, conflicts_with = "hier")]
        eps: Option<BigRational>,
        #[arg(long, value_parser = parse::hierarchy)]
        hier: Option<Hierarchy>,
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Exact rationals; symbolic polynomials unless `--at` is given.
        #[arg(long)]
        exact: bool,
        /// Evaluate at `beta1,beta2`.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Regular hodograph solve from a seed.
    Solve {
        #[command(flatten)]
        problem: Problem,
        /// `beta1,beta2`.
        #[arg(long, value_parser = parse::pair, allow_hyphen_values = true)]
        seed: (f64, f64),
    },
    /// Sector of a critical point.
    Classify {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_parser = parse::pair, allow_hyphen_values = true)]
        beta: (f64, f64),
        #[arg(long, default_value_t = 1e-8)]
        zero_tol: f64,
    },
    /// Singular points of class `(n1, n2)`; scans for seeds unless `--seed` is given.
    Singular {
        #[command(flatten)]
        problem: Problem,
        /// `n1,n2`.
        #[arg(long, value_parser = parse::class)]
        class: (u32, u32),
        /// Comma list of `beta1`, `beta2` and time slots.
        #[arg(long)]
        unknowns: String,
        #[arg(long, value_parser = parse::pair, allow_hyphen_values = true)]
        seed: Option<(f64, f64)>,
        /// Seeds for the free times, in the order given in `--unknowns`.
        #[arg(long, value_parser = parse::floats, allow_hyphen_values = true)]
        time_seed: Option<Vec<f64>>,
    },
    /// Continues a singular class over a two-parameter grid.
    TraceLocus {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_parser = parse::class)]
        class: (u32, u32),
        #[arg(long)]
        unknowns: String,
        /// `slot:lo:hi:n`.
        #[arg(long, allow_hyphen_values = true)]
        grid1: String,
        #[arg(long, allow_hyphen_values = true)]
        grid2: String,
        /// Also write the converged samples as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Closed-form singular branches for `t = (x, t2, t3, t4)` against the solver.
    #[command(name = "compare-s3")]
    CompareBranches {
        #[arg(long, allow_hyphen_values = true)]
        t2: f64,
        #[arg(long, allow_hyphen_values = true)]
        t3: f64,
        #[arg(long, allow_hyphen_values = true)]
        t4: f64,
    },
    /// Elliptic regime `beta2 = conj(beta1)`.
    Elliptic {
        #[command(flatten)]
        problem: Problem,
        /// `re,im` of beta1.
        #[arg(long, value_parser = parse::complex, allow_hyphen_values = true)]
        seed: Option<Complex64>,
        /// Two free time slots; solves for a gradient catastrophe.
        #[arg(long)]
        catastrophe: Option<String>,
        /// Report the exact `(U, V)` coefficients of `W`.
        #[arg(long)]
        coefficients: bool,
    },
    /// Finite-difference check that solutions satisfy a flow.
    VerifyFlows {
        #[command(flatten)]
        problem: Problem,
        /// Flow time slot, e.g. `t2` or `x1`.
        #[arg(long)]
        flow: String,
        /// `lo:hi:n` for the spatial variable.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// `lo:hi:n` for the flow time.
        #[arg(long, allow_hyphen_values = true)]
        tn: String,
        /// Finite-difference step (default 1e-3 of the patch width).
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, value_parser = parse::pair, allow_hyphen_values = true)]
        seed: Option<(f64, f64)>,
        /// Residual table for the coarse step.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exact operator identities on random rational inputs.
    VerifyIdentities {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn solve_options(tol: f64, order: Option<usize>) -> Result<SolveOptions, CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::flag("--tol", format!("{tol} must be positive")));
    }
    let mut opts = SolveOptions::default();
    opts.newton.tol = tol;
    opts.order = order;
    Ok(opts)
}

fn hyperbolic(flag: &str, (b1, b2): (f64, f64)) -> Result<RiemannPoint, CliError> {
    RiemannPoint::hyperbolic(b1, b2).map_err(|e| CliError::flag(flag, e.to_string()))
}

#[derive(Serialize)]
struct SeriesRecord {
    k: usize,
    eps: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_ab: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_beta: Option<String>,
    /// Coefficients of `beta1^(k-j) beta2^j`, `j = 0..=k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_coeffs: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value_f64: Option<f64>,
}

fn series(
    eps: Option<BigRational>,
    hier: Option<Hierarchy>,
    order: usize,
    exact: bool,
    at: Option<String>,
    quiet: bool,
) -> Result<(), CliError> {
    let eps = match (eps, hier) {
        (Some(e), _) => e,
        (None, Some(h)) => h.eps_exact(),
        (None, None) => Hierarchy::Benney.eps_exact(),
    };
    let mut em = Emitter::stdout("series", hier, quiet);
    let blank = |k| SeriesRecord {
        k,
        eps: eps.to_string(),
        c_ab: None,
        c_beta: None,
        beta_coeffs: None,
        value: None,
        value_f64: None,
    };
    match (exact, at) {
        (true, None) => {
            let table = CoeffTable::symbolic(&eps, order);
            for k in 0..=order {
                let ab = table.poly_ab(k).expect("symbolic table");
                let beta = table.poly_beta(k).expect("symbolic table");
                let coeffs = (0..=k as u32).map(|j| beta.coeff(k as u32 - j, j).to_string()).collect();
                em.summary(format!("C_{k} = {}", beta.display_with(["beta1", "beta2"])));
                em.record(&SeriesRecord {
                    c_ab: Some(ab.display_with(["a", "b"]).to_string()),
                    c_beta: Some(beta.display_with(["beta1", "beta2"]).to_string()),
                    beta_coeffs: Some(coeffs),
                    ..blank(k)
                })?;
            }
        }
        (true, Some(at)) => {
            let parts: Vec<BigRational> = at
                .split(',')
                .map(|s| parse::rational(s).map_err(|e| CliError::flag("--at", e)))
                .collect::<Result<_, _>>()?;
            let [b1, b2] = parts.as_slice() else {
                return Err(CliError::flag("--at", "expected beta1,beta2"));
            };
            let two = BigRational::from_integer(2.into());
            let table = CoeffTable::exact_at(&eps, &((b1 + b2) / two), &(b1 * b2), order);
            for k in 0..=order {
                let v = table.rational(k).expect("rational table");
                em.summary(format!("C_{k} = {v}"));
                em.record(&SeriesRecord {
                    value: Some(v.to_string()),
                    ..blank(k)
                })?;
            }
        }
        (false, Some(at)) => {
            let (b1, b2) = parse::pair(&at).map_err(|e| CliError::flag("--at", e))?;
            let table = CoeffTable::at_point(&eps, &hyperbolic("--at", (b1, b2))?, order);
            for k in 0..=order {
                let v = table.float(k).expect("float table");
                em.summary(format!("C_{k} = {v}"));
                em.record(&SeriesRecord {
                    value_f64: Some(v),
                    ..blank(k)
                })?;
            }
        }
        (false, None) => return Err(CliError::flag("--at", "required without --exact")),
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyRecord<'a> {
    t: &'a TimeVector,
    p: RiemannPoint,
    sector: String,
}

#[derive(Serialize)]
struct FailureRecord {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    error: String,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Series { .. } => "series",
            Command::Solve { .. } => "solve",
            Command::Classify { .. } => "classify",
            Command::Singular { .. } => "singular",
            Command::TraceLocus { .. } => "trace-locus",
            Command::CompareBranches { .. } => "compare-s3",
            Command::Elliptic { .. } => "elliptic",
            Command::VerifyFlows { .. } => "verify-flows",
            Command::VerifyIdentities { .. } => "verify-identities",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(k) = cli.jobs {
        if k == 0 {
            return Err(CliError::flag("--jobs", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::flag("--jobs", e.to_string()))?;
    }
    let quiet = cli.quiet;
    match cli.command {
        Command::Series {
            eps,
            hier,
            order,
            exact,
            at,
        } => series(eps, hier, order, exact, at, quiet),

        Command::Solve { problem, seed } => {
            let opts = solve_options(cli.tol, problem.order)?;
            let t = problem.times()?;
            let mut em = Emitter::stdout("solve", Some(problem.hier), quiet);
            let pt = solve_regular(&t, &hyperbolic("--seed", seed)?, &opts)?;
            em.summary(format!(
                "beta = ({}, {}), sector {}, |grad W| = {:e}",
                pt.p.beta1().re,
                pt.p.beta2().re,
                pt.sector,
                pt.residuals.gradient
            ));
            em.record(&pt)
        }

        Command::Classify {
            problem,
            beta,
            zero_tol,
        } => {
            let t = problem.times()?;
            let p = hyperbolic("--beta", beta)?;
            let sector = classify(&t, &p, zero_tol)?;
            let mut em = Emitter::stdout("classify", Some(problem.hier), quiet);
            em.summary(format!("sector {sector}"));
            em.record(&ClassifyRecord {
                t: &t,
                p,
                sector: sector.to_string(),
            })
        }

        Command::Singular {
            problem,
            class,
            unknowns,
            seed,
            time_seed,
        } => {
            let opts = solve_options(cli.tol, problem.order)?;
            let t = problem.times()?;
            let unknowns = parse::unknowns(problem.hier, &unknowns)?;
            let mut em = Emitter::stdout("singular", Some(problem.hier), quiet);
            let points = match seed {
                Some((b1, b2)) => {
                    let seed = SingularSeed {
                        beta: (b1, b2),
                        times: time_seed,
                    };
                    vec![solve_singular(&t, class, &unknowns, &seed, &opts)?]
                }
                None => {
                    if !unknowns.contains(&Unknown::Beta1) || !unknowns.contains(&Unknown::Beta2) {
                        return Err(CliError::flag("--seed", "required unless both betas are unknowns"));
                    }
                    scan_singular(&t, class, &unknowns, &ScanBox::for_times(&t, &unknowns), &opts)?
                }
            };
            em.summary(format!(
                "{} point(s) of class {}",
                points.len(),
                parse::singular_class(class)
            ));
            for p in &points {
                em.record(p)?;
            }
            if points.is_empty() {
                return Err(CliError::Failed("no singular point found".into()));
            }
            Ok(())
        }

        Command::TraceLocus {
            problem,
            class,
            unknowns,
            grid1,
            grid2,
            csv,
        } => {
            let opts = solve_options(cli.tol, problem.order)?;
            let t = problem.times()?;
            let unknowns = parse::unknowns(problem.hier, &unknowns)?;
            let a1 = parse::axis(problem.hier, "--grid1", &grid1)?;
            let a2 = parse::axis(problem.hier, "--grid2", &grid2)?;
            let locus = trace_locus(&t, class, &unknowns, &a1, &a2, &opts)?;
            let mut em = Emitter::stdout("trace-locus", Some(problem.hier), quiet);
            for s in &locus.samples {
                em.record(s)?;
            }
            if let Some(path) = csv {
                output::write_locus_csv(&path, &locus)?;
            }
            em.summary(format!(
                "class {}: {} branch(es), {} converged sample(s), {} gap(s)",
                locus.class,
                locus.branches,
                locus.converged().count(),
                locus.gaps()
            ));
            Ok(())
        }

        Command::CompareBranches { t2, t3, t4 } => {
            let opts = solve_options(cli.tol, None)?;
            let report = compare_closed_forms(t2, t3, t4, &opts)?;
            let mut em = Emitter::stdout("compare-s3", Some(Hierarchy::Benney), quiet);
            em.summary(format!(
                "radicand {:e}; all solver points matched by corrected formulas: {}",
                report.radicand,
                report.all_matched()
            ));
            for d in &report.discrepancies {
                em.summary(format!("  {d}"));
            }
            em.record(&report)
        }

        Command::Elliptic {
            problem,
            seed,
            catastrophe,
            coefficients,
        } => {
            let opts = solve_options(cli.tol, problem.order)?;
            let mut em = Emitter::stdout("elliptic", Some(problem.hier), quiet);
            let mut did = false;
            if coefficients {
                did = true;
                let (checks, alt) = uv_coefficient_report();
                for c in &checks {
                    em.summary(format!(
                        "t{}: {} [{}]",
                        c.slot,
                        c.derived,
                        if c.matches { "match" } else { "MISMATCH" }
                    ));
                    em.record(c)?;
                }
                em.summary(format!("alternative t2 coefficient {}: matches = {}", alt.reference, alt.matches));
            }
            if let Some(seed) = seed {
                did = true;
                let t = problem.times()?;
                let pt = match &catastrophe {
                    Some(slots) => {
                        let s: Vec<usize> = slots
                            .split(',')
                            .map(|n| parse::slot(problem.hier, "--catastrophe", n))
                            .collect::<Result<_, _>>()?;
                        let [s1, s2] = s.as_slice() else {
                            return Err(CliError::flag("--catastrophe", "expected two time slots"));
                        };
                        let pt = find_catastrophe(&t, [*s1, *s2], seed, &opts)?;
                        let c = catastrophe_uv_conditions(&pt);
                        em.summary(format!(
                            "(W_uu, W_uv, W_vv) = ({:e}, {:e}, {:e}), |d3W| = {:e}",
                            c[0], c[1], c[2], pt.derivatives[2]
                        ));
                        pt
                    }
                    None => solve_elliptic(&t, seed, &opts)?,
                };
                em.summary(format!("beta = {} {:+}i, sector {}", pt.beta.re, pt.beta.im, pt.sector));
                em.record(&pt)?;
            } else if catastrophe.is_some() {
                return Err(CliError::flag("--seed", "required with --catastrophe"));
            }
            if !did {
                return Err(CliError::flag("--seed", "give --seed or --coefficients"));
            }
            Ok(())
        }

        Command::VerifyFlows {
            problem,
            flow,
            x,
            tn,
            h,
            seed,
            csv,
        } => {
            let opts = solve_options(cli.tol, problem.order)?;
            let t = problem.times()?;
            let slot = parse::slot(problem.hier, "--flow", &flow)?;
            let (x0, x1, nx) = parse::range(&x).map_err(|e| CliError::flag("--x", e))?;
            let (t0, t1, nt) = parse::range(&tn).map_err(|e| CliError::flag("--tn", e))?;
            let mut grid = FlowGrid::new((x0, x1), nx, (t0, t1), nt);
            if let Some(h) = h {
                grid = grid.with_step(h);
            }
            let seed = seed.map(|s| hyperbolic("--seed", s)).transpose()?;
            let conv = flow_convergence(slot, &t, &grid, seed, &opts)?;
            let mut em = Emitter::stdout("verify-flows", None, quiet);
            for n in &conv.coarse.nodes {
                em.record(n)?;
            }
            #[derive(Serialize)]
            struct Summary<'a> {
                hierarchy: Hierarchy,
                flow: &'a str,
                h: f64,
                max_residual: f64,
                max_residual_half_step: f64,
                order: f64,
                uv_order: Option<f64>,
                max_uv_residual: Option<f64>,
                hyperbolic: bool,
            }
            em.record(&Summary {
                hierarchy: problem.hier,
                flow: &conv.coarse.flow,
                h: conv.coarse.h,
                max_residual: conv.coarse.max_residual,
                max_residual_half_step: conv.fine.max_residual,
                order: conv.order,
                uv_order: conv.uv_order,
                max_uv_residual: conv.coarse.max_uv_residual,
                hyperbolic: conv.coarse.hyperbolic,
            })?;
            em.summary(format!(
                "{} flow: max residual {:e} at h = {:e}, {:e} at h/2, observed order {:.3}",
                conv.coarse.flow, conv.coarse.max_residual, conv.coarse.h, conv.fine.max_residual, conv.order
            ));
            if let Some(path) = csv {
                let rows: Vec<Vec<f64>> = conv
                    .coarse
                    .nodes
                    .iter()
                    .map(|n| {
                        let uv = n.uv_residual.unwrap_or([f64::NAN; 2]);
                        vec![n.x, n.t, n.beta.0, n.beta.1, n.residual[0], n.residual[1], uv[0], uv[1]]
                    })
                    .collect();
                output::write_csv_rows(
                    &path,
                    &["x", "t", "beta1", "beta2", "residual1", "residual2", "uv_residual1", "uv_residual2"],
                    &rows,
                )?;
            }
            Ok(())
        }

        Command::VerifyIdentities { trials, seed } => {
            let report = verify_identities(trials, seed);
            let mut em = Emitter::stdout("verify-identities", None, quiet);
            em.record(&report)?;
            if report.all_zero() {
                em.summary(format!(
                    "all zero: {} commutation, {} duality, {} EPD, {} index-shift checks",
                    report.commutation_checks, report.duality_checks, report.epd_checks, report.index_shift_checks
                ));
                Ok(())
            } else {
                for f in &report.failures {
                    em.summary(format!("  {f}"));
                }
                Err(CliError::Failed(format!("{} nonzero residual(s)", report.failures.len())))
            }
        }
    }
}

fn main() -> ExitCode {
    let mut argv: Vec<String> = std::env::args().collect();
    match parse::config_args(&argv) {
        Ok(extra) => argv.extend(extra),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    }
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());
    let command = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Lib(err) = &e {
                if err.is_solver_failure() {
                    let rec = FailureRecord {
                        tool: "epd-hodograph",
                        version: epd_hodograph::VERSION,
                        command,
                        error: err.to_string(),
                    };
                    if let Ok(line) = serde_json::to_string(&rec) {
                        println!("{line}");
                    }
                }
            }
            eprintln!("error ({command}): {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
