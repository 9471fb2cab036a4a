//! `pd`: evaluate the generalized Dickman function, draw samples, and run
//! the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage/domain error,
//! 3 internal numerical failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pd_core::dickman::DickmanEvaluator;
use pd_core::markov_krein::{NuSpec, NuSpecFile};
use pd_core::numerics::tabulated::{InterpOrder, TableMeta, TabulatedFunction};
use pd_core::params::validate_params;
use pd_core::sampler::{
    parallel_draws, sample_hp, sample_mean_functional, stick_breaking, top_m, StopRule,
    TailPolicy,
};
use pd_core::stats::mean_and_se;
use pd_core::verify::{run_all, run_suite, Budget, SuiteReport, SUITES};
use pd_core::Error;

#[derive(Parser)]
#[command(name = "pd", about = "Two-parameter Poisson-Dirichlet toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the generalized Dickman function rho(s) on [0, s-max]
    Dickman(DickmanArgs),
    /// Draw Monte Carlo samples (sticks, ranked weights, population moments,
    /// mean functionals)
    Sample(SampleArgs),
    /// Run a verification suite and emit a JSON report
    Verify(VerifyArgs),
}

#[derive(Args)]
struct DickmanArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long = "s-max")]
    s_max: f64,
    #[arg(long)]
    step: f64,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Series,
    Volterra,
    Renewal,
    Auto,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, value_enum)]
    mode: Mode,
    /// rank for top-m mode
    #[arg(long)]
    m: Option<usize>,
    /// exponent for hp mode
    #[arg(long)]
    p: Option<f64>,
    /// base-measure JSON for mean mode
    #[arg(long = "nu-file")]
    nu_file: Option<PathBuf>,
    /// residual threshold for sticks/mean modes
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// expected-remainder tolerance for hp mode
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// replicate count
    #[arg(long)]
    n: usize,
    /// omit to let the tool pick one (recorded in the metadata)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Sticks,
    TopM,
    Hp,
    Mean,
}

#[derive(Args)]
struct VerifyArgs {
    /// one of core|dickman|laws|gumbel|clt|markov-krein|all
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, value_enum, default_value = "quick")]
    budget: BudgetArg,
    #[arg(long, default_value_t = 424242)]
    seed: u64,
    /// write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BudgetArg {
    Quick,
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Dickman(args) => cmd_dickman(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) | Error::Parse(_) | Error::Unsupported(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn set_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn cmd_dickman(args: DickmanArgs) -> Result<ExitCode, Error> {
    let params = validate_params(args.alpha, args.theta)?;
    let method = match args.method {
        Method::Auto => {
            if args.alpha == 0.0 {
                Method::Renewal
            } else {
                Method::Volterra
            }
        }
        m => m,
    };
    if method == Method::Renewal && args.alpha != 0.0 {
        return Err(Error::Domain(
            "renewal method applies only at alpha = 0; use volterra or series".into(),
        ));
    }
    if method == Method::Volterra && args.alpha == 0.0 {
        return Err(Error::Domain(
            "volterra method needs alpha > 0; use renewal or series".into(),
        ));
    }
    let ev = DickmanEvaluator::new(params);
    let (table, name) = match method {
        Method::Series => {
            if !(args.step > 0.0) || !(args.s_max >= args.step) {
                return Err(Error::Domain("need 0 < step <= s-max".into()));
            }
            let len = (args.s_max / args.step).floor() as usize + 1;
            let mut values = Vec::with_capacity(len);
            for i in 0..len {
                values.push(ev.rho_series((i as f64 * args.step).max(1e-12))?);
            }
            (
                TabulatedFunction::new(0.0, args.step, values, InterpOrder::CubicMonotone)?,
                "series",
            )
        }
        Method::Renewal | Method::Volterra => {
            (ev.rho_table(args.s_max, args.step)?, if method == Method::Renewal { "renewal" } else { "volterra" })
        }
        Method::Auto => unreachable!(),
    };
    let meta = TableMeta {
        alpha: args.alpha,
        theta: args.theta,
        step: args.step,
        method: name.into(),
        interp: InterpOrder::CubicMonotone,
    };
    table.write_csv_with_meta(&args.out, &meta)?;
    eprintln!(
        "wrote {} rows to {} (method {name})",
        table.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SampleMeta {
    mode: String,
    alpha: f64,
    theta: f64,
    n: usize,
    seed: u64,
    stop: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uncertified_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_self_check: Option<MeanSelfCheck>,
}

#[derive(Serialize)]
struct MeanSelfCheck {
    sample_mean: f64,
    std_error: f64,
    nu_mean: f64,
    within_3_5_se: bool,
}

fn write_sample_csv(path: &PathBuf, rows: &[(usize, f64)]) -> Result<(), Error> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "replicate,value")?;
    for (r, v) in rows {
        writeln!(out, "{r},{v:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

fn meta_path(path: &PathBuf) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

fn cmd_sample(args: SampleArgs) -> Result<ExitCode, Error> {
    set_workers(args.workers);
    let params = validate_params(args.alpha, args.theta)?;
    let seed = args.seed.unwrap_or_else(|| rand::random());
    if args.n == 0 {
        return Err(Error::Domain("need n >= 1 replicates".into()));
    }
    let mut meta = SampleMeta {
        mode: String::new(),
        alpha: args.alpha,
        theta: args.theta,
        n: args.n,
        seed,
        stop: String::new(),
        m: None,
        p: None,
        nu: None,
        uncertified_fraction: None,
        mean_self_check: None,
    };
    let rows: Vec<(usize, f64)> = match args.mode {
        Mode::Sticks => {
            meta.mode = "sticks".into();
            meta.stop = format!("residual < {:e}", args.eps);
            let eps = args.eps;
            let draws: Vec<Vec<f64>> = parallel_draws(args.n, seed, move |rng| {
                Ok(stick_breaking(params, StopRule::ResidualBelow(eps), rng)?.sticks)
            })?;
            draws
                .iter()
                .enumerate()
                .flat_map(|(i, sticks)| sticks.iter().map(move |&v| (i, v)))
                .collect()
        }
        Mode::TopM => {
            let m = args.m.ok_or_else(|| Error::Domain("top-m mode needs --m".into()))?;
            if m == 0 {
                return Err(Error::Domain("--m must be >= 1".into()));
            }
            meta.mode = "top-m".into();
            meta.m = Some(m);
            meta.stop = "residual below the m-th largest stick (certified)".into();
            let draws: Vec<(f64, bool)> = parallel_draws(args.n, seed, move |rng| {
                let r = top_m(params, m, rng)?;
                Ok((*r.weights.last().unwrap(), r.certified))
            })?;
            let uncert = draws.iter().filter(|d| !d.1).count();
            meta.uncertified_fraction = Some(uncert as f64 / args.n as f64);
            draws.iter().enumerate().map(|(i, d)| (i, d.0)).collect()
        }
        Mode::Hp => {
            let p = args.p.ok_or_else(|| Error::Domain("hp mode needs --p".into()))?;
            if !(p > args.alpha) {
                return Err(Error::Domain(format!(
                    "hp needs p > alpha (got p = {p}, alpha = {})",
                    args.alpha
                )));
            }
            meta.mode = "hp".into();
            meta.p = Some(p);
            meta.stop = format!("expected remainder < {:e}", args.tol);
            let tol = args.tol;
            let draws: Vec<(f64, bool)> = parallel_draws(args.n, seed, move |rng| {
                let d = sample_hp(params, p, rng, tol)?;
                Ok((d.value, d.converged))
            })?;
            let uncert = draws.iter().filter(|d| !d.1).count();
            meta.uncertified_fraction = Some(uncert as f64 / args.n as f64);
            draws.iter().enumerate().map(|(i, d)| (i, d.0)).collect()
        }
        Mode::Mean => {
            let path = args
                .nu_file
                .as_ref()
                .ok_or_else(|| Error::Domain("mean mode needs --nu-file".into()))?;
            let nu: NuSpec =
                NuSpecFile::from_json(&std::fs::read_to_string(path)?)?.into_nu()?;
            meta.mode = "mean".into();
            meta.nu = Some(nu.label());
            meta.stop = format!("residual < {:e}", args.eps);
            let eps = args.eps;
            let nu2 = nu.clone();
            let draws: Vec<f64> = parallel_draws(args.n, seed, move |rng| {
                Ok(sample_mean_functional(params, &nu2, rng, eps, TailPolicy::Drop)?.value)
            })?;
            if let Some(nu_mean) = nu.mean() {
                let (mean, se) = mean_and_se(&draws)?;
                meta.mean_self_check = Some(MeanSelfCheck {
                    sample_mean: mean,
                    std_error: se,
                    nu_mean,
                    within_3_5_se: (mean - nu_mean).abs() <= 3.5 * se.max(1e-300),
                });
            }
            draws.iter().enumerate().map(|(i, &v)| (i, v)).collect()
        }
    };
    write_sample_csv(&args.out, &rows)?;
    std::fs::write(
        meta_path(&args.out),
        serde_json::to_string_pretty(&meta).map_err(|e| Error::Parse(e.to_string()))?,
    )?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyOutput {
    budget: String,
    seed: u64,
    runtime_s: f64,
    pass: bool,
    suites: Vec<SuiteReport>,
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    set_workers(args.workers);
    let budget = match args.budget {
        BudgetArg::Quick => Budget::Quick,
        BudgetArg::Full => Budget::Full,
    };
    let t0 = std::time::Instant::now();
    let suites = if args.suite == "all" {
        run_all(budget, args.seed)?
    } else if SUITES.contains(&args.suite.as_str()) {
        vec![run_suite(&args.suite, budget, args.seed)?]
    } else {
        return Err(Error::Domain(format!(
            "unknown suite '{}'; available: {SUITES:?} or 'all'",
            args.suite
        )));
    };
    let pass = suites.iter().all(|s| s.pass);
    for suite in &suites {
        for c in &suite.checks {
            eprintln!(
                "{} [{}] {} = {:.6e} (ref {:.6e}, tol {:.2e})",
                if c.pass { "PASS" } else { "FAIL" },
                suite.suite,
                c.name,
                c.value,
                c.reference,
                c.tolerance
            );
        }
        eprintln!(
            "suite {}: {} in {:.1}s",
            suite.suite,
            if suite.pass { "pass" } else { "FAIL" },
            suite.runtime_s
        );
    }
    let output = VerifyOutput {
        budget: format!("{budget:?}").to_lowercase(),
        seed: args.seed,
        runtime_s: t0.elapsed().as_secs_f64(),
        pass,
        suites,
    };
    let text = serde_json::to_string_pretty(&output).map_err(|e| Error::Parse(e.to_string()))?;
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
