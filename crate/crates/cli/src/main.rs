//! `qdrd`: factorizations, solvers, detectors and Monte Carlo sweeps from the
//! command line.
//!
//! Exit status is 0 on success, 1 on usage or input errors, 2 on numerical
//! failures (rank deficiency, singular triangle, non-positive weight) or a
//! failed operation ledger.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qdrd_core::detect::{
    all_metrics, argmin, find_counterexample, llr_from_metrics, Method, PreparedMetric,
};
use qdrd_core::factor::{full_qr_householder, qdrd_sqrt_free, thin_qr_mgs};
use qdrd_core::harness::{
    measure_ledger, op_report, run_montecarlo, to_csv, ExperimentConfig, StoredCounterexample,
};
use qdrd_core::lsq::{solve_ls_qdrd, solve_ls_qr};
use qdrd_core::matrix::ComplexVector;
use qdrd_core::mimo::{enum_cap_from_env, sample_instance, CandidateSet, Constellation};
use qdrd_core::opcount::OpCounter;
use qdrd_core::textio::{
    fmt_complex, fmt_real, format_matrix, format_real_vector, read_matrix, read_vector,
};
use qdrd_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "qdrd",
    version,
    about = "Square-root-free QDRD vs QR: factor, solve, detect, simulate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Factor a matrix and write the factors next to `--out`.
    Factor {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: FactorMethod,
        /// Output prefix; files are `<prefix>.Q`, `<prefix>.R`, ... and `<prefix>.ops`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Unconstrained least squares `min ‖y − A x‖²`.
    Solve {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, value_enum)]
        method: SolveMethod,
    },
    /// Exhaustive detection over a QAM constellation.
    Detect {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        constellation: String,
        #[arg(long)]
        method: Method,
        /// Also print one LLR per label bit.
        #[arg(long)]
        soft: bool,
    },
    /// SER, mismatch rate and mean operation counts per SNR and method, as CSV.
    Montecarlo {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        constellation: String,
        /// Comma-separated list, e.g. `5,10,15`.
        #[arg(long = "snr-db", value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
        snr_db: Vec<f64>,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Comma-separated; defaults to all four.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for an instance where the unweighted QDRD detector and the
    /// oracle disagree.
    Counterexample {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        constellation: String,
        #[arg(long = "snr-db", allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long = "max-trials")]
        max_trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the exact operation ledger on one sampled instance.
    Opcount {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        constellation: String,
        #[arg(long = "snr-db", allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FactorMethod {
    ThinQr,
    FullQr,
    Qdrd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolveMethod {
    Qr,
    Qdrd,
}

enum Failure {
    Core(Error),
    /// Ran to completion but a ledger check did not hold.
    Ledger,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
        Err(Failure::Ledger) => ExitCode::from(2),
    }
}

fn run(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Factor { input, method, out } => factor(&input, method, &out),
        Command::Solve { a, y, method } => solve(&a, &y, method),
        Command::Detect {
            a,
            y,
            constellation,
            method,
            soft,
        } => detect(&a, &y, &constellation, method, soft),
        Command::Montecarlo {
            m,
            n,
            constellation,
            snr_db,
            trials,
            seed,
            methods,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(m, n, &constellation, snr_db, trials, seed);
            if !methods.is_empty() {
                cfg.methods = methods;
            }
            cfg.enum_cap = enum_cap_from_env()?;
            let csv = to_csv(&run_montecarlo(&cfg)?);
            match out {
                Some(path) => {
                    fs::write(path, csv)?;
                    Ok(String::new())
                }
                None => Ok(csv),
            }
        }
        Command::Counterexample {
            m,
            n,
            constellation,
            snr_db,
            max_trials,
            seed,
            out,
        } => {
            check_dims(m, n)?;
            let c: Constellation = constellation.parse()?;
            match find_counterexample(m, n, &c, snr_db, max_trials, seed, enum_cap_from_env()?)? {
                Some(ce) => {
                    let stored = StoredCounterexample::new(&ce, &c, snr_db);
                    fs::write(&out, stored.to_text())?;
                    Ok(format!("{}\n", stored.summary()))
                }
                None => Ok(format!("no counterexample in {max_trials} trials\n")),
            }
        }
        Command::Opcount {
            m,
            n,
            constellation,
            snr_db,
            seed,
        } => {
            check_dims(m, n)?;
            let c: Constellation = constellation.parse()?;
            let cands = CandidateSet::new(&c, n, enum_cap_from_env()?)?;
            let inst = sample_instance(m, n, snr_db, &c, seed)?;
            let report = op_report(&measure_ledger(&inst.a, &inst.y, &cands)?, n, cands.len());
            if report.all_passed() {
                Ok(report.to_string())
            } else {
                print!("{report}");
                Err(Failure::Ledger)
            }
        }
    }
}

fn check_dims(m: usize, n: usize) -> Result<(), Error> {
    if n == 0 || m < n {
        return Err(Error::InvalidConfig(format!(
            "need m >= n >= 1, got m={m}, n={n}"
        )));
    }
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn factor(input: &Path, method: FactorMethod, out: &Path) -> Result<String, Failure> {
    let a = read_matrix(input)?;
    let mut ops = OpCounter::new();
    let files = match method {
        FactorMethod::ThinQr => {
            let f = thin_qr_mgs(&mut ops, &a)?;
            vec![("Q", format_matrix(&f.q)), ("R", format_matrix(&f.r))]
        }
        FactorMethod::FullQr => {
            let f = full_qr_householder(&mut ops, &a)?;
            vec![
                ("Qbar", format_matrix(&f.q_bar)),
                ("Rbar", format_matrix(&f.r_bar)),
            ]
        }
        FactorMethod::Qdrd => {
            let f = qdrd_sqrt_free(&mut ops, &a)?;
            vec![
                ("Qp", format_matrix(&f.q_prime)),
                ("Dp", format_real_vector(&f.d_prime)),
                ("Rp", format_matrix(&f.r_prime)),
            ]
        }
    };
    let mut summary = String::new();
    for (suffix, text) in files.into_iter().chain([("ops", format!("{ops}\n"))]) {
        let path = with_suffix(out, suffix);
        fs::write(&path, text)?;
        let _ = writeln!(summary, "wrote {}", path.display());
    }
    Ok(summary)
}

fn solve(a: &Path, y: &Path, method: SolveMethod) -> Result<String, Failure> {
    let a = read_matrix(a)?;
    let y = read_vector(y)?;
    let mut ops = OpCounter::new();
    let sol = match method {
        SolveMethod::Qr => solve_ls_qr(&mut ops, &a, &y)?,
        SolveMethod::Qdrd => solve_ls_qdrd(&mut ops, &a, &y)?,
    };
    let mut out = String::new();
    write_vector(&mut out, "x", &sol.x_star);
    let _ = writeln!(out, "residual_sq {}", fmt_real(sol.residual_sq));
    let _ = writeln!(out, "{ops}");
    Ok(out)
}

fn detect(
    a: &Path,
    y: &Path,
    constellation: &str,
    method: Method,
    soft: bool,
) -> Result<String, Failure> {
    let a = read_matrix(a)?;
    let y = read_vector(y)?;
    let c: Constellation = constellation.parse()?;
    let cands = CandidateSet::new(&c, a.cols(), enum_cap_from_env()?)?;
    let mut ops = OpCounter::new();
    let metric = PreparedMetric::prepare(&mut ops, method, &a, &y)?;
    let mut out = String::new();
    if soft {
        // one scan serves both the decision and the LLRs
        let metrics = all_metrics(&mut ops, &metric, &cands)?;
        let (best, min) = metrics
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (k, &d)| if d < acc.1 { (k, d) } else { acc },
            );
        let llr = llr_from_metrics(&mut ops, &metrics, &cands);
        let _ = writeln!(out, "best_index {best}");
        write_vector(&mut out, "best_vector", &cands.vector(best));
        let _ = writeln!(out, "min_metric {}", fmt_real(min));
        for (b, v) in llr.llr.iter().enumerate() {
            let _ = writeln!(out, "llr {b} {}", fmt_real(*v));
        }
    } else {
        let r = argmin(&mut ops, &metric, &cands)?;
        let _ = writeln!(out, "best_index {}", r.best_index);
        write_vector(&mut out, "best_vector", &r.best_vector);
        let _ = writeln!(out, "min_metric {}", fmt_real(r.min_metric));
    }
    let _ = writeln!(out, "{ops}");
    Ok(out)
}

fn write_vector(out: &mut String, name: &str, v: &ComplexVector) {
    let _ = writeln!(out, "{name}");
    for z in v.iter() {
        let _ = writeln!(out, "{}", fmt_complex(*z));
    }
}
