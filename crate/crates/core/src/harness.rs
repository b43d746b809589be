//! Monte Carlo sweeps, CSV output and the operation ledger.

use std::fmt;

use crate::detect::{detect, oracle_ml, Counterexample, Method};
use crate::error::{Error, Result};
use crate::lsq::{solve_ls_qdrd, solve_ls_qr};
use crate::matrix::{ComplexMatrix, ComplexVector, C64};
use crate::mimo::{sample_instance, CandidateSet, Constellation, DEFAULT_ENUM_CAP};
use crate::opcount::{NullTally, OpCounter, OpCounts, Phase};
use crate::par::{map_trials, Execution};
use crate::random::trial_seed;
use crate::textio::{fmt_real, SectionDoc};

pub const CSV_HEADER: &str =
    "snr_db,method,trials,ser,mismatch_rate,mean_adds,mean_mults,mean_divs,mean_sqrts";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub constellation: String,
    pub snr_db_list: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub enum_cap: usize,
}

impl ExperimentConfig {
    pub fn new(
        m: usize,
        n: usize,
        constellation: &str,
        snr_db_list: Vec<f64>,
        trials: u64,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            m,
            n,
            constellation: constellation.to_string(),
            snr_db_list,
            trials,
            seed,
            methods: Method::ALL.to_vec(),
            enum_cap: DEFAULT_ENUM_CAP,
        }
    }

    pub fn validate(&self) -> Result<Constellation> {
        if self.n == 0 || self.m < self.n {
            return Err(Error::InvalidConfig(format!(
                "need m >= n >= 1, got m={}, n={}",
                self.m, self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.snr_db_list.is_empty() || self.snr_db_list.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidConfig("need at least one valid SNR".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("need at least one method".into()));
        }
        let c: Constellation = self.constellation.parse()?;
        CandidateSet::new(&c, self.n, self.enum_cap)?;
        Ok(c)
    }
}

/// One `(snr, method)` cell of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub snr_db: f64,
    pub method: Method,
    pub trials: u64,
    pub symbol_error_rate: f64,
    pub vector_mismatch_rate_vs_oracle: f64,
    pub mean_adds: f64,
    pub mean_mults: f64,
    pub mean_divs: f64,
    pub mean_sqrts: f64,
}

impl ExperimentRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.snr_db,
            self.method,
            self.trials,
            self.symbol_error_rate,
            self.vector_mismatch_rate_vs_oracle,
            self.mean_adds,
            self.mean_mults,
            self.mean_divs,
            self.mean_sqrts
        )
    }
}

pub fn to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, Default)]
struct MethodTally {
    symbol_errors: u64,
    mismatches: u64,
    ops: OpCounts,
}

pub fn run_montecarlo(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_montecarlo_with(cfg, Execution::default())
}

/// Runs every configured method on the same instances. Trial `t` of every
/// SNR point uses seed `cfg.seed ^ t`; each method runs with a fresh
/// [`OpCounter`], and the oracle is always evaluated (uncounted unless it is
/// one of the methods) to score mismatches.
pub fn run_montecarlo_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<ExperimentRow>> {
    let c = cfg.validate()?;
    let cands = CandidateSet::new(&c, cfg.n, cfg.enum_cap)?;
    let mut rows = Vec::with_capacity(cfg.snr_db_list.len() * cfg.methods.len());

    for &snr in &cfg.snr_db_list {
        let per_trial = map_trials(cfg.trials, exec, |t| {
            let inst = sample_instance(cfg.m, cfg.n, snr, &c, trial_seed(cfg.seed, t))?;
            let oracle = oracle_ml(&mut NullTally, &inst.a, &inst.y, &cands)?;
            cfg.methods
                .iter()
                .map(|&method| {
                    let mut counter = OpCounter::new();
                    let res = detect(&mut counter, method, &inst.a, &inst.y, &cands)?;
                    let symbol_errors = cands
                        .symbols(res.best_index)
                        .iter()
                        .zip(&inst.x_symbols)
                        .filter(|(a, b)| a != b)
                        .count() as u64;
                    Ok(MethodTally {
                        symbol_errors,
                        mismatches: u64::from(res.best_index != oracle.best_index),
                        ops: counter.total(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;

        for (mi, &method) in cfg.methods.iter().enumerate() {
            let sum = per_trial
                .iter()
                .fold(MethodTally::default(), |mut acc, trial| {
                    acc.symbol_errors += trial[mi].symbol_errors;
                    acc.mismatches += trial[mi].mismatches;
                    acc.ops += trial[mi].ops;
                    acc
                });
            let trials = cfg.trials as f64;
            rows.push(ExperimentRow {
                snr_db: snr,
                method,
                trials: cfg.trials,
                symbol_error_rate: sum.symbol_errors as f64 / (trials * cfg.n as f64),
                vector_mismatch_rate_vs_oracle: sum.mismatches as f64 / trials,
                mean_adds: sum.ops.adds as f64 / trials,
                mean_mults: sum.ops.mults as f64 / trials,
                mean_divs: sum.ops.divs as f64 / trials,
                mean_sqrts: sum.ops.sqrts as f64 / trials,
            });
        }
    }
    Ok(rows)
}

/// Counters from the four pipelines compared by the ledger, all run on the
/// same `(A, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerCounters {
    pub qr_solve: OpCounter,
    pub qdrd_solve: OpCounter,
    pub qdrd_weighted: OpCounter,
    pub qdrd_unweighted: OpCounter,
}

pub fn measure_ledger(
    a: &ComplexMatrix,
    y: &[C64],
    cands: &CandidateSet<'_>,
) -> Result<LedgerCounters> {
    let mut qr_solve = OpCounter::new();
    solve_ls_qr(&mut qr_solve, a, y)?;
    let mut qdrd_solve = OpCounter::new();
    solve_ls_qdrd(&mut qdrd_solve, a, y)?;
    let mut qdrd_weighted = OpCounter::new();
    detect(&mut qdrd_weighted, Method::QdrdWeighted, a, y, cands)?;
    let mut qdrd_unweighted = OpCounter::new();
    detect(&mut qdrd_unweighted, Method::QdrdUnweighted, a, y, cands)?;
    Ok(LedgerCounters {
        qr_solve,
        qdrd_solve,
        qdrd_weighted,
        qdrd_unweighted,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerCheck {
    pub name: &'static str,
    pub expected: i64,
    pub actual: i64,
}

impl LedgerCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpReport {
    pub n: usize,
    pub p: usize,
    pub checks: Vec<LedgerCheck>,
    pub counters: LedgerCounters,
}

impl OpReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(LedgerCheck::passed)
    }

    pub fn check(&self, name: &str) -> Option<&LedgerCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Exact integer ledger:
///
/// * the QDRD solve and weighted detection use no square roots;
/// * the QR solve uses `n` square roots and `n` back-substitution divisions;
/// * the QDRD solve uses no back-substitution divisions;
/// * weighting costs exactly `n * p` extra detection multiplies.
pub fn op_report(counters: &LedgerCounters, n: usize, p: usize) -> OpReport {
    let i = |v: u64| v as i64;
    let c = counters;
    let checks = vec![
        LedgerCheck {
            name: "qdrd_solve_sqrts",
            expected: 0,
            actual: i(c.qdrd_solve.total().sqrts),
        },
        LedgerCheck {
            name: "qdrd_weighted_detect_sqrts",
            expected: 0,
            actual: i(c.qdrd_weighted.total().sqrts),
        },
        LedgerCheck {
            name: "qr_solve_sqrts",
            expected: n as i64,
            actual: i(c.qr_solve.total().sqrts),
        },
        LedgerCheck {
            name: "qr_backsub_divs",
            expected: n as i64,
            actual: i(c.qr_solve.get(Phase::BackSubstitution).divs),
        },
        LedgerCheck {
            name: "qdrd_backsub_divs",
            expected: 0,
            actual: i(c.qdrd_solve.get(Phase::BackSubstitution).divs),
        },
        LedgerCheck {
            name: "weighted_minus_unweighted_detect_mults",
            expected: (n * p) as i64,
            actual: i(c.qdrd_weighted.get(Phase::Detection).mults)
                - i(c.qdrd_unweighted.get(Phase::Detection).mults),
        },
    ];
    OpReport {
        n,
        p,
        checks,
        counters: counters.clone(),
    }
}

impl fmt::Display for OpReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ledger n={} p={}", self.n, self.p)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {} expected={} actual={}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.expected,
                c.actual
            )?;
        }
        let pipelines = [
            ("qr-solve", &self.counters.qr_solve),
            ("qdrd-solve", &self.counters.qdrd_solve),
            ("qdrd-weighted", &self.counters.qdrd_weighted),
            ("qdrd-unweighted", &self.counters.qdrd_unweighted),
        ];
        for (name, counter) in pipelines {
            writeln!(f, "pipeline {name}")?;
            writeln!(f, "{counter}")?;
        }
        Ok(())
    }
}

/// A counterexample instance as written to disk.
///
/// ```text
/// @constellation qam16
/// @snr_db 12
/// @seed 7
/// @trial 3
/// @noise_var 0.126191468896039
/// @x_symbols 5 9
/// @oracle_index 89
/// @unweighted_index 88
/// @A
/// 2 2
/// ...
/// @y
/// ...
/// @x_true
/// ...
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct StoredCounterexample {
    pub constellation: String,
    pub snr_db: f64,
    /// Search seed; the instance itself was drawn from `seed ^ trial`.
    pub seed: u64,
    pub trial: u64,
    pub noise_var: f64,
    pub x_symbols: Vec<usize>,
    pub oracle_index: usize,
    pub unweighted_index: usize,
    pub a: ComplexMatrix,
    pub y: ComplexVector,
    pub x_true: ComplexVector,
}

impl StoredCounterexample {
    pub fn new(ce: &Counterexample, constellation: &Constellation, snr_db: f64) -> Self {
        StoredCounterexample {
            constellation: constellation.name().to_string(),
            snr_db,
            seed: ce.seed ^ ce.trial,
            trial: ce.trial,
            noise_var: ce.instance.noise_var,
            x_symbols: ce.instance.x_symbols.clone(),
            oracle_index: ce.oracle.best_index,
            unweighted_index: ce.unweighted.best_index,
            a: ce.instance.a.clone(),
            y: ce.instance.y.clone(),
            x_true: ce.instance.x_true.clone(),
        }
    }

    pub fn to_doc(&self) -> SectionDoc {
        let mut doc = SectionDoc::default();
        doc.push_values("constellation", self.constellation.clone());
        doc.push_values("snr_db", fmt_real(self.snr_db));
        doc.push_values("seed", self.seed.to_string());
        doc.push_values("trial", self.trial.to_string());
        doc.push_values("noise_var", fmt_real(self.noise_var));
        let syms: Vec<String> = self.x_symbols.iter().map(usize::to_string).collect();
        doc.push_values("x_symbols", syms.join(" "));
        doc.push_values("oracle_index", self.oracle_index.to_string());
        doc.push_values("unweighted_index", self.unweighted_index.to_string());
        doc.push_matrix("A", self.a.clone());
        doc.push_matrix("y", self.y.to_column());
        doc.push_matrix("x_true", self.x_true.to_column());
        doc
    }

    pub fn to_text(&self) -> String {
        self.to_doc().render()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc = SectionDoc::parse(text)?;
        fn num<T: std::str::FromStr>(doc: &SectionDoc, key: &str) -> Result<T> {
            let v = doc.values(key)?;
            v.parse().map_err(|_| Error::Parse {
                line: 0,
                msg: format!("invalid @{key} value `{v}`"),
            })
        }
        let x_symbols = doc
            .values("x_symbols")?
            .split_whitespace()
            .map(|s| {
                s.parse().map_err(|_| Error::Parse {
                    line: 0,
                    msg: format!("invalid symbol index `{s}`"),
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(StoredCounterexample {
            constellation: doc.values("constellation")?.to_string(),
            snr_db: num(&doc, "snr_db")?,
            seed: num(&doc, "seed")?,
            trial: num(&doc, "trial")?,
            noise_var: num(&doc, "noise_var")?,
            x_symbols,
            oracle_index: num(&doc, "oracle_index")?,
            unweighted_index: num(&doc, "unweighted_index")?,
            a: doc.matrix("A")?.clone(),
            y: doc.matrix("y")?.to_vector()?,
            x_true: doc.matrix("x_true")?.to_vector()?,
        })
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "counterexample constellation={} snr_db={} seed={} trial={} oracle_index={} unweighted_index={}",
            self.constellation,
            fmt_real(self.snr_db),
            self.seed,
            self.trial,
            self.oracle_index,
            self.unweighted_index
        )
    }
}
