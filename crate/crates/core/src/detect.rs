//! Exhaustive finite-set least-squares detectors.
//!
//! All four detectors scan the same candidate list in the same order and
//! keep the first strict minimum, so ties always go to the lowest candidate
//! index. They differ only in the metric:
//!
//! | method            | metric for candidate `x`                    |
//! |-------------------|---------------------------------------------|
//! | `oracle`          | `‖y − A x‖²`                                |
//! | `qr`              | `‖Qᴴy − R x‖²`                              |
//! | `qdrd-weighted`   | `Σᵢ d′ᵢ · |(Q′ᴴy)ᵢ − (R′x)ᵢ|²`               |
//! | `qdrd-unweighted` | `Σᵢ |(Q′ᴴy)ᵢ − (R′x)ᵢ|²`                     |
//!
//! The first three share an argmin: `qr` differs from `oracle` by the
//! constant `‖y‖² − ‖Qᴴy‖²` and `qdrd-weighted` equals `qr` term by term.
//! Dropping the weights breaks that: `qdrd-unweighted` can rank candidates
//! differently and pick another vector.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::factor::{qdrd_sqrt_free, thin_qr_mgs};
use crate::matrix::{adjoint_mul_vec, arith, ComplexMatrix, ComplexVector, C64};
use crate::mimo::{sample_instance_with, CandidateSet, ChannelKind, Constellation, MimoInstance};
use crate::opcount::{NullTally, Phase, Tally};
use crate::random::trial_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Oracle,
    Qr,
    QdrdWeighted,
    QdrdUnweighted,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Oracle,
        Method::Qr,
        Method::QdrdWeighted,
        Method::QdrdUnweighted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Qr => "qr",
            Method::QdrdWeighted => "qdrd-weighted",
            Method::QdrdUnweighted => "qdrd-unweighted",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    pub best_index: usize,
    pub best_vector: ComplexVector,
    pub min_metric: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlrResult {
    /// One entry per label bit: min metric over candidates with the bit at 0
    /// minus min metric over candidates with the bit at 1. Positive favours 1.
    pub llr: Vec<f64>,
}

/// A metric ready to be evaluated on candidates.
#[derive(Clone, Debug)]
pub enum PreparedMetric {
    /// `‖y − A x‖²`
    Direct { a: ComplexMatrix, y: ComplexVector },
    /// `Σᵢ wᵢ |zᵢ − (T x)ᵢ|²` for upper-triangular `T`, with `wᵢ = 1` when
    /// `weights` is `None`.
    Triangular {
        t: ComplexMatrix,
        z: ComplexVector,
        weights: Option<Vec<f64>>,
    },
}

impl PreparedMetric {
    /// Factorizes `a` as `method` requires and projects `y`. Factorization
    /// work is counted in its own phases; the projection lands under
    /// [`Phase::Detection`].
    pub fn prepare<T: Tally + ?Sized>(
        tally: &mut T,
        method: Method,
        a: &ComplexMatrix,
        y: &[C64],
    ) -> Result<Self> {
        if y.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                op: "detect",
                detail: format!(
                    "A is {}x{} but y has length {}",
                    a.rows(),
                    a.cols(),
                    y.len()
                ),
            });
        }
        Ok(match method {
            Method::Oracle => PreparedMetric::Direct {
                a: a.clone(),
                y: y.to_vec().into(),
            },
            Method::Qr => {
                let f = thin_qr_mgs(tally, a)?;
                tally.set_phase(Phase::Detection);
                let z = adjoint_mul_vec(tally, &f.q, y)?;
                PreparedMetric::Triangular {
                    t: f.r,
                    z,
                    weights: None,
                }
            }
            Method::QdrdWeighted | Method::QdrdUnweighted => {
                let f = qdrd_sqrt_free(tally, a)?;
                tally.set_phase(Phase::Detection);
                let z = adjoint_mul_vec(tally, &f.q_prime, y)?;
                let weights = (method == Method::QdrdWeighted).then_some(f.d_prime);
                PreparedMetric::Triangular {
                    t: f.r_prime,
                    z,
                    weights,
                }
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            PreparedMetric::Direct { a, .. } => a.cols(),
            PreparedMetric::Triangular { t, .. } => t.cols(),
        }
    }

    /// Metric of one candidate. Per candidate of length `n`, the weighted
    /// triangular form costs exactly `n` more real multiplies than the
    /// unweighted one.
    pub fn eval<T: Tally + ?Sized>(&self, tally: &mut T, x: &[C64]) -> f64 {
        let mut acc: Option<f64> = None;
        let mut push = |tally: &mut T, term: f64| {
            acc = Some(match acc {
                None => term,
                Some(s) => arith::radd(tally, s, term),
            });
        };
        match self {
            PreparedMetric::Direct { a, y } => {
                for (i, &yi) in y.iter().enumerate() {
                    let mut s = arith::mul(tally, a[(i, 0)], x[0]);
                    for (j, &xj) in x.iter().enumerate().skip(1) {
                        let p = arith::mul(tally, a[(i, j)], xj);
                        s = arith::add(tally, s, p);
                    }
                    let e = arith::sub(tally, yi, s);
                    let term = arith::abs_sq(tally, e);
                    push(tally, term);
                }
            }
            PreparedMetric::Triangular { t, z, weights } => {
                let n = t.cols();
                for i in 0..n {
                    let mut s = arith::mul(tally, t[(i, i)], x[i]);
                    for (j, &xj) in x.iter().enumerate().skip(i + 1) {
                        let p = arith::mul(tally, t[(i, j)], xj);
                        s = arith::add(tally, s, p);
                    }
                    let e = arith::sub(tally, z[i], s);
                    let mut term = arith::abs_sq(tally, e);
                    if let Some(w) = weights {
                        term = arith::rmul(tally, w[i], term);
                    }
                    push(tally, term);
                }
            }
        }
        acc.unwrap_or(0.0)
    }
}

fn check_dims(metric: &PreparedMetric, cands: &CandidateSet<'_>) -> Result<()> {
    if metric.dim() != cands.dim() {
        return Err(Error::DimensionMismatch {
            op: "detect",
            detail: format!(
                "channel has {} columns but candidates have length {}",
                metric.dim(),
                cands.dim()
            ),
        });
    }
    Ok(())
}

/// Calls `visit(k, metric)` for every candidate in enumeration order.
fn scan<T: Tally + ?Sized>(
    tally: &mut T,
    metric: &PreparedMetric,
    cands: &CandidateSet<'_>,
    mut visit: impl FnMut(usize, f64),
) {
    tally.set_phase(Phase::Detection);
    let pts = cands.constellation().points();
    let mut sym = vec![0usize; cands.dim()];
    let mut x = vec![C64::default(); cands.dim()];
    for k in 0..cands.len() {
        cands.decode_into(k, &mut sym);
        for (xi, &s) in x.iter_mut().zip(&sym) {
            *xi = pts[s];
        }
        visit(k, metric.eval(tally, &x));
    }
}

/// Exhaustive argmin of a prepared metric, first minimum wins.
pub fn argmin<T: Tally + ?Sized>(
    tally: &mut T,
    metric: &PreparedMetric,
    cands: &CandidateSet<'_>,
) -> Result<DetectionResult> {
    check_dims(metric, cands)?;
    let mut best = (0usize, f64::INFINITY);
    scan(tally, metric, cands, |k, d| {
        if d < best.1 {
            best = (k, d);
        }
    });
    Ok(DetectionResult {
        best_index: best.0,
        best_vector: cands.vector(best.0),
        min_metric: best.1,
    })
}

/// Metric of every candidate, in enumeration order.
pub fn all_metrics<T: Tally + ?Sized>(
    tally: &mut T,
    metric: &PreparedMetric,
    cands: &CandidateSet<'_>,
) -> Result<Vec<f64>> {
    check_dims(metric, cands)?;
    let mut out = Vec::with_capacity(cands.len());
    scan(tally, metric, cands, |_, d| out.push(d));
    Ok(out)
}

pub fn detect<T: Tally + ?Sized>(
    tally: &mut T,
    method: Method,
    a: &ComplexMatrix,
    y: &[C64],
    cands: &CandidateSet<'_>,
) -> Result<DetectionResult> {
    let metric = PreparedMetric::prepare(tally, method, a, y)?;
    argmin(tally, &metric, cands)
}

/// Maximum-likelihood reference: `argmin ‖y − A x‖²` with no factorization.
pub fn oracle_ml<T: Tally + ?Sized>(
    tally: &mut T,
    a: &ComplexMatrix,
    y: &[C64],
    cands: &CandidateSet<'_>,
) -> Result<DetectionResult> {
    detect(tally, Method::Oracle, a, y, cands)
}

pub fn detect_qr<T: Tally + ?Sized>(
    tally: &mut T,
    a: &ComplexMatrix,
    y: &[C64],
    cands: &CandidateSet<'_>,
) -> Result<DetectionResult> {
    detect(tally, Method::Qr, a, y, cands)
}

/// QDRD detector that keeps the `D'` weights. Square-root free end to end
/// and equivalent to [`oracle_ml`].
pub fn detect_qdrd_weighted<T: Tally + ?Sized>(
    tally: &mut T,
    a: &ComplexMatrix,
    y: &[C64],
    cands: &CandidateSet<'_>,
) -> Result<DetectionResult> {
    detect(tally, Method::QdrdWeighted, a, y, cands)
}

/// QDRD detector that drops the `D'` weights. Not equivalent to
/// [`oracle_ml`] in general.
pub fn detect_qdrd_unweighted<T: Tally + ?Sized>(
    tally: &mut T,
    a: &ComplexMatrix,
    y: &[C64],
    cands: &CandidateSet<'_>,
) -> Result<DetectionResult> {
    detect(tally, Method::QdrdUnweighted, a, y, cands)
}

/// Per-bit differences of partition minima of `metrics`.
pub fn llr_from_metrics<T: Tally + ?Sized>(
    tally: &mut T,
    metrics: &[f64],
    cands: &CandidateSet<'_>,
) -> LlrResult {
    let llr = (0..cands.label_bits())
        .map(|b| {
            let (mut min0, mut min1) = (f64::INFINITY, f64::INFINITY);
            for (k, &d) in metrics.iter().enumerate() {
                let slot = if cands.bit(k, b) {
                    &mut min1
                } else {
                    &mut min0
                };
                if d < *slot {
                    *slot = d;
                }
            }
            arith::radd(tally, min0, -min1)
        })
        .collect();
    LlrResult { llr }
}

/// Soft output: one log-likelihood ratio per label bit, as raw metric
/// differences (no `1/σ²` scaling).
pub fn llr_soft<T: Tally + ?Sized>(
    tally: &mut T,
    method: Method,
    a: &ComplexMatrix,
    y: &[C64],
    cands: &CandidateSet<'_>,
) -> Result<LlrResult> {
    let metric = PreparedMetric::prepare(tally, method, a, y)?;
    let metrics = all_metrics(tally, &metric, cands)?;
    Ok(llr_from_metrics(tally, &metrics, cands))
}

/// An instance on which the unweighted QDRD detector disagrees with the
/// oracle, together with both decisions.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub trial: u64,
    pub seed: u64,
    pub instance: MimoInstance,
    pub oracle: DetectionResult,
    pub unweighted: DetectionResult,
}

/// Searches trials `0..max_trials` (trial `t` uses seed `seed ^ t`) for the
/// first instance where [`detect_qdrd_unweighted`] and [`oracle_ml`] pick
/// different candidates. `Ok(None)` when every trial agrees.
pub fn find_counterexample(
    m: usize,
    n: usize,
    c: &Constellation,
    snr_db: f64,
    max_trials: u64,
    seed: u64,
    cap: usize,
) -> Result<Option<Counterexample>> {
    find_counterexample_with(
        m,
        n,
        c,
        snr_db,
        max_trials,
        seed,
        cap,
        ChannelKind::Gaussian,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn find_counterexample_with(
    m: usize,
    n: usize,
    c: &Constellation,
    snr_db: f64,
    max_trials: u64,
    seed: u64,
    cap: usize,
    channel: ChannelKind,
) -> Result<Option<Counterexample>> {
    if max_trials == 0 {
        return Err(Error::InvalidConfig("max_trials must be at least 1".into()));
    }
    let cands = CandidateSet::new(c, n, cap)?;
    let probe = |trial: u64| -> Result<Option<Counterexample>> {
        let s = trial_seed(seed, trial);
        let instance = sample_instance_with(m, n, snr_db, c, s, channel)?;
        let oracle = oracle_ml(&mut NullTally, &instance.a, &instance.y, &cands)?;
        let unweighted = detect_qdrd_unweighted(&mut NullTally, &instance.a, &instance.y, &cands)?;
        Ok(
            (oracle.best_index != unweighted.best_index).then_some(Counterexample {
                trial,
                seed: s,
                instance,
                oracle,
                unweighted,
            }),
        )
    };
    crate::par::find_first(max_trials, crate::par::Execution::default(), probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::sq_norm2;
    use crate::mimo::{bit_partitions, make_qam, sample_instance, DEFAULT_ENUM_CAP};
    use crate::opcount::OpCounter;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("zf".parse::<Method>().is_err());
    }

    #[test]
    fn noiseless_recovers_truth_for_every_method() {
        let q = make_qam(16).unwrap();
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        let inst = sample_instance(3, 2, f64::INFINITY, &q, 6).unwrap();
        for m in [Method::Oracle, Method::Qr, Method::QdrdWeighted] {
            let r = detect(&mut NullTally, m, &inst.a, &inst.y, &cands).unwrap();
            assert_eq!(r.best_vector, inst.x_true, "{m}");
            assert_eq!(cands.symbols(r.best_index), inst.x_symbols);
        }
        let r = oracle_ml(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
        assert_eq!(r.min_metric, 0.0);
    }

    #[test]
    fn scalar_qpsk_nearest_point() {
        let q = make_qam(4).unwrap();
        let cands = CandidateSet::new(&q, 1, DEFAULT_ENUM_CAP).unwrap();
        let a = ComplexMatrix::identity(1);
        let y = [c(0.9, 0.8)];
        let r = oracle_ml(&mut NullTally, &a, &y, &cands).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.best_vector[0] - c(h, h)).norm() < 1e-15);
        let expected = (0.9 - h).powi(2) + (0.8 - h).powi(2);
        assert!((r.min_metric - expected).abs() < 1e-14);
    }

    #[test]
    fn oracle_is_no_worse_than_truth() {
        let q = make_qam(16).unwrap();
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        for s in 0..20 {
            let inst = sample_instance(2, 2, 5.0, &q, s).unwrap();
            let r = oracle_ml(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
            assert!(r.min_metric <= sq_norm2(&mut NullTally, &inst.noise) + 1e-12);
        }
    }

    #[test]
    fn qr_metric_offset_is_projection_residual() {
        let q = make_qam(4).unwrap();
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        let inst = sample_instance(4, 2, 8.0, &q, 21).unwrap();
        let o = oracle_ml(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
        let r = detect_qr(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
        assert_eq!(o.best_index, r.best_index);
        let f = thin_qr_mgs(&mut NullTally, &inst.a).unwrap();
        let z = adjoint_mul_vec(&mut NullTally, &f.q, &inst.y).unwrap();
        let offset = sq_norm2(&mut NullTally, &inst.y) - sq_norm2(&mut NullTally, &z);
        assert!((o.min_metric - r.min_metric - offset).abs() < 1e-9);
    }

    #[test]
    fn weighted_metric_equals_qr_metric_per_candidate() {
        let q = make_qam(16).unwrap();
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        let inst = sample_instance(4, 2, 12.0, &q, 2).unwrap();
        let qr = PreparedMetric::prepare(&mut NullTally, Method::Qr, &inst.a, &inst.y).unwrap();
        let w = PreparedMetric::prepare(&mut NullTally, Method::QdrdWeighted, &inst.a, &inst.y)
            .unwrap();
        let mq = all_metrics(&mut NullTally, &qr, &cands).unwrap();
        let mw = all_metrics(&mut NullTally, &w, &cands).unwrap();
        for (a, b) in mq.iter().zip(&mw) {
            assert!((a - b).abs() <= 1e-9 * a.max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn identity_channel_weights_are_one() {
        let q = make_qam(16).unwrap();
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        let inst = sample_instance_with(2, 2, 3.0, &q, 8, ChannelKind::Identity).unwrap();
        let o = oracle_ml(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
        let w = detect_qdrd_weighted(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
        let u = detect_qdrd_unweighted(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
        assert_eq!(o.best_index, w.best_index);
        assert_eq!(o.best_index, u.best_index);
        assert_eq!(w.min_metric, u.min_metric);
    }

    #[test]
    fn weighted_path_is_square_root_free_and_costs_n_per_candidate() {
        let q = make_qam(4).unwrap();
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        let inst = sample_instance(2, 2, 10.0, &q, 13).unwrap();
        let mut tw = OpCounter::new();
        let mut tu = OpCounter::new();
        detect_qdrd_weighted(&mut tw, &inst.a, &inst.y, &cands).unwrap();
        detect_qdrd_unweighted(&mut tu, &inst.a, &inst.y, &cands).unwrap();
        assert_eq!(tw.total().sqrts, 0);
        let extra = tw.get(Phase::Detection).mults - tu.get(Phase::Detection).mults;
        assert_eq!(extra, 2 * 16);
        assert_eq!(tw.get(Phase::Factorization), tu.get(Phase::Factorization));
        assert_eq!(tw.get(Phase::Detection).adds, tu.get(Phase::Detection).adds);
    }

    #[test]
    fn llr_matches_partition_minima() {
        let q = make_qam(4).unwrap();
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        let inst = sample_instance(3, 2, 6.0, &q, 44).unwrap();
        let metric = PreparedMetric::prepare(&mut NullTally, Method::Qr, &inst.a, &inst.y).unwrap();
        let metrics = all_metrics(&mut NullTally, &metric, &cands).unwrap();
        let llr = llr_soft(&mut NullTally, Method::Qr, &inst.a, &inst.y, &cands).unwrap();
        assert_eq!(llr.llr.len(), 4);
        for b in 0..4 {
            let part = bit_partitions(&q, 2, b, DEFAULT_ENUM_CAP).unwrap();
            let min_of = |s: &[usize]| s.iter().map(|&k| metrics[k]).fold(f64::INFINITY, f64::min);
            assert_eq!(llr.llr[b], min_of(&part.set2) - min_of(&part.set1));
        }
    }

    #[test]
    fn noiseless_llr_signs_follow_transmitted_bits() {
        let q = make_qam(4).unwrap();
        let cands = CandidateSet::new(&q, 1, DEFAULT_ENUM_CAP).unwrap();
        for sym in 0..4 {
            let y = [q.points()[sym]];
            let llr = llr_soft(
                &mut NullTally,
                Method::Qr,
                &ComplexMatrix::identity(1),
                &y,
                &cands,
            )
            .unwrap();
            for b in 0..2 {
                assert_eq!(
                    llr.llr[b] > 0.0,
                    q.label_bit(sym, b),
                    "symbol {sym} bit {b}"
                );
            }
        }
    }

    #[test]
    fn identity_channel_never_yields_counterexample() {
        let q = make_qam(16).unwrap();
        let found = find_counterexample_with(
            2,
            2,
            &q,
            12.0,
            500,
            7,
            DEFAULT_ENUM_CAP,
            ChannelKind::Identity,
        )
        .unwrap();
        assert!(found.is_none());
    }

    #[test]
    fn counterexample_search_is_deterministic() {
        let q = make_qam(16).unwrap();
        let a = find_counterexample(2, 2, &q, 12.0, 10_000, 7, DEFAULT_ENUM_CAP)
            .unwrap()
            .unwrap();
        let b = find_counterexample(2, 2, &q, 12.0, 10_000, 7, DEFAULT_ENUM_CAP)
            .unwrap()
            .unwrap();
        assert_eq!(a, b);
        assert_ne!(a.oracle.best_index, a.unweighted.best_index);
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        let w = detect_qdrd_weighted(&mut NullTally, &a.instance.a, &a.instance.y, &cands).unwrap();
        assert_eq!(w.best_index, a.oracle.best_index);
        // earlier trials all agree
        for t in 0..a.trial {
            let inst = sample_instance(2, 2, 12.0, &q, trial_seed(7, t)).unwrap();
            let o = oracle_ml(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
            let u = detect_qdrd_unweighted(&mut NullTally, &inst.a, &inst.y, &cands).unwrap();
            assert_eq!(o.best_index, u.best_index);
        }
    }

    #[test]
    fn dimension_errors() {
        let q = make_qam(4).unwrap();
        let cands = CandidateSet::new(&q, 3, DEFAULT_ENUM_CAP).unwrap();
        let a = ComplexMatrix::identity(2);
        assert!(oracle_ml(&mut NullTally, &a, &[c(0.0, 0.0); 2], &cands).is_err());
        let cands = CandidateSet::new(&q, 2, DEFAULT_ENUM_CAP).unwrap();
        assert!(oracle_ml(&mut NullTally, &a, &[c(0.0, 0.0); 3], &cands).is_err());
        let singular = ComplexMatrix::zeros(2, 2);
        assert!(
            detect_qr(&mut NullTally, &singular, &[c(0.0, 0.0); 2], &cands)
                .unwrap_err()
                .is_numerical()
        );
    }
}
