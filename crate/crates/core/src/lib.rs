//! Square-root-free QDRD and classical QR factorizations, least-squares
//! solvers, and exhaustive finite-set detectors, all instrumented with
//! real-operation counters.
//!
//! The library shows two things side by side:
//!
//! * for unconstrained least squares, `A = Q' D' R'` can be solved from
//!   `R' x = Q'^H y` alone. The normalizer `D'` drops out and neither square
//!   roots nor back-substitution divisions are needed ([`lsq`]);
//! * for least squares over a finite set (MIMO detection), dropping `D'`
//!   changes which candidate is closest. Keeping it as per-dimension weights
//!   restores exactness at the price of `n` extra multiplies per candidate
//!   ([`detect`]).
//!
//! ```
//! use qdrd_core::prelude::*;
//!
//! let a = ComplexMatrix::from_real(2, 2, &[3.0, 1.0, 4.0, 2.0]).unwrap();
//! let mut ops = OpCounter::new();
//! let f = qdrd_sqrt_free(&mut ops, &a).unwrap();
//! assert!((f.d_prime[0] - 25.0).abs() < 1e-12);
//! assert_eq!(ops.total().sqrts, 0);
//! ```

pub mod detect;
pub mod error;
pub mod factor;
pub mod harness;
pub mod lsq;
pub mod matrix;
pub mod mimo;
pub mod opcount;
pub mod par;
pub mod random;
pub mod textio;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::detect::{
        detect, detect_qdrd_unweighted, detect_qdrd_weighted, detect_qr, find_counterexample,
        llr_soft, oracle_ml, Counterexample, DetectionResult, LlrResult, Method,
    };
    pub use crate::error::{Error, Result};
    pub use crate::factor::{
        full_qr_householder, qdrd_sqrt_free, relate_qdrd_to_qr, thin_qr_mgs, FullQrFactors,
        QdrdFactors, QrFactors,
    };
    pub use crate::harness::{
        measure_ledger, op_report, run_montecarlo, to_csv, ExperimentConfig, ExperimentRow,
        OpReport, StoredCounterexample,
    };
    pub use crate::lsq::{
        back_substitute, back_substitute_unit_diag, solve_ls_qdrd, solve_ls_qr, LsSolution,
    };
    pub use crate::matrix::{hermitian, matmul, sq_norm2, ComplexMatrix, ComplexVector, C64};
    pub use crate::mimo::{
        bit_partitions, enumerate_vectors, make_qam, sample_instance, BitPartition, CandidateSet,
        Constellation, MimoInstance,
    };
    pub use crate::opcount::{NullTally, OpCounter, OpCounts, Phase, Tally};
    pub use crate::par::Execution;
}
