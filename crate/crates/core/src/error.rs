use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("matrix is rank deficient: column {column} has squared residual norm {value:e}")]
    RankDeficient { column: usize, value: f64 },

    #[error("singular triangular system: zero diagonal at row {row}")]
    SingularDiagonal { row: usize },

    #[error("normalizer entry {index} must be positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error(
        "enumeration of {requested} candidates exceeds the cap of {cap}; \
         reduce n or the constellation order (or raise QDRD_ENUM_CAP)"
    )]
    EnumerationCap { requested: String, cap: usize },

    #[error("unsupported QAM order {0}; expected 4, 16 or 64")]
    UnsupportedOrder(usize),

    #[error("unknown constellation `{0}`; expected qam4, qam16 or qam64")]
    UnknownConstellation(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("bit index {index} out of range for {bits} label bits")]
    BitIndexOutOfRange { index: usize, bits: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the numbers themselves rather than by
    /// how the library was called.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::SingularDiagonal { .. }
                | Error::NonPositiveWeight { .. }
        )
    }
}
