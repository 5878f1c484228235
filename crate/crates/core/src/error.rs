use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singularity orders must sum to 4g-4 with g >= 1 (got sum {sum})")]
    BadSum { sum: i64 },
    #[error("order {order} is not allowed (orders are -1 or positive)")]
    BadOrder { order: i64 },
    #[error("pattern {pattern} is empty: no quadratic differential realizes it")]
    ExceptionalPattern { pattern: String },
    #[error("cannot parse '{input}': {reason}")]
    Syntax { input: String, reason: String },
    #[error("symbol '{symbol}' occurs {count} times (expected 2)")]
    BadMultiplicity { symbol: String, count: usize },
    #[error("permutation is reducible (admits no suspension)")]
    Reducible,
    #[error("permutation is abelian: no symbol repeats within a row")]
    AbelianInput,
    #[error("no catalog entry for stratum {stratum} component '{component}'")]
    NotInCatalog { stratum: String, component: String },
    #[error("compared lengths are tied within tolerance")]
    TieLengths,
    #[error("induction move undefined: {0}")]
    MoveUndefined(String),
    #[error("acceleration exceeded {cap} consecutive wins")]
    WinOverflow { cap: u64 },
    #[error("length became non-positive or non-finite during induction")]
    LengthUnderflow,
    #[error("{what}: computed {got}, expected {expected}")]
    RankMismatch { what: String, got: usize, expected: usize },
    #[error("step budget {steps} too small for {batches} batches")]
    InsufficientSteps { steps: u64, batches: usize },
    #[error("direction {index} has parity defect {defect:.3}")]
    ParityAmbiguous { index: usize, defect: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("path endpoint is not on the horizontal skeleton")]
    PathNotOnSkeleton,
    #[error("orbit start hit a discontinuity")]
    StartOnOrbitOfDiscontinuity,
    #[error("only {got} usable checkpoints (need {need})")]
    InsufficientCheckpoints { got: usize, need: usize },
    #[error("invalid square-tiled surface: {0}")]
    BadSurface(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
