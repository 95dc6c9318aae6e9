use thiserror::Error;

/// Errors raised anywhere in the compiler and simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DaqcError {
    #[error("{n_qubits} qubits exceeds the dense limit of {max}")]
    DimensionOverflow { n_qubits: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid Pauli word `{0}`")]
    InvalidWord(String),

    #[error("non-finite coefficient {value} on term {word}")]
    NonFiniteCoefficient { word: String, value: f64 },

    #[error("rotation axis ({0}, {1}, {2}) is not normalized")]
    NonNormalizedAxis(f64, f64, f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported axis label `{0}`")]
    UnsupportedAxis(String),

    #[error("qubit pair ({0}, {1}) is not an ordered pair within range")]
    InvalidPair(usize, usize),

    #[error(
        "sign matrix is singular for N={n_qubits} (the N=4 all-to-all corner case); \
         enable the augmented generator fallback"
    )]
    SingularGeneratorSet { n_qubits: usize },

    #[error("resource coupling on pair ({0}, {1}) is zero but the target needs it")]
    ZeroResourceCoupling(usize, usize),

    #[error("no negative-time remediation applies: {0}")]
    NoRemediation(String),

    #[error("target term {0} is not supported by this compiler")]
    UnsupportedTerm(String),

    #[error("pair system for qubits ({0}, {1}) is singular (condition {2:e})")]
    SingularPairSystem(usize, usize, f64),

    #[error("O_XX generators overlap on qubit {0}")]
    OverlappingGenerators(usize),

    #[error("rank deficient: rank {rank} < {needed} required coefficients; re-seed rotation layers")]
    RankDeficient { rank: usize, needed: usize },

    #[error("least-squares residual {0:e} exceeds tolerance {1:e}")]
    ResidualTooLarge(f64, f64),

    #[error("analog block {index} has negative duration {duration} without a sign-inversion flag")]
    NegativeDuration { index: usize, duration: f64 },

    #[error("sign-inverted analog block {0} cannot run in banged mode")]
    InvertedBlockInBanged(usize),

    #[error("pulse windows overlap near t={time}: pulse width {width} too large")]
    PulseOverlap { time: f64, width: f64 },

    #[error("rotation layer {0} has no principal-branch generator")]
    GeneratorUndefined(usize),

    #[error("schedule format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, DaqcError>;
