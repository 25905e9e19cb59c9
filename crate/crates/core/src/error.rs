use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("state is aphysical (eigenvalue {0:e})")]
    Aphysical(f64),
    #[error("statevector norm is {0}, expected 1")]
    NotNormalized(f64),
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("qubit index {0} listed twice")]
    DuplicateQubit(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid Pauli letter {0:?}")]
    InvalidPauli(char),
    #[error("invalid bitstring {0:?}")]
    InvalidBitstring(String),
    #[error("invalid Hamiltonian term: {0}")]
    InvalidHamiltonian(String),
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("measurement basis {0} contains an identity letter")]
    IdentityInBasis(String),
    #[error("invalid shot dictionary: {0}")]
    InvalidDictionary(String),
    #[error("no dictionary for basis {0} (needed for marginal)")]
    MissingBasis(String),
    #[error("missing expectation value for {0}")]
    MissingExpectation(String),
    #[error("identity expectation is {0}, expected 1")]
    IdentityExpectation(f64),
    #[error("register of {requested} qubits exceeds the cap of {cap}")]
    RegisterTooLarge { requested: usize, cap: usize },
    #[error("infeasible complementary set: {0}")]
    InfeasibleSet(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
