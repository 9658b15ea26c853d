use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime in [7, 32768)")]
    InvalidModulus(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("symbol value {value} is not below the modulus {q}")]
    SymbolOutOfRange { value: u32, q: u32 },
    #[error("k = {0} is out of range (expected 2..=14)")]
    InvalidK(usize),
    #[error("modulus {q} is too small for k = {k} (need q >= 2k + 3)")]
    ModulusTooSmall { k: usize, q: u32 },
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("no valid coefficients exist for k = {k} over F_{q}")]
    NoCoefficients { k: usize, q: u32 },
    #[error("index {index} out of range: {what}")]
    IndexOutOfRange { what: &'static str, index: usize },
    #[error("index {j} is not of the form mu * 2^(l+1) + nu with nu < 2^l (l = {l}, k = {k})")]
    BadDecomposition { j: usize, l: usize, k: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("node {0} does not exist in this code")]
    InvalidNode(usize),
    #[error("only {available} of {needed} required nodes are available")]
    NotEnoughNodes { available: usize, needed: usize },
    #[error("missing download from helper node {0}")]
    MissingHelper(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("corrupt data: {0}")]
    Corrupt(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cluster: {0}")]
    Cluster(String),
    #[error("node {node} cannot be repaired: helper node(s) {dead:?} are also dead; rebuild from any k nodes by decoding with `repair --fallback`")]
    InsufficientHelpers { node: usize, dead: Vec<usize> },
    #[error("refused: {0}")]
    Refused(String),
}

impl Error {
    /// Process exit status: 1 usage, 2 integrity, 3 unrecoverable data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotEnoughNodes { .. } => 3,
            Error::SymbolOutOfRange { .. }
            | Error::InvalidCoefficients(_)
            | Error::LengthMismatch { .. }
            | Error::Singular
            | Error::Corrupt(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
