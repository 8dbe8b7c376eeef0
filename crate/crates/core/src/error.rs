use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not an odd prime modulus in [3, 2^32)")]
    InvalidModulus(u64),

    #[error("dimension {n} is outside the supported range [1, {max}]")]
    DimensionOutOfRange { n: usize, max: usize },

    #[error("dimension {n} exceeds the enumeration guard ({bits} free bits > {max_bits})")]
    EnumerationTooLarge { n: usize, bits: usize, max_bits: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("residue {value} is not reduced mod {q}")]
    UnreducedEntry { value: u64, q: u64 },

    #[error("kernel of size {q}^{nullity} exceeds the enumeration guard")]
    KernelTooLarge { q: u64, nullity: usize },

    #[error("character sum over {q}^{n} frequencies exceeds the term guard of {limit}")]
    TooManyTerms { q: u64, n: usize, limit: u64 },

    #[error("integer overflow while accumulating {0}")]
    Overflow(&'static str),

    #[error("no vector outside the structured family found after {attempts} attempts")]
    RejectionFailed { attempts: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
