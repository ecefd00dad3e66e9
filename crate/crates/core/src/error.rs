use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("invalid discriminant {0}")]
    InvalidDiscriminant(i64),
    #[error("discriminant {0} exceeds the supported class group range")]
    DiscriminantTooLarge(i64),
    #[error("forms of discriminants {0} and {1} cannot be composed")]
    DiscriminantMismatch(i64, i64),
    #[error("n = {n} has residue {residue} mod 8, outside the required classes")]
    WrongResidueClass { n: u64, residue: u8 },
    #[error("{0} prime factors exceed the supported maximum of {1}")]
    TooManyPrimes(usize, usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("root number of E_{n} is {sign}, incompatible with derivative order {order}")]
    SignMismatch { n: u64, sign: i8, order: u8 },
    #[error("point with u = 0 lies in the kernel of the isogeny")]
    SingularInput,
    #[error("{0} is outside the supported range")]
    OutOfSupportedRange(u64),
}

impl Error {
    /// Stable machine-readable tag for reports and CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid input",
            Error::NotSquarefree(_) => "not squarefree",
            Error::InvalidDiscriminant(_) => "invalid discriminant",
            Error::DiscriminantTooLarge(_) => "discriminant too large",
            Error::DiscriminantMismatch(..) => "discriminant mismatch",
            Error::WrongResidueClass { .. } => "wrong residue class",
            Error::TooManyPrimes(..) => "too many primes",
            Error::NotPrime(_) => "not prime",
            Error::SignMismatch { .. } => "sign mismatch",
            Error::SingularInput => "singular input",
            Error::OutOfSupportedRange(_) => "out of supported range",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
