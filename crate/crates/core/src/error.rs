use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be at least 3, got {0}")]
    ModulusTooSmall(u32),

    #[error("generator set must contain at least one offset")]
    EmptyGeneratorSet,

    #[error("offset {offset} outside [1, {max}] for modulus {modulus}")]
    OffsetOutOfRange { offset: u32, max: u32, modulus: u32 },

    #[error("gcd(0, 0) is undefined")]
    GcdUndefined,

    #[error("multiplicative order of {a} mod {n} undefined: gcd is {g}")]
    OrderUndefined { a: u64, n: u64, g: u64 },

    #[error("candidate pool for modulus {modulus} is empty")]
    EmptyPool { modulus: u32 },

    #[error("pool holds {pool} candidates but {budget} picks were requested")]
    PoolTooSmall { pool: usize, budget: usize },

    #[error("softmax has no unmasked action")]
    AllMasked,

    #[error("no finite bound: degree {degree} cannot reach {n} vertices")]
    NoMooreBound { n: u64, degree: u64 },

    #[error("{name} baseline needs {requested} offsets but only {available} exist below modulus {modulus}")]
    BaselineTooLarge {
        name: &'static str,
        requested: usize,
        available: usize,
        modulus: u32,
    },

    #[error("search space of {combinations} sets exceeds cap {cap}")]
    SearchCapExceeded { combinations: u128, cap: u128 },

    #[error("training diverged: {0}")]
    NonFiniteLoss(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
