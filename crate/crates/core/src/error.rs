use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("Gram matrix is degenerate (determinant 0)")]
    Degenerate,
    #[error("lattice is not even: diagonal entry {index} is odd")]
    NotEven { index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown standard lattice name: {0}")]
    UnknownName(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("matrix is not an isometric embedding: {0}")]
    NotIsometric(String),
    #[error("embedding matrix does not have full column rank")]
    RankDeficient,
    #[error("linear system has no solution")]
    NoSolution,
    #[error("operation requires a definite lattice")]
    IndefiniteInput,
    #[error("lattices have different definiteness")]
    MixedDefiniteness,
    #[error("rank {rank} exceeds the supported limit {limit}")]
    RankLimitExceeded { rank: usize, limit: usize },
    #[error("group of order {order} exceeds the configured limit {limit}")]
    GroupTooLarge { order: u128, limit: usize },
    #[error("subgroup is not isotropic")]
    NotIsotropic,
    #[error("embedding is not of finite index (rank {domain} into rank {ambient})")]
    RankMismatch { domain: usize, ambient: usize },
    #[error("generators leave the supplied automorphism list")]
    NotClosed,
    #[error("map is not an automorphism of the quadratic form: {0}")]
    NotAnAutomorphism(String),
    #[error("invalid finite quadratic form: {0}")]
    InvalidForm(String),
    #[error("element is not in the group: {0}")]
    InvalidElement(String),
    #[error("lattices are not in the same genus")]
    GenusMismatch,
    #[error("uniqueness of the overlattice in its genus cannot be certified")]
    UniquenessUnknown,
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("vector must be nonzero")]
    ZeroVector,
    #[error("lattice has fewer than two marked hyperbolic planes")]
    NoMarkedHyperbolicPlanes,
    #[error("isometry group has more than {limit} elements")]
    TooManyIsometries { limit: usize },
}
