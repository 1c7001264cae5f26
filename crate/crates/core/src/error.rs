use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type; variants mirror the failure modes of the
/// individual subsystems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters for preset {kind}: {reason}")]
    InvalidParams { kind: String, reason: String },
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("vertex subset is disconnected")]
    DisconnectedSubset,
    #[error("complex is disconnected")]
    DisconnectedComplex,
    #[error("subcomplex is not a surface: edge {edge} lies in {count} induced faces")]
    NonSurface { edge: usize, count: usize },
    #[error("invalid topological signature g={g} k={k} l={l}")]
    InvalidSignature { g: i64, k: i64, l: i64 },
    #[error("missing vertex coordinates for cotangent assembly")]
    MissingCoordinates,
    #[error("degenerate triangle in face {face}: area {area:.3e}")]
    DegenerateTriangle { face: usize, area: f64 },
    #[error("eigensolver did not converge after {iters} iterations; residuals {achieved:?}")]
    NoConvergence { iters: usize, achieved: Vec<f64> },
    #[error("ambiguous count at lambda={lambda}: eigenvalue {eigenvalue} falls in the guard band (margin {margin:.3e})")]
    AmbiguousCount { lambda: f64, eigenvalue: f64, margin: f64 },
    #[error("count range exceeded: lambda={lambda} not certified (last computed eigenvalue {last})")]
    RangeExceeded { lambda: f64, last: f64 },
    #[error("no eigenvalue cluster at lambda={lambda}")]
    ClusterNotFound { lambda: f64 },
    #[error("transfer operators fail intertwining: residual {residual:.3e}")]
    IntertwiningFailure { residual: f64 },
    #[error("face {face} carries non-trivial total voltage; the spec does not define a cover")]
    FaceVoltageNontrivial { face: usize },
    #[error("enumeration bound exceeded: index {n} > {bound}")]
    BoundExceeded { n: usize, bound: usize },
    #[error("degree {degree} exceeds configured cap {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },
    #[error("invalid word: letter {letter} out of range for rank {rank}")]
    InvalidWord { letter: i32, rank: usize },
    #[error("group is infinite (free rank {rank} > 0)")]
    InfiniteGroup { rank: usize },
    #[error("vertex subset must be nonempty and proper")]
    EmptyOrFullSubset,
    #[error("basepoint {v} lies outside the subset")]
    BasepointOutside { v: usize },
    #[error("eigenvector is numerically zero")]
    AllZeroVector,
    #[error("zero set covers {percent:.1}% of vertices; decomposition unreliable")]
    ZeroSetTooLarge { percent: f64 },
    #[error("no cocycle available: every complement component has mu = 0")]
    NoCocycle,
    #[error("rank decision ambiguous: singular value {sv:.3e} too close to tolerance {tol:.3e}")]
    RankAmbiguous { sv: f64, tol: f64 },
    #[error("spectra not certified past target lambda={lambda}")]
    UncertifiedRange { lambda: f64 },
    #[error("tower level {level} out of range (height {height})")]
    IndexOutOfRange { level: usize, height: usize },
    #[error("single nodal domain; need at least two")]
    SingleDomain,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
