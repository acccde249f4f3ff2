use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown mode index {0}")]
    UnknownMode(usize),
    #[error("unknown ancilla index {0}")]
    UnknownAncilla(usize),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("too many {kind}: at most {max} supported")]
    CapacityExceeded { kind: &'static str, max: usize },
    #[error("scattered overlap {0} outside [0, 1]")]
    InvalidOverlap(f64),
    #[error("states belong to different spaces")]
    SpaceMismatch,
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("state support mixes particle numbers")]
    MixedParticleNumber,
    #[error("first-quantized tensor is not antisymmetric")]
    NotAntisymmetric,
    #[error("matrix is not square or does not match the port count")]
    ShapeMismatch,
    #[error("transform is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("repeated port `{0}`")]
    RepeatedPort(String),
    #[error("output mode `{0}` is occupied and is not an input of the transform")]
    OutputOccupied(String),
    #[error("ancilla `{0}` is not pristine")]
    AncillaNotPristine(String),
    #[error("outcome has zero probability")]
    ZeroProbability,
    #[error("state has support outside the plus/minus span of the ancilla pair")]
    OutsideJointSpan,
    #[error("plus/minus measurement needs exactly two distinct ancillas")]
    JointArity,
    #[error("inconsistent event ordering: {0}")]
    Ordering(String),
    #[error("invalid experiment graph: {0}")]
    InvalidGraph(String),
    #[error("invalid condition: {0}")]
    InvalidCondition(String),
    #[error("{0}")]
    Domain(String),
}
