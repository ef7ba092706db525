use alloc::string::String;
use core::fmt;

/// Errors reported by the library. Validation failures carry enough context
/// for a one-line diagnostic.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NonFiniteCoordinate {
        point: usize,
    },
    EmptyInput,
    AngleOutOfRange(f64),
    EpsOutOfRange {
        eps: f64,
        max: f64,
    },
    InternalEpsOutOfRange {
        eps_internal: f64,
    },
    InvalidDelta(f64),
    DiameterExceedsDelta {
        diameter: f64,
        delta: f64,
    },
    UnknownPoint(usize),
    UncoveredPair {
        a: u32,
        b: u32,
    },
    EmptyCandidates,
    IndexOutOfRange {
        what: &'static str,
    },
    EmptySide,
    NotATree(String),
    InvalidPorts {
        node: usize,
    },
    BuildMismatch,
    MissingLevels,
    Unsupported(&'static str),
    /// Malformed text input; `token` is 1-based within the line.
    Parse {
        line: usize,
        token: usize,
        msg: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFiniteCoordinate { point } => write!(f, "point {point} has a non-finite coordinate"),
            Error::EmptyInput => write!(f, "empty point set"),
            Error::AngleOutOfRange(a) => write!(f, "angle must be in (0, 1), got {a}"),
            Error::EpsOutOfRange { eps, max } => {
                write!(f, "eps must be in (0, {max}), got {eps} (the construction runs at eps/C < 1/20)")
            }
            Error::InternalEpsOutOfRange { eps_internal } => {
                write!(f, "internal eps/C must be in (0, 0.05), got {eps_internal}")
            }
            Error::InvalidDelta(d) => write!(f, "scale must be positive and finite, got {d}"),
            Error::DiameterExceedsDelta { diameter, delta } => {
                write!(f, "point set diameter {diameter} exceeds the scale {delta}")
            }
            Error::UnknownPoint(p) => write!(f, "point {p} does not occur"),
            Error::UncoveredPair { a, b } => write!(f, "no tree contains both {a} and {b}"),
            Error::EmptyCandidates => write!(f, "no candidates"),
            Error::IndexOutOfRange { what } => write!(f, "{what} index out of range"),
            Error::EmptySide => write!(f, "the A side of a strip pair is empty"),
            Error::NotATree(why) => write!(f, "not a tree: {why}"),
            Error::InvalidPorts { node } => write!(f, "port assignment at node {node} is not a bijection"),
            Error::BuildMismatch => write!(f, "labels come from different builds"),
            Error::MissingLevels => write!(f, "tree has no level metadata"),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
            Error::Parse { line, token, msg } => write!(f, "line {line}, token {token}: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
