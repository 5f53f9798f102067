use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// Link lengths or mount layout that cannot form the arm.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Piston length outside the reachable interval of the linkage.
    #[error("piston length {length} m outside reachable range [{min}, {max}] m")]
    Range { length: f64, min: f64, max: f64 },

    #[error("no standard bore covers the required {min_bore_mm:.2} mm (largest catalog entry {largest_mm:.1} mm)")]
    NoStandardSize { min_bore_mm: f64, largest_mm: f64 },

    /// Non-physical section or component dimensions.
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("parse error in {source_name}: {reason}")]
    Parse { source_name: String, reason: String },

    #[error("trace line {line}: {reason}")]
    Trace { line: usize, reason: String },

    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An error attributed to a named input file.
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
