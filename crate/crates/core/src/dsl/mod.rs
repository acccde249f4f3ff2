//! Line-oriented text format (`.ifx`) for experiment graphs.
//!
//! ```text
//! mode NAME
//! ancilla NAME overlap FLOAT
//! source NAME -> MODE
//! beamsplitter NAME in MODE MODE out MODE MODE time INT
//! phase MODE FLOAT time INT
//! ndetector NAME on MODE ancilla NAME interact INT readout INT [basis computational|plusminus]
//! detector NAME on MODE time INT
//! ```
//!
//! `#` starts a comment. Declarations may appear in any order. Angles are
//! radians; times are integer ordering keys.

mod parse;
mod render;

use alloc::string::String;
use core::fmt;

pub use parse::{parse, parse_bytes, Parsed};
pub use render::render;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Error => "error",
            Self::Warning => "warning",
        }
    }
}

/// A positioned parser or validation message. Line and column are 1-based;
/// columns count characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// The offending token, empty when the problem is a missing token.
    pub token: String,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `FILE:LINE:COL: severity: message`
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}: {}", self.file, self.line, self.column, self.severity.name(), self.message)
    }
}
