use std::fmt;

use serde::{Deserialize, Serialize};

/// A front-end error: where it happened, what went wrong, and the token that
/// triggered it. Serialized as `{line, col, token, message}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub token: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, token: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            line: pos.line,
            col: pos.col,
            token: token.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.token.is_empty() {
            write!(f, " [token: {}]", self.token)?;
        }
        Ok(())
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

/// Offending-token text used for diagnostics raised at end of input.
pub const EOF_TOKEN: &str = "<eof>";
