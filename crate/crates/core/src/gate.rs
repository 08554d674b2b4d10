//! Syntax gate: decides whether a candidate assertion is accepted, and
//! buckets rejections into a fixed error taxonomy.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sva::{parse, AssertionUnit, Diagnostic, Node, Pos, RESERVED};

/// Outcome of [`check_syntax`].
#[derive(Debug, Clone, PartialEq)]
pub enum SyntaxCheck {
    Pass(AssertionUnit),
    Fail(Vec<Diagnostic>),
}

impl SyntaxCheck {
    pub fn is_pass(&self) -> bool {
        matches!(self, SyntaxCheck::Pass(_))
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            SyntaxCheck::Pass(_) => &[],
            SyntaxCheck::Fail(d) => d,
        }
    }
}

/// Parses `text` and runs the scope checks on local variables. Bounds,
/// function arity, and operand sorts are enforced by the parser itself.
pub fn check_syntax(text: &str) -> SyntaxCheck {
    let unit = match parse(text) {
        Ok(unit) => unit,
        Err(diags) => return SyntaxCheck::Fail(diags),
    };
    let diags = static_checks(&unit);
    if diags.is_empty() {
        SyntaxCheck::Pass(unit)
    } else {
        SyntaxCheck::Fail(diags)
    }
}

fn static_checks(unit: &AssertionUnit) -> Vec<Diagnostic> {
    // The tree carries no positions; scope errors are reported at the start
    // of the unit.
    let at = Pos { line: 1, col: 1 };
    let mut diags = Vec::new();
    let mut declared = BTreeSet::new();
    for name in unit.declared_locals() {
        if !declared.insert(name) {
            diags.push(Diagnostic::new(at, name, format!("local variable {name} is declared twice")));
        }
        if name == unit.clock.signal {
            diags.push(Diagnostic::new(at, name, format!("local variable {name} shadows the clock signal")));
        }
    }
    if let Some(cond) = &unit.disable {
        cond.walk(&mut |n| {
            if let Node::Atom(name) = n {
                if declared.contains(name.as_str()) {
                    diags.push(Diagnostic::new(
                        at,
                        name.as_str(),
                        format!("local variable {name} cannot be referenced by the disable condition"),
                    ));
                }
            }
        });
    }
    unit.body.walk(&mut |n| {
        if let Node::LocalVarAssign { var, .. } = n {
            if !declared.contains(var.as_str()) {
                diags.push(Diagnostic::new(at, var.as_str(), format!("local variable {var} is not declared")));
            }
        }
    });
    diags
}

/// Error labels for rejected candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorLabel {
    StructureError,
    ImplicationOperatorError,
    TimingOperatorError,
    BooleanOperatorError,
    SvaKeywordFunctionError,
    ConversionTypeCheckError,
    OtherError,
}

impl ErrorLabel {
    /// Row order used by reports.
    pub const ALL: [ErrorLabel; 7] = [
        ErrorLabel::StructureError,
        ErrorLabel::ImplicationOperatorError,
        ErrorLabel::TimingOperatorError,
        ErrorLabel::BooleanOperatorError,
        ErrorLabel::SvaKeywordFunctionError,
        ErrorLabel::ConversionTypeCheckError,
        ErrorLabel::OtherError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorLabel::StructureError => "StructureError",
            ErrorLabel::ImplicationOperatorError => "ImplicationOperatorError",
            ErrorLabel::TimingOperatorError => "TimingOperatorError",
            ErrorLabel::BooleanOperatorError => "BooleanOperatorError",
            ErrorLabel::SvaKeywordFunctionError => "SvaKeywordFunctionError",
            ErrorLabel::ConversionTypeCheckError => "ConversionTypeCheckError",
            ErrorLabel::OtherError => "OtherError",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ErrorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown error label '{s}'"))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("cannot classify an empty diagnostic list")]
    Empty,
}

const IMPLICATION_TOKENS: &[&str] = &["|->", "|=>", "->", "=>"];
const TIMING_TOKENS: &[&str] = &["##", "##[", "[*", "[->", "[=", "[", "]"];
const BOOLEAN_TOKENS: &[&str] = &[
    "&&", "||", "!", "==", "!=", "===", "!==", "<", ">", "<=", ">=", "&", "|", "^", "~",
];
const KEYWORDS: &[&str] = &["until", "within", "not", "and", "or", "disable", "iff"];
const CONVERSION_PHRASES: &[&str] = &[
    "type mismatch",
    "width mismatch",
    "size mismatch",
    "cast",
    "conversion",
    "type-check",
    "type check",
];
const STRUCTURE_PHRASES: &[&str] = &["expected", "unexpected", "missing", "unterminated", "unbalanced", "unmatched"];

/// What a diagnostic mentions: its token plus every single-quoted span and
/// every `$name` in its message.
struct Mentions<'a> {
    items: Vec<&'a str>,
    message: String,
}

impl<'a> Mentions<'a> {
    fn of(diag: &'a Diagnostic) -> Self {
        let mut items = vec![diag.token.as_str()];
        let msg = diag.message.as_str();
        let mut rest = msg;
        while let Some(start) = rest.find('\'') {
            let after = &rest[start + 1..];
            match after.find('\'') {
                Some(end) => {
                    items.push(&after[..end]);
                    rest = &after[end + 1..];
                }
                None => break,
            }
        }
        let mut i = 0;
        while let Some(off) = msg[i..].find('$') {
            let start = i + off;
            let len = msg[start + 1..]
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(msg.len() - start - 1);
            if len > 0 {
                items.push(&msg[start..start + 1 + len]);
            }
            i = start + 1;
        }
        Mentions {
            items,
            message: msg.to_ascii_lowercase(),
        }
    }

    fn any(&self, pred: impl Fn(&str) -> bool) -> bool {
        self.items.iter().any(|s| pred(s))
    }

    fn has_word(&self, word: &str) -> bool {
        self.message
            .split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .any(|w| w == word)
    }
}

fn is_keyword(item: &str) -> bool {
    (item.starts_with('$') && item.len() > 1) || KEYWORDS.contains(&item) || RESERVED.contains(&item)
}

fn is_timing(item: &str) -> bool {
    TIMING_TOKENS.contains(&item) || item.starts_with("##") || item.starts_with("[*") || item.starts_with("[->")
        || item.starts_with("[=")
}

/// Maps the first diagnostic to a label. Categories are tried from most to
/// least specific: keyword/function, implication, timing, boolean,
/// conversion, structure; anything else is `OtherError`.
pub fn classify_error(diags: &[Diagnostic]) -> Result<ErrorLabel, ClassifyError> {
    let diag = diags.first().ok_or(ClassifyError::Empty)?;
    let m = Mentions::of(diag);
    let label = if m.any(is_keyword)
        || ["until", "within", "throughout", "intersect", "first_match", "disable"]
            .iter()
            .any(|w| m.has_word(w))
    {
        ErrorLabel::SvaKeywordFunctionError
    } else if m.any(|s| IMPLICATION_TOKENS.contains(&s)) || m.has_word("implication") && m.message.contains("operator")
    {
        ErrorLabel::ImplicationOperatorError
    } else if m.any(is_timing) {
        ErrorLabel::TimingOperatorError
    } else if m.any(|s| BOOLEAN_TOKENS.contains(&s)) {
        ErrorLabel::BooleanOperatorError
    } else if CONVERSION_PHRASES.iter().any(|p| m.message.contains(p)) {
        ErrorLabel::ConversionTypeCheckError
    } else if STRUCTURE_PHRASES.iter().any(|p| m.has_word(p)) {
        ErrorLabel::StructureError
    } else {
        ErrorLabel::OtherError
    };
    Ok(label)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(token: &str, message: &str) -> Diagnostic {
        Diagnostic {
            line: 1,
            col: 1,
            token: token.into(),
            message: message.into(),
        }
    }

    fn label_of(text: &str) -> ErrorLabel {
        match check_syntax(text) {
            SyntaxCheck::Fail(d) => classify_error(&d).unwrap(),
            SyntaxCheck::Pass(_) => panic!("{text} unexpectedly passed"),
        }
    }

    #[test]
    fn accepts_valid_fragment() {
        assert!(check_syntax("@(posedge clk) a |-> ##1 b").is_pass());
    }

    #[test]
    fn consecutive_implications_name_the_token() {
        let SyntaxCheck::Fail(d) = check_syntax("@(posedge clk) a |-> |=> b") else { panic!() };
        assert_eq!(d[0].token, "|=>");
        assert_eq!(classify_error(&d).unwrap(), ErrorLabel::ImplicationOperatorError);
    }

    #[test]
    fn reversed_range() {
        let SyntaxCheck::Fail(d) = check_syntax("@(posedge clk) a ##[3:1] b") else { panic!() };
        assert!(d[0].message.contains("lower bound exceeds upper bound"));
    }

    #[test]
    fn labels_from_bare_diagnostics() {
        assert_eq!(
            classify_error(&[diag("|=>", "unexpected token")]).unwrap(),
            ErrorLabel::ImplicationOperatorError
        );
        assert_eq!(
            classify_error(&[diag("", "$rose expects exactly one argument")]).unwrap(),
            ErrorLabel::SvaKeywordFunctionError
        );
        assert_eq!(
            classify_error(&[diag("", "width mismatch in comparison")]).unwrap(),
            ErrorLabel::ConversionTypeCheckError
        );
        assert_eq!(classify_error(&[diag("x", "something odd")]).unwrap(), ErrorLabel::OtherError);
    }

    #[test]
    fn empty_list_is_a_contract_violation() {
        assert_eq!(classify_error(&[]), Err(ClassifyError::Empty));
    }

    #[test]
    fn scope_checks() {
        assert_eq!(label_of("@(posedge clk) (a, v = b) |=> c"), ErrorLabel::OtherError);
        assert_eq!(label_of("@(posedge clk) logic v, v; (a, v = b) |=> c"), ErrorLabel::OtherError);
        assert!(check_syntax("@(posedge clk) logic v; (a, v = b) |=> c == v").is_pass());
    }

    #[test]
    fn representative_labels() {
        assert_eq!(label_of("@(posedge clk) a |-> (b"), ErrorLabel::StructureError);
        assert_eq!(label_of("@(posedge clk) a -> b"), ErrorLabel::ImplicationOperatorError);
        assert_eq!(label_of("@(posedge clk) a ## b"), ErrorLabel::TimingOperatorError);
        assert_eq!(label_of("@(posedge clk) a & b"), ErrorLabel::BooleanOperatorError);
        assert_eq!(label_of("@(posedge clk) $rose(a, b)"), ErrorLabel::SvaKeywordFunctionError);
        assert_eq!(label_of("@(posedge clk) a == 2"), ErrorLabel::ConversionTypeCheckError);
        assert_eq!(label_of("@(posedge clk) a % b"), ErrorLabel::OtherError);
    }
}
