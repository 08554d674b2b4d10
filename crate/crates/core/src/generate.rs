//! Description-to-assertion generation with syntax-aware repair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{fill, SvadText};
use crate::gate::{check_syntax, classify_error, ErrorLabel, SyntaxCheck};
use crate::provider::{Provider, ProviderError};
use crate::sva::Diagnostic;

pub const DEFAULT_GENERATION_TEMPLATE: &str = "\
Translate the following description into one SystemVerilog concurrent
assertion property with an explicit clocking event, for example
@(posedge clk) a |-> ##1 b. Use only the signal names given in backticks.

Description:
{svad}
{feedback}
Answer with the property alone inside a single ``` fenced code block.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub template: String,
    pub max_rounds: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            template: DEFAULT_GENERATION_TEMPLATE.into(),
            max_rounds: 3,
        }
    }
}

impl GenConfig {
    /// Single attempt, no feedback: the benchmark setting.
    pub fn single_pass(template: impl Into<String>) -> Self {
        GenConfig {
            template: template.into(),
            max_rounds: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("template is missing the {0} placeholder")]
    Template(&'static str),
    #[error("max_rounds must be at least 1")]
    NoRounds,
    #[error("provider failed in round {}: {source}", .log.len() + 1)]
    Provider {
        source: ProviderError,
        /// Rounds completed before the failure.
        log: Vec<RoundLog>,
    },
}

/// Instantiates the generation template. With `prior`, the previous
/// candidate and its diagnostics are embedded exactly as given.
///
/// ```
/// use svakit::annotate::SvadText;
/// use svakit::generate::{render_prompt, DEFAULT_GENERATION_TEMPLATE};
/// use svakit::sva::parse;
///
/// let svad = SvadText::new("whenever `a` is high, `b` is high one cycle later");
/// let diags = parse("@(posedge clk) a |-> |=> b").unwrap_err();
/// let prompt = render_prompt(&svad, Some(("a |-> |=> b", &diags)), DEFAULT_GENERATION_TEMPLATE).unwrap();
/// assert!(prompt.contains(&diags[0].message));
/// ```
pub fn render_prompt(
    svad: &SvadText,
    prior: Option<(&str, &[Diagnostic])>,
    template: &str,
) -> Result<String, GenError> {
    let feedback = match prior {
        None => String::new(),
        Some((candidate, diags)) => {
            let lines: Vec<String> = diags.iter().map(|d| format!("- {d}")).collect();
            format!(
                "\nYour previous answer was rejected by the syntax checker.\nPrevious answer:\n```\n{candidate}\n```\nDiagnostics:\n{}\nFix these errors.\n",
                lines.join("\n")
            )
        }
    };
    fill(template, &[("{svad}", &svad.prose), ("{feedback}", &feedback)]).map_err(GenError::Template)
}

/// Body of the first fenced code block in a response. The info string
/// after the opening fence is ignored.
pub fn extract_candidate(response: &str) -> Result<String, Diagnostic> {
    let missing = |message: &str| Diagnostic {
        line: 1,
        col: 1,
        token: "```".into(),
        message: message.into(),
    };
    let start = response
        .find("```")
        .ok_or_else(|| missing("missing fenced code block in the response"))?;
    let after = &response[start + 3..];
    let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
    let body = &after[body_start..];
    let end = body
        .find("```")
        .ok_or_else(|| missing("unterminated fenced code block in the response"))?;
    Ok(body[..end].trim().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenStatus {
    Passed,
    Exhausted,
}

/// What happened in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub prompt: String,
    pub response: String,
    pub candidate: String,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<ErrorLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenOutcome {
    pub final_text: String,
    pub status: GenStatus,
    pub rounds: usize,
    pub log: Vec<RoundLog>,
}

impl GenOutcome {
    /// Diagnostics of the last round; empty when it passed.
    pub fn last_diagnostics(&self) -> &[Diagnostic] {
        self.log.last().map_or(&[], |r| &r.diagnostics)
    }
}

/// Asks for a candidate, checks it, and feeds the diagnostics back until a
/// candidate passes or `max_rounds` requests have been made.
pub fn generate_with_repair(svad: &SvadText, provider: &dyn Provider, cfg: &GenConfig) -> Result<GenOutcome, GenError> {
    if cfg.max_rounds == 0 {
        return Err(GenError::NoRounds);
    }
    let mut log: Vec<RoundLog> = Vec::new();
    for _ in 0..cfg.max_rounds {
        let prior = log.last().map(|r| (r.candidate.as_str(), r.diagnostics.as_slice()));
        let prompt = render_prompt(svad, prior, &cfg.template)?;
        let response = match provider.complete(&prompt) {
            Ok(r) => r,
            Err(source) => return Err(GenError::Provider { source, log }),
        };
        let (candidate, diagnostics) = match extract_candidate(&response) {
            Ok(c) => {
                let diags = match check_syntax(&c) {
                    SyntaxCheck::Pass(_) => Vec::new(),
                    SyntaxCheck::Fail(d) => d,
                };
                (c, diags)
            }
            Err(d) => (String::new(), vec![d]),
        };
        let label = classify_error(&diagnostics).ok();
        let passed = diagnostics.is_empty();
        log.push(RoundLog {
            prompt,
            response,
            candidate,
            diagnostics,
            label,
        });
        if passed {
            break;
        }
    }
    let last = log.last().expect("at least one round");
    Ok(GenOutcome {
        final_text: last.candidate.clone(),
        status: if last.diagnostics.is_empty() {
            GenStatus::Passed
        } else {
            GenStatus::Exhausted
        },
        rounds: log.len(),
        log,
    })
}
