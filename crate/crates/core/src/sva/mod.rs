//! The assertion language front end: lexing, parsing, canonical printing,
//! and structural analysis.
//!
//! ```
//! use svakit::sva::{analyze, normalize, parse, Tier};
//!
//! let unit = parse("@(posedge clk) disable iff (rst) $rose(a)|->b").unwrap();
//! assert_eq!(normalize(&unit), "@(posedge clk) disable iff (rst) $rose(a) |-> b");
//!
//! let profile = analyze(&unit);
//! assert_eq!(profile.depth, 2);
//! assert_eq!(profile.tier, Tier::D2);
//! ```

mod analyze;
mod ast;
mod diag;
mod lexer;
mod parser;
mod print;

pub use analyze::{analyze, category_label, AnalysisProfile, Family, Tier, BOOLEAN_CATEGORY};
pub use ast::{
    AssertionUnit, Clock, DelaySpec, Edge, Node, NodeKind, Range, RelOp, SampleCall, SampleFn, Sort, Upper,
};
pub use diag::{Diagnostic, Pos, EOF_TOKEN};
pub use lexer::RESERVED;
pub use parser::{parse, MAX_BOUND};
pub use print::normalize;
