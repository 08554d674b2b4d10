//! Tooling for turning natural-language assertion descriptions into
//! SystemVerilog assertion properties and measuring how well it went.
//!
//! The crate is organized as a pipeline:
//!
//! * [`sva`] parses and normalizes a fragment of SVA property syntax and
//!   extracts signals, operator structure, and AST depth.
//! * [`annotate`] builds constraint contexts and deterministic reasoning
//!   traces from the AST and validates descriptions against them.
//! * [`dataset`] assembles, de-duplicates, splits, and synthesizes corpora.
//! * [`gate`] is the syntax checker and its error taxonomy.
//! * [`equiv`] decides the relation between two properties by exhaustive
//!   finite-trace evaluation.
//! * [`generate`] drives a text-completion provider through a syntax-aware
//!   repair loop.
//! * [`bench`] scores generated properties and renders reports.

pub mod annotate;
pub mod bench;
pub mod dataset;
pub mod equiv;
pub mod gate;
pub mod generate;
pub mod provider;
pub mod sva;
