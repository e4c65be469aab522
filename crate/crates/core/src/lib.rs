//! Linguistic complexity analysis for annotated speech transcripts.
//!
//! The crate computes a registry of 30 complexity measures (syntactic,
//! lexical, register n-gram and information-theoretic) over sliding windows
//! of parsed transcripts, and quantifies how automatic transcription affects
//! those measures: word-level alignment and error rates, rank-correlation
//! agreement between score tables, redundancy-based measure selection, and
//! ordinal-regression feature ranking.
//!
//! Modules follow the pipeline:
//!
//! * [`transcript`] — document model, JSON-Lines corpus reader, score tables
//! * [`treebank`] — bracketed constituency trees, tree patterns, production-unit counts
//! * [`lexres`] — word frequency / prevalence / n-gram / syllable resources
//! * [`measures`] — the measure registry and per-window scoring
//! * [`contour`] — sliding-window engine and document aggregates
//! * [`alignment`] — reference/hypothesis alignment and error statistics
//! * [`stats`] — correlation, selection, descriptives and ordinal regression

pub mod alignment;
pub mod contour;
mod error;
pub mod lexres;
pub mod measures;
pub mod stats;
pub mod transcript;
pub mod treebank;

#[cfg(feature = "fixtures")]
pub mod fixtures;

pub use contour::{Aggregate, Contour, ContourConfig};
pub use error::{Error, Result};
pub use lexres::ResourceBundle;
pub use measures::{Category, MeasureId, MeasureRegistry, ScoreContext, Window};
pub use transcript::{Document, ScoreTable, Sentence, Token};
pub use treebank::{RuleSet, SyntacticCounts, TreeNode};
