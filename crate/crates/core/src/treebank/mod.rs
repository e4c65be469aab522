//! Penn-Treebank style constituency trees: parsing bracketed strings,
//! matching tree patterns, and extracting syntactic production-unit counts.

mod counts;
mod pattern;
mod tree;

pub use counts::{syntactic_counts, RuleSet, SyntacticCounts};
pub use pattern::{match_count, TreePattern};
pub use tree::{parse_ptb, TreeNode};

/// POS tags treated as punctuation; their leaves are not words.
pub const PUNCT_TAGS: [&str; 7] = [".", ",", ":", "``", "''", "-LRB-", "-RRB-"];

pub(crate) fn is_punct_tag(tag: &str) -> bool {
    PUNCT_TAGS.contains(&tag)
}
