//! A small tree-pattern language for counting constituency configurations.
//!
//! Patterns are matched against every node of a tree; a node is counted at
//! most once however many of its descendants also satisfy the constraints.
//!
//! Grammar:
//!
//! ```text
//! pattern    := operand constraint*
//! operand    := labelset | '(' pattern ')' | '@' name
//! constraint := ['!'] relation operand
//! relation   := '<'           immediate dominance: some child matches
//!             | '<<'          dominance: some proper descendant matches
//!             | '>'           the parent matches
//!             | '>>'          some proper ancestor matches
//!             | '<+(' labelset ')'
//!                             dominance through an unbroken chain of nodes
//!                             matching the bracketed labels; a chain of
//!                             length zero is immediate dominance
//! labelset   := '*' | label ('|' label)*
//! ```
//!
//! Labels match both phrase labels and the POS tags of leaves. A label is
//! any run of characters other than whitespace, `(`, `)`, `<`, `>`, `!`,
//! `|` and `@`, so POS tags such as `PRP$`, `-LRB-` or `,` need no
//! escaping. Juxtaposed constraints are conjoined; `!` negates a single
//! constraint. `@name` references a previously defined pattern when parsing
//! a rule file (see [`super::RuleSet`]).
//!
//! Example: a finite clause is written
//! `S|SINV|SQ < (VP <+(VP) VBD|VBP|VBZ|MD)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::treebank::TreeNode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum LabelSet {
    Any,
    Of(Vec<String>),
}

impl LabelSet {
    fn matches(&self, label: &str) -> bool {
        match self {
            LabelSet::Any => true,
            LabelSet::Of(labels) => labels.iter().any(|l| l == label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Rel {
    Child,
    Descendant,
    Parent,
    Ancestor,
    Chain(LabelSet),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Constraint {
    negated: bool,
    rel: Rel,
    target: PatNode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PatNode {
    labels: LabelSet,
    constraints: Vec<Constraint>,
}

/// A compiled tree pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePattern {
    pub(crate) root: PatNode,
}

impl TreePattern {
    /// Compile a pattern expression. `@name` references are not available
    /// here; they only exist inside rule files.
    pub fn parse(src: &str) -> Result<Self> {
        Self::parse_with(src, &BTreeMap::new())
    }

    pub(crate) fn parse_with(src: &str, refs: &BTreeMap<String, PatNode>) -> Result<Self> {
        let tokens = lex(src)?;
        let mut parser = PatternParser {
            tokens,
            pos: 0,
            refs,
        };
        let root = parser.pattern()?;
        if parser.pos != parser.tokens.len() {
            let (offset, _) = &parser.tokens[parser.pos];
            return Err(syntax(format!("unexpected input at offset {offset}")));
        }
        Ok(TreePattern { root })
    }
}

/// Number of nodes in `tree` satisfying `pattern`.
pub fn match_count(tree: &TreeNode, pattern: &TreePattern) -> usize {
    let mut count = 0usize;
    let mut path: Vec<&TreeNode> = Vec::new();
    count_inner(tree, &pattern.root, &mut path, &mut count);
    count
}

fn count_inner<'a>(
    node: &'a TreeNode,
    pat: &PatNode,
    path: &mut Vec<&'a TreeNode>,
    count: &mut usize,
) {
    if node_matches(node, pat, path) {
        *count += 1;
    }
    path.push(node);
    for child in node.children() {
        count_inner(child, pat, path, count);
    }
    path.pop();
}

/// Tests `pat` against `node`, where `path` holds the ancestors of `node`
/// from the root down to its parent.
pub(crate) fn node_matches<'a>(
    node: &'a TreeNode,
    pat: &PatNode,
    path: &mut Vec<&'a TreeNode>,
) -> bool {
    if !pat.labels.matches(node.label()) {
        return false;
    }
    pat.constraints.iter().all(|c| {
        let hit = match &c.rel {
            Rel::Child => {
                path.push(node);
                let hit = node
                    .children()
                    .iter()
                    .any(|child| node_matches(child, &c.target, path));
                path.pop();
                hit
            }
            Rel::Descendant => {
                path.push(node);
                let hit = node
                    .children()
                    .iter()
                    .any(|child| descendant_matches(child, &c.target, path));
                path.pop();
                hit
            }
            Rel::Parent => match path.pop() {
                Some(parent) => {
                    let hit = node_matches(parent, &c.target, path);
                    path.push(parent);
                    hit
                }
                None => false,
            },
            Rel::Ancestor => {
                let mut popped = Vec::new();
                let mut hit = false;
                while let Some(ancestor) = path.pop() {
                    popped.push(ancestor);
                    if node_matches(ancestor, &c.target, path) {
                        hit = true;
                        break;
                    }
                }
                while let Some(ancestor) = popped.pop() {
                    path.push(ancestor);
                }
                hit
            }
            Rel::Chain(mid) => {
                path.push(node);
                let hit = chain_matches(node, mid, &c.target, path);
                path.pop();
                hit
            }
        };
        hit != c.negated
    })
}

fn descendant_matches<'a>(node: &'a TreeNode, pat: &PatNode, path: &mut Vec<&'a TreeNode>) -> bool {
    if node_matches(node, pat, path) {
        return true;
    }
    path.push(node);
    let hit = node
        .children()
        .iter()
        .any(|child| descendant_matches(child, pat, path));
    path.pop();
    hit
}

fn chain_matches<'a>(
    node: &'a TreeNode,
    mid: &LabelSet,
    target: &PatNode,
    path: &mut Vec<&'a TreeNode>,
) -> bool {
    node.children().iter().any(|child| {
        if node_matches(child, target, path) {
            return true;
        }
        if !child.is_leaf() && mid.matches(child.label()) {
            path.push(child);
            let hit = chain_matches(child, mid, target, path);
            path.pop();
            return hit;
        }
        false
    })
}

// ---------------------------------------------------------------------------
// Lexing and parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Bang,
    Pipe,
    Star,
    Lt,
    LtLt,
    Gt,
    GtGt,
    ChainOpen, // "<+("
    Ref(String),
    Name(String),
}

fn syntax(message: impl Into<String>) -> Error {
    Error::PatternSyntax(message.into())
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push((offset, Tok::LParen));
            }
            ')' => {
                chars.next();
                out.push((offset, Tok::RParen));
            }
            '!' => {
                chars.next();
                out.push((offset, Tok::Bang));
            }
            '|' => {
                chars.next();
                out.push((offset, Tok::Pipe));
            }
            '*' => {
                chars.next();
                out.push((offset, Tok::Star));
            }
            '<' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '<')) => {
                        chars.next();
                        out.push((offset, Tok::LtLt));
                    }
                    Some(&(_, '+')) => {
                        chars.next();
                        match chars.next() {
                            Some((_, '(')) => out.push((offset, Tok::ChainOpen)),
                            _ => return Err(syntax(format!("offset {offset}: '<+' needs '('"))),
                        }
                    }
                    _ => out.push((offset, Tok::Lt)),
                }
            }
            '>' => {
                chars.next();
                if matches!(chars.peek(), Some(&(_, '>'))) {
                    chars.next();
                    out.push((offset, Tok::GtGt));
                } else {
                    out.push((offset, Tok::Gt));
                }
            }
            '@' => {
                chars.next();
                let name = lex_name(&mut chars);
                if name.is_empty() {
                    return Err(syntax(format!("offset {offset}: '@' needs a name")));
                }
                out.push((offset, Tok::Ref(name)));
            }
            _ => {
                let name = lex_name(&mut chars);
                if name.is_empty() {
                    return Err(syntax(format!("offset {offset}: unexpected {c:?}")));
                }
                out.push((offset, Tok::Name(name)));
            }
        }
    }
    Ok(out)
}

fn lex_name(chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>) -> String {
    let mut name = String::new();
    while let Some(&(_, c)) = chars.peek() {
        if c.is_whitespace() || matches!(c, '(' | ')' | '<' | '>' | '!' | '|' | '@' | '*') {
            break;
        }
        name.push(c);
        chars.next();
    }
    name
}

struct PatternParser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    refs: &'a BTreeMap<String, PatNode>,
}

impl PatternParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn pattern(&mut self) -> Result<PatNode> {
        let mut node = self.operand()?;
        loop {
            let negated = matches!(self.peek(), Some(Tok::Bang));
            let rel_index = self.pos + usize::from(negated);
            let rel = match self.tokens.get(rel_index).map(|(_, t)| t) {
                Some(Tok::Lt) => Rel::Child,
                Some(Tok::LtLt) => Rel::Descendant,
                Some(Tok::Gt) => Rel::Parent,
                Some(Tok::GtGt) => Rel::Ancestor,
                Some(Tok::ChainOpen) => {
                    self.pos = rel_index + 1;
                    let labels = self.labelset()?;
                    match self.next() {
                        Some((_, Tok::RParen)) => {}
                        _ => return Err(syntax("'<+(' labels must be closed with ')'")),
                    }
                    let target = self.operand()?;
                    node.constraints.push(Constraint {
                        negated,
                        rel: Rel::Chain(labels),
                        target,
                    });
                    continue;
                }
                _ => {
                    if negated {
                        return Err(syntax("'!' must be followed by a relation"));
                    }
                    break;
                }
            };
            self.pos = rel_index + 1;
            let target = self.operand()?;
            node.constraints.push(Constraint {
                negated,
                rel,
                target,
            });
        }
        Ok(node)
    }

    fn operand(&mut self) -> Result<PatNode> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.next();
                let node = self.pattern()?;
                match self.next() {
                    Some((_, Tok::RParen)) => Ok(node),
                    _ => Err(syntax("unbalanced '(' in pattern")),
                }
            }
            Some(Tok::Ref(_)) => {
                let Some((offset, Tok::Ref(name))) = self.next() else {
                    unreachable!()
                };
                match self.refs.get(&name) {
                    Some(node) => Ok(node.clone()),
                    None => Err(syntax(format!(
                        "offset {offset}: unknown reference @{name}"
                    ))),
                }
            }
            Some(Tok::Star) | Some(Tok::Name(_)) => {
                let labels = self.labelset()?;
                Ok(PatNode {
                    labels,
                    constraints: Vec::new(),
                })
            }
            Some(_) => {
                let (offset, tok) = self.next().expect("peeked");
                Err(syntax(format!(
                    "offset {offset}: expected a label, '(', '*' or '@', found {tok:?}"
                )))
            }
            None => Err(syntax("pattern ended where a node was expected")),
        }
    }

    fn labelset(&mut self) -> Result<LabelSet> {
        if matches!(self.peek(), Some(Tok::Star)) {
            self.next();
            return Ok(LabelSet::Any);
        }
        let mut labels = Vec::new();
        loop {
            match self.next() {
                Some((_, Tok::Name(name))) => labels.push(name),
                Some((offset, tok)) => {
                    return Err(syntax(format!(
                        "offset {offset}: expected label, found {tok:?}"
                    )))
                }
                None => return Err(syntax("pattern ended where a label was expected")),
            }
            if matches!(self.peek(), Some(Tok::Pipe)) {
                self.next();
            } else {
                break;
            }
        }
        Ok(LabelSet::Of(labels))
    }
}
