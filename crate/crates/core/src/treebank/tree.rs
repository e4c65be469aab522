use std::fmt;

use crate::error::{Error, Result};

/// A node in a constituency parse. Leaves carry the POS tag as their label
/// and the surface token as text; phrases carry a constituent label and at
/// least one child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Phrase {
        label: String,
        children: Vec<TreeNode>,
    },
    Leaf {
        label: String,
        text: String,
    },
}

impl TreeNode {
    pub fn phrase(label: impl Into<String>, children: Vec<TreeNode>) -> Self {
        TreeNode::Phrase {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(label: impl Into<String>, text: impl Into<String>) -> Self {
        TreeNode::Leaf {
            label: label.into(),
            text: text.into(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            TreeNode::Phrase { label, .. } | TreeNode::Leaf { label, .. } => label,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn children(&self) -> &[TreeNode] {
        match self {
            TreeNode::Phrase { children, .. } => children,
            TreeNode::Leaf { .. } => &[],
        }
    }

    /// Leaves in surface order as (POS tag, token text) pairs.
    pub fn leaves(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            TreeNode::Leaf { label, text } => out.push((label, text)),
            TreeNode::Phrase { children, .. } => {
                for child in children {
                    child.collect_leaves(out);
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Phrase { children, .. } => children.iter().map(TreeNode::leaf_count).sum(),
        }
    }

    /// Number of leaves whose POS tag is not punctuation.
    pub fn word_count(&self) -> usize {
        match self {
            TreeNode::Leaf { label, .. } => usize::from(!super::is_punct_tag(label)),
            TreeNode::Phrase { children, .. } => children.iter().map(TreeNode::word_count).sum(),
        }
    }

    /// Pre-order traversal over all nodes, handing each visit the node and
    /// its ancestor chain (root first).
    pub fn walk<'a, F: FnMut(&'a TreeNode, &[&'a TreeNode])>(&'a self, f: &mut F) {
        let mut path: Vec<&'a TreeNode> = Vec::new();
        walk_inner(self, &mut path, f);
    }
}

fn walk_inner<'a, F: FnMut(&'a TreeNode, &[&'a TreeNode])>(
    node: &'a TreeNode,
    path: &mut Vec<&'a TreeNode>,
    f: &mut F,
) {
    f(node, path);
    path.push(node);
    for child in node.children() {
        walk_inner(child, path, f);
    }
    path.pop();
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeNode::Leaf { label, text } => write!(f, "({} {})", label, text),
            TreeNode::Phrase { label, children } => {
                write!(f, "({}", label)?;
                for child in children {
                    write!(f, " {}", child)?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parse a single bracketed constituency expression.
///
/// The input must be one balanced expression; unbalanced brackets, empty
/// constituents and trailing garbage are reported with a character offset.
pub fn parse_ptb(text: &str) -> Result<TreeNode> {
    let mut parser = Parser {
        chars: text.char_indices().peekable(),
        len: text.len(),
    };
    parser.skip_ws();
    let (offset, _) = parser.expect('(')?;
    let node = parser.node(offset)?;
    parser.skip_ws();
    if let Some(&(offset, _)) = parser.chars.peek() {
        return Err(err(offset, "trailing input after tree"));
    }
    Ok(node)
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    len: usize,
}

fn err(offset: usize, message: impl Into<String>) -> Error {
    Error::TreeSyntax {
        offset,
        message: message.into(),
    }
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some(&(_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn expect(&mut self, want: char) -> Result<(usize, char)> {
        match self.chars.next() {
            Some((offset, c)) if c == want => Ok((offset, c)),
            Some((offset, c)) => Err(err(offset, format!("expected {:?}, found {:?}", want, c))),
            None => Err(err(
                self.len,
                format!("expected {:?}, found end of input", want),
            )),
        }
    }

    fn atom(&mut self) -> String {
        let mut out = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if c == '(' || c == ')' || c.is_whitespace() {
                break;
            }
            out.push(c);
            self.chars.next();
        }
        out
    }

    /// Parses the remainder of a node whose opening '(' was just consumed.
    fn node(&mut self, open_offset: usize) -> Result<TreeNode> {
        self.skip_ws();
        let label_offset = self.chars.peek().map_or(self.len, |&(o, _)| o);
        let label = self.atom();
        if label.is_empty() {
            return Err(err(label_offset, "expected a constituent label"));
        }
        self.skip_ws();
        match self.chars.peek() {
            Some(&(offset, ')')) => Err(err(offset, format!("empty constituent ({})", label))),
            Some(&(_, '(')) => {
                let mut children = Vec::new();
                loop {
                    match self.chars.peek() {
                        Some(&(offset, '(')) => {
                            self.chars.next();
                            children.push(self.node(offset)?);
                            self.skip_ws();
                        }
                        Some(&(_, ')')) => {
                            self.chars.next();
                            return Ok(TreeNode::Phrase { label, children });
                        }
                        Some(&(offset, _)) => {
                            return Err(err(offset, "expected '(' or ')' inside constituent"))
                        }
                        None => return Err(err(self.len, "unbalanced brackets: missing ')'")),
                    }
                }
            }
            Some(&(_, _)) => {
                let text = self.atom();
                self.skip_ws();
                match self.chars.next() {
                    Some((_, ')')) => Ok(TreeNode::Leaf { label, text }),
                    Some((offset, _)) => {
                        Err(err(offset, "a preterminal must contain exactly one token"))
                    }
                    None => Err(err(self.len, "unbalanced brackets: missing ')'")),
                }
            }
            None => Err(err(open_offset, "unbalanced brackets: missing ')'")),
        }
    }
}
