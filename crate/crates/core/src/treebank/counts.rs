use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::treebank::pattern::{match_count, PatNode, TreePattern};
use crate::treebank::{is_punct_tag, TreeNode};

/// Production-unit counts aggregated over a span of sentences. These are the
/// numerators and denominators of the syntactic ratio measures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SyntacticCounts {
    pub words: u64,
    pub sentences: u64,
    pub clauses: u64,
    pub t_units: u64,
    pub dependent_clauses: u64,
    pub complex_t_units: u64,
    pub coordinate_phrases: u64,
    pub complex_nominals: u64,
    pub noun_phrases: u64,
    pub np_premodifiers: u64,
    pub np_postmodifiers: u64,
}

impl AddAssign for SyntacticCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.words += rhs.words;
        self.sentences += rhs.sentences;
        self.clauses += rhs.clauses;
        self.t_units += rhs.t_units;
        self.dependent_clauses += rhs.dependent_clauses;
        self.complex_t_units += rhs.complex_t_units;
        self.coordinate_phrases += rhs.coordinate_phrases;
        self.complex_nominals += rhs.complex_nominals;
        self.noun_phrases += rhs.noun_phrases;
        self.np_premodifiers += rhs.np_premodifiers;
        self.np_postmodifiers += rhs.np_postmodifiers;
    }
}

impl Add for SyntacticCounts {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Counter {
    Clause,
    DependentClause,
    TUnit,
    ComplexTUnit,
    NounPhrase,
    CoordinatePhrase,
    ComplexNominal,
    NpPremodifier,
    NpPostmodifier,
}

const COUNTERS: [(Counter, &str); 9] = [
    (Counter::Clause, "clause"),
    (Counter::DependentClause, "dependent_clause"),
    (Counter::TUnit, "t_unit"),
    (Counter::ComplexTUnit, "complex_t_unit"),
    (Counter::NounPhrase, "noun_phrase"),
    (Counter::CoordinatePhrase, "coordinate_phrase"),
    (Counter::ComplexNominal, "complex_nominal"),
    (Counter::NpPremodifier, "np_premodifier"),
    (Counter::NpPostmodifier, "np_postmodifier"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Builtin {
    CoordinatePhrase,
    ComplexNominal,
    NpPremodifier,
    NpPostmodifier,
}

#[derive(Debug, Clone)]
enum CounterDef {
    Pattern(TreePattern),
    Builtin(Builtin),
}

/// A versioned set of counter definitions, normally parsed from the shipped
/// rule file so the inventory stays auditable as data.
#[derive(Debug, Clone)]
pub struct RuleSet {
    version: String,
    defs: Vec<CounterDef>, // indexed parallel to COUNTERS
}

/// The rule file embedded in the crate.
pub const DEFAULT_RULES_TEXT: &str = include_str!("../../resources/syntactic_patterns.txt");

impl RuleSet {
    /// Parse a rule file: a `version:` line followed by `name := expression`
    /// definitions. Every counter must end up defined; additional named
    /// definitions act as `@` references for later lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut refs: BTreeMap<String, PatNode> = BTreeMap::new();
        let mut defs: BTreeMap<&'static str, CounterDef> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("version:") {
                version = Some(v.trim().to_string());
                continue;
            }
            let (name, expr) = line.split_once(":=").ok_or_else(|| {
                Error::PatternSyntax(format!(
                    "rules line {}: expected `name := expr`",
                    lineno + 1
                ))
            })?;
            let name = name.trim();
            let expr = expr.trim();
            let def = if let Some(builtin) = expr.strip_prefix("builtin:") {
                CounterDef::Builtin(match builtin.trim() {
                    "coordinate_phrase" => Builtin::CoordinatePhrase,
                    "complex_nominal" => Builtin::ComplexNominal,
                    "np_premodifier" => Builtin::NpPremodifier,
                    "np_postmodifier" => Builtin::NpPostmodifier,
                    other => {
                        return Err(Error::PatternSyntax(format!(
                            "rules line {}: unknown builtin {other:?}",
                            lineno + 1
                        )))
                    }
                })
            } else {
                let pattern = TreePattern::parse_with(expr, &refs)?;
                refs.insert(name.to_string(), pattern.root.clone());
                CounterDef::Pattern(pattern)
            };
            if let Some((_, key)) = COUNTERS.iter().find(|(_, key)| *key == name) {
                defs.insert(key, def);
            } else if matches!(def, CounterDef::Builtin(_)) {
                return Err(Error::PatternSyntax(format!(
                    "rules line {}: builtins may only define counters",
                    lineno + 1
                )));
            }
        }
        let version = version
            .ok_or_else(|| Error::PatternSyntax("rules file has no version: line".into()))?;
        let mut ordered = Vec::with_capacity(COUNTERS.len());
        for (_, key) in COUNTERS {
            match defs.remove(key) {
                Some(def) => ordered.push(def),
                None => {
                    return Err(Error::PatternSyntax(format!(
                        "rules file never defines {key}"
                    )))
                }
            }
        }
        Ok(RuleSet {
            version,
            defs: ordered,
        })
    }

    /// The rule set shipped with the crate.
    pub fn default_rules() -> &'static RuleSet {
        static DEFAULT: OnceLock<RuleSet> = OnceLock::new();
        DEFAULT
            .get_or_init(|| RuleSet::parse(DEFAULT_RULES_TEXT).expect("embedded rule file parses"))
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    fn count(&self, counter: Counter, tree: &TreeNode) -> u64 {
        let index = COUNTERS
            .iter()
            .position(|(c, _)| *c == counter)
            .expect("counter is registered");
        match &self.defs[index] {
            CounterDef::Pattern(p) => match_count(tree, p) as u64,
            CounterDef::Builtin(b) => builtin_count(*b, tree),
        }
    }
}

/// Aggregate production-unit counts over a sequence of sentence trees.
/// Degenerate trees (fragments without a finite clause) contribute words and
/// sentences but zero structural counts.
pub fn syntactic_counts(trees: &[TreeNode], rules: &RuleSet) -> SyntacticCounts {
    let mut counts = SyntacticCounts::default();
    for tree in trees {
        counts.sentences += 1;
        counts.words += tree.word_count() as u64;
        counts.clauses += rules.count(Counter::Clause, tree);
        counts.t_units += rules.count(Counter::TUnit, tree);
        counts.dependent_clauses += rules.count(Counter::DependentClause, tree);
        counts.complex_t_units += rules.count(Counter::ComplexTUnit, tree);
        counts.coordinate_phrases += rules.count(Counter::CoordinatePhrase, tree);
        counts.complex_nominals += rules.count(Counter::ComplexNominal, tree);
        counts.noun_phrases += rules.count(Counter::NounPhrase, tree);
        counts.np_premodifiers += rules.count(Counter::NpPremodifier, tree);
        counts.np_postmodifiers += rules.count(Counter::NpPostmodifier, tree);
    }
    counts
}

// ---------------------------------------------------------------------------
// Built-in positional analyzers
// ---------------------------------------------------------------------------

fn builtin_count(builtin: Builtin, tree: &TreeNode) -> u64 {
    let mut total = 0u64;
    tree.walk(&mut |node, path| {
        total += match builtin {
            Builtin::CoordinatePhrase => u64::from(is_coordinate_phrase(node)),
            Builtin::NpPremodifier => premodifier_count(node),
            Builtin::NpPostmodifier => postmodifier_count(node),
            Builtin::ComplexNominal => {
                u64::from(is_complex_np(node)) + u64::from(is_nominal_clause(node, path))
            }
        };
    });
    total
}

fn is_noun_tag(tag: &str) -> bool {
    matches!(tag, "NN" | "NNS" | "NNP" | "NNPS")
}

const PREMOD_TAGS: [&str; 8] = ["JJ", "JJR", "JJS", "NN", "NNS", "NNP", "NNPS", "POS"];
const POSTMOD_LABELS: [&str; 4] = ["PP", "SBAR", "VP", "ADJP"];

/// Complementizers that introduce argument (nominal) clauses rather than
/// adverbial ones.
const NOMINAL_COMPS: [&str; 10] = [
    "that", "whether", "if", "what", "who", "whom", "whose", "which", "how", "why",
];

/// Index of the child carrying the head noun: the rightmost noun-tagged leaf,
/// or failing that the first nested NP (the base NP of a postmodified or
/// appositive structure).
fn np_head_index(children: &[TreeNode]) -> Option<usize> {
    children
        .iter()
        .rposition(|c| c.is_leaf() && is_noun_tag(c.label()))
        .or_else(|| {
            children
                .iter()
                .position(|c| !c.is_leaf() && c.label() == "NP")
        })
}

/// An ADJP/ADVP/NP/VP whose CC child is flanked on both sides by
/// like-labeled, non-punctuation siblings.
fn is_coordinate_phrase(node: &TreeNode) -> bool {
    if !matches!(node.label(), "ADJP" | "ADVP" | "NP" | "VP") {
        return false;
    }
    let children = node.children();
    children.iter().enumerate().any(|(i, c)| {
        c.is_leaf()
            && c.label() == "CC"
            && children[..i].iter().any(|before| {
                !is_punct_tag(before.label())
                    && children[i + 1..]
                        .iter()
                        .any(|after| after.label() == before.label())
            })
    })
}

/// JJ/NN/POS-tagged leaves preceding the head noun inside an NP. Determiners
/// are not modifiers and do not count.
fn premodifier_count(node: &TreeNode) -> u64 {
    if node.label() != "NP" || node.is_leaf() {
        return 0;
    }
    let children = node.children();
    let Some(head) = np_head_index(children) else {
        return 0;
    };
    children[..head]
        .iter()
        .filter(|c| c.is_leaf() && PREMOD_TAGS.contains(&c.label()))
        .count() as u64
}

/// PP/SBAR/VP/ADJP constituents following the head noun inside an NP.
fn postmodifier_count(node: &TreeNode) -> u64 {
    if node.label() != "NP" || node.is_leaf() {
        return 0;
    }
    let children = node.children();
    let Some(head) = np_head_index(children) else {
        return 0;
    };
    children[head + 1..]
        .iter()
        .filter(|c| !c.is_leaf() && POSTMOD_LABELS.contains(&c.label()))
        .count() as u64
}

/// An NP enriched by premodification, by PP/relative-clause postmodification
/// or by a comma-marked appositive NP.
fn is_complex_np(node: &TreeNode) -> bool {
    if node.label() != "NP" || node.is_leaf() {
        return false;
    }
    if premodifier_count(node) > 0 {
        return true;
    }
    let children = node.children();
    let Some(head) = np_head_index(children) else {
        return false;
    };
    children.iter().enumerate().skip(head + 1).any(|(i, c)| {
        if c.is_leaf() {
            return false;
        }
        match c.label() {
            "PP" | "SBAR" => true,
            // appositive: an NP set off by a preceding comma
            "NP" => i > 0 && children[i - 1].is_leaf() && children[i - 1].label() == ",",
            _ => false,
        }
    })
}

/// An SBAR in argument position under a VP: introduced by a nominal
/// complementizer or attached bare (first child already an S).
fn is_nominal_clause(node: &TreeNode, path: &[&TreeNode]) -> bool {
    if node.label() != "SBAR" || node.is_leaf() {
        return false;
    }
    if !matches!(path.last(), Some(parent) if parent.label() == "VP") {
        return false;
    }
    match node.children().first() {
        Some(first) if !first.is_leaf() && first.label() == "S" => true,
        Some(_) => node
            .leaves()
            .first()
            .is_some_and(|(_, text)| NOMINAL_COMPS.contains(&text.to_lowercase().as_str())),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::parse_ptb;

    fn counts_of(sources: &[&str]) -> SyntacticCounts {
        let trees: Vec<TreeNode> = sources.iter().map(|s| parse_ptb(s).unwrap()).collect();
        syntactic_counts(&trees, RuleSet::default_rules())
    }

    const BARK: &str = "(S (NP (DT The) (NN dog)) (VP (VBD barked)))";
    const THINK: &str =
        "(S (NP (PRP I)) (VP (VBP think) (SBAR (IN that) (S (NP (PRP he)) (VP (VBD left))))))";

    #[test]
    fn simple_sentence_counts() {
        let c = counts_of(&[BARK]);
        assert_eq!(c.words, 3);
        assert_eq!(c.sentences, 1);
        assert_eq!(c.clauses, 1);
        assert_eq!(c.t_units, 1);
        assert_eq!(c.dependent_clauses, 0);
        assert_eq!(c.complex_t_units, 0);
        assert_eq!(c.noun_phrases, 1);
    }

    #[test]
    fn complement_clause_counts() {
        let c = counts_of(&[THINK]);
        assert_eq!(c.words, 5);
        assert_eq!(c.sentences, 1);
        assert_eq!(c.clauses, 2);
        assert_eq!(c.t_units, 1);
        assert_eq!(c.dependent_clauses, 1);
        assert_eq!(c.complex_t_units, 1);
        // "that he left" is an argument clause
        assert_eq!(c.complex_nominals, 1);
    }

    #[test]
    fn counts_are_additive() {
        let single = counts_of(&[BARK]);
        let double = counts_of(&[BARK, BARK]);
        assert_eq!(double, single + single);
    }

    #[test]
    fn top_level_coordination_yields_two_t_units() {
        let c = counts_of(&[
            "(S (S (NP (PRP She)) (VP (VBD ran))) (CC and) (S (NP (PRP he)) (VP (VBD jumped))) (. .))",
        ]);
        assert_eq!(c.clauses, 2);
        assert_eq!(c.t_units, 2);
        assert_eq!(c.coordinate_phrases, 0);
        assert_eq!(c.words, 5);
    }

    #[test]
    fn coordinate_phrases_need_flanking_likes() {
        let c = counts_of(&[
            "(S (NP (NP (DT The) (NN cat)) (CC and) (NP (DT the) (NN dog))) (VP (VBD slept)) (. .))",
        ]);
        assert_eq!(c.coordinate_phrases, 1);
        assert_eq!(c.noun_phrases, 3);
        // coordination is not apposition
        assert_eq!(c.complex_nominals, 0);

        let adv = counts_of(&[
            "(S (NP (PRP He)) (VP (VBD ran) (ADVP (RB quickly) (CC and) (RB quietly))) (. .))",
        ]);
        assert_eq!(adv.coordinate_phrases, 1);
    }

    #[test]
    fn premodifiers_and_postmodifiers() {
        let pre = counts_of(&[
            "(S (NP (DT The) (JJ old) (NN teacher)) (VP (VBD praised) (NP (DT the) (NNS students))) (. .))",
        ]);
        assert_eq!(pre.np_premodifiers, 1);
        assert_eq!(pre.np_postmodifiers, 0);
        assert_eq!(pre.complex_nominals, 1);

        let post = counts_of(&[
            "(S (NP (NP (DT A) (NN man)) (PP (IN near) (NP (DT the) (NN river)))) (VP (VBD slept)) (. .))",
        ]);
        assert_eq!(post.np_premodifiers, 0);
        assert_eq!(post.np_postmodifiers, 1);
        assert_eq!(post.complex_nominals, 1);
        assert_eq!(post.noun_phrases, 3);
    }

    #[test]
    fn appositive_is_complex() {
        let c = counts_of(&[
            "(S (NP (NP (PRP$ My) (NN friend)) (, ,) (NP (DT the) (NN doctor)) (, ,)) (VP (VBD arrived)) (. .))",
        ]);
        assert_eq!(c.complex_nominals, 1);
        assert_eq!(c.np_postmodifiers, 0);
        assert_eq!(c.words, 5);
    }

    #[test]
    fn adverbial_sbar_is_not_nominal() {
        let c = counts_of(&[
            "(S (NP (PRP I)) (VP (VBD left) (SBAR (IN because) (S (NP (PRP it)) (VP (VBD rained))))) (. .))",
        ]);
        assert_eq!(c.clauses, 2);
        assert_eq!(c.dependent_clauses, 1);
        assert_eq!(c.complex_nominals, 0);
    }

    #[test]
    fn fragments_count_words_only() {
        let c = counts_of(&["(FRAG (ADJP (RB Very) (JJ nice)) (. .))"]);
        assert_eq!(c.words, 2);
        assert_eq!(c.sentences, 1);
        assert_eq!(c.clauses, 0);
        assert_eq!(c.t_units, 0);
        assert_eq!(c.noun_phrases, 0);
    }

    #[test]
    fn rule_file_requires_all_counters() {
        let err = RuleSet::parse("version: x\nclause := S").unwrap_err();
        assert!(err.to_string().contains("never defines"), "{err}");
    }
}
