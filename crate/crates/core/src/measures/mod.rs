//! The complexity measures, scored over a window of sentences.
//!
//! Measures are looked up in a [`MeasureRegistry`]; [`score_window`] returns
//! one score slot per registered measure, in registry order. A slot is
//! `None` when the measure is undefined on the window (zero denominator,
//! no grams of the required order, nothing covered by a table), never zero.

mod registry;

use std::collections::HashSet;
use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;

pub use registry::{
    Binding, Category, Measure, MeasureId, MeasureRegistry, NpNormalization, SyntacticTerm,
    DEFAULT_REGISTRY_TEXT,
};

use crate::error::{Error, Result};
use crate::lexres::ResourceBundle;
use crate::transcript::{Sentence, Token};
use crate::treebank::{is_punct_tag, syntactic_counts, RuleSet, SyntacticCounts, TreeNode};

/// Deflate levels range 0..=9; the middle of the range is the default and is
/// recorded in run metadata because the KolDef score depends on it.
pub const DEFAULT_DEFLATE_LEVEL: u32 = 5;

/// A contiguous slice of a document: sentences plus their parsed trees.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub sentences: &'a [Sentence],
    pub trees: &'a [TreeNode],
}

impl<'a> Window<'a> {
    pub fn new(sentences: &'a [Sentence], trees: &'a [TreeNode]) -> Self {
        debug_assert_eq!(sentences.len(), trees.len());
        Window { sentences, trees }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &'a Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    /// Tokens that are words: punctuation POS tags are skipped.
    pub fn words(&self) -> impl Iterator<Item = &'a Token> {
        self.tokens().filter(|t| !is_punct_tag(&t.pos))
    }
}

/// Everything needed to score windows: the registry, loaded resources, the
/// syntactic rule set and the Deflate level.
#[derive(Debug, Clone, Copy)]
pub struct ScoreContext<'a> {
    pub registry: &'a MeasureRegistry,
    pub resources: &'a ResourceBundle,
    pub rules: &'a RuleSet,
    pub deflate_level: u32,
}

impl<'a> ScoreContext<'a> {
    pub fn new(registry: &'a MeasureRegistry, resources: &'a ResourceBundle) -> Self {
        ScoreContext {
            registry,
            resources,
            rules: RuleSet::default_rules(),
            deflate_level: DEFAULT_DEFLATE_LEVEL,
        }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Open-class (lexical) words: nouns, adjectives, adverbs and verbs other
/// than the auxiliaries be/have/do. Modals are grammatical.
fn is_lexical(token: &Token) -> bool {
    let pos = token.pos.as_str();
    if pos.starts_with("NN") || pos.starts_with("JJ") || pos.starts_with("RB") {
        return true;
    }
    if pos.starts_with("VB") {
        let lemma = token.lemma.to_lowercase();
        return !matches!(lemma.as_str(), "be" | "have" | "do");
    }
    false
}

/// Bag-of-words statistics computed once per window and shared by the
/// lexical measures.
struct LexicalProfile {
    n: usize,
    types: usize,
    lexical_tokens: usize,
    lexical_types: Vec<String>,
    total_chars: usize,
    syllables: Option<f64>,
}

fn lexical_profile(window: &Window, resources: &ResourceBundle) -> LexicalProfile {
    let mut n = 0usize;
    let mut types: HashSet<String> = HashSet::new();
    let mut lexical_tokens = 0usize;
    let mut lexical_types: HashSet<String> = HashSet::new();
    let mut total_chars = 0usize;
    let mut syllable_sum = 0u64;
    let mut syllable_n = 0usize;
    for token in window.words() {
        n += 1;
        total_chars += token.form.chars().count();
        let lower = token.form.to_lowercase();
        if is_lexical(token) {
            lexical_tokens += 1;
            lexical_types.insert(lower.clone());
        }
        types.insert(lower);
        let alpha: String = token.form.chars().filter(|c| c.is_alphabetic()).collect();
        if !alpha.is_empty() {
            if let Ok(count) = resources.syllables().count(&alpha) {
                syllable_sum += u64::from(count);
                syllable_n += 1;
            }
        }
    }
    let mut lexical_types: Vec<String> = lexical_types.into_iter().collect();
    lexical_types.sort();
    LexicalProfile {
        n,
        types: types.len(),
        lexical_tokens,
        lexical_types,
        total_chars,
        syllables: if syllable_n == 0 {
            None
        } else {
            Some(syllable_sum as f64 / syllable_n as f64)
        },
    }
}

impl LexicalProfile {
    fn score(&self, binding: &Binding, resources: &ResourceBundle) -> Result<Option<f64>> {
        let n = self.n as f64;
        Ok(match binding {
            Binding::Ttr => {
                if self.n == 0 {
                    None
                } else {
                    Some(self.types as f64 / n)
                }
            }
            Binding::Cttr => {
                if self.n == 0 {
                    None
                } else {
                    Some(self.types as f64 / (2.0 * n).sqrt())
                }
            }
            Binding::LexicalDensity => {
                if self.n == 0 {
                    None
                } else {
                    Some(self.lexical_tokens as f64 / n)
                }
            }
            Binding::MeanChars => {
                if self.n == 0 {
                    None
                } else {
                    Some(self.total_chars as f64 / n)
                }
            }
            Binding::MeanSyllables => self.syllables,
            Binding::Sophistication { list } => {
                let list = resources
                    .frequency_list(list)
                    .ok_or_else(|| Error::MissingResource(format!("frequency list {list}")))?;
                if self.lexical_types.is_empty() {
                    None
                } else {
                    let advanced = self
                        .lexical_types
                        .iter()
                        .filter(|t| list.is_sophisticated(t))
                        .count();
                    Some(advanced as f64 / self.lexical_types.len() as f64)
                }
            }
            _ => unreachable!("not a profile-backed binding"),
        })
    }
}

/// Scores for the syntactic ratio measures in `registry`, computed from
/// aggregated production-unit counts. Ratios with a zero denominator are
/// missing, not zero.
pub fn syntactic_scores(
    counts: &SyntacticCounts,
    registry: &MeasureRegistry,
) -> Vec<(MeasureId, Option<f64>)> {
    registry
        .measures()
        .iter()
        .filter_map(|m| match &m.binding {
            Binding::Ratio { num, den } => {
                Some((m.id.clone(), ratio(num.value(counts), den.value(counts))))
            }
            _ => None,
        })
        .collect()
}

/// Scores for the registered lexical measures of a window.
pub fn lexical_scores(
    window: &Window,
    resources: &ResourceBundle,
    registry: &MeasureRegistry,
) -> Result<Vec<(MeasureId, Option<f64>)>> {
    let profile = lexical_profile(window, resources);
    let mut out = Vec::new();
    for measure in registry.measures() {
        let score = match &measure.binding {
            Binding::Ttr
            | Binding::Cttr
            | Binding::LexicalDensity
            | Binding::MeanChars
            | Binding::MeanSyllables
            | Binding::Sophistication { .. } => profile.score(&measure.binding, resources)?,
            Binding::Prevalence { table } => prevalence_score(window, resources, table)?,
            _ => continue,
        };
        out.push((measure.id.clone(), score));
    }
    Ok(out)
}

fn prevalence_score(
    window: &Window,
    resources: &ResourceBundle,
    table: &str,
) -> Result<Option<f64>> {
    let table = resources
        .prevalence_table(table)
        .ok_or_else(|| Error::MissingResource(format!("prevalence table {table}")))?;
    let forms: Vec<String> = window.words().map(|t| t.form.to_lowercase()).collect();
    Ok(table
        .mean_score(forms.iter().map(String::as_str))
        .map(|(mean, _coverage)| mean))
}

/// Covered fraction of window tokens for one prevalence table, reported
/// alongside scores so out-of-vocabulary rates stay visible.
pub fn prevalence_coverage(
    window: &Window,
    resources: &ResourceBundle,
    table: &str,
) -> Result<Option<f64>> {
    let table = resources
        .prevalence_table(table)
        .ok_or_else(|| Error::MissingResource(format!("prevalence table {table}")))?;
    let forms: Vec<String> = window.words().map(|t| t.form.to_lowercase()).collect();
    Ok(table
        .mean_score(forms.iter().map(String::as_str))
        .map(|(_mean, coverage)| coverage))
}

/// Within-sentence n-grams of lower-cased word forms for one gram order.
fn sentence_ngrams(window: &Window, n: usize) -> Vec<String> {
    let mut grams = Vec::new();
    for sentence in window.sentences {
        let forms: Vec<String> = sentence
            .tokens
            .iter()
            .filter(|t| !is_punct_tag(&t.pos))
            .map(|t| t.form.to_lowercase())
            .collect();
        if forms.len() < n {
            continue;
        }
        for slice in forms.windows(n) {
            grams.push(slice.join(" "));
        }
    }
    grams
}

/// Percent of a window's n-grams attested in each registered register table.
/// Windows without grams of the required order score missing.
pub fn ngram_scores(
    window: &Window,
    resources: &ResourceBundle,
    registry: &MeasureRegistry,
) -> Result<Vec<(MeasureId, Option<f64>)>> {
    let mut out = Vec::new();
    for measure in registry.measures() {
        let Binding::NgramCoverage { register, n } = &measure.binding else {
            continue;
        };
        let table = resources
            .ngram_table(*register, *n)
            .ok_or_else(|| Error::MissingResource(format!("n-gram table {register}:{n}")))?;
        let grams = sentence_ngrams(window, *n);
        let score = if grams.is_empty() {
            None
        } else {
            let hits = grams.iter().filter(|g| table.contains(g)).count();
            Some(100.0 * hits as f64 / grams.len() as f64)
        };
        out.push((measure.id.clone(), score));
    }
    Ok(out)
}

/// Compression-based complexity: Deflate output bytes over input bytes for
/// the window text (lower-cased token forms joined by single spaces).
/// Deterministic for a fixed level; missing for empty text.
pub fn koldef_score(window: &Window, level: u32) -> Option<f64> {
    let text = window
        .tokens()
        .map(|t| t.form.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ");
    if text.is_empty() {
        return None;
    }
    Some(deflate_ratio(text.as_bytes(), level))
}

pub(crate) fn deflate_ratio(bytes: &[u8], level: u32) -> f64 {
    let mut encoder = DeflateEncoder::new(Vec::new(), Compression::new(level));
    encoder.write_all(bytes).expect("in-memory deflate");
    let compressed = encoder.finish().expect("in-memory deflate");
    compressed.len() as f64 / bytes.len() as f64
}

/// Score every registered measure on one window. Returns one slot per
/// measure, in registry order.
pub fn score_window(window: &Window, ctx: &ScoreContext) -> Result<Vec<Option<f64>>> {
    let needs_counts = ctx
        .registry
        .measures()
        .iter()
        .any(|m| matches!(m.binding, Binding::Ratio { .. }));
    let counts = needs_counts.then(|| syntactic_counts(window.trees, ctx.rules));
    let needs_profile = ctx.registry.measures().iter().any(|m| {
        matches!(
            m.binding,
            Binding::Ttr
                | Binding::Cttr
                | Binding::LexicalDensity
                | Binding::MeanChars
                | Binding::MeanSyllables
                | Binding::Sophistication { .. }
        )
    });
    let profile = needs_profile.then(|| lexical_profile(window, ctx.resources));

    let mut scores = Vec::with_capacity(ctx.registry.len());
    for measure in ctx.registry.measures() {
        let score = match &measure.binding {
            Binding::Ratio { num, den } => {
                let counts = counts.as_ref().expect("counts computed");
                ratio(num.value(counts), den.value(counts))
            }
            Binding::Ttr
            | Binding::Cttr
            | Binding::LexicalDensity
            | Binding::MeanChars
            | Binding::MeanSyllables
            | Binding::Sophistication { .. } => profile
                .as_ref()
                .expect("profile computed")
                .score(&measure.binding, ctx.resources)?,
            Binding::Prevalence { table } => prevalence_score(window, ctx.resources, table)?,
            Binding::NgramCoverage { register, n } => {
                let table = ctx.resources.ngram_table(*register, *n).ok_or_else(|| {
                    Error::MissingResource(format!("n-gram table {register}:{n}"))
                })?;
                let grams = sentence_ngrams(window, *n);
                if grams.is_empty() {
                    None
                } else {
                    let hits = grams.iter().filter(|g| table.contains(g)).count();
                    Some(100.0 * hits as f64 / grams.len() as f64)
                }
            }
            Binding::DeflateRatio => koldef_score(window, ctx.deflate_level),
        };
        scores.push(score);
    }
    Ok(scores)
}
