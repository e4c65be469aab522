use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexres::{parse_ngram_id, Register, ResourceBundle};
use crate::treebank::SyntacticCounts;

/// Name of one complexity measure, e.g. `C/S` or `Prevalence.UKWF`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasureId(String);

impl MeasureId {
    pub fn new(name: impl Into<String>) -> Self {
        MeasureId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for MeasureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MeasureId {
    fn from(s: &str) -> Self {
        MeasureId::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Syntactic,
    Lexical,
    Ngram,
    Information,
}

impl Category {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "syntactic" => Category::Syntactic,
            "lexical" => Category::Lexical,
            "ngram" => Category::Ngram,
            "information" => Category::Information,
            other => return Err(Error::Registry(format!("unknown category {other:?}"))),
        })
    }
}

/// One production-unit count, addressable from registry bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntacticTerm {
    Words,
    Sentences,
    Clauses,
    TUnits,
    DependentClauses,
    ComplexTUnits,
    CoordinatePhrases,
    ComplexNominals,
    NounPhrases,
    NpPremodifiers,
    NpPostmodifiers,
}

impl SyntacticTerm {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "words" => SyntacticTerm::Words,
            "sentences" => SyntacticTerm::Sentences,
            "clauses" => SyntacticTerm::Clauses,
            "t_units" => SyntacticTerm::TUnits,
            "dependent_clauses" => SyntacticTerm::DependentClauses,
            "complex_t_units" => SyntacticTerm::ComplexTUnits,
            "coordinate_phrases" => SyntacticTerm::CoordinatePhrases,
            "complex_nominals" => SyntacticTerm::ComplexNominals,
            "noun_phrases" => SyntacticTerm::NounPhrases,
            "np_premodifiers" => SyntacticTerm::NpPremodifiers,
            "np_postmodifiers" => SyntacticTerm::NpPostmodifiers,
            other => return Err(Error::Registry(format!("unknown count {other:?}"))),
        })
    }

    pub fn value(&self, counts: &SyntacticCounts) -> u64 {
        match self {
            SyntacticTerm::Words => counts.words,
            SyntacticTerm::Sentences => counts.sentences,
            SyntacticTerm::Clauses => counts.clauses,
            SyntacticTerm::TUnits => counts.t_units,
            SyntacticTerm::DependentClauses => counts.dependent_clauses,
            SyntacticTerm::ComplexTUnits => counts.complex_t_units,
            SyntacticTerm::CoordinatePhrases => counts.coordinate_phrases,
            SyntacticTerm::ComplexNominals => counts.complex_nominals,
            SyntacticTerm::NounPhrases => counts.noun_phrases,
            SyntacticTerm::NpPremodifiers => counts.np_premodifiers,
            SyntacticTerm::NpPostmodifiers => counts.np_postmodifiers,
        }
    }
}

/// How a measure is computed from a window.
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Ratio {
        num: SyntacticTerm,
        den: SyntacticTerm,
    },
    Ttr,
    Cttr,
    LexicalDensity,
    MeanSyllables,
    MeanChars,
    Sophistication {
        list: String,
    },
    Prevalence {
        table: String,
    },
    NgramCoverage {
        register: Register,
        n: usize,
    },
    DeflateRatio,
}

fn parse_binding(s: &str) -> Result<Binding> {
    if let Some(rest) = s.strip_prefix("ratio:") {
        let (num, den) = rest
            .split_once('/')
            .ok_or_else(|| Error::Registry(format!("ratio binding {s:?} needs num/den")))?;
        return Ok(Binding::Ratio {
            num: SyntacticTerm::parse(num)?,
            den: SyntacticTerm::parse(den)?,
        });
    }
    if let Some(list) = s.strip_prefix("sophistication:") {
        return Ok(Binding::Sophistication {
            list: list.to_string(),
        });
    }
    if let Some(table) = s.strip_prefix("prevalence:") {
        return Ok(Binding::Prevalence {
            table: table.to_string(),
        });
    }
    if let Some(id) = s.strip_prefix("coverage:") {
        let (register, n) = parse_ngram_id(id)?;
        return Ok(Binding::NgramCoverage { register, n });
    }
    Ok(match s {
        "ttr" => Binding::Ttr,
        "cttr" => Binding::Cttr,
        "lexical_density" => Binding::LexicalDensity,
        "mean_syllables" => Binding::MeanSyllables,
        "mean_chars" => Binding::MeanChars,
        "deflate_ratio" => Binding::DeflateRatio,
        other => return Err(Error::Registry(format!("unknown binding {other:?}"))),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub id: MeasureId,
    pub category: Category,
    pub binding: Binding,
}

/// The set of measures to score, with their formula bindings. Parsed from a
/// manifest so the inventory is data, not code.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRegistry {
    version: String,
    measures: Vec<Measure>,
}

/// Normalization for the NP modifier measures. The default reads them as
/// modifiers per noun phrase; the per-sentence variant is available because
/// published figures are ambiguous between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NpNormalization {
    #[default]
    PerNounPhrase,
    PerSentence,
}

/// The registry manifest embedded in the crate.
pub const DEFAULT_REGISTRY_TEXT: &str = include_str!("../../resources/measure_registry.txt");

impl MeasureRegistry {
    /// Parse a registry manifest: a `version:` line, then whitespace-separated
    /// `id category binding` rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut version = None;
        let mut measures: Vec<Measure> = Vec::new();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(v) = line.strip_prefix("version:") {
                version = Some(v.trim().to_string());
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Registry(format!(
                    "registry line {}: expected `id category binding`",
                    lineno + 1
                )));
            }
            let id = MeasureId::new(fields[0]);
            if !seen.insert(id.clone()) {
                return Err(Error::Registry(format!("duplicate measure {id}")));
            }
            measures.push(Measure {
                id,
                category: Category::parse(fields[1])?,
                binding: parse_binding(fields[2])?,
            });
        }
        let version =
            version.ok_or_else(|| Error::Registry("registry has no version: line".into()))?;
        if measures.is_empty() {
            return Err(Error::Registry("registry defines no measures".into()));
        }
        Ok(MeasureRegistry { version, measures })
    }

    /// The 30-measure default registry.
    pub fn default_registry() -> &'static MeasureRegistry {
        static DEFAULT: OnceLock<MeasureRegistry> = OnceLock::new();
        DEFAULT.get_or_init(|| {
            MeasureRegistry::parse(DEFAULT_REGISTRY_TEXT).expect("embedded registry parses")
        })
    }

    /// Default registry with the chosen NP-modifier normalization.
    pub fn default_with(np_norm: NpNormalization) -> MeasureRegistry {
        let mut registry = Self::default_registry().clone();
        if np_norm == NpNormalization::PerSentence {
            for measure in &mut registry.measures {
                if let Binding::Ratio { num, den } = &mut measure.binding {
                    if matches!(
                        num,
                        SyntacticTerm::NpPremodifiers | SyntacticTerm::NpPostmodifiers
                    ) {
                        *den = SyntacticTerm::Sentences;
                    }
                }
            }
            registry.version.push_str("+np_per_sentence");
        }
        registry
    }

    /// Restrict the registry to the given measures, in the given order.
    pub fn subset(&self, ids: &[MeasureId]) -> Result<MeasureRegistry> {
        let mut measures = Vec::with_capacity(ids.len());
        for id in ids {
            match self.measures.iter().find(|m| &m.id == id) {
                Some(measure) => measures.push(measure.clone()),
                None => return Err(Error::Registry(format!("unknown measure {id}"))),
            }
        }
        if measures.is_empty() {
            return Err(Error::Registry("empty measure subset".into()));
        }
        Ok(MeasureRegistry {
            version: self.version.clone(),
            measures,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn measures(&self) -> &[Measure] {
        &self.measures
    }

    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    pub fn ids(&self) -> Vec<MeasureId> {
        self.measures.iter().map(|m| m.id.clone()).collect()
    }

    /// Verify that every resource named by a binding is present in the
    /// bundle; reports all missing resources at once.
    pub fn validate_resources(&self, bundle: &ResourceBundle) -> Result<()> {
        let mut missing = Vec::new();
        for measure in &self.measures {
            match &measure.binding {
                Binding::Sophistication { list } => {
                    if bundle.frequency_list(list).is_none() {
                        missing.push(format!("frequency list {list}"));
                    }
                }
                Binding::Prevalence { table } => {
                    if bundle.prevalence_table(table).is_none() {
                        missing.push(format!("prevalence table {table}"));
                    }
                }
                Binding::NgramCoverage { register, n }
                    if bundle.ngram_table(*register, *n).is_none() =>
                {
                    missing.push(format!("n-gram table {register}:{n}"));
                }
                _ => {}
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            missing.sort();
            missing.dedup();
            Err(Error::MissingResource(missing.join(", ")))
        }
    }
}
