//! Reference/hypothesis word alignment, word error rates, per-speaker
//! statistics and error distribution by word class.
//!
//! Alignment minimizes unit-cost edit distance; among minimum-cost
//! alignments the one with the most matches is chosen, which pins down the
//! substitution/insertion/deletion counts uniquely (and symmetrically: the
//! counts survive swapping reference and hypothesis with insertions and
//! deletions exchanged). The backtrace prefers match, then substitution,
//! then deletion, then insertion, making the op sequence deterministic too.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EditOp {
    Match {
        word: String,
    },
    Substitution {
        reference: String,
        hypothesis: String,
    },
    Insertion {
        hypothesis: String,
    },
    Deletion {
        reference: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub doc_id: String,
    #[serde(skip)]
    pub ops: Vec<EditOp>,
    pub n_ref: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    /// Percent: 100 * (sub + ins + del) / n_ref. Can exceed 100.
    pub wer: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Cell {
    cost: u32,
    matches: u32,
}

impl Cell {
    fn better_than(self, other: Cell) -> bool {
        self.cost < other.cost || (self.cost == other.cost && self.matches > other.matches)
    }
}

/// Align a hypothesis against a non-empty reference.
pub fn align(doc_id: &str, reference: &[&str], hypothesis: &[&str]) -> Result<AlignmentReport> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let n = reference.len();
    let m = hypothesis.len();
    let mut dp = vec![
        Cell {
            cost: 0,
            matches: 0
        };
        (n + 1) * (m + 1)
    ];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in 1..=n {
        dp[at(i, 0)] = Cell {
            cost: i as u32,
            matches: 0,
        };
    }
    for j in 1..=m {
        dp[at(0, j)] = Cell {
            cost: j as u32,
            matches: 0,
        };
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = dp[at(i - 1, j - 1)];
            let mut best = if reference[i - 1] == hypothesis[j - 1] {
                Cell {
                    cost: diag.cost,
                    matches: diag.matches + 1,
                }
            } else {
                Cell {
                    cost: diag.cost + 1,
                    matches: diag.matches,
                }
            };
            let del = dp[at(i - 1, j)];
            let candidate = Cell {
                cost: del.cost + 1,
                matches: del.matches,
            };
            if candidate.better_than(best) {
                best = candidate;
            }
            let ins = dp[at(i, j - 1)];
            let candidate = Cell {
                cost: ins.cost + 1,
                matches: ins.matches,
            };
            if candidate.better_than(best) {
                best = candidate;
            }
            dp[at(i, j)] = best;
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[at(i, j)];
        if i > 0 && j > 0 && reference[i - 1] == hypothesis[j - 1] {
            let diag = dp[at(i - 1, j - 1)];
            if diag.cost == here.cost && diag.matches + 1 == here.matches {
                ops.push(EditOp::Match {
                    word: reference[i - 1].to_string(),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && j > 0 {
            let diag = dp[at(i - 1, j - 1)];
            if reference[i - 1] != hypothesis[j - 1]
                && diag.cost + 1 == here.cost
                && diag.matches == here.matches
            {
                ops.push(EditOp::Substitution {
                    reference: reference[i - 1].to_string(),
                    hypothesis: hypothesis[j - 1].to_string(),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 {
            let del = dp[at(i - 1, j)];
            if del.cost + 1 == here.cost && del.matches == here.matches {
                ops.push(EditOp::Deletion {
                    reference: reference[i - 1].to_string(),
                });
                i -= 1;
                continue;
            }
        }
        debug_assert!(j > 0);
        ops.push(EditOp::Insertion {
            hypothesis: hypothesis[j - 1].to_string(),
        });
        j -= 1;
    }
    ops.reverse();

    let mut substitutions = 0;
    let mut insertions = 0;
    let mut deletions = 0;
    for op in &ops {
        match op {
            EditOp::Substitution { .. } => substitutions += 1,
            EditOp::Insertion { .. } => insertions += 1,
            EditOp::Deletion { .. } => deletions += 1,
            EditOp::Match { .. } => {}
        }
    }
    debug_assert_eq!(
        (substitutions + insertions + deletions) as u32,
        dp[at(n, m)].cost
    );
    Ok(AlignmentReport {
        doc_id: doc_id.to_string(),
        n_ref: n,
        wer: 100.0 * (substitutions + insertions + deletions) as f64 / n as f64,
        substitutions,
        insertions,
        deletions,
        ops,
    })
}

/// Micro-averaged corpus error rates: error totals over the reference total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusWer {
    pub n_ref: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub sub_pct: f64,
    pub ins_pct: f64,
    pub del_pct: f64,
    pub wer: f64,
}

pub fn corpus_wer(reports: &[AlignmentReport]) -> Result<CorpusWer> {
    if reports.is_empty() {
        return Err(Error::EmptyReference);
    }
    let n_ref: usize = reports.iter().map(|r| r.n_ref).sum();
    let substitutions: usize = reports.iter().map(|r| r.substitutions).sum();
    let insertions: usize = reports.iter().map(|r| r.insertions).sum();
    let deletions: usize = reports.iter().map(|r| r.deletions).sum();
    let pct = |count: usize| 100.0 * count as f64 / n_ref as f64;
    Ok(CorpusWer {
        n_ref,
        substitutions,
        insertions,
        deletions,
        sub_pct: pct(substitutions),
        ins_pct: pct(insertions),
        del_pct: pct(deletions),
        wer: pct(substitutions + insertions + deletions),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorMetric {
    #[serde(rename = "WER")]
    Wer,
    Substitutions,
    Deletions,
    Insertions,
}

/// Mean / SD / min / max of one per-speaker percentage metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeakerStats {
    pub metric: ErrorMetric,
    pub n_speakers: usize,
    pub mean: f64,
    /// Sample standard deviation; absent with a single speaker.
    pub sd: Option<f64>,
    pub min: f64,
    pub max: f64,
}

/// Group reports by speaker. Documents missing from the map count as their
/// own speaker.
pub fn group_by_speaker<'a>(
    reports: &'a [AlignmentReport],
    speaker_of: &BTreeMap<String, String>,
) -> BTreeMap<String, Vec<&'a AlignmentReport>> {
    let mut groups: BTreeMap<String, Vec<&AlignmentReport>> = BTreeMap::new();
    for report in reports {
        let speaker = speaker_of
            .get(&report.doc_id)
            .cloned()
            .unwrap_or_else(|| report.doc_id.clone());
        groups.entry(speaker).or_default().push(report);
    }
    groups
}

/// Per-speaker micro metrics summarized across speakers, one entry per
/// metric in WER / Substitutions / Deletions / Insertions order.
pub fn speaker_stats(
    groups: &BTreeMap<String, Vec<&AlignmentReport>>,
) -> Result<Vec<SpeakerStats>> {
    if groups.is_empty() {
        return Err(Error::EmptyReference);
    }
    let metrics = [
        ErrorMetric::Wer,
        ErrorMetric::Substitutions,
        ErrorMetric::Deletions,
        ErrorMetric::Insertions,
    ];
    let mut out = Vec::with_capacity(metrics.len());
    for metric in metrics {
        let values: Vec<f64> = groups
            .values()
            .map(|reports| {
                let n_ref: usize = reports.iter().map(|r| r.n_ref).sum();
                let count: usize = reports
                    .iter()
                    .map(|r| match metric {
                        ErrorMetric::Wer => r.substitutions + r.insertions + r.deletions,
                        ErrorMetric::Substitutions => r.substitutions,
                        ErrorMetric::Deletions => r.deletions,
                        ErrorMetric::Insertions => r.insertions,
                    })
                    .sum();
                100.0 * count as f64 / n_ref as f64
            })
            .collect();
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            Some((ss / (n - 1) as f64).sqrt())
        } else {
            None
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(SpeakerStats {
            metric,
            n_speakers: n,
            mean,
            sd,
            min,
            max,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WordClass {
    Hesitation,
    Function,
    Content,
}

/// Default hesitation lexicon; the transcription conventions of a corpus may
/// spell these differently, so it is configurable.
pub const DEFAULT_HESITATIONS: [&str; 7] = ["uh", "uhm", "um", "er", "eh", "mhm", "hm"];

const FUNCTION_WORDS_TEXT: &str = include_str!("../resources/function_words.txt");

fn default_function_words() -> &'static HashSet<String> {
    static WORDS: OnceLock<HashSet<String>> = OnceLock::new();
    WORDS.get_or_init(|| {
        FUNCTION_WORDS_TEXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    })
}

/// Assigns every word to hesitation, function or content class. Total on all
/// inputs: anything not in the two closed lists is content.
#[derive(Debug, Clone)]
pub struct WordClassifier {
    hesitations: HashSet<String>,
    function_words: HashSet<String>,
}

impl Default for WordClassifier {
    fn default() -> Self {
        WordClassifier {
            hesitations: DEFAULT_HESITATIONS.iter().map(|w| w.to_string()).collect(),
            function_words: default_function_words().clone(),
        }
    }
}

impl WordClassifier {
    /// Default classifier with a custom hesitation lexicon.
    pub fn with_hesitations<I: IntoIterator<Item = String>>(hesitations: I) -> Self {
        WordClassifier {
            hesitations: hesitations.into_iter().map(|w| w.to_lowercase()).collect(),
            function_words: default_function_words().clone(),
        }
    }

    pub fn is_hesitation(&self, word: &str) -> bool {
        self.hesitations.contains(&word.to_lowercase())
    }

    pub fn classify(&self, word: &str) -> WordClass {
        let lower = word.to_lowercase();
        if self.hesitations.contains(&lower) {
            WordClass::Hesitation
        } else if self.function_words.contains(&lower) {
            WordClass::Function
        } else {
            WordClass::Content
        }
    }
}

/// Share of each error kind falling on one word class. Percentages of a kind
/// sum to 100 across classes; a kind with no errors is absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordClassErrorProfile {
    pub class: WordClass,
    pub sub_pct: Option<f64>,
    pub ins_pct: Option<f64>,
    pub del_pct: Option<f64>,
}

/// Classify errors by word: substitutions and deletions by the reference
/// word, insertions by the hypothesis word.
pub fn error_profile(
    reports: &[AlignmentReport],
    classifier: &WordClassifier,
) -> Vec<WordClassErrorProfile> {
    let classes = [
        WordClass::Hesitation,
        WordClass::Function,
        WordClass::Content,
    ];
    let index_of = |class: WordClass| classes.iter().position(|c| *c == class).unwrap();
    let mut subs = [0usize; 3];
    let mut inss = [0usize; 3];
    let mut dels = [0usize; 3];
    for report in reports {
        for op in &report.ops {
            match op {
                EditOp::Substitution { reference, .. } => {
                    subs[index_of(classifier.classify(reference))] += 1;
                }
                EditOp::Deletion { reference } => {
                    dels[index_of(classifier.classify(reference))] += 1;
                }
                EditOp::Insertion { hypothesis } => {
                    inss[index_of(classifier.classify(hypothesis))] += 1;
                }
                EditOp::Match { .. } => {}
            }
        }
    }
    let pct = |counts: &[usize; 3], class: usize| {
        let total: usize = counts.iter().sum();
        if total == 0 {
            None
        } else {
            Some(100.0 * counts[class] as f64 / total as f64)
        }
    };
    classes
        .iter()
        .enumerate()
        .map(|(i, &class)| WordClassErrorProfile {
            class,
            sub_pct: pct(&subs, i),
            ins_pct: pct(&inss, i),
            del_pct: pct(&dels, i),
        })
        .collect()
}
