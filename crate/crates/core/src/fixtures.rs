//! Synthetic corpora and resource bundles for tests, benches and demos.
//!
//! Everything here is deterministic given the seed, so generated files can
//! be committed and regenerated bit-identically. The grammar is a small
//! hand-rolled mix of clause structures that exercises every counter the
//! syntactic measures need; resources are derived from the generated
//! vocabulary so coverage-style measures land strictly between their
//! bounds.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::alignment::WordClassifier;
use crate::transcript::{Document, Sentence, Token};
use crate::treebank::{is_punct_tag, TreeNode};

const NOUNS: [&str; 20] = [
    "dog",
    "cat",
    "teacher",
    "student",
    "river",
    "mountain",
    "school",
    "system",
    "analysis",
    "idea",
    "problem",
    "question",
    "library",
    "computer",
    "history",
    "language",
    "journey",
    "democracy",
    "philosophy",
    "university",
];

const VERBS_PAST: [(&str, &str); 12] = [
    ("barked", "bark"),
    ("ran", "run"),
    ("talked", "talk"),
    ("walked", "walk"),
    ("explained", "explain"),
    ("discussed", "discuss"),
    ("analyzed", "analyze"),
    ("improved", "improve"),
    ("studied", "study"),
    ("described", "describe"),
    ("visited", "visit"),
    ("remembered", "remember"),
];

const ADJECTIVES: [&str; 10] = [
    "old",
    "young",
    "big",
    "small",
    "interesting",
    "difficult",
    "important",
    "complicated",
    "beautiful",
    "serious",
];

const ADVERBS: [&str; 6] = [
    "quickly",
    "slowly",
    "loudly",
    "carefully",
    "seriously",
    "often",
];

const PREPOSITIONS: [&str; 5] = ["near", "in", "on", "behind", "under"];

const PRONOUNS: [&str; 6] = ["i", "he", "she", "they", "we", "it"];

const THINK_VERBS: [(&str, &str); 3] = [("think", "think"), ("believe", "believe"), ("say", "say")];

const ADVERBIAL_SUBS: [&str; 3] = ["because", "although", "when"];

fn pick<'a, T>(rng: &mut StdRng, pool: &'a [T]) -> &'a T {
    &pool[rng.random_range(0..pool.len())]
}

struct Grammar {
    rng: StdRng,
}

impl Grammar {
    fn simple_np(&mut self) -> TreeNode {
        match self.rng.random_range(0..4u32) {
            0 => TreeNode::phrase(
                "NP",
                vec![TreeNode::leaf("PRP", *pick(&mut self.rng, &PRONOUNS))],
            ),
            1 => TreeNode::phrase(
                "NP",
                vec![
                    TreeNode::leaf("DT", "the"),
                    TreeNode::leaf("JJ", *pick(&mut self.rng, &ADJECTIVES)),
                    TreeNode::leaf("NN", *pick(&mut self.rng, &NOUNS)),
                ],
            ),
            _ => TreeNode::phrase(
                "NP",
                vec![
                    TreeNode::leaf("DT", "the"),
                    TreeNode::leaf("NN", *pick(&mut self.rng, &NOUNS)),
                ],
            ),
        }
    }

    fn np(&mut self) -> TreeNode {
        match self.rng.random_range(0..10u32) {
            0 | 1 => {
                // PP postmodification
                TreeNode::phrase(
                    "NP",
                    vec![
                        self.simple_np(),
                        TreeNode::phrase(
                            "PP",
                            vec![
                                TreeNode::leaf("IN", *pick(&mut self.rng, &PREPOSITIONS)),
                                self.simple_np(),
                            ],
                        ),
                    ],
                )
            }
            2 => {
                // relative clause
                TreeNode::phrase(
                    "NP",
                    vec![
                        self.simple_np(),
                        TreeNode::phrase(
                            "SBAR",
                            vec![
                                TreeNode::phrase("WHNP", vec![TreeNode::leaf("WDT", "that")]),
                                self.finite_clause(),
                            ],
                        ),
                    ],
                )
            }
            3 => {
                // coordination
                TreeNode::phrase(
                    "NP",
                    vec![
                        self.simple_np(),
                        TreeNode::leaf("CC", "and"),
                        self.simple_np(),
                    ],
                )
            }
            _ => self.simple_np(),
        }
    }

    fn vp(&mut self) -> TreeNode {
        let verb = pick(&mut self.rng, &VERBS_PAST).0;
        match self.rng.random_range(0..10u32) {
            0 | 1 => TreeNode::phrase(
                "VP",
                vec![
                    TreeNode::leaf("VBD", verb),
                    TreeNode::phrase(
                        "ADVP",
                        vec![TreeNode::leaf("RB", *pick(&mut self.rng, &ADVERBS))],
                    ),
                ],
            ),
            2..=4 => {
                let object = self.np();
                TreeNode::phrase("VP", vec![TreeNode::leaf("VBD", verb), object])
            }
            5 => {
                // VP coordination
                let second = pick(&mut self.rng, &VERBS_PAST).0;
                TreeNode::phrase(
                    "VP",
                    vec![
                        TreeNode::phrase("VP", vec![TreeNode::leaf("VBD", verb)]),
                        TreeNode::leaf("CC", "and"),
                        TreeNode::phrase("VP", vec![TreeNode::leaf("VBD", second)]),
                    ],
                )
            }
            _ => TreeNode::phrase("VP", vec![TreeNode::leaf("VBD", verb)]),
        }
    }

    /// A finite clause without final punctuation.
    fn finite_clause(&mut self) -> TreeNode {
        let subject = self.simple_np();
        let predicate = self.vp();
        TreeNode::phrase("S", vec![subject, predicate])
    }

    fn sentence_body(&mut self) -> TreeNode {
        match self.rng.random_range(0..12u32) {
            0 | 1 => {
                // complement clause under a thinking verb
                let (form, _) = *pick(&mut self.rng, &THINK_VERBS);
                let subject = TreeNode::phrase(
                    "NP",
                    vec![TreeNode::leaf("PRP", *pick(&mut self.rng, &PRONOUNS))],
                );
                let inner = self.finite_clause();
                TreeNode::phrase(
                    "S",
                    vec![
                        subject,
                        TreeNode::phrase(
                            "VP",
                            vec![
                                TreeNode::leaf("VBP", form),
                                TreeNode::phrase("SBAR", vec![TreeNode::leaf("IN", "that"), inner]),
                            ],
                        ),
                    ],
                )
            }
            2 | 3 => {
                // adverbial subordinate clause
                let main_subject = self.np();
                let verb = pick(&mut self.rng, &VERBS_PAST).0;
                let subordinator = *pick(&mut self.rng, &ADVERBIAL_SUBS);
                let inner = self.finite_clause();
                TreeNode::phrase(
                    "S",
                    vec![
                        main_subject,
                        TreeNode::phrase(
                            "VP",
                            vec![
                                TreeNode::leaf("VBD", verb),
                                TreeNode::phrase(
                                    "SBAR",
                                    vec![TreeNode::leaf("IN", subordinator), inner],
                                ),
                            ],
                        ),
                    ],
                )
            }
            4 => {
                // top-level clause coordination
                let first = self.finite_clause();
                let second = self.finite_clause();
                TreeNode::phrase("S", vec![first, TreeNode::leaf("CC", "and"), second])
            }
            5 => {
                // fragment
                TreeNode::phrase("FRAG", vec![self.simple_np()])
            }
            6 => {
                // hesitation-led clause
                let body = self.finite_clause();
                let mut children = vec![TreeNode::phrase(
                    "INTJ",
                    vec![TreeNode::leaf(
                        "UH",
                        if self.rng.random_bool(0.5) {
                            "uh"
                        } else {
                            "um"
                        },
                    )],
                )];
                children.extend(body.children().to_vec());
                TreeNode::phrase("S", children)
            }
            _ => {
                let subject = self.np();
                let predicate = self.vp();
                TreeNode::phrase("S", vec![subject, predicate])
            }
        }
    }

    fn sentence(&mut self) -> TreeNode {
        let body = self.sentence_body();
        let mut children = vec![body];
        children.push(TreeNode::leaf(".", "."));
        TreeNode::phrase("ROOT", children)
    }
}

fn lemma_of(form: &str, pos: &str) -> String {
    if pos.starts_with("VB") {
        for (past, lemma) in VERBS_PAST {
            if form == past {
                return lemma.to_string();
            }
        }
        match form {
            "is" | "was" | "are" | "were" | "be" | "been" => return "be".to_string(),
            "has" | "have" | "had" => return "have".to_string(),
            "does" | "did" | "do" => return "do".to_string(),
            _ => {}
        }
    }
    form.to_lowercase()
}

fn sentence_from_tree(tree: TreeNode) -> Sentence {
    let tokens = tree
        .leaves()
        .iter()
        .map(|(pos, form)| Token {
            form: form.to_string(),
            lemma: lemma_of(form, pos),
            pos: pos.to_string(),
        })
        .collect();
    Sentence {
        parse: tree.to_string(),
        tokens,
    }
}

/// A paired synthetic corpus: a "manual" side and an "ASR" side derived from
/// it by deleting every 10th function word, plus the speaker, subgroup and
/// grade-label maps the downstream analyses consume.
#[derive(Debug, Clone)]
pub struct FixtureCorpus {
    pub manual: Vec<Document>,
    pub asr: Vec<Document>,
    /// Grade labels for the school subset.
    pub labels: BTreeMap<String, i64>,
    pub subgroups: BTreeMap<String, String>,
    pub speakers: BTreeMap<String, String>,
}

/// Generate `n_docs` documents (6..=12 sentences each). The first half is
/// the "school" subgroup with grade labels 10..=12; the second half is
/// "university", where consecutive documents share a speaker.
pub fn synth_corpus(n_docs: usize, seed: u64) -> FixtureCorpus {
    let mut manual = Vec::with_capacity(n_docs);
    let mut labels = BTreeMap::new();
    let mut subgroups = BTreeMap::new();
    let mut speakers = BTreeMap::new();
    for index in 0..n_docs {
        let mut grammar = Grammar {
            rng: StdRng::seed_from_u64(seed.wrapping_add(index as u64).wrapping_mul(0x9e3779b9)),
        };
        let n_sentences = grammar.rng.random_range(6..=12usize);
        let sentences: Vec<Sentence> = (0..n_sentences)
            .map(|_| sentence_from_tree(grammar.sentence()))
            .collect();
        let id = format!("rec{index:03}");
        let school = index < n_docs / 2;
        let subgroup = if school { "school" } else { "university" };
        let speaker = if school {
            format!("sch{index:02}")
        } else {
            format!("uni{:02}", index / 2)
        };
        if school {
            labels.insert(id.clone(), 10 + (index % 3) as i64);
        }
        subgroups.insert(id.clone(), subgroup.to_string());
        speakers.insert(id.clone(), speaker.clone());
        manual.push(Document {
            id,
            speaker_id: speaker,
            subgroup: subgroup.to_string(),
            sentences,
        });
    }
    let asr = delete_function_words(&manual, &WordClassifier::default(), 10);
    FixtureCorpus {
        manual,
        asr,
        labels,
        subgroups,
        speakers,
    }
}

fn prune(tree: &TreeNode, delete: &[bool], cursor: &mut usize) -> Option<TreeNode> {
    match tree {
        TreeNode::Leaf { label, text } => {
            let drop = delete[*cursor];
            *cursor += 1;
            if drop {
                None
            } else {
                Some(TreeNode::leaf(label.clone(), text.clone()))
            }
        }
        TreeNode::Phrase { label, children } => {
            let kept: Vec<TreeNode> = children
                .iter()
                .filter_map(|child| prune(child, delete, cursor))
                .collect();
            if kept.is_empty() {
                None
            } else {
                Some(TreeNode::phrase(label.clone(), kept))
            }
        }
    }
}

fn delete_tokens(
    docs: &[Document],
    mut should_delete: impl FnMut(&Token) -> bool,
) -> Vec<Document> {
    docs.iter()
        .map(|doc| {
            let mut sentences = Vec::with_capacity(doc.sentences.len());
            for sentence in &doc.sentences {
                let delete: Vec<bool> = sentence.tokens.iter().map(&mut should_delete).collect();
                if delete.iter().all(|d| !*d) {
                    sentences.push(sentence.clone());
                    continue;
                }
                let tree = crate::treebank::parse_ptb(&sentence.parse).expect("fixture parses");
                let mut cursor = 0usize;
                let Some(pruned) = prune(&tree, &delete, &mut cursor) else {
                    continue; // drop sentences emptied by deletion
                };
                let tokens: Vec<Token> = sentence
                    .tokens
                    .iter()
                    .zip(&delete)
                    .filter(|(_, drop)| !**drop)
                    .map(|(token, _)| token.clone())
                    .collect();
                sentences.push(Sentence {
                    parse: pruned.to_string(),
                    tokens,
                });
            }
            assert!(!sentences.is_empty(), "corruption emptied {}", doc.id);
            Document {
                sentences,
                ..doc.clone()
            }
        })
        .collect()
}

/// Delete every `period`-th function word across the corpus, rebuilding
/// parses accordingly. `period` of 10 deletes 10% of function words.
pub fn delete_function_words(
    docs: &[Document],
    classifier: &WordClassifier,
    period: usize,
) -> Vec<Document> {
    let mut seen = 0usize;
    delete_tokens(docs, |token| {
        if is_punct_tag(&token.pos) {
            return false;
        }
        if classifier.classify(&token.form) == crate::alignment::WordClass::Function {
            seen += 1;
            seen.is_multiple_of(period)
        } else {
            false
        }
    })
}

/// Delete every `period`-th hesitation marker across the corpus.
pub fn delete_hesitations(docs: &[Document], period: usize) -> Vec<Document> {
    let classifier = WordClassifier::default();
    let mut seen = 0usize;
    delete_tokens(docs, |token| {
        if classifier.is_hesitation(&token.form) {
            seen += 1;
            seen.is_multiple_of(period)
        } else {
            false
        }
    })
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &byte in bytes {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn hashed(tag: &str, item: &str) -> u64 {
    fnv1a(format!("{tag}:{item}").as_bytes())
}

fn corpus_vocabulary(docs: &[Document]) -> BTreeSet<String> {
    docs.iter()
        .flat_map(|d| d.sentences.iter())
        .flat_map(|s| s.tokens.iter())
        .filter(|t| !is_punct_tag(&t.pos))
        .map(|t| t.form.to_lowercase())
        .collect()
}

fn corpus_ngrams(docs: &[Document], n: usize) -> BTreeSet<String> {
    let mut grams = BTreeSet::new();
    for doc in docs {
        for sentence in &doc.sentences {
            let forms: Vec<String> = sentence
                .tokens
                .iter()
                .filter(|t| !is_punct_tag(&t.pos))
                .map(|t| t.form.to_lowercase())
                .collect();
            for window in forms.windows(n) {
                grams.insert(window.join(" "));
            }
        }
    }
    grams
}

/// Write a complete resource directory (manifest plus every table) derived
/// from the corpus vocabulary, so lookups neither always hit nor always
/// miss.
pub fn write_resource_dir(dir: &Path, docs: &[Document]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let vocab = corpus_vocabulary(docs);

    let mut manifest = String::new();
    for list in ["ANC", "BNC", "NGSL"] {
        let file = format!("{}.tsv", list.to_lowercase());
        let mut out = String::new();
        for word in &vocab {
            if hashed(list, word).is_multiple_of(7) {
                continue; // leave some vocabulary out of the list
            }
            let rank = 1 + hashed(&format!("rank:{list}"), word) % 3000;
            out.push_str(&format!("{word}\t{rank}\n"));
        }
        fs::write(dir.join(&file), out)?;
        manifest.push_str(&format!("freq\t{list}\t{file}\t2000\n"));
    }

    for (table, base, spread) in [
        ("UKWF", 12.6, 3.0),
        ("FemaleSDAP", 4.0, 1.0),
        ("Crowd", 2.2, 0.6),
    ] {
        let file = format!("prev_{}.tsv", table.to_lowercase());
        let mut out = String::new();
        for word in &vocab {
            if hashed(table, word).is_multiple_of(10) {
                continue; // out-of-vocabulary words exist
            }
            let unit = (hashed(&format!("score:{table}"), word) % 1000) as f64 / 1000.0;
            let score = base + (unit - 0.5) * spread;
            out.push_str(&format!("{word}\t{score:.3}\n"));
        }
        fs::write(dir.join(&file), out)?;
        manifest.push_str(&format!("prevalence\t{table}\t{file}\n"));
    }

    for (register, n, keep_one_in) in [
        ("academic", 3, 3u64),
        ("academic", 4, 4),
        ("fiction", 3, 3),
        ("fiction", 4, 5),
        ("magazine", 4, 4),
        ("spoken", 5, 4),
    ] {
        let file = format!("{register}{n}.tsv");
        let mut out = String::new();
        for gram in corpus_ngrams(docs, n) {
            if hashed(&format!("{register}:{n}"), &gram).is_multiple_of(keep_one_in) {
                out.push_str(&format!("{gram}\t1\n"));
            }
        }
        fs::write(dir.join(&file), out)?;
        manifest.push_str(&format!("ngram\t{register}:{n}\t{file}\n"));
    }

    fs::write(dir.join("syllables.tsv"), "colonel\t2\npeople\t2\n")?;
    manifest.push_str("syllables\tdefault\tsyllables.tsv\n");
    fs::write(dir.join("manifest.tsv"), manifest)?;
    Ok(())
}

/// Write a corpus as JSON-Lines.
pub fn write_corpus_jsonl(docs: &[Document], path: &Path) -> io::Result<()> {
    let mut out = String::new();
    for doc in docs {
        out.push_str(&serde_json::to_string(doc).expect("documents serialize"));
        out.push('\n');
    }
    fs::write(path, out)
}

/// Write `doc_id<TAB>words` transcript files for the aligner, lower-cased,
/// punctuation dropped.
pub fn write_transcripts(docs: &[Document], path: &Path) -> io::Result<()> {
    let mut out = String::new();
    for doc in docs {
        let words: Vec<String> = doc
            .sentences
            .iter()
            .flat_map(|s| s.tokens.iter())
            .filter(|t| !is_punct_tag(&t.pos))
            .map(|t| t.form.to_lowercase())
            .collect();
        out.push_str(&format!("{}\t{}\n", doc.id, words.join(" ")));
    }
    fs::write(path, out)
}

/// Write a `doc_id<TAB>value` map.
pub fn write_tsv_map<V: std::fmt::Display>(
    map: &BTreeMap<String, V>,
    path: &Path,
) -> io::Result<()> {
    let mut out = String::new();
    for (key, value) in map {
        out.push_str(&format!("{key}\t{value}\n"));
    }
    fs::write(path, out)
}

/// Write a `doc_id,label` CSV.
pub fn write_labels_csv(labels: &BTreeMap<String, i64>, path: &Path) -> io::Result<()> {
    let mut out = String::from("doc_id,label\n");
    for (key, value) in labels {
        out.push_str(&format!("{key},{value}\n"));
    }
    fs::write(path, out)
}

/// A one-sentence flat parse over the given tokens, for bag-of-words tests
/// that need a syntactically trivial window.
pub fn flat_sentence(tokens: Vec<Token>) -> Sentence {
    let leaves: Vec<String> = tokens
        .iter()
        .map(|t| format!("({} {})", t.pos, t.form))
        .collect();
    Sentence {
        parse: format!("(FRAG {})", leaves.join(" ")),
        tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transcript::validate_document;

    #[test]
    fn generated_documents_validate() {
        let corpus = synth_corpus(8, 42);
        assert_eq!(corpus.manual.len(), 8);
        for doc in corpus.manual.iter().chain(&corpus.asr) {
            validate_document(doc).unwrap();
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = synth_corpus(4, 7);
        let b = synth_corpus(4, 7);
        assert_eq!(a.manual, b.manual);
        assert_eq!(a.asr, b.asr);
    }

    #[test]
    fn corruption_deletes_a_tenth_of_function_words() {
        let corpus = synth_corpus(12, 3);
        let count_function = |docs: &[Document]| {
            let classifier = WordClassifier::default();
            docs.iter()
                .flat_map(|d| d.sentences.iter())
                .flat_map(|s| s.tokens.iter())
                .filter(|t| {
                    !is_punct_tag(&t.pos)
                        && classifier.classify(&t.form) == crate::alignment::WordClass::Function
                })
                .count()
        };
        let manual = count_function(&corpus.manual);
        let asr = count_function(&corpus.asr);
        assert_eq!(manual - asr, manual / 10);
        for doc in &corpus.asr {
            validate_document(doc).unwrap();
        }
    }

    #[test]
    fn resources_cover_but_not_fully() {
        let corpus = synth_corpus(6, 11);
        let dir = tempfile::tempdir().unwrap();
        write_resource_dir(dir.path(), &corpus.manual).unwrap();
        let bundle = crate::lexres::load_resources(dir.path()).unwrap();
        assert_eq!(bundle.len(), 12);
        let vocab = corpus_vocabulary(&corpus.manual);
        let anc = bundle.frequency_list("ANC").unwrap();
        let covered = vocab.iter().filter(|w| anc.rank(w).is_some()).count();
        assert!(covered > 0 && covered < vocab.len());
    }
}
