//! External lexical resources: word frequency lists, prevalence tables,
//! register n-gram tables and syllable counts.
//!
//! Resources live in one directory described by a `manifest.tsv` with one
//! resource per line:
//!
//! ```text
//! freq<TAB>ANC<TAB>anc.tsv<TAB>2000      # kind, id, file, sophistication cutoff
//! prevalence<TAB>UKWF<TAB>ukwf.tsv
//! ngram<TAB>academic:3<TAB>acad3.tsv     # id is register:order
//! syllables<TAB>default<TAB>syllables.tsv
//! ```
//!
//! Frequency files are `word<TAB>rank`, prevalence files `word<TAB>score`,
//! n-gram files `gram<TAB>frequency` (membership only today; the frequency
//! column is retained for future weighting) and syllable files
//! `word<TAB>count`. All lookups are case-insensitive; keys are lower-cased
//! at load time.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A ranked word list with a sophistication cutoff: word types ranked past
/// the cutoff (or missing entirely) count as sophisticated vocabulary.
#[derive(Debug, Clone)]
pub struct FrequencyList {
    name: String,
    ranks: HashMap<String, u32>,
    cutoff: u32,
}

/// Rank 2000 is the customary boundary between basic and advanced
/// vocabulary; the manifest can override it per list.
pub const DEFAULT_SOPHISTICATION_CUTOFF: u32 = 2000;

impl FrequencyList {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn rank(&self, word: &str) -> Option<u32> {
        self.ranks.get(&word.to_lowercase()).copied()
    }

    /// True when the word lies beyond the cutoff or is absent from the list.
    pub fn is_sophisticated(&self, word: &str) -> bool {
        match self.rank(word) {
            Some(rank) => rank > self.cutoff,
            None => true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PrevalenceTable {
    name: String,
    values: HashMap<String, f64>,
}

impl PrevalenceTable {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn score(&self, word: &str) -> Option<f64> {
        self.values.get(&word.to_lowercase()).copied()
    }

    /// Mean score over covered tokens plus the covered fraction. Skipping
    /// out-of-vocabulary tokens keeps OOV from masquerading as low
    /// prevalence; `None` when nothing is covered.
    pub fn mean_score<'a, I: IntoIterator<Item = &'a str>>(&self, words: I) -> Option<(f64, f64)> {
        let mut total = 0usize;
        let mut covered = 0usize;
        let mut sum = 0.0;
        for word in words {
            total += 1;
            if let Some(score) = self.score(word) {
                covered += 1;
                sum += score;
            }
        }
        if covered == 0 {
            return None;
        }
        Some((sum / covered as f64, covered as f64 / total as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Register {
    Spoken,
    Magazine,
    Fiction,
    News,
    Academic,
}

impl Register {
    pub fn parse(s: &str) -> Result<Register> {
        Ok(match s {
            "spoken" => Register::Spoken,
            "magazine" => Register::Magazine,
            "fiction" => Register::Fiction,
            "news" => Register::News,
            "academic" => Register::Academic,
            other => return Err(Error::Registry(format!("unknown register {other:?}"))),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Register::Spoken => "spoken",
            Register::Magazine => "magazine",
            Register::Fiction => "fiction",
            Register::News => "news",
            Register::Academic => "academic",
        }
    }
}

impl std::fmt::Display for Register {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Membership table of lower-cased, space-joined n-grams for one register
/// and one gram order.
#[derive(Debug, Clone)]
pub struct NgramTable {
    register: Register,
    n: usize,
    grams: HashSet<String>,
}

impl NgramTable {
    pub fn register(&self) -> Register {
        self.register
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    /// Exact membership of a lower-cased, single-space-joined gram.
    pub fn contains(&self, gram: &str) -> bool {
        self.grams.contains(gram)
    }
}

/// Syllable counting: an exceptions table consulted first, then a vowel-group
/// heuristic over a/e/i/o/u/y with a final silent-e rule.
#[derive(Debug, Clone, Default)]
pub struct SyllableCounter {
    exceptions: HashMap<String, u32>,
}

impl SyllableCounter {
    pub fn new(exceptions: HashMap<String, u32>) -> Self {
        SyllableCounter { exceptions }
    }

    pub fn count(&self, word: &str) -> Result<u32> {
        if word.is_empty() || !word.chars().all(|c| c.is_alphabetic()) {
            return Err(Error::UndefinedWord(word.to_string()));
        }
        let lower = word.to_lowercase();
        if let Some(&n) = self.exceptions.get(&lower) {
            return Ok(n);
        }
        Ok(heuristic_syllables(&lower))
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn heuristic_syllables(lower: &str) -> u32 {
    let chars: Vec<char> = lower.chars().collect();
    let mut groups = 0u32;
    let mut in_group = false;
    for &c in &chars {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    // final silent e: consonant + e, as in "make"
    if groups > 1
        && chars.last() == Some(&'e')
        && chars.len() >= 2
        && !is_vowel(chars[chars.len() - 2])
    {
        groups -= 1;
    }
    groups.max(1)
}

/// Every resource table named by the manifest, immutable after load.
#[derive(Debug, Clone, Default)]
pub struct ResourceBundle {
    frequency: BTreeMap<String, FrequencyList>,
    prevalence: BTreeMap<String, PrevalenceTable>,
    ngrams: BTreeMap<(Register, usize), NgramTable>,
    syllables: SyllableCounter,
}

impl ResourceBundle {
    pub fn frequency_list(&self, name: &str) -> Option<&FrequencyList> {
        self.frequency.get(name)
    }

    pub fn prevalence_table(&self, name: &str) -> Option<&PrevalenceTable> {
        self.prevalence.get(name)
    }

    pub fn ngram_table(&self, register: Register, n: usize) -> Option<&NgramTable> {
        self.ngrams.get(&(register, n))
    }

    pub fn syllables(&self) -> &SyllableCounter {
        &self.syllables
    }

    pub fn prevalence_names(&self) -> impl Iterator<Item = &str> {
        self.prevalence.keys().map(String::as_str)
    }

    /// Number of named lookup tables (frequency + prevalence + n-gram).
    pub fn len(&self) -> usize {
        self.frequency.len() + self.prevalence.len() + self.ngrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_resource_file(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::MissingResource(path.display().to_string()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn tsv_rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.trim_start().starts_with('#'))
}

/// Load every resource listed in `dir/manifest.tsv`.
pub fn load_resources(dir: &Path) -> Result<ResourceBundle> {
    let manifest = dir.join("manifest.tsv");
    if !manifest.is_file() {
        return Err(Error::MissingResource(manifest.display().to_string()));
    }
    let text = fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
    let mut bundle = ResourceBundle::default();
    for (lineno, line) in tsv_rows(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(malformed(
                &manifest,
                lineno,
                "manifest rows need kind, id and file",
            ));
        }
        let (kind, id, file) = (fields[0], fields[1], dir.join(fields[2]));
        match kind {
            "freq" => {
                let cutoff = match fields.get(3) {
                    Some(raw) => raw
                        .parse::<u32>()
                        .map_err(|_| malformed(&manifest, lineno, format!("bad cutoff {raw:?}")))?,
                    None => DEFAULT_SOPHISTICATION_CUTOFF,
                };
                if cutoff < 1 {
                    return Err(malformed(&manifest, lineno, "cutoff must be at least 1"));
                }
                let list = load_frequency_list(id, &file, cutoff)?;
                bundle.frequency.insert(id.to_string(), list);
            }
            "prevalence" => {
                let table = load_prevalence_table(id, &file)?;
                bundle.prevalence.insert(id.to_string(), table);
            }
            "ngram" => {
                let (register, n) =
                    parse_ngram_id(id).map_err(|e| malformed(&manifest, lineno, e.to_string()))?;
                let table = load_ngram_table(register, n, &file)?;
                bundle.ngrams.insert((register, n), table);
            }
            "syllables" => {
                bundle.syllables = load_syllable_exceptions(&file)?;
            }
            other => {
                return Err(malformed(
                    &manifest,
                    lineno,
                    format!("unknown resource kind {other:?}"),
                ))
            }
        }
    }
    Ok(bundle)
}

pub(crate) fn parse_ngram_id(id: &str) -> Result<(Register, usize)> {
    let (register, n) = id
        .split_once(':')
        .ok_or_else(|| Error::Registry(format!("n-gram id {id:?} must be register:order")))?;
    let register = Register::parse(register)?;
    let n: usize = n
        .parse()
        .map_err(|_| Error::Registry(format!("bad n-gram order in {id:?}")))?;
    if !(3..=5).contains(&n) {
        return Err(Error::Registry(format!("n-gram order {n} outside 3..=5")));
    }
    Ok((register, n))
}

fn load_frequency_list(name: &str, path: &Path, cutoff: u32) -> Result<FrequencyList> {
    let text = read_resource_file(path)?;
    let mut ranks = HashMap::new();
    for (lineno, line) in tsv_rows(&text) {
        let (word, rank) = line
            .split_once('\t')
            .ok_or_else(|| malformed(path, lineno, "expected word<TAB>rank"))?;
        let rank: u32 = rank
            .trim()
            .parse()
            .map_err(|_| malformed(path, lineno, format!("bad rank {rank:?}")))?;
        if rank < 1 {
            return Err(malformed(path, lineno, "ranks are positive"));
        }
        let key = word.trim().to_lowercase();
        if ranks.insert(key.clone(), rank).is_some() {
            return Err(malformed(path, lineno, format!("duplicate word {key:?}")));
        }
    }
    Ok(FrequencyList {
        name: name.to_string(),
        ranks,
        cutoff,
    })
}

fn load_prevalence_table(name: &str, path: &Path) -> Result<PrevalenceTable> {
    let text = read_resource_file(path)?;
    let mut values = HashMap::new();
    for (lineno, line) in tsv_rows(&text) {
        let (word, score) = line
            .split_once('\t')
            .ok_or_else(|| malformed(path, lineno, "expected word<TAB>score"))?;
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| malformed(path, lineno, format!("bad score {score:?}")))?;
        if !score.is_finite() {
            return Err(malformed(path, lineno, "scores must be finite"));
        }
        let key = word.trim().to_lowercase();
        if values.insert(key.clone(), score).is_some() {
            return Err(malformed(path, lineno, format!("duplicate word {key:?}")));
        }
    }
    Ok(PrevalenceTable {
        name: name.to_string(),
        values,
    })
}

fn load_ngram_table(register: Register, n: usize, path: &Path) -> Result<NgramTable> {
    let text = read_resource_file(path)?;
    let mut grams = HashSet::new();
    for (lineno, line) in tsv_rows(&text) {
        let gram = line.split('\t').next().unwrap_or_default().trim();
        let items: Vec<&str> = gram.split_whitespace().collect();
        if items.len() != n {
            return Err(malformed(
                path,
                lineno,
                format!("{gram:?} has {} items, need {n}", items.len()),
            ));
        }
        grams.insert(items.join(" ").to_lowercase());
    }
    Ok(NgramTable { register, n, grams })
}

fn load_syllable_exceptions(path: &Path) -> Result<SyllableCounter> {
    let text = read_resource_file(path)?;
    let mut exceptions = HashMap::new();
    for (lineno, line) in tsv_rows(&text) {
        let (word, count) = line
            .split_once('\t')
            .ok_or_else(|| malformed(path, lineno, "expected word<TAB>count"))?;
        let count: u32 = count
            .trim()
            .parse()
            .map_err(|_| malformed(path, lineno, format!("bad count {count:?}")))?;
        if count < 1 {
            return Err(malformed(path, lineno, "syllable counts are at least 1"));
        }
        exceptions.insert(word.trim().to_lowercase(), count);
    }
    Ok(SyllableCounter { exceptions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, content: &str) {
        fs::write(dir.join(name), content).unwrap();
    }

    fn sample_dir() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        write(
            p,
            "manifest.tsv",
            "freq\tANC\tanc.tsv\t2000\nfreq\tBNC\tbnc.tsv\nprevalence\tUKWF\tukwf.tsv\nngram\tacademic:3\tacad3.tsv\nsyllables\tdefault\tsyll.tsv\n",
        );
        write(p, "anc.tsv", "the\t1\ndog\t500\nsesquipedalian\t30000\n");
        write(p, "bnc.tsv", "the\t2\nDog\t700\n");
        write(p, "ukwf.tsv", "the\t12.1\ndog\t13.0\n");
        write(p, "acad3.tsv", "i think that\t42\nin terms of\t17\n");
        write(p, "syll.tsv", "colonel\t2\n");
        dir
    }

    #[test]
    fn loads_manifest_bundle() {
        let dir = sample_dir();
        let bundle = load_resources(dir.path()).unwrap();
        assert_eq!(bundle.len(), 4);
        assert_eq!(bundle.frequency_list("ANC").unwrap().rank("dog"), Some(500));
        assert!(bundle
            .frequency_list("ANC")
            .unwrap()
            .is_sophisticated("sesquipedalian"));
        assert!(!bundle
            .frequency_list("ANC")
            .unwrap()
            .is_sophisticated("dog"));
        assert!(bundle
            .ngram_table(Register::Academic, 3)
            .unwrap()
            .contains("i think that"));
    }

    #[test]
    fn lookups_are_case_insensitive() {
        let dir = sample_dir();
        let bundle = load_resources(dir.path()).unwrap();
        let bnc = bundle.frequency_list("BNC").unwrap();
        assert_eq!(bnc.rank("DOG"), bnc.rank("dog"));
        assert_eq!(bnc.rank("dog"), Some(700));
        let ukwf = bundle.prevalence_table("UKWF").unwrap();
        assert_eq!(ukwf.score("The"), Some(12.1));
    }

    #[test]
    fn wrong_gram_arity_is_rejected() {
        let dir = sample_dir();
        write(dir.path(), "acad3.tsv", "the of\t3\n");
        let err = load_resources(dir.path()).unwrap_err();
        assert!(err.to_string().contains("2 items, need 3"), "{err}");
    }

    #[test]
    fn duplicate_frequency_word_is_rejected() {
        let dir = sample_dir();
        write(dir.path(), "anc.tsv", "dog\t1\nDog\t2\n");
        let err = load_resources(dir.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate word \"dog\""), "{err}");
    }

    #[test]
    fn missing_file_names_the_resource() {
        let dir = sample_dir();
        fs::remove_file(dir.path().join("ukwf.tsv")).unwrap();
        let err = load_resources(dir.path()).unwrap_err();
        assert!(
            matches!(err, Error::MissingResource(ref r) if r.contains("ukwf.tsv")),
            "{err}"
        );
    }

    #[test]
    fn syllable_heuristic() {
        let counter = SyllableCounter::default();
        assert_eq!(counter.count("dog").unwrap(), 1);
        assert_eq!(counter.count("banana").unwrap(), 3);
        assert_eq!(counter.count("make").unwrap(), 1);
        assert_eq!(counter.count("the").unwrap(), 1);
        assert_eq!(counter.count("yellow").unwrap(), 2);
        assert_eq!(counter.count("strength").unwrap(), 1);
        assert!(counter.count("3rd").is_err());
        assert!(counter.count("").is_err());
    }

    #[test]
    fn exceptions_beat_heuristic() {
        let dir = sample_dir();
        let bundle = load_resources(dir.path()).unwrap();
        assert_eq!(bundle.syllables().count("colonel").unwrap(), 2);
        assert_eq!(bundle.syllables().count("COLONEL").unwrap(), 2);
    }

    #[test]
    fn prevalence_mean_skips_oov() {
        let dir = sample_dir();
        let bundle = load_resources(dir.path()).unwrap();
        let table = bundle.prevalence_table("UKWF").unwrap();
        let (mean, coverage) = table.mean_score(["the", "dog", "zzz"]).unwrap();
        assert!((mean - 12.55).abs() < 1e-12);
        assert!((coverage - 2.0 / 3.0).abs() < 1e-12);
        assert!(table.mean_score(["zzz"]).is_none());
    }
}
