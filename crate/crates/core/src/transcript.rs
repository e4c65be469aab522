//! The annotated-transcript document model and its file formats.
//!
//! A corpus is a JSON-Lines file, one document per line:
//!
//! ```json
//! {"id": "...", "speaker_id": "...", "subgroup": "...",
//!  "sentences": [{"tokens": [{"form": "...", "lemma": "...", "pos": "..."}],
//!                 "parse": "(S ...)"}]}
//! ```
//!
//! Score tables are CSV with a `doc_id` column followed by one column per
//! measure; scores are rendered with six significant digits and missing
//! values as empty fields, which makes output byte-deterministic.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::MeasureId;
use crate::treebank::parse_ptb;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub form: String,
    pub lemma: String,
    pub pos: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    /// Bracketed constituency parse; its leaves must equal `tokens` in order.
    pub parse: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub speaker_id: String,
    pub subgroup: String,
    pub sentences: Vec<Sentence>,
}

/// Read a JSON-Lines corpus, validating every document. Order is preserved;
/// blank lines are ignored; an empty file is an empty corpus.
pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        validate_document(&doc)?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateDocument(doc.id));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Check the document invariants: at least one sentence, non-empty token
/// fields, and leaf/token agreement for every parse.
pub fn validate_document(doc: &Document) -> Result<()> {
    let fail = |index: usize, message: String| Error::Sentence {
        doc_id: doc.id.clone(),
        index,
        message,
    };
    if doc.id.is_empty() {
        return Err(Error::Table("document id must be non-empty".into()));
    }
    if doc.sentences.is_empty() {
        return Err(fail(0, "document has no sentences".into()));
    }
    for (index, sentence) in doc.sentences.iter().enumerate() {
        for token in &sentence.tokens {
            if token.form.is_empty() {
                return Err(fail(index, "token with empty form".into()));
            }
            if token.pos.is_empty() {
                return Err(fail(
                    index,
                    format!("token {:?} with empty pos", token.form),
                ));
            }
        }
        let tree = parse_ptb(&sentence.parse)
            .map_err(|e| fail(index, format!("unparseable parse field: {e}")))?;
        let leaves = tree.leaves();
        if leaves.len() != sentence.tokens.len() {
            return Err(fail(
                index,
                format!(
                    "parse has {} leaves but the sentence has {} tokens",
                    leaves.len(),
                    sentence.tokens.len()
                ),
            ));
        }
        for (position, ((_, leaf), token)) in leaves.iter().zip(&sentence.tokens).enumerate() {
            if *leaf != token.form {
                return Err(fail(
                    index,
                    format!(
                        "leaf {position} is {leaf:?} but token {position} is {:?}",
                        token.form
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Rows of document scores, one column per measure. Missing cells stay
/// explicit so correlation can drop them pairwise instead of reading zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    row_ids: Vec<String>,
    columns: Vec<MeasureId>,
    values: Vec<Vec<Option<f64>>>,
}

impl ScoreTable {
    pub fn new(
        row_ids: Vec<String>,
        columns: Vec<MeasureId>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        if values.len() != row_ids.len() {
            return Err(Error::Table(format!(
                "{} rows of values for {} row ids",
                values.len(),
                row_ids.len()
            )));
        }
        for (id, row) in row_ids.iter().zip(&values) {
            if row.len() != columns.len() {
                return Err(Error::Table(format!(
                    "row {id} has {} cells for {} columns",
                    row.len(),
                    columns.len()
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for column in &columns {
            if !seen.insert(column.as_str()) {
                return Err(Error::Table(format!("duplicate column {column}")));
            }
            validate_csv_field(column.as_str())?;
        }
        let mut seen_rows = std::collections::HashSet::new();
        for id in &row_ids {
            if !seen_rows.insert(id.as_str()) {
                return Err(Error::Table(format!("duplicate row id {id}")));
            }
            validate_csv_field(id)?;
        }
        Ok(ScoreTable {
            row_ids,
            columns,
            values,
        })
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn columns(&self) -> &[MeasureId] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row][col]
    }

    pub fn column_index(&self, measure: &MeasureId) -> Option<usize> {
        self.columns.iter().position(|c| c == measure)
    }

    /// All values of one column, aligned with `row_ids`.
    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|row| row[col]).collect()
    }
}

fn validate_csv_field(field: &str) -> Result<()> {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        return Err(Error::Table(format!(
            "identifier {field:?} may not contain commas, quotes or newlines"
        )));
    }
    Ok(())
}

/// Render a score with six significant digits.
pub fn fmt_sig6(value: f64) -> String {
    debug_assert!(value.is_finite());
    if value == 0.0 {
        return "0.00000".to_string();
    }
    let exponent = value.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0);
    if decimals == 0 {
        // round to six significant digits before printing integers
        let scale = 10f64.powi(exponent - 5);
        format!("{:.0}", (value / scale).round() * scale)
    } else {
        format!("{:.*}", decimals as usize, value)
    }
}

/// Write the table as CSV. Output is byte-deterministic for equal input.
pub fn write_score_table(table: &ScoreTable, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("doc_id");
    for column in &table.columns {
        out.push(',');
        out.push_str(column.as_str());
    }
    out.push('\n');
    for (id, row) in table.row_ids.iter().zip(&table.values) {
        out.push_str(id);
        for cell in row {
            out.push(',');
            if let Some(value) = cell {
                out.push_str(&fmt_sig6(*value));
            }
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a score table written by [`write_score_table`].
pub fn read_score_table(path: &Path) -> Result<ScoreTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Table(format!("{}: empty score table", path.display())))?;
    let mut fields = header.split(',');
    if fields.next() != Some("doc_id") {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            line: 1,
            message: "header must start with doc_id".into(),
        });
    }
    let columns: Vec<MeasureId> = fields.map(MeasureId::new).collect();
    let mut row_ids = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or_default();
        let row: Vec<Option<f64>> = fields
            .map(|field| {
                if field.is_empty() {
                    Ok(None)
                } else {
                    field
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::Malformed {
                            path: path.to_path_buf(),
                            line: lineno + 1,
                            message: format!("not a number: {field:?}"),
                        })
                }
            })
            .collect::<Result<_>>()?;
        if row.len() != columns.len() {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("{} cells for {} columns", row.len(), columns.len()),
            });
        }
        row_ids.push(id.to_string());
        values.push(row);
    }
    ScoreTable::new(row_ids, columns, values)
}
