//! The sliding-window engine: per-window score series (complexity contours)
//! and document-level aggregates.

use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{score_window, MeasureId, ScoreContext, Window};
use crate::transcript::{fmt_sig6, write_atomic, Document, ScoreTable};
use crate::treebank::{parse_ptb, TreeNode};

/// How a contour series is collapsed into one document score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregate {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// Window size in sentences.
    pub ws: usize,
    /// Stride in sentences.
    pub step: usize,
    pub aggregate: Aggregate,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            ws: 5,
            step: 1,
            aggregate: Aggregate::Mean,
        }
    }
}

impl ContourConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ws < 1 {
            return Err(Error::Registry("window size must be at least 1".into()));
        }
        if self.step < 1 {
            return Err(Error::Registry("step must be at least 1".into()));
        }
        Ok(())
    }
}

/// The per-window score series of one measure over one document.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub measure: MeasureId,
    pub doc_id: String,
    pub series: Vec<Option<f64>>,
    pub aggregate: Option<f64>,
}

/// A document with every sentence parse materialized once, so overlapping
/// windows can borrow the same trees.
#[derive(Debug, Clone)]
pub struct ParsedDocument {
    pub doc: Document,
    pub trees: Vec<TreeNode>,
}

impl ParsedDocument {
    pub fn new(doc: Document) -> Result<Self> {
        let trees = doc
            .sentences
            .iter()
            .enumerate()
            .map(|(index, s)| {
                parse_ptb(&s.parse).map_err(|e| Error::Sentence {
                    doc_id: doc.id.clone(),
                    index,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ParsedDocument { doc, trees })
    }
}

/// Sentence index ranges of the sliding windows over `n` sentences:
/// `[i, i+ws)` for `i = 0, step, 2*step, ...` while the window fits. A
/// document shorter than one window yields a single whole-document window.
#[allow(clippy::single_range_in_vec_init)] // one window span is exactly what it is
pub fn window_spans(n: usize, cfg: &ContourConfig) -> Vec<Range<usize>> {
    if n == 0 {
        return Vec::new();
    }
    if n < cfg.ws {
        return vec![0..n];
    }
    (0..=n - cfg.ws)
        .step_by(cfg.step)
        .map(|start| start..start + cfg.ws)
        .collect()
}

/// The windows of a parsed document.
pub fn windows<'a>(pdoc: &'a ParsedDocument, cfg: &ContourConfig) -> Vec<Window<'a>> {
    window_spans(pdoc.doc.sentences.len(), cfg)
        .into_iter()
        .map(|span| Window::new(&pdoc.doc.sentences[span.clone()], &pdoc.trees[span]))
        .collect()
}

fn aggregate_series(series: &[Option<f64>], how: Aggregate) -> Option<f64> {
    let mut present: Vec<f64> = series.iter().flatten().copied().collect();
    if present.is_empty() {
        return None;
    }
    match how {
        Aggregate::Mean => Some(present.iter().sum::<f64>() / present.len() as f64),
        Aggregate::Median => {
            present.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
            let mid = present.len() / 2;
            if present.len() % 2 == 1 {
                Some(present[mid])
            } else {
                Some((present[mid - 1] + present[mid]) / 2.0)
            }
        }
    }
}

/// Score every window of a document; one contour per registered measure.
pub fn score_document(
    pdoc: &ParsedDocument,
    cfg: &ContourConfig,
    ctx: &ScoreContext,
) -> Result<Vec<Contour>> {
    cfg.validate()?;
    let wins = windows(pdoc, cfg);
    let mut per_window: Vec<Vec<Option<f64>>> = Vec::with_capacity(wins.len());
    for window in &wins {
        per_window.push(score_window(window, ctx)?);
    }
    let measures = ctx.registry.measures();
    let mut contours = Vec::with_capacity(measures.len());
    for (col, measure) in measures.iter().enumerate() {
        let series: Vec<Option<f64>> = per_window.iter().map(|w| w[col]).collect();
        let aggregate = aggregate_series(&series, cfg.aggregate);
        contours.push(Contour {
            measure: measure.id.clone(),
            doc_id: pdoc.doc.id.clone(),
            series,
            aggregate,
        });
    }
    Ok(contours)
}

/// Score a corpus: documents in parallel, output in corpus order. The score
/// table holds one row per document of per-measure aggregates; contours come
/// back flattened in (document, measure) order.
pub fn score_corpus(
    docs: &[Document],
    cfg: &ContourConfig,
    ctx: &ScoreContext,
) -> Result<(ScoreTable, Vec<Contour>)> {
    cfg.validate()?;
    let per_doc: Vec<Vec<Contour>> = docs
        .par_iter()
        .map(|doc| {
            let pdoc = ParsedDocument::new(doc.clone())?;
            score_document(&pdoc, cfg, ctx)
        })
        .collect::<Result<_>>()?;
    let columns = ctx.registry.ids();
    let mut row_ids = Vec::with_capacity(docs.len());
    let mut values = Vec::with_capacity(docs.len());
    let mut contours = Vec::new();
    for (doc, doc_contours) in docs.iter().zip(per_doc) {
        row_ids.push(doc.id.clone());
        values.push(doc_contours.iter().map(|c| c.aggregate).collect());
        contours.extend(doc_contours);
    }
    let table = ScoreTable::new(row_ids, columns, values)?;
    Ok((table, contours))
}

/// Long-format contour CSV: `doc_id,measure,window_index,score`.
pub fn write_contours(contours: &[Contour], path: &Path) -> Result<()> {
    let mut out = String::from("doc_id,measure,window_index,score\n");
    for contour in contours {
        for (index, score) in contour.series.iter().enumerate() {
            out.push_str(&contour.doc_id);
            out.push(',');
            out.push_str(contour.measure.as_str());
            out.push(',');
            out.push_str(&index.to_string());
            out.push(',');
            if let Some(value) = score {
                out.push_str(&fmt_sig6(*value));
            }
            out.push('\n');
        }
    }
    write_atomic(path, out.as_bytes())
}
