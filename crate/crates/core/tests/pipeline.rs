//! End-to-end scoring over synthetic corpora: table shapes, determinism and
//! the contour/aggregate contracts.

use lingcomp::contour::{score_corpus, score_document, ParsedDocument};
use lingcomp::fixtures;
use lingcomp::lexres::load_resources;
use lingcomp::measures::{MeasureRegistry, ScoreContext};
use lingcomp::transcript::{read_score_table, write_score_table};
use lingcomp::{Aggregate, ContourConfig};

fn context_dir() -> (tempfile::TempDir, lingcomp::ResourceBundle) {
    let corpus = fixtures::synth_corpus(8, 99);
    let dir = tempfile::tempdir().unwrap();
    fixtures::write_resource_dir(dir.path(), &corpus.manual).unwrap();
    let bundle = load_resources(dir.path()).unwrap();
    (dir, bundle)
}

#[test]
fn corpus_scoring_shapes_and_determinism() {
    let corpus = fixtures::synth_corpus(8, 99);
    let (_dir, bundle) = context_dir();
    let registry = MeasureRegistry::default_registry();
    let ctx = ScoreContext::new(registry, &bundle);
    let cfg = ContourConfig::default();

    let (table, contours) = score_corpus(&corpus.manual, &cfg, &ctx).unwrap();
    assert_eq!(table.n_rows(), 8);
    assert_eq!(table.columns().len(), 30);
    assert_eq!(contours.len(), 8 * 30);

    let (again, contours_again) = score_corpus(&corpus.manual, &cfg, &ctx).unwrap();
    assert_eq!(table, again);
    assert_eq!(contours, contours_again);
}

#[test]
fn identical_documents_get_identical_contours() {
    let corpus = fixtures::synth_corpus(3, 5);
    let (_dir, bundle) = context_dir();
    let ctx = ScoreContext::new(MeasureRegistry::default_registry(), &bundle);
    let cfg = ContourConfig::default();

    let original = ParsedDocument::new(corpus.manual[0].clone()).unwrap();
    let mut clone = corpus.manual[0].clone();
    clone.id = "copy".to_string();
    let copy = ParsedDocument::new(clone).unwrap();

    let a = score_document(&original, &cfg, &ctx).unwrap();
    let b = score_document(&copy, &cfg, &ctx).unwrap();
    for (left, right) in a.iter().zip(&b) {
        assert_eq!(left.measure, right.measure);
        assert_eq!(left.series, right.series);
        assert_eq!(left.aggregate, right.aggregate);
    }
}

#[test]
fn oversized_window_collapses_to_single_window() {
    let corpus = fixtures::synth_corpus(2, 17);
    let (_dir, bundle) = context_dir();
    let ctx = ScoreContext::new(MeasureRegistry::default_registry(), &bundle);
    let cfg = ContourConfig {
        ws: 500,
        step: 1,
        aggregate: Aggregate::Mean,
    };
    let pdoc = ParsedDocument::new(corpus.manual[0].clone()).unwrap();
    for contour in score_document(&pdoc, &cfg, &ctx).unwrap() {
        assert_eq!(contour.series.len(), 1);
        assert_eq!(contour.aggregate, contour.series[0]);
    }
}

#[test]
fn score_table_file_round_trip() {
    let corpus = fixtures::synth_corpus(5, 31);
    let (_dir, bundle) = context_dir();
    let ctx = ScoreContext::new(MeasureRegistry::default_registry(), &bundle);
    let (table, _) = score_corpus(&corpus.manual, &ContourConfig::default(), &ctx).unwrap();

    let out = tempfile::tempdir().unwrap();
    let path = out.path().join("scores.csv");
    write_score_table(&table, &path).unwrap();
    let reread = read_score_table(&path).unwrap();
    assert_eq!(reread.row_ids(), table.row_ids());
    assert_eq!(reread.columns(), table.columns());
    for row in 0..table.n_rows() {
        for col in 0..table.columns().len() {
            match (table.get(row, col), reread.get(row, col)) {
                (Some(a), Some(b)) => {
                    let tolerance = 1e-5 * a.abs().max(1.0);
                    assert!((a - b).abs() <= tolerance, "{a} vs {b}");
                }
                (None, None) => {}
                other => panic!("cell mismatch {other:?}"),
            }
        }
    }
}
