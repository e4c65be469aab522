use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use lingcomp::alignment::align;
use lingcomp::contour::{score_document, ParsedDocument};
use lingcomp::fixtures;
use lingcomp::lexres::load_resources;
use lingcomp::measures::{score_window, MeasureRegistry, ScoreContext, Window};
use lingcomp::stats::{fit_clm, spearman};
use lingcomp::treebank::{parse_ptb, syntactic_counts, RuleSet};
use lingcomp::ContourConfig;

const PARSE: &str = "(S (NP (NP (DT The) (JJ old) (NN teacher)) (PP (IN near) (NP (DT the) (NN river)))) (VP (VBD said) (SBAR (IN that) (S (NP (PRP he)) (VP (VBD remembered) (NP (NP (DT the) (NN journey)) (SBAR (WHNP (WDT that)) (S (NP (PRP they)) (VP (VBD discussed))))))))) (. .))";

fn bench_treebank(c: &mut Criterion) {
    c.bench_function("parse_ptb/medium_sentence", |b| {
        b.iter(|| parse_ptb(black_box(PARSE)).unwrap())
    });

    let corpus = fixtures::synth_corpus(1, 1);
    let trees: Vec<_> = corpus.manual[0]
        .sentences
        .iter()
        .map(|s| parse_ptb(&s.parse).unwrap())
        .collect();
    let rules = RuleSet::default_rules();
    c.bench_function("syntactic_counts/document", |b| {
        b.iter(|| syntactic_counts(black_box(&trees), rules))
    });
}

fn bench_alignment(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(42);
    let vocab = ["the", "uh", "dog", "ran", "quickly", "and", "she", "talked"];
    let words = |n: usize, rng: &mut StdRng| -> Vec<&str> {
        (0..n)
            .map(|_| vocab[rng.random_range(0..vocab.len())])
            .collect()
    };
    let reference = words(600, &mut rng);
    let hypothesis = words(580, &mut rng);
    c.bench_function("align/600_words", |b| {
        b.iter(|| align("bench", black_box(&reference), black_box(&hypothesis)).unwrap())
    });
}

fn bench_scoring(c: &mut Criterion) {
    let corpus = fixtures::synth_corpus(4, 7);
    let dir = tempfile::tempdir().unwrap();
    fixtures::write_resource_dir(dir.path(), &corpus.manual).unwrap();
    let bundle = load_resources(dir.path()).unwrap();
    let registry = MeasureRegistry::default_registry();
    let ctx = ScoreContext::new(registry, &bundle);

    let pdoc = ParsedDocument::new(corpus.manual[0].clone()).unwrap();
    let take = pdoc.doc.sentences.len().min(5);
    let window = Window::new(&pdoc.doc.sentences[..take], &pdoc.trees[..take]);
    c.bench_function("score_window/30_measures", |b| {
        b.iter(|| score_window(black_box(&window), &ctx).unwrap())
    });

    let cfg = ContourConfig::default();
    c.bench_function("score_document/contours", |b| {
        b.iter(|| score_document(black_box(&pdoc), &cfg, &ctx).unwrap())
    });
}

fn bench_stats(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(9);
    let x: Vec<f64> = (0..1000)
        .map(|_| f64::from(rng.random_range(0..50u32)))
        .collect();
    let y: Vec<f64> = (0..1000)
        .map(|_| f64::from(rng.random_range(0..50u32)))
        .collect();
    c.bench_function("spearman/n=1000_with_ties", |b| {
        b.iter(|| spearman(black_box(&x), black_box(&y)).unwrap())
    });

    let n = 200;
    let labels: Vec<usize> = (0..n).map(|i| i % 3 + 1).collect();
    let predictor: Vec<f64> = labels
        .iter()
        .map(|&class| class as f64 * 0.4 + rng.random_range(-1.0..1.0))
        .collect();
    c.bench_function("fit_clm/n=200_j=3", |b| {
        b.iter(|| fit_clm(black_box(&predictor), black_box(&labels)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_treebank,
    bench_alignment,
    bench_scoring,
    bench_stats
);
criterion_main!(benches);
