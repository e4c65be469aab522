//! Property tests for the structural invariants: tree round-trips, count
//! additivity, alignment symmetry and bag-of-words measure behavior.

use proptest::prelude::*;

use lingcomp::alignment::align;
use lingcomp::measures::{lexical_scores, MeasureId, MeasureRegistry, Window};
use lingcomp::stats::spearman;
use lingcomp::transcript::{Sentence, Token};
use lingcomp::treebank::{
    match_count, parse_ptb, syntactic_counts, RuleSet, TreeNode, TreePattern,
};
use lingcomp::ResourceBundle;

fn arb_tree() -> impl Strategy<Value = TreeNode> {
    let leaf = ("[A-Z]{1,3}", "[a-z]{1,6}").prop_map(|(label, text)| TreeNode::leaf(label, text));
    leaf.prop_recursive(4, 24, 4, |inner| {
        ("[A-Z]{1,4}", prop::collection::vec(inner, 1..4))
            .prop_map(|(label, children)| TreeNode::phrase(label, children))
    })
}

fn brute_force_label_count(tree: &TreeNode, label: &str) -> usize {
    let mut count = usize::from(tree.label() == label);
    for child in tree.children() {
        count += brute_force_label_count(child, label);
    }
    count
}

fn all_labels(tree: &TreeNode, out: &mut Vec<String>) {
    out.push(tree.label().to_string());
    for child in tree.children() {
        all_labels(child, out);
    }
}

proptest! {
    #[test]
    fn tree_rendering_round_trips(tree in arb_tree()) {
        let rendered = tree.to_string();
        let reparsed = parse_ptb(&rendered).unwrap();
        prop_assert_eq!(reparsed, tree);
    }

    #[test]
    fn counts_are_additive_over_concatenation(
        a in prop::collection::vec(arb_tree(), 1..4),
        b in prop::collection::vec(arb_tree(), 1..4),
    ) {
        let rules = RuleSet::default_rules();
        let mut combined = a.clone();
        combined.extend(b.clone());
        let sum = syntactic_counts(&a, rules) + syntactic_counts(&b, rules);
        prop_assert_eq!(syntactic_counts(&combined, rules), sum);
    }

    #[test]
    fn counts_respect_structural_bounds(trees in prop::collection::vec(arb_tree(), 1..5)) {
        let counts = syntactic_counts(&trees, RuleSet::default_rules());
        prop_assert!(counts.dependent_clauses <= counts.clauses);
        prop_assert!(counts.t_units <= counts.clauses + counts.sentences);
        prop_assert!(counts.complex_t_units <= counts.t_units);
        if counts.noun_phrases == 0 {
            prop_assert_eq!(counts.np_premodifiers, 0);
            prop_assert_eq!(counts.np_postmodifiers, 0);
        }
    }

    #[test]
    fn label_pattern_equals_brute_force(tree in arb_tree(), pick in any::<prop::sample::Index>()) {
        let mut labels = Vec::new();
        all_labels(&tree, &mut labels);
        let label = &labels[pick.index(labels.len())];
        let pattern = TreePattern::parse(label).unwrap();
        prop_assert_eq!(match_count(&tree, &pattern), brute_force_label_count(&tree, label));
    }

    #[test]
    fn swapping_sides_swaps_ins_and_del(
        reference in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 1..8),
        hypothesis in prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 1..8),
    ) {
        let forward = align("x", &reference, &hypothesis).unwrap();
        let backward = align("x", &hypothesis, &reference).unwrap();
        prop_assert_eq!(forward.substitutions, backward.substitutions);
        prop_assert_eq!(forward.insertions, backward.deletions);
        prop_assert_eq!(forward.deletions, backward.insertions);
    }

    #[test]
    fn appending_shared_word_never_raises_cost(
        reference in prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 1..7),
        hypothesis in prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 0..7),
        word in prop::sample::select(vec!["a", "b", "c"]),
    ) {
        let total = |r: &lingcomp::alignment::AlignmentReport| {
            r.substitutions + r.insertions + r.deletions
        };
        let base = align("x", &reference, &hypothesis).unwrap();
        let mut longer_ref = reference.clone();
        longer_ref.push(word);
        let mut longer_hyp = hypothesis.clone();
        longer_hyp.push(word);
        let appended = align("x", &longer_ref, &longer_hyp).unwrap();
        prop_assert!(total(&appended) <= total(&base));
    }

    #[test]
    fn exhaustive_oracle_agrees_on_short_pairs(
        reference in prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 1..=6),
        hypothesis in prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 0..=6),
    ) {
        let report = align("x", &reference, &hypothesis).unwrap();
        let oracle = exhaustive_cost(&reference, &hypothesis);
        prop_assert_eq!(report.substitutions + report.insertions + report.deletions, oracle);
    }

    #[test]
    fn spearman_is_invariant_under_monotone_maps(
        base in prop::collection::vec(0..8i32, 3..16),
        other in prop::collection::vec(0..8i32, 3..16),
        which in 0..3usize,
    ) {
        let n = base.len().min(other.len());
        let x: Vec<f64> = base[..n].iter().map(|v| f64::from(*v)).collect();
        let y: Vec<f64> = other[..n].iter().map(|v| f64::from(*v)).collect();
        let transform = |v: f64| match which {
            0 => v.exp(),
            1 => v * v * v + 2.0 * v,
            _ => 10.0 * v - 3.0,
        };
        let tx: Vec<f64> = x.iter().map(|v| transform(*v)).collect();
        match (spearman(&x, &y), spearman(&tx, &y)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}"),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "mixed outcomes {other:?}"),
        }
    }

    #[test]
    fn spearman_self_correlation(values in prop::collection::vec(-100..100i32, 3..20)) {
        let x: Vec<f64> = values.iter().map(|v| f64::from(*v)).collect();
        let distinct = x.iter().any(|v| *v != x[0]);
        prop_assume!(distinct);
        let negated: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((spearman(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((spearman(&x, &negated).unwrap() + 1.0).abs() < 1e-12);
    }
}

/// Plain exhaustive recursion over all alignments, no memoization.
fn exhaustive_cost(reference: &[&str], hypothesis: &[&str]) -> usize {
    if reference.is_empty() {
        return hypothesis.len();
    }
    if hypothesis.is_empty() {
        return reference.len();
    }
    let diag = exhaustive_cost(&reference[1..], &hypothesis[1..])
        + usize::from(reference[0] != hypothesis[0]);
    let del = exhaustive_cost(&reference[1..], hypothesis) + 1;
    let ins = exhaustive_cost(reference, &hypothesis[1..]) + 1;
    diag.min(del).min(ins)
}

// --- bag-of-words behavior on synthetic token windows ----------------------

fn arb_token() -> impl Strategy<Value = Token> {
    (
        "[a-z]{1,6}",
        prop::sample::select(vec!["NN", "NNS", "VBD", "JJ", "RB", "DT", "IN", "PRP"]),
    )
        .prop_map(|(form, pos)| Token {
            lemma: form.clone(),
            form,
            pos: pos.to_string(),
        })
}

fn flat_window(tokens: &[Token]) -> (Vec<Sentence>, Vec<TreeNode>) {
    let leaves: Vec<String> = tokens
        .iter()
        .map(|t| format!("({} {})", t.pos, t.form))
        .collect();
    let sentence = Sentence {
        parse: format!("(FRAG {})", leaves.join(" ")),
        tokens: tokens.to_vec(),
    };
    let tree = parse_ptb(&sentence.parse).unwrap();
    (vec![sentence], vec![tree])
}

fn bag_scores(tokens: &[Token]) -> Vec<(MeasureId, Option<f64>)> {
    let (sentences, trees) = flat_window(tokens);
    let window = Window::new(&sentences, &trees);
    let registry = MeasureRegistry::default_registry()
        .subset(&[
            MeasureId::new("TTR"),
            MeasureId::new("cTTR"),
            MeasureId::new("LD"),
            MeasureId::new("MLWc"),
            MeasureId::new("MLWs"),
        ])
        .unwrap();
    lexical_scores(&window, &ResourceBundle::default(), &registry).unwrap()
}

proptest! {
    #[test]
    fn bag_of_words_measures_ignore_token_order(
        tokens in prop::collection::vec(arb_token(), 1..40),
        seed in any::<u64>(),
    ) {
        // deterministic Fisher-Yates driven by the seed
        let mut permuted = tokens.clone();
        let mut state = seed | 1;
        for i in (1..permuted.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            permuted.swap(i, j);
        }
        prop_assert_eq!(bag_scores(&tokens), bag_scores(&permuted));
    }

    #[test]
    fn duplicating_text_halves_ttr_keeps_ld(tokens in prop::collection::vec(arb_token(), 1..20)) {
        let mut doubled = tokens.clone();
        doubled.extend(tokens.iter().cloned());
        let single = bag_scores(&tokens);
        let twice = bag_scores(&doubled);
        let get = |scores: &[(MeasureId, Option<f64>)], name: &str| {
            scores.iter().find(|(id, _)| id.as_str() == name).unwrap().1
        };
        let ttr_once = get(&single, "TTR").unwrap();
        let ttr_twice = get(&twice, "TTR").unwrap();
        prop_assert!(ttr_twice < ttr_once);
        prop_assert!((ttr_twice - ttr_once / 2.0).abs() < 1e-12);
        prop_assert_eq!(get(&single, "LD"), get(&twice, "LD"));
        prop_assert_eq!(get(&single, "MLWc"), get(&twice, "MLWc"));
    }
}
