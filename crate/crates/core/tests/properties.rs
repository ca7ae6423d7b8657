mod common;

use bayespir::bnr::{pearl_propagate, BnrModel};
use bayespir::hybrid::{hybrid_score, poss_propagate, table_to_poss, HybridModel};
use bayespir::network::{learn_structure, validate_polytree};
use bayespir::oracle::{enum_hybrid_possibility, enum_poss_marginals, enum_prob_posteriors};
use bayespir::pir::{PirModel, QuerySemantics};
use bayespir::{build_index, tokenize, CondTable, Evidence, IndexOptions, Operator, Query, Score};
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pearl_matches_enumeration_on_polytrees(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = rng(seed);
        let dag = random_polytree(&mut rng, n);
        let cpts = random_cpts(&mut rng, &dag);
        let ev = random_evidence(&mut rng, n, 4);
        let fast = pearl_propagate(&dag, &cpts, &ev).unwrap();
        let slow = enum_prob_posteriors(&cpts, &ev).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
        for (node, value) in ev.iter() {
            let expected = if value == bayespir::Value::Relevant { 1.0 } else { 0.0 };
            prop_assert_eq!(fast[node], expected);
        }
    }

    #[test]
    fn possibilistic_propagation_matches_enumeration_on_polytrees(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = rng(seed);
        let dag = random_polytree(&mut rng, n);
        let tables: Vec<CondTable> = random_cpts(&mut rng, &dag).iter().map(table_to_poss).collect();
        let ev = random_evidence(&mut rng, n, 4);
        for op in [Operator::Min, Operator::Product] {
            let fast = bayespir::hybrid::poss_max_marginals(&dag, &tables, &ev, op).unwrap();
            let slow = enum_poss_marginals(&tables, &ev, op).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                match op {
                    Operator::Min => prop_assert_eq!(a, b),
                    Operator::Product => {
                        prop_assert!((a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12)
                    }
                }
            }
        }
    }

    #[test]
    fn hybrid_possibility_matches_enumeration(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = rng(seed);
        let dag = random_polytree(&mut rng, n);
        let tables: Vec<CondTable> = random_cpts(&mut rng, &dag).iter().map(table_to_poss).collect();
        let ev = random_evidence(&mut rng, n, 3);
        let mut parents: Vec<usize> = (0..n).collect();
        parents.shuffle(&mut rng);
        parents.truncate(rng.gen_range(1..=n.min(5)));
        let raw: Vec<f64> = parents.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let max = raw.iter().cloned().fold(0.0, f64::max);
        let weights: Vec<(usize, f64)> = parents.iter().zip(&raw).map(|(&t, &w)| (t, w / max)).collect();
        for op in [Operator::Min, Operator::Product] {
            let post = poss_propagate(&dag, &tables, &ev, op).unwrap();
            let fast = hybrid_score(&weights, &post, op).pi;
            let slow = enum_hybrid_possibility(&tables, &ev, op, &weights).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-12, "{} {fast} vs {slow}", op.name());
        }
    }

    #[test]
    fn oracle_is_invariant_under_relabeling(seed in any::<u64>(), n in 1usize..=9) {
        let mut rng = rng(seed);
        let dag = random_polytree(&mut rng, n);
        let cpts = random_cpts(&mut rng, &dag);
        let ev = random_evidence(&mut rng, n, 3);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        // Node `i` becomes node `perm[i]`.
        let mut moved: Vec<Option<CondTable>> = vec![None; n];
        for (i, t) in cpts.iter().enumerate() {
            moved[perm[i]] = Some(CondTable {
                parents: t.parents.iter().map(|&p| perm[p]).collect(),
                rows: t.rows.clone(),
            });
        }
        let moved: Vec<CondTable> = moved.into_iter().map(Option::unwrap).collect();
        let moved_ev: Evidence = ev.iter().map(|(node, v)| (perm[node], v)).collect();
        let a = enum_prob_posteriors(&cpts, &ev).unwrap();
        let b = enum_prob_posteriors(&moved, &moved_ev).unwrap();
        for i in 0..n {
            prop_assert!((a[i] - b[perm[i]]).abs() <= 1e-12);
        }
    }

    #[test]
    fn index_invariants(seed in any::<u64>(), docs in 1usize..=15, vocab in 1usize..=12) {
        let mut rng = rng(seed);
        let corpus = random_corpus(&mut rng, docs, vocab, 0.4);
        let Ok(idx) = build_index(&corpus, &IndexOptions::default()) else {
            prop_assert!(corpus.iter().all(|d| d.text.is_empty()));
            return Ok(());
        };
        for d in idx.rankable_docs() {
            let w = idx.bnr_weights_of(d);
            let sum: f64 = w.iter().map(|&(_, x)| x).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            let h = idx.hybrid_weights_of(d);
            let max = h.iter().map(|&(_, x)| x).fold(0.0, f64::max);
            prop_assert!((max - 1.0).abs() <= 1e-12);
            prop_assert!(h.iter().all(|&(_, x)| (0.0..=1.0).contains(&x)));
        }
        for t in 0..idx.vocab_size() {
            prop_assert!((0.0..=1.0).contains(&idx.nidf(t)));
            prop_assert_eq!(idx.postings(t).len(), idx.df(t));
        }
        let again = build_index(&corpus, &IndexOptions::default()).unwrap();
        prop_assert_eq!(&again, &idx);
        let json = serde_json::to_string(&idx).unwrap();
        let back: bayespir::CorpusIndex = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, idx);
    }

    #[test]
    fn learned_structure_is_a_polytree(seed in any::<u64>(), docs in 2usize..=20, vocab in 1usize..=15) {
        let mut rng = rng(seed);
        let corpus = random_corpus(&mut rng, docs, vocab, 0.35);
        let Ok(idx) = build_index(&corpus, &IndexOptions::default()) else { return Ok(()) };
        let dag = learn_structure(&idx);
        prop_assert!(validate_polytree(&dag));
        prop_assert!(dag.terms.arcs().len() < idx.vocab_size().max(1));
        for t in 0..idx.vocab_size() {
            prop_assert!(dag.terms.parents(t).len() <= 1);
        }
    }

    #[test]
    fn rankings_follow_the_ordering_rules(seed in any::<u64>(), docs in 2usize..=12) {
        let mut rng = rng(seed);
        let corpus = random_corpus(&mut rng, docs, 8, 0.4);
        let Ok(idx) = build_index(&corpus, &IndexOptions::default()) else { return Ok(()) };
        let bnr = BnrModel::build(&idx, learn_structure(&idx)).unwrap();
        let hybrid = HybridModel::from_bnr(&bnr);
        let pir = PirModel::build(&idx, QuerySemantics::Conjunctive);
        let mut terms: Vec<usize> = (0..idx.vocab_size()).collect();
        terms.shuffle(&mut rng);
        terms.truncate(rng.gen_range(1..=3usize.min(terms.len())));
        let query = Query::from_terms(terms);

        let list = bnr.retrieve(&idx, &query, usize::MAX).unwrap();
        prop_assert_eq!(list.entries.len(), idx.rankable_docs().count());
        for pair in list.entries.windows(2) {
            let (Score::Probability(a), Score::Probability(b)) = (pair[0].score, pair[1].score) else {
                return Err(TestCaseError::fail("bnr score kind"));
            };
            prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
            prop_assert!(a > b || (a == b && pair[0].doc < pair[1].doc));
        }

        let lists = [
            pir.retrieve(&idx, &query, usize::MAX).unwrap(),
            hybrid.retrieve(&idx, &query, usize::MAX, Operator::Min).unwrap(),
            hybrid.retrieve(&idx, &query, usize::MAX, Operator::Product).unwrap(),
        ];
        for list in &lists {
            let key = |s: &bayespir::ScorePair| (s.undefined, s.n <= 0.0);
            for pair in list.entries.windows(2) {
                let (Score::Pair(a), Score::Pair(b)) = (pair[0].score, pair[1].score) else {
                    return Err(TestCaseError::fail("pair score kind"));
                };
                prop_assert!(key(&a) <= key(&b));
                if key(&a) == key(&b) && !a.undefined {
                    let (ka, kb) = if a.n > 0.0 { ((a.n, a.pi), (b.n, b.pi)) } else { ((a.pi, 0.0), (b.pi, 0.0)) };
                    prop_assert!(ka > kb || (ka == kb && pair[0].doc < pair[1].doc));
                }
            }
        }
    }

    #[test]
    fn tokens_are_normalized(text in "[A-Za-z0-9 ,.;!?'-]{0,80}") {
        let opts = IndexOptions::default();
        for tok in tokenize(&text, &opts) {
            prop_assert!(tok.chars().count() >= opts.min_token_len);
            prop_assert!(tok.chars().all(|c| c.is_alphanumeric() && !c.is_uppercase()));
        }
    }
}

#[test]
fn bnr_posteriors_rise_for_evidence_terms() {
    let idx = fruit();
    let bnr = BnrModel::build(&idx, learn_structure(&idx)).unwrap();
    assert!(bnr.posteriors(&Query::from_terms([])).is_err());
    for t in 0..idx.vocab_size() {
        let post = bnr.posteriors(&Query::from_terms([t])).unwrap();
        assert_eq!(post[t], 1.0);
        let list = bnr.retrieve(&idx, &Query::from_terms([t]), 10).unwrap();
        let top = &list.entries[0];
        assert!(idx.contains(t, idx.doc_index(&top.doc).unwrap()));
    }
}
