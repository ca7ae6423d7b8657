//! Possibilistic network retrieval: document → term → query network scored by
//! a possibility/necessity pair per document.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusIndex, DocIdx, Query, TermId};
use crate::error::Result;
use crate::ranking::{rank_by_necessity, ModelKind, RankedList, ScorePair};
use crate::table::{NOT, REL};

/// How the query node combines its term parents: `Π(q | θ)` is 1 when all
/// (conjunctive) or at least one (disjunctive) query term is relevant in `θ`,
/// and 0 otherwise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuerySemantics {
    #[default]
    Conjunctive,
    Disjunctive,
}

impl QuerySemantics {
    /// `Π(q | θ)` given how many of the `total` query parents are relevant.
    pub fn gate(self, relevant: usize, total: usize) -> f64 {
        let open = match self {
            QuerySemantics::Conjunctive => relevant == total,
            QuerySemantics::Disjunctive => relevant > 0,
        };
        if open {
            1.0
        } else {
            0.0
        }
    }
}

/// Conditional possibilities of one index term given the document node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermGivenDoc {
    pub term: TermId,
    /// `[Π(t_i | d_j), Π(t̄_i | d_j)]`
    pub given_relevant: [f64; 2],
    /// `[Π(t_i | d̄_j), Π(t̄_i | d̄_j)]`
    pub given_not_relevant: [f64; 2],
}

impl TermGivenDoc {
    pub fn given(&self, doc_relevant: bool) -> [f64; 2] {
        if doc_relevant {
            self.given_relevant
        } else {
            self.given_not_relevant
        }
    }
}

/// Possibility tables of one document's network fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocPossTables {
    pub doc: DocIdx,
    /// `[Π(d_j), Π(d̄_j)]`
    pub doc_prior: [f64; 2],
    /// Sorted by term id.
    pub terms: Vec<TermGivenDoc>,
}

impl DocPossTables {
    pub fn term(&self, t: TermId) -> Option<&TermGivenDoc> {
        self.terms
            .binary_search_by_key(&t, |g| g.term)
            .ok()
            .map(|i| &self.terms[i])
    }
}

/// Prior `[Π(t_k), Π(t̄_k)] = [1 − nidf_k, 1]` of every term.
pub fn term_priors(index: &CorpusIndex) -> Vec<[f64; 2]> {
    (0..index.vocab_size()).map(|t| [1.0 - index.nidf(t), 1.0]).collect()
}

pub(crate) fn doc_tables(index: &CorpusIndex, doc: DocIdx) -> DocPossTables {
    DocPossTables {
        doc,
        doc_prior: [1.0, 1.0],
        terms: index
            .doc_terms(doc)
            .iter()
            .map(|&(t, _)| TermGivenDoc {
                term: t,
                given_relevant: [index.ntf(t, doc), 1.0],
                given_not_relevant: [1.0 - index.nidf(t), 1.0],
            })
            .collect(),
    }
}

/// Tables for a rankable document: `Π(t|d) = ntf`, `Π(t|d̄) = 1 − nidf`,
/// with the not-relevant entries and both document priors at 1.
pub fn pir_tables(index: &CorpusIndex, doc_id: &str) -> Result<DocPossTables> {
    let d = index.rankable_index(doc_id)?;
    Ok(doc_tables(index, d))
}

/// Per query term, the `[relevant, not_relevant]` factor it contributes
/// under document value `doc_relevant`, and whether it is shared with the
/// document.
fn factors(query: &[TermId], tables: &DocPossTables, priors: &[[f64; 2]], doc_relevant: bool) -> Vec<([f64; 2], bool)> {
    query
        .iter()
        .map(|&t| match tables.term(t) {
            Some(g) => (g.given(doc_relevant), true),
            None => (priors[t], false),
        })
        .collect()
}

/// Evaluates the joint product for one instance `θ` of the query parents:
/// shared terms, then the document prior, then the remaining query terms,
/// each group in query order.
pub(crate) fn instance_product(factors: &[([f64; 2], bool)], doc_prior: f64, relevant: impl Fn(usize) -> bool) -> f64 {
    let pick = |i: usize| factors[i].0[if relevant(i) { REL } else { NOT }];
    let mut acc = 1.0;
    for i in (0..factors.len()).filter(|&i| factors[i].1) {
        acc *= pick(i);
    }
    acc *= doc_prior;
    for i in (0..factors.len()).filter(|&i| !factors[i].1) {
        acc *= pick(i);
    }
    acc
}

/// `[Π(Q ∧ d_j), Π(Q ∧ d̄_j)]`, maximizing over the query-parent instances in
/// closed form. Document terms outside the query do not take part.
pub fn pir_joint(query: &[TermId], tables: &DocPossTables, priors: &[[f64; 2]], semantics: QuerySemantics) -> [f64; 2] {
    [true, false].map(|doc_relevant| {
        let f = factors(query, tables, priors, doc_relevant);
        let prior = tables.doc_prior[if doc_relevant { REL } else { NOT }];
        match semantics {
            QuerySemantics::Conjunctive => instance_product(&f, prior, |_| true),
            QuerySemantics::Disjunctive => {
                if f.is_empty() {
                    return 0.0;
                }
                if f.iter().any(|(p, _)| p[REL] >= p[NOT]) {
                    instance_product(&f, prior, |i| f[i].0[REL] >= f[i].0[NOT])
                } else {
                    (0..f.len())
                        .map(|only| instance_product(&f, prior, |i| i == only))
                        .fold(0.0, f64::max)
                }
            }
        }
    })
}

/// Conditions on the query: `Π(Q) = max(joints)`, `Π(d|Q) = Π(Q∧d)/Π(Q)` and
/// `N(d|Q) = 1 − Π(d̄|Q)`. Both joints zero yields an undefined pair.
pub fn pir_score(joints: [f64; 2]) -> ScorePair {
    let pq = joints[REL].max(joints[NOT]);
    if pq <= 0.0 {
        return ScorePair::undefined();
    }
    let pi = joints[REL] / pq;
    let pi_not = joints[NOT] / pq;
    ScorePair::new(pi, 1.0 - pi_not)
}

/// Possibilistic retrieval model over an index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PirModel {
    pub priors: Vec<[f64; 2]>,
    pub docs: Vec<DocPossTables>,
    pub semantics: QuerySemantics,
}

impl PirModel {
    pub fn build(index: &CorpusIndex, semantics: QuerySemantics) -> Self {
        PirModel {
            priors: term_priors(index),
            docs: index.rankable_docs().map(|d| doc_tables(index, d)).collect(),
            semantics,
        }
    }

    pub fn score(&self, query: &[TermId], tables: &DocPossTables) -> ScorePair {
        pir_score(pir_joint(query, tables, &self.priors, self.semantics))
    }

    pub fn retrieve(&self, index: &CorpusIndex, query: &Query, k: usize) -> Result<RankedList> {
        let terms = query.require_terms()?;
        let scored = self.docs.par_iter().map(|t| (t.doc, self.score(terms, t))).collect();
        Ok(rank_by_necessity(index, ModelKind::Pir, scored, k, query.dropped))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_index, Document, IndexOptions};
    use crate::error::Error;
    use crate::ranking::Score;

    fn fruit() -> CorpusIndex {
        build_index(
            &[
                Document::new("D1", "apple apple banana"),
                Document::new("D2", "banana cherry"),
                Document::new("D3", "apple cherry cherry"),
            ],
            &IndexOptions::default(),
        )
        .unwrap()
    }

    const NIDF_FRUIT: f64 = 0.369_070_246_428_542_5; // ln 1.5 / ln 3

    #[test]
    fn fruit_tables() {
        let idx = fruit();
        assert!((idx.nidf(0) - NIDF_FRUIT).abs() < 1e-15);
        let t = pir_tables(&idx, "D3").unwrap();
        let apple = t.term(0).unwrap();
        assert_eq!(apple.given_relevant[REL], 0.5);
        assert!((apple.given_not_relevant[REL] - 0.6309).abs() < 1e-4);
        for g in &t.terms {
            assert_eq!(g.given_relevant[REL].max(g.given_relevant[NOT]), 1.0);
            assert_eq!(g.given_not_relevant[REL].max(g.given_not_relevant[NOT]), 1.0);
        }
        assert_eq!(t.doc_prior, [1.0, 1.0]);
        assert!(matches!(pir_tables(&idx, "D7"), Err(Error::UnknownDoc(_))));
    }

    #[test]
    fn fruit_joint_and_score() {
        let idx = fruit();
        let priors = term_priors(&idx);
        let t = pir_tables(&idx, "D3").unwrap();
        let j = pir_joint(&[0, 2], &t, &priors, QuerySemantics::Conjunctive);
        assert_eq!(j[REL], 0.5);
        let expect = (1.0 - NIDF_FRUIT) * (1.0 - NIDF_FRUIT);
        assert!((j[NOT] - expect).abs() < 1e-15);
        assert!((j[NOT] - 0.3980).abs() < 1e-4);
        let s = pir_score(j);
        assert_eq!(s.pi, 1.0);
        assert!((s.n - (1.0 - expect / 0.5)).abs() < 1e-12);
        assert!((s.n - 0.203_855_3).abs() < 1e-6);
    }

    #[test]
    fn disjoint_query_has_zero_necessity() {
        let idx = build_index(
            &[
                Document::new("a", "red blue"),
                Document::new("b", "green"),
                Document::new("c", "red blue green"),
            ],
            &IndexOptions::default(),
        )
        .unwrap();
        let priors = term_priors(&idx);
        let t = pir_tables(&idx, "b").unwrap();
        let j = pir_joint(&[0, 1], &t, &priors, QuerySemantics::Conjunctive);
        assert_eq!(j[REL], j[NOT]);
        assert_eq!(pir_score(j), ScorePair::new(1.0, 0.0));
    }

    #[test]
    fn score_examples() {
        assert_eq!(pir_score([0.4, 0.4]), ScorePair::new(1.0, 0.0));
        assert_eq!(pir_score([0.3, 0.0]), ScorePair::new(1.0, 1.0));
        assert!(pir_score([0.0, 0.0]).undefined);
        let s = pir_score([0.2, 0.8]);
        assert_eq!(s.pi, 0.25);
        assert_eq!(s.n, 0.0);
    }

    #[test]
    fn disjunctive_gate() {
        let tables = DocPossTables {
            doc: 0,
            doc_prior: [1.0, 1.0],
            terms: vec![],
        };
        let priors = vec![[0.2, 1.0], [0.5, 1.0]];
        let j = pir_joint(&[0, 1], &tables, &priors, QuerySemantics::Disjunctive);
        assert_eq!(j, [0.5, 0.5]);
        let j = pir_joint(&[], &tables, &priors, QuerySemantics::Disjunctive);
        assert_eq!(j, [0.0, 0.0]);
        let j = pir_joint(&[], &tables, &priors, QuerySemantics::Conjunctive);
        assert_eq!(j, [1.0, 1.0]);
    }

    #[test]
    fn retrieval_on_fruit() {
        let idx = fruit();
        let model = PirModel::build(&idx, QuerySemantics::Conjunctive);
        let r = model.retrieve(&idx, &idx.parse_query("apple cherry"), 10).unwrap();
        // D1 and D2 each miss one query term, which enters both joints through
        // the same prior, so their necessity 1 − (1 − nidf) beats D3's.
        assert_eq!(r.doc_ids(), vec!["D1", "D2", "D3"]);
        let Score::Pair(d3) = r.entries[2].score else { panic!() };
        assert_eq!(d3.pi, 1.0);
        assert!((d3.n - 0.203_855_3).abs() < 1e-6);
        let Score::Pair(d1) = r.entries[0].score else { panic!() };
        assert!((d1.n - NIDF_FRUIT).abs() < 1e-12);
        assert!(matches!(
            model.retrieve(&idx, &idx.parse_query("kiwi"), 10),
            Err(Error::EmptyQuery)
        ));
    }

    #[test]
    fn discriminative_match_ranks_first() {
        let idx = build_index(
            &[
                Document::new("D1", "apple apple banana"),
                Document::new("D2", "banana cherry"),
                Document::new("D3", "apple cherry cherry durian"),
            ],
            &IndexOptions::default(),
        )
        .unwrap();
        let model = PirModel::build(&idx, QuerySemantics::Conjunctive);
        let r = model.retrieve(&idx, &idx.parse_query("apple durian"), 10).unwrap();
        assert_eq!(r.doc_ids()[0], "D3");
    }
}
