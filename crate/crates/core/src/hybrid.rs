//! Possibilistic reading of the Bayesian network retrieval model: the BNR
//! topology and tables moved into possibility theory, (max, ⊗) propagation
//! over the term layer, and a max-decomposable document layer.
//!
//! The document table is `π(d_j | θ) = max_{T_i ∈ R(θ)} w'_ij` (0 when no
//! parent is relevant). Because it is a max of per-term factors, the document
//! possibility given the query factors through the term max-marginals:
//!
//! ```text
//! Π(d_j | Q) = max_θ π(d_j|θ) ⊗ Π(θ|Q) = max_i w'_ij ⊗ Π(t_i|Q)
//! ```
//!
//! The necessity side has no such decomposition; `max_i w'_ij ⊗ N(t_i|Q)` is
//! used as an aggregate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bnr::BnrModel;
use crate::corpus::{CorpusIndex, DocIdx, Query, TermId};
use crate::error::{Error, Result};
use crate::network::{Dag, TermDag};
use crate::propagate::{beliefs, MaxMin, MaxProduct};
use crate::ranking::{rank_by_necessity, ModelKind, RankedList, ScorePair};
use crate::table::{CondTable, Evidence, PossTable, NOT, REL};

/// Combination operator `⊗` for possibility degrees.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Min,
    #[default]
    Product,
}

impl Operator {
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Operator::Min => a.min(b),
            Operator::Product => a * b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Min => "min",
            Operator::Product => "product",
        }
    }
}

/// Ratio transform `π(x) = p(x) / max p`.
pub fn prob_to_poss(row: [f64; 2]) -> [f64; 2] {
    let max = row[REL].max(row[NOT]);
    if max <= 0.0 {
        return [1.0, 1.0];
    }
    row.map(|p| p / max)
}

pub fn table_to_poss(cpt: &CondTable) -> PossTable {
    PossTable {
        parents: cpt.parents.clone(),
        rows: cpt.rows.iter().map(|&r| prob_to_poss(r)).collect(),
    }
}

/// Conditions an unnormalized max-marginal pair on the evidence.
///
/// Product conditioning divides by the pair maximum. Min conditioning raises
/// the entries that reach the maximum to 1 and keeps the others.
pub fn condition(pair: [f64; 2], op: Operator) -> Result<[f64; 2]> {
    let max = pair[REL].max(pair[NOT]);
    if max <= 0.0 || !max.is_finite() {
        return Err(Error::InconsistentEvidence);
    }
    Ok(match op {
        Operator::Product => pair.map(|x| x / max),
        Operator::Min => pair.map(|x| if x == max { 1.0 } else { x }),
    })
}

/// Unnormalized max-marginals `Π(T_i = v ∧ evidence)` for every term node.
pub fn poss_max_marginals(
    dag: &TermDag,
    tables: &[PossTable],
    evidence: &Evidence,
    op: Operator,
) -> Result<Vec<[f64; 2]>> {
    match op {
        Operator::Product => beliefs::<MaxProduct>(dag, tables, evidence),
        Operator::Min => beliefs::<MaxMin>(dag, tables, evidence),
    }
}

/// Conditioned pairs `[Π(t_i|Q), Π(t̄_i|Q)]`, each with maximum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PossPosteriors(pub Vec<[f64; 2]>);

impl PossPosteriors {
    pub fn possibility(&self, t: TermId) -> f64 {
        self.0[t][REL]
    }

    /// `N(t_i|Q) = 1 − Π(t̄_i|Q)`.
    pub fn necessity(&self, t: TermId) -> f64 {
        1.0 - self.0[t][NOT]
    }
}

pub fn poss_propagate(
    dag: &TermDag,
    tables: &[PossTable],
    evidence: &Evidence,
    op: Operator,
) -> Result<PossPosteriors> {
    poss_max_marginals(dag, tables, evidence, op)?
        .into_iter()
        .map(|pair| condition(pair, op))
        .collect::<Result<_>>()
        .map(PossPosteriors)
}

/// `(max_i w'_ij ⊗ Π(t_i|Q), max_i w'_ij ⊗ N(t_i|Q))`.
pub fn hybrid_score(weights: &[(TermId, f64)], post: &PossPosteriors, op: Operator) -> ScorePair {
    let (pi, n) = weights.iter().fold((0.0f64, 0.0f64), |(pi, n), &(t, w)| {
        (
            pi.max(op.combine(w, post.possibility(t))),
            n.max(op.combine(w, post.necessity(t))),
        )
    });
    ScorePair::new(pi, n)
}

/// Possibilistic counterpart of a BNR model: same structure, ratio-transformed
/// tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub dag: Dag,
    pub tables: Vec<PossTable>,
}

impl HybridModel {
    pub fn from_bnr(bnr: &BnrModel) -> Self {
        HybridModel {
            dag: bnr.dag.clone(),
            tables: bnr.cpts.iter().map(table_to_poss).collect(),
        }
    }

    pub fn posteriors(&self, query: &Query, op: Operator) -> Result<PossPosteriors> {
        let terms = query.require_terms()?;
        poss_propagate(
            &self.dag.terms,
            &self.tables,
            &Evidence::all_relevant(terms.iter().copied()),
            op,
        )
    }

    pub fn retrieve(&self, index: &CorpusIndex, query: &Query, k: usize, op: Operator) -> Result<RankedList> {
        let post = self.posteriors(query, op)?;
        let scored: Vec<(DocIdx, ScorePair)> = self
            .dag
            .docs
            .par_iter()
            .map(|d| (d.doc, hybrid_score(index.hybrid_weights_of(d.doc), &post, op)))
            .collect();
        Ok(rank_by_necessity(index, ModelKind::Hybrid, scored, k, query.dropped))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_index, Document, IndexOptions};
    use crate::network::learn_structure;
    use crate::table::Value;

    #[test]
    fn ratio_transform_examples() {
        let r = prob_to_poss([0.25, 0.75]);
        assert!((r[0] - 1.0 / 3.0).abs() < 1e-15 && r[1] == 1.0);
        assert_eq!(prob_to_poss([0.5, 0.5]), [1.0, 1.0]);
        let eps = 1e-4;
        assert_eq!(prob_to_poss([eps, 1.0 - eps]), [eps / (1.0 - eps), 1.0]);
    }

    #[test]
    fn conditioning_rules() {
        assert_eq!(condition([0.2, 0.4], Operator::Product).unwrap(), [0.5, 1.0]);
        assert_eq!(condition([0.2, 0.4], Operator::Min).unwrap(), [0.2, 1.0]);
        assert_eq!(condition([0.4, 0.4], Operator::Min).unwrap(), [1.0, 1.0]);
        assert!(matches!(
            condition([0.0, 0.0], Operator::Min),
            Err(Error::InconsistentEvidence)
        ));
    }

    #[test]
    fn no_evidence_pairs_are_normalized() {
        let dag = TermDag::from_arcs(3, [(0, 1), (0, 2)]).unwrap();
        let tables = vec![
            PossTable::root([0.3, 1.0]),
            PossTable::from_fn(vec![0], |c| if c.0 == 1 { [1.0, 0.2] } else { [0.1, 1.0] }).unwrap(),
            PossTable::from_fn(vec![0], |c| if c.0 == 1 { [0.6, 1.0] } else { [1.0, 0.7] }).unwrap(),
        ];
        for op in [Operator::Min, Operator::Product] {
            let post = poss_propagate(&dag, &tables, &Evidence::new(), op).unwrap();
            for pair in &post.0 {
                assert_eq!(pair[0].max(pair[1]), 1.0);
            }
            let post = poss_propagate(&dag, &tables, &Evidence::new().with(1, Value::Relevant), op).unwrap();
            assert_eq!(post.0[1], [1.0, 0.0]);
        }
    }

    #[test]
    fn score_examples() {
        let post = PossPosteriors(vec![[1.0, 0.0], [1.0, 1.0]]);
        let s = hybrid_score(&[(0, 1.0), (1, 0.4)], &post, Operator::Product);
        assert_eq!(s.pi, 1.0);
        let post = PossPosteriors(vec![[1.0, 1.0], [1.0, 1.0]]);
        assert_eq!(
            hybrid_score(&[(0, 1.0), (1, 0.4)], &post, Operator::Min),
            ScorePair::new(1.0, 0.0)
        );
        let post = PossPosteriors(vec![[0.8, 0.7], [1.0, 1.0]]);
        let s = hybrid_score(&[(0, 1.0), (1, 0.5)], &post, Operator::Product);
        assert!((s.pi - 0.8).abs() < 1e-15);
        assert!((s.n - 0.3).abs() < 1e-15);
    }

    #[test]
    fn retrieval_on_fruit() {
        let idx = build_index(
            &[
                Document::new("D1", "apple apple banana"),
                Document::new("D2", "banana cherry"),
                Document::new("D3", "apple cherry cherry"),
            ],
            &IndexOptions::default(),
        )
        .unwrap();
        let bnr = BnrModel::build(&idx, learn_structure(&idx)).unwrap();
        let model = HybridModel::from_bnr(&bnr);
        for op in [Operator::Min, Operator::Product] {
            let r = model.retrieve(&idx, &idx.parse_query("apple"), 10, op).unwrap();
            let ids = r.doc_ids();
            assert_eq!(ids.len(), 3);
            assert!(ids[0] == "D1" || ids[0] == "D3");
            assert_eq!(ids[2], "D2");
        }
        assert!(matches!(
            model.retrieve(&idx, &idx.parse_query("zzz"), 10, Operator::Min),
            Err(Error::EmptyQuery)
        ));
    }
}
