//! Bayesian network retrieval: term-layer probability tables, exact
//! propagation of the query evidence, and the additive document layer.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusIndex, DocIdx, Query, TermId};
use crate::error::{Error, Result};
use crate::network::{Dag, TermDag};
use crate::propagate::{beliefs, SumProduct};
use crate::ranking::{rank_by_probability, ModelKind, RankedList};
use crate::table::{Cpt, Evidence, ParentConfig, NOT, REL};

/// `p(T_i = relevant | evidence)` for every term node.
pub type Posteriors = Vec<f64>;

/// Prior `(p(t_i), p(t̄_i)) = (1/M, 1 − 1/M)` of a root term node.
pub fn root_prior(vocab_size: usize) -> [f64; 2] {
    let p = 1.0 / vocab_size.max(1) as f64;
    [p, 1.0 - p]
}

/// Clamps `p(t̄)` into `[ε, 1−ε]` and rebuilds the row by duality.
fn clamp_row(not_relevant: f64, epsilon: f64) -> [f64; 2] {
    let q = not_relevant.clamp(epsilon, 1.0 - epsilon);
    [1.0 - q, q]
}

/// Jaccard estimate of the table of `node` given `parents`:
///
/// ```text
/// p(t̄_i | π) = n(t̄_i ∧ π) / (n(t̄_i) + n(π) − n(t̄_i ∧ π))
/// ```
///
/// where `n(·)` counts documents whose term-presence pattern satisfies the
/// conjunction. Rows are clamped into `[ε, 1−ε]`; a zero denominator falls
/// back to the root prior.
pub fn term_cpt_jaccard(index: &CorpusIndex, node: TermId, parents: &[TermId], epsilon: f64) -> Result<Cpt> {
    let n_docs = index.doc_count();
    // Only documents holding the node or a parent differ from "all absent".
    let mut touched: HashMap<DocIdx, (usize, bool)> = HashMap::new();
    for (pos, &p) in parents.iter().enumerate() {
        for &(d, _) in index.postings(p) {
            touched.entry(d).or_insert((0, false)).0 |= 1 << pos;
        }
    }
    for &(d, _) in index.postings(node) {
        touched.entry(d).or_insert((0, false)).1 = true;
    }
    let configs = 1usize << parents.len();
    // counts[config] = (n(π), n(t̄_i ∧ π))
    let mut counts = vec![(0usize, 0usize); configs];
    for &(pattern, present) in touched.values() {
        counts[pattern].0 += 1;
        if !present {
            counts[pattern].1 += 1;
        }
    }
    let untouched = n_docs - touched.len();
    counts[0].0 += untouched;
    counts[0].1 += untouched;

    let n_absent = n_docs - index.df(node);
    let prior = root_prior(index.vocab_size());
    Cpt::from_fn(parents.to_vec(), |c: ParentConfig| {
        let (n_pi, n_joint) = counts[c.0];
        let denom = n_absent + n_pi - n_joint;
        let q = if denom == 0 {
            prior[NOT]
        } else {
            n_joint as f64 / denom as f64
        };
        clamp_row(q, epsilon)
    })
}

/// `p(d_j | config) = Σ_{T_i ∈ R(config)} w_ij`, with `weights` listed in the
/// order of the document's parents.
pub fn doc_prob(weights: &[(TermId, f64)], config: ParentConfig) -> f64 {
    config
        .relevant_positions(weights.len())
        .map(|pos| weights[pos].1)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Exact posterior `p(t_i = relevant | evidence)` for every node of a
/// polytree by λ/π message passing.
pub fn pearl_propagate(dag: &TermDag, cpts: &[Cpt], evidence: &Evidence) -> Result<Posteriors> {
    let b = beliefs::<SumProduct>(dag, cpts, evidence)?;
    b.iter()
        .map(|pair| {
            let z = pair[REL] + pair[NOT];
            if z > 0.0 && z.is_finite() {
                Ok(pair[REL] / z)
            } else {
                Err(Error::InconsistentEvidence)
            }
        })
        .collect()
}

/// `p(d_j | Q) = Σ_i w_ij · p(t_i | Q)`.
pub fn bnr_score(weights: &[(TermId, f64)], posteriors: &[f64]) -> f64 {
    weights.iter().map(|&(t, w)| w * posteriors[t]).sum()
}

/// Quantified BNR network: learned structure plus one CPT per term node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnrModel {
    pub dag: Dag,
    pub cpts: Vec<Cpt>,
}

impl BnrModel {
    /// Root terms get the `1/M` prior, every other term a Jaccard table over
    /// its parents.
    pub fn build(index: &CorpusIndex, dag: Dag) -> Result<Self> {
        if !dag.terms.is_polytree() {
            return Err(Error::NotSinglyConnected);
        }
        let eps = index.options().epsilon;
        let cpts = (0..dag.terms.len())
            .into_par_iter()
            .map(|t| {
                let parents = dag.terms.parents(t);
                if parents.is_empty() {
                    Ok(Cpt::root(root_prior(index.vocab_size())))
                } else {
                    term_cpt_jaccard(index, t, parents, eps)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BnrModel { dag, cpts })
    }

    /// Posterior of every term once the query terms are set relevant.
    pub fn posteriors(&self, query: &Query) -> Result<Posteriors> {
        let terms = query.require_terms()?;
        pearl_propagate(
            &self.dag.terms,
            &self.cpts,
            &Evidence::all_relevant(terms.iter().copied()),
        )
    }

    /// Scores every rankable document and keeps the best `k`.
    pub fn retrieve(&self, index: &CorpusIndex, query: &Query, k: usize) -> Result<RankedList> {
        let post = self.posteriors(query)?;
        let scored: Vec<(DocIdx, f64)> = self
            .dag
            .docs
            .par_iter()
            .map(|d| (d.doc, bnr_score(index.bnr_weights_of(d.doc), &post)))
            .collect();
        Ok(rank_by_probability(index, ModelKind::Bnr, scored, k, query.dropped))
    }
}
