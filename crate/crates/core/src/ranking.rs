//! Ranked result lists and the two ordering rules: descending probability,
//! and necessity-first possibilistic ranking.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusIndex, DocIdx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bnr,
    Pir,
    Hybrid,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Bnr => "bnr",
            ModelKind::Pir => "pir",
            ModelKind::Hybrid => "hybrid",
        }
    }
}

/// Possibility and necessity that a document is relevant to the query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub pi: f64,
    pub n: f64,
    /// Set when the conditioning event had zero possibility; such documents
    /// rank after every other.
    #[serde(skip)]
    pub undefined: bool,
}

impl ScorePair {
    pub fn new(pi: f64, n: f64) -> Self {
        ScorePair {
            pi,
            n,
            undefined: false,
        }
    }

    pub fn undefined() -> Self {
        ScorePair {
            pi: 0.0,
            n: 0.0,
            undefined: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Score {
    Probability(f64),
    Pair(ScorePair),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub doc: String,
    pub doc_index: DocIdx,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub model: ModelKind,
    pub entries: Vec<RankedEntry>,
    /// Query tokens that were not in the vocabulary.
    pub dropped_terms: usize,
}

impl RankedList {
    pub fn doc_ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.doc.as_str()).collect()
    }
}

/// Descending score, ties by ascending document id.
pub fn rank_by_probability(
    index: &CorpusIndex,
    model: ModelKind,
    scored: Vec<(DocIdx, f64)>,
    k: usize,
    dropped_terms: usize,
) -> RankedList {
    let mut scored = scored;
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| index.doc_id(a.0).cmp(index.doc_id(b.0)))
    });
    scored.truncate(k);
    RankedList {
        model,
        entries: scored
            .into_iter()
            .map(|(d, s)| RankedEntry {
                doc: index.doc_id(d).to_owned(),
                doc_index: d,
                score: Score::Probability(s),
            })
            .collect(),
        dropped_terms,
    }
}

/// Necessity-first order: documents with `N > 0` by descending `N`, then the
/// rest by descending `Π`, undefined pairs last; ties by ascending id.
pub fn compare_pairs(a: &ScorePair, b: &ScorePair) -> Ordering {
    let tier = |s: &ScorePair| match (s.undefined, s.n > 0.0) {
        (true, _) => 2,
        (false, true) => 0,
        (false, false) => 1,
    };
    tier(a).cmp(&tier(b)).then_with(|| match tier(a) {
        0 => b.n.total_cmp(&a.n).then_with(|| b.pi.total_cmp(&a.pi)),
        1 => b.pi.total_cmp(&a.pi),
        _ => Ordering::Equal,
    })
}

pub fn rank_by_necessity(
    index: &CorpusIndex,
    model: ModelKind,
    scored: Vec<(DocIdx, ScorePair)>,
    k: usize,
    dropped_terms: usize,
) -> RankedList {
    let mut scored = scored;
    scored.sort_by(|a, b| compare_pairs(&a.1, &b.1).then_with(|| index.doc_id(a.0).cmp(index.doc_id(b.0))));
    scored.truncate(k);
    RankedList {
        model,
        entries: scored
            .into_iter()
            .map(|(d, s)| RankedEntry {
                doc: index.doc_id(d).to_owned(),
                doc_index: d,
                score: Score::Pair(s),
            })
            .collect(),
        dropped_terms,
    }
}
