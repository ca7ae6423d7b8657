//! Tokenization, inverted index and the term/document statistics consumed by
//! every retrieval model.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense term identifier, assigned by first appearance in corpus order.
pub type TermId = usize;
/// Dense document position in corpus order.
pub type DocIdx = usize;

/// Raw input document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Lowercase stopwords dropped after tokenization.
    pub stopwords: BTreeSet<String>,
    /// Tokens with fewer characters are dropped.
    pub min_token_len: usize,
    /// Clamp applied to estimated probability table entries.
    pub epsilon: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            stopwords: BTreeSet::new(),
            min_token_len: 2,
            epsilon: 1e-4,
        }
    }
}

impl IndexOptions {
    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords = words.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::InvalidOptions(format!(
                "epsilon must lie in [0, 0.5), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Lowercases, splits on every non-alphanumeric character and drops short
/// tokens and stopwords. Token order is preserved.
pub fn tokenize(text: &str, opts: &IndexOptions) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|tok| tok.chars().count() >= opts.min_token_len.max(1))
        .filter(|tok| !opts.stopwords.contains(*tok))
        .map(str::to_owned)
        .collect()
}

/// Immutable inverted index with tf/df/idf statistics and per-document weight
/// vectors for the probabilistic and possibilistic document layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "IndexRepr", into = "IndexRepr")]
pub struct CorpusIndex {
    options: IndexOptions,
    doc_ids: Vec<String>,
    terms: Vec<String>,
    term_lookup: HashMap<String, TermId>,
    doc_lookup: HashMap<String, DocIdx>,
    /// Per document, `(term, tf)` sorted by term id.
    doc_terms: Vec<Vec<(TermId, u32)>>,
    /// Per term, `(doc, tf)` sorted by document position.
    postings: Vec<Vec<(DocIdx, u32)>>,
    idf: Vec<f64>,
    nidf: Vec<f64>,
    bnr_weights: Vec<Vec<(TermId, f64)>>,
    hybrid_weights: Vec<Vec<(TermId, f64)>>,
}

/// On-disk form: derived lookups are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct IndexRepr {
    options: IndexOptions,
    doc_ids: Vec<String>,
    terms: Vec<String>,
    doc_terms: Vec<Vec<(TermId, u32)>>,
    postings: Vec<Vec<(DocIdx, u32)>>,
    idf: Vec<f64>,
    nidf: Vec<f64>,
    bnr_weights: Vec<Vec<(TermId, f64)>>,
    hybrid_weights: Vec<Vec<(TermId, f64)>>,
}

impl From<IndexRepr> for CorpusIndex {
    fn from(r: IndexRepr) -> Self {
        CorpusIndex {
            term_lookup: lookup(&r.terms),
            doc_lookup: lookup(&r.doc_ids),
            options: r.options,
            doc_ids: r.doc_ids,
            terms: r.terms,
            doc_terms: r.doc_terms,
            postings: r.postings,
            idf: r.idf,
            nidf: r.nidf,
            bnr_weights: r.bnr_weights,
            hybrid_weights: r.hybrid_weights,
        }
    }
}

impl From<CorpusIndex> for IndexRepr {
    fn from(c: CorpusIndex) -> Self {
        IndexRepr {
            options: c.options,
            doc_ids: c.doc_ids,
            terms: c.terms,
            doc_terms: c.doc_terms,
            postings: c.postings,
            idf: c.idf,
            nidf: c.nidf,
            bnr_weights: c.bnr_weights,
            hybrid_weights: c.hybrid_weights,
        }
    }
}

fn lookup(names: &[String]) -> HashMap<String, usize> {
    names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()
}

/// Builds the index. Documents left without tokens count towards `N` but are
/// not rankable.
pub fn build_index(docs: &[Document], opts: &IndexOptions) -> Result<CorpusIndex> {
    opts.validate()?;
    let mut seen = HashSet::new();
    let mut terms: Vec<String> = Vec::new();
    let mut term_lookup: HashMap<String, TermId> = HashMap::new();
    let mut doc_terms = Vec::with_capacity(docs.len());

    for (line, doc) in docs.iter().enumerate() {
        if doc.id.is_empty() {
            return Err(Error::EmptyDocId(line + 1));
        }
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateDocId(doc.id.clone()));
        }
        let mut counts: HashMap<TermId, u32> = HashMap::new();
        for tok in tokenize(&doc.text, opts) {
            let id = *term_lookup.entry(tok.clone()).or_insert_with(|| {
                terms.push(tok);
                terms.len() - 1
            });
            *counts.entry(id).or_default() += 1;
        }
        let mut row: Vec<(TermId, u32)> = counts.into_iter().collect();
        row.sort_unstable();
        doc_terms.push(row);
    }
    if terms.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let n_docs = docs.len();
    let mut postings = vec![Vec::new(); terms.len()];
    for (d, row) in doc_terms.iter().enumerate() {
        for &(t, tf) in row {
            postings[t].push((d, tf));
        }
    }
    let idf: Vec<f64> = postings.iter().map(|p| (n_docs as f64 / p.len() as f64).ln()).collect();
    let nidf: Vec<f64> = if n_docs > 1 {
        let norm = (n_docs as f64).ln();
        idf.iter().map(|x| (x / norm).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; terms.len()]
    };

    let tfidf = |row: &[(TermId, u32)]| -> Vec<(TermId, f64)> {
        row.iter().map(|&(t, tf)| (t, f64::from(tf) * idf[t])).collect()
    };
    let bnr_weights = doc_terms.iter().map(|row| sum_normalized(tfidf(row))).collect();
    let hybrid_weights = doc_terms.iter().map(|row| max_normalized(tfidf(row))).collect();

    Ok(CorpusIndex {
        options: opts.clone(),
        doc_lookup: lookup(&docs.iter().map(|d| d.id.clone()).collect::<Vec<_>>()),
        doc_ids: docs.iter().map(|d| d.id.clone()).collect(),
        terms,
        term_lookup,
        doc_terms,
        postings,
        idf,
        nidf,
        bnr_weights,
        hybrid_weights,
    })
}

/// `x / Σx`, or uniform `1/m` when every raw weight is zero.
fn sum_normalized(raw: Vec<(TermId, f64)>) -> Vec<(TermId, f64)> {
    let total: f64 = raw.iter().map(|(_, x)| x).sum();
    let m = raw.len() as f64;
    raw.into_iter()
        .map(|(t, x)| (t, if total > 0.0 { x / total } else { 1.0 / m }))
        .collect()
}

/// `x / max x`, or all ones when every raw weight is zero.
fn max_normalized(raw: Vec<(TermId, f64)>) -> Vec<(TermId, f64)> {
    let max = raw.iter().map(|(_, x)| *x).fold(0.0, f64::max);
    raw.into_iter()
        .map(|(t, x)| (t, if max > 0.0 { x / max } else { 1.0 }))
        .collect()
}

impl CorpusIndex {
    pub fn options(&self) -> &IndexOptions {
        &self.options
    }

    /// `N`, including documents without surviving tokens.
    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    /// `M`.
    pub fn vocab_size(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<TermId> {
        self.term_lookup.get(term).copied()
    }

    pub fn doc_id(&self, doc: DocIdx) -> &str {
        &self.doc_ids[doc]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_index(&self, id: &str) -> Result<DocIdx> {
        self.doc_lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownDoc(id.to_owned()))
    }

    /// `(term, tf)` pairs of a document, sorted by term id.
    pub fn doc_terms(&self, doc: DocIdx) -> &[(TermId, u32)] {
        &self.doc_terms[doc]
    }

    pub fn postings(&self, term: TermId) -> &[(DocIdx, u32)] {
        &self.postings[term]
    }

    pub fn df(&self, term: TermId) -> usize {
        self.postings[term].len()
    }

    pub fn idf(&self, term: TermId) -> f64 {
        self.idf[term]
    }

    pub fn nidf(&self, term: TermId) -> f64 {
        self.nidf[term]
    }

    pub fn tf(&self, term: TermId, doc: DocIdx) -> u32 {
        let row = &self.doc_terms[doc];
        row.binary_search_by_key(&term, |&(t, _)| t)
            .map(|i| row[i].1)
            .unwrap_or(0)
    }

    /// `tf / max tf` within the document; 0 for absent terms.
    pub fn ntf(&self, term: TermId, doc: DocIdx) -> f64 {
        let max = self.doc_terms[doc].iter().map(|&(_, tf)| tf).max().unwrap_or(0);
        if max == 0 {
            0.0
        } else {
            f64::from(self.tf(term, doc)) / f64::from(max)
        }
    }

    pub fn contains(&self, term: TermId, doc: DocIdx) -> bool {
        self.tf(term, doc) > 0
    }

    pub fn is_rankable(&self, doc: DocIdx) -> bool {
        !self.doc_terms[doc].is_empty()
    }

    /// Documents that have at least one index term, in corpus order.
    pub fn rankable_docs(&self) -> impl Iterator<Item = DocIdx> + '_ {
        (0..self.doc_count()).filter(|&d| self.is_rankable(d))
    }

    /// Sum-normalized tf-idf weights `w_ij` of a document.
    pub fn bnr_weights_of(&self, doc: DocIdx) -> &[(TermId, f64)] {
        &self.bnr_weights[doc]
    }

    /// Max-normalized tf-idf weights `w'_ij` of a document.
    pub fn hybrid_weights_of(&self, doc: DocIdx) -> &[(TermId, f64)] {
        &self.hybrid_weights[doc]
    }

    pub fn bnr_weights(&self, doc_id: &str) -> Result<&[(TermId, f64)]> {
        let d = self.rankable_index(doc_id)?;
        Ok(self.bnr_weights_of(d))
    }

    pub fn hybrid_weights(&self, doc_id: &str) -> Result<&[(TermId, f64)]> {
        let d = self.rankable_index(doc_id)?;
        Ok(self.hybrid_weights_of(d))
    }

    pub(crate) fn rankable_index(&self, doc_id: &str) -> Result<DocIdx> {
        let d = self.doc_index(doc_id)?;
        if !self.is_rankable(d) {
            return Err(Error::UnrankableDoc(doc_id.to_owned()));
        }
        Ok(d)
    }

    /// Tokenizes query text with the index options and maps it onto distinct
    /// vocabulary ids in first-occurrence order.
    pub fn parse_query(&self, text: &str) -> Query {
        let mut terms = Vec::new();
        let mut dropped = 0;
        for tok in tokenize(text, &self.options) {
            match self.term_id(&tok) {
                Some(t) if !terms.contains(&t) => terms.push(t),
                Some(_) => {}
                None => dropped += 1,
            }
        }
        Query { terms, dropped }
    }
}

/// Query mapped onto the vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Query {
    pub terms: Vec<TermId>,
    /// Tokens that were not in the vocabulary.
    pub dropped: usize,
}

impl Query {
    pub fn from_terms(terms: impl IntoIterator<Item = TermId>) -> Self {
        let mut q = Query::default();
        for t in terms {
            if !q.terms.contains(&t) {
                q.terms.push(t);
            }
        }
        q
    }

    /// Fails with `EmptyQuery` when no term survived vocabulary mapping.
    pub fn require_terms(&self) -> Result<&[TermId]> {
        if self.terms.is_empty() {
            Err(Error::EmptyQuery)
        } else {
            Ok(&self.terms)
        }
    }
}
