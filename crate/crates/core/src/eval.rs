//! Ranked-retrieval metrics over binary relevance judgments.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Mean over the relevant documents of the precision at their rank;
/// relevant documents never retrieved contribute 0. Zero when nothing is
/// relevant.
pub fn average_precision<S: AsRef<str>>(ranked: &[S], relevant: &HashSet<String>) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (r, doc) in ranked.iter().enumerate() {
        if relevant.contains(doc.as_ref()) {
            hits += 1;
            sum += hits as f64 / (r + 1) as f64;
        }
    }
    sum / relevant.len() as f64
}

fn hits_at_k<S: AsRef<str>>(ranked: &[S], relevant: &HashSet<String>, k: usize) -> usize {
    ranked.iter().take(k).filter(|d| relevant.contains(d.as_ref())).count()
}

/// Relevant documents in the top `k`, divided by `k`.
pub fn precision_at_k<S: AsRef<str>>(ranked: &[S], relevant: &HashSet<String>, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    hits_at_k(ranked, relevant, k) as f64 / k as f64
}

pub fn recall_at_k<S: AsRef<str>>(ranked: &[S], relevant: &HashSet<String>, k: usize) -> f64 {
    if relevant.is_empty() {
        return 0.0;
    }
    hits_at_k(ranked, relevant, k) as f64 / relevant.len() as f64
}

/// Binary judgments `(query id, doc id) → {0, 1}`; absent pairs are 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels(BTreeMap<String, BTreeMap<String, u8>>);

impl Qrels {
    /// Parses `qid<TAB>docid<TAB>rel` lines. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, BTreeMap<String, u8>> = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [qid, doc, rel] = fields[..] else {
                return Err(Error::Parse(format!(
                    "qrels line {}: expected 3 tab-separated fields, got {}",
                    no + 1,
                    fields.len()
                )));
            };
            let rel: u8 = match rel.trim() {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Parse(format!(
                        "qrels line {}: relevance must be 0 or 1, got {other:?}",
                        no + 1
                    )))
                }
            };
            map.entry(qid.trim().to_owned())
                .or_default()
                .insert(doc.trim().to_owned(), rel);
        }
        Ok(Qrels(map))
    }

    pub fn relevant(&self, qid: &str) -> HashSet<String> {
        self.0
            .get(qid)
            .map(|docs| docs.iter().filter(|(_, &r)| r == 1).map(|(d, _)| d.clone()).collect())
            .unwrap_or_default()
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Drops judgments whose document is not in `known`, returning how many
    /// were removed.
    pub fn retain_docs(&mut self, known: &HashSet<String>) -> usize {
        let mut removed = 0;
        for docs in self.0.values_mut() {
            let before = docs.len();
            docs.retain(|d, _| known.contains(d));
            removed += before - docs.len();
        }
        removed
    }
}

/// Rankings per query, in the order queries first appear.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Run {
    pub queries: Vec<(String, Vec<String>)>,
}

#[derive(Deserialize)]
struct RunLine {
    qid: String,
    #[serde(default)]
    rank: Option<usize>,
    #[serde(default)]
    doc: Option<String>,
}

impl Run {
    /// Parses the JSON Lines written by `batch`. Lines without a `doc` (such
    /// as empty-query markers) register the query with no results.
    pub fn parse(text: &str) -> Result<Self> {
        let mut order: Vec<String> = Vec::new();
        let mut by_query: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: RunLine =
                serde_json::from_str(line).map_err(|e| Error::Parse(format!("run line {}: {e}", no + 1)))?;
            if !by_query.contains_key(&row.qid) {
                order.push(row.qid.clone());
            }
            let entry = by_query.entry(row.qid).or_default();
            if let Some(doc) = row.doc {
                let rank = row.rank.unwrap_or(entry.len() + 1);
                entry.push((rank, doc));
            }
        }
        let queries = order
            .into_iter()
            .map(|q| {
                let mut docs = by_query.remove(&q).unwrap_or_default();
                docs.sort_by_key(|(r, _)| *r);
                (q, docs.into_iter().map(|(_, d)| d).collect())
            })
            .collect();
        Ok(Run { queries })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub qid: String,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub average_precision: f64,
    pub relevant: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub queries: Vec<QueryMetrics>,
    /// Mean AP over queries with at least one relevant document.
    pub map: f64,
    pub warnings: Vec<String>,
}

pub fn evaluate(run: &Run, qrels: &Qrels, ks: &[usize]) -> EvalReport {
    let mut warnings = Vec::new();
    let mut queries = Vec::new();
    let mut judged_aps = Vec::new();
    for (qid, ranked) in &run.queries {
        let relevant = qrels.relevant(qid);
        let ap = average_precision(ranked, &relevant);
        if relevant.is_empty() {
            warnings.push(format!(
                "query {qid} has no relevant documents and is excluded from MAP"
            ));
        } else {
            judged_aps.push(ap);
        }
        queries.push(QueryMetrics {
            qid: qid.clone(),
            precision: ks.iter().map(|&k| precision_at_k(ranked, &relevant, k)).collect(),
            recall: ks.iter().map(|&k| recall_at_k(ranked, &relevant, k)).collect(),
            average_precision: ap,
            relevant: relevant.len(),
        });
    }
    let in_run: BTreeSet<&str> = run.queries.iter().map(|(q, _)| q.as_str()).collect();
    for q in qrels.query_ids().filter(|q| !in_run.contains(q)) {
        warnings.push(format!("query {q} is judged but absent from the run"));
    }
    if run.queries.is_empty() {
        warnings.push("run is empty; MAP is 0".to_owned());
    }
    let map = if judged_aps.is_empty() {
        0.0
    } else {
        judged_aps.iter().sum::<f64>() / judged_aps.len() as f64
    };
    EvalReport {
        ks: ks.to_vec(),
        queries,
        map,
        warnings,
    }
}

impl EvalReport {
    /// Tab-separated table, values to 4 decimals, closed by an `all` row
    /// holding MAP.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("qid");
        for k in &self.ks {
            write!(out, "\tP@{k}").unwrap();
        }
        for k in &self.ks {
            write!(out, "\tR@{k}").unwrap();
        }
        out.push_str("\tAP\n");
        for q in &self.queries {
            out.push_str(&q.qid);
            for x in q.precision.iter().chain(&q.recall) {
                write!(out, "\t{x:.4}").unwrap();
            }
            writeln!(out, "\t{:.4}", q.average_precision).unwrap();
        }
        writeln!(out, "all{}\t{:.4}", "\t".repeat(2 * self.ks.len()), self.map).unwrap();
        out
    }
}
