//! Command implementations behind the `bayespir` binary, and the on-disk
//! model bundle they share.
//!
//! A bundle is a directory of JSON files:
//!
//! | file                 | content                                  |
//! |----------------------|------------------------------------------|
//! | `index.json`         | vocabulary, postings, statistics, weights |
//! | `dag.json`           | term layer arcs, tree roots, doc parents |
//! | `bnr_cpts.json`      | one probability table per term node      |
//! | `hybrid_tables.json` | one possibility table per term node      |
//! | `pir_tables.json`    | term priors and per-document tables      |

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bnr::BnrModel;
use crate::corpus::{build_index, CorpusIndex, Document, IndexOptions};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport, Qrels, Run};
use crate::hybrid::{HybridModel, Operator};
use crate::network::{learn_structure, Dag};
use crate::pir::{PirModel, QuerySemantics};
use crate::ranking::{ModelKind, RankedList, Score};
use crate::table::Cpt;

const INDEX_FILE: &str = "index.json";
const DAG_FILE: &str = "dag.json";
const CPT_FILE: &str = "bnr_cpts.json";
const HYBRID_FILE: &str = "hybrid_tables.json";
const PIR_FILE: &str = "pir_tables.json";

/// Every model built over one index.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub index: CorpusIndex,
    pub bnr: BnrModel,
    pub hybrid: HybridModel,
    pub pir: PirModel,
}

impl Bundle {
    pub fn build(index: CorpusIndex) -> Result<Self> {
        let dag = learn_structure(&index);
        let bnr = BnrModel::build(&index, dag)?;
        let hybrid = HybridModel::from_bnr(&bnr);
        let pir = PirModel::build(&index, QuerySemantics::Conjunctive);
        Ok(Bundle {
            index,
            bnr,
            hybrid,
            pir,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join(INDEX_FILE), &self.index)?;
        write_json(&dir.join(DAG_FILE), &self.bnr.dag)?;
        write_json(&dir.join(CPT_FILE), &self.bnr.cpts)?;
        write_json(&dir.join(HYBRID_FILE), &self.hybrid.tables)?;
        write_json(&dir.join(PIR_FILE), &self.pir)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let index: CorpusIndex = read_json(&dir.join(INDEX_FILE))?;
        let dag: Dag = read_json(&dir.join(DAG_FILE))?;
        let cpts: Vec<Cpt> = read_json(&dir.join(CPT_FILE))?;
        let tables = read_json(&dir.join(HYBRID_FILE))?;
        let pir = read_json(&dir.join(PIR_FILE))?;
        if !crate::network::validate_polytree(&dag) {
            return Err(Error::NotSinglyConnected);
        }
        crate::propagate::check_tables(&dag.terms, &cpts)?;
        Ok(Bundle {
            index,
            hybrid: HybridModel {
                dag: dag.clone(),
                tables,
            },
            bnr: BnrModel { dag, cpts },
            pir,
        })
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Reads a JSON Lines corpus of `{"id": ..., "text": ...}` objects.
pub fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    parse_jsonl(&fs::read_to_string(path)?, "corpus")
}

fn parse_jsonl<T: DeserializeOwned>(text: &str, what: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("{what} line {}: {e}", no + 1))))
        .collect()
}

/// One stopword per line; blank lines ignored.
pub fn read_stopwords(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSummary {
    pub docs: usize,
    pub vocab: usize,
    pub edges: usize,
}

impl fmt::Display for IndexSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} M={} edges={}", self.docs, self.vocab, self.edges)
    }
}

pub fn cmd_index(corpus: &Path, stopwords: Option<&Path>, out_dir: &Path) -> Result<IndexSummary> {
    let docs = read_corpus(corpus)?;
    let mut opts = IndexOptions::default();
    if let Some(path) = stopwords {
        opts = opts.with_stopwords(read_stopwords(path)?);
    }
    let index = build_index(&docs, &opts)?;
    let bundle = Bundle::build(index)?;
    bundle.save(out_dir)?;
    Ok(IndexSummary {
        docs: bundle.index.doc_count(),
        vocab: bundle.index.vocab_size(),
        edges: bundle.bnr.dag.terms.arcs().len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOptions {
    pub model: ModelKind,
    pub op: Operator,
    pub semantics: QuerySemantics,
    pub k: usize,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions {
            model: ModelKind::Bnr,
            op: Operator::default(),
            semantics: QuerySemantics::default(),
            k: 10,
        }
    }
}

pub fn run_query(bundle: &Bundle, text: &str, opts: &QueryOptions) -> Result<RankedList> {
    let query = bundle.index.parse_query(text);
    match opts.model {
        ModelKind::Bnr => bundle.bnr.retrieve(&bundle.index, &query, opts.k),
        ModelKind::Hybrid => bundle.hybrid.retrieve(&bundle.index, &query, opts.k, opts.op),
        ModelKind::Pir => {
            if bundle.pir.semantics == opts.semantics {
                bundle.pir.retrieve(&bundle.index, &query, opts.k)
            } else {
                let pir = PirModel {
                    semantics: opts.semantics,
                    ..bundle.pir.clone()
                };
                pir.retrieve(&bundle.index, &query, opts.k)
            }
        }
    }
}

#[derive(Serialize)]
struct ResultLine<'a> {
    rank: usize,
    doc: &'a str,
    score: Score,
    model: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    qid: Option<&'a str>,
}

#[derive(Serialize)]
struct FailedLine<'a> {
    model: &'a str,
    error: &'a str,
    results: usize,
    qid: &'a str,
}

pub fn write_ranked(out: &mut dyn Write, list: &RankedList, qid: Option<&str>) -> Result<()> {
    for (i, e) in list.entries.iter().enumerate() {
        let line = ResultLine {
            rank: i + 1,
            doc: &e.doc,
            score: e.score,
            model: list.model.name(),
            qid,
        };
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn cmd_query(bundle_dir: &Path, text: &str, opts: &QueryOptions, out: &mut dyn Write) -> Result<RankedList> {
    let bundle = Bundle::load(bundle_dir)?;
    let list = run_query(&bundle, text, opts)?;
    write_ranked(out, &list, None)?;
    Ok(list)
}

#[derive(Debug, Deserialize)]
struct QueryLine {
    id: String,
    text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchSummary {
    pub queries: usize,
    /// Ids of queries that had no vocabulary term.
    pub empty: Vec<String>,
}

/// Runs every query of a JSON Lines file and writes one block per query, in
/// input order. Empty queries produce a single marker line.
pub fn cmd_batch(bundle_dir: &Path, queries: &Path, opts: &QueryOptions, out: &mut dyn Write) -> Result<BatchSummary> {
    let bundle = Bundle::load(bundle_dir)?;
    let lines: Vec<QueryLine> = parse_jsonl(&fs::read_to_string(queries)?, "queries")?;
    let results: Vec<Result<RankedList>> = lines.par_iter().map(|q| run_query(&bundle, &q.text, opts)).collect();
    let mut summary = BatchSummary {
        queries: lines.len(),
        empty: Vec::new(),
    };
    for (q, result) in lines.iter().zip(results) {
        match result {
            Ok(list) => write_ranked(out, &list, Some(&q.id))?,
            Err(Error::EmptyQuery) => {
                summary.empty.push(q.id.clone());
                let line = FailedLine {
                    model: opts.model.name(),
                    error: "EmptyQuery",
                    results: 0,
                    qid: &q.id,
                };
                serde_json::to_writer(&mut *out, &line)?;
                out.write_all(b"\n")?;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(summary)
}

/// Evaluates a run file against qrels. With a bundle, judgments on unknown
/// documents are dropped and reported.
pub fn cmd_eval(
    run_path: &Path,
    qrels_path: &Path,
    ks: &[usize],
    bundle_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<EvalReport> {
    let run = Run::parse(&fs::read_to_string(run_path)?)?;
    let mut qrels = Qrels::parse(&fs::read_to_string(qrels_path)?)?;
    let mut extra = Vec::new();
    if let Some(dir) = bundle_dir {
        let index: CorpusIndex = read_json(&dir.join(INDEX_FILE))?;
        let known: HashSet<String> = index.doc_ids().iter().cloned().collect();
        let removed = qrels.retain_docs(&known);
        if removed > 0 {
            extra.push(format!("{removed} judgments name unknown documents and were ignored"));
        }
    }
    let mut report = evaluate(&run, &qrels, ks);
    extra.append(&mut report.warnings);
    report.warnings = extra;
    out.write_all(report.to_tsv().as_bytes())?;
    Ok(report)
}

#[derive(Serialize)]
struct Overview<'a> {
    docs: usize,
    vocab: usize,
    terms: &'a [String],
    dag: &'a Dag,
}

#[derive(Serialize)]
struct TermView<'a> {
    term: &'a str,
    id: usize,
    df: usize,
    idf: f64,
    parents: Vec<&'a str>,
    children: Vec<&'a str>,
    cpt: &'a Cpt,
    poss_table: &'a Cpt,
}

/// Prints the network as JSON, or one term's neighbourhood and tables.
pub fn cmd_inspect(bundle_dir: &Path, term: Option<&str>, out: &mut dyn Write) -> Result<()> {
    let b = Bundle::load(bundle_dir)?;
    let idx = &b.index;
    match term {
        None => serde_json::to_writer_pretty(
            &mut *out,
            &Overview {
                docs: idx.doc_count(),
                vocab: idx.vocab_size(),
                terms: idx.terms(),
                dag: &b.bnr.dag,
            },
        )?,
        Some(name) => {
            let t = idx
                .term_id(&name.to_lowercase())
                .ok_or_else(|| Error::Parse(format!("term {name:?} is not in the vocabulary")))?;
            let names = |ns: &[usize]| ns.iter().map(|&n| idx.term(n)).collect::<Vec<_>>();
            serde_json::to_writer_pretty(
                &mut *out,
                &TermView {
                    term: idx.term(t),
                    id: t,
                    df: idx.df(t),
                    idf: idx.idf(t),
                    parents: names(b.bnr.dag.terms.parents(t)),
                    children: names(b.bnr.dag.terms.children(t)),
                    cpt: &b.bnr.cpts[t],
                    poss_table: &b.hybrid.tables[t],
                },
            )?
        }
    }
    out.write_all(b"\n")?;
    Ok(())
}
