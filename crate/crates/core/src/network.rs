//! Network topology: the term-layer polytree, the document layer, and
//! structure learning of the term layer from co-occurrence statistics.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusIndex, DocIdx, TermId};
use crate::error::{Error, Result};

/// A network variable. Every variable ranges over `{relevant, not_relevant}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum Variable {
    Term(TermId),
    Document(DocIdx),
}

/// Directed graph over term nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TermDagRepr", into = "TermDagRepr")]
pub struct TermDag {
    arcs: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TermDagRepr {
    nodes: usize,
    arcs: Vec<(usize, usize)>,
}

impl From<TermDagRepr> for TermDag {
    fn from(r: TermDagRepr) -> Self {
        let mut dag = TermDag::new(r.nodes);
        for (p, c) in r.arcs {
            // Out-of-range arcs are dropped here and reported by validation.
            if p < r.nodes && c < r.nodes {
                dag.push_arc(p, c);
            }
        }
        dag
    }
}

impl From<TermDag> for TermDagRepr {
    fn from(d: TermDag) -> Self {
        TermDagRepr {
            nodes: d.len(),
            arcs: d.arcs,
        }
    }
}

impl TermDag {
    pub fn new(nodes: usize) -> Self {
        TermDag {
            arcs: Vec::new(),
            parents: vec![Vec::new(); nodes],
            children: vec![Vec::new(); nodes],
        }
    }

    pub fn from_arcs(nodes: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut dag = TermDag::new(nodes);
        for (p, c) in arcs {
            dag.add_arc(p, c)?;
        }
        Ok(dag)
    }

    pub fn add_arc(&mut self, parent: usize, child: usize) -> Result<()> {
        for n in [parent, child] {
            if n >= self.len() {
                return Err(Error::UnknownNode(n));
            }
        }
        self.push_arc(parent, child);
        Ok(())
    }

    fn push_arc(&mut self, parent: usize, child: usize) {
        self.arcs.push((parent, child));
        self.parents[child].push(parent);
        self.children[parent].push(child);
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    /// Nodes without parents.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| self.parents[n].is_empty()).collect()
    }

    /// True iff the underlying undirected graph is a forest. Self loops and
    /// parallel or antiparallel arcs count as cycles. A forest is acyclic as a
    /// directed graph too, so this is the full polytree condition.
    pub fn is_polytree(&self) -> bool {
        let mut uf = UnionFind::new(self.len());
        self.arcs.iter().all(|&(p, c)| uf.union(p, c))
    }

    /// Connected components of the undirected skeleton, each listed in
    /// breadth-first order from its smallest node, with the arc connecting
    /// every non-first node to its predecessor in that traversal.
    pub(crate) fn components(&self) -> Vec<Vec<(usize, Option<usize>)>> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.len()];
        for (a, &(p, c)) in self.arcs.iter().enumerate() {
            incident[p].push(a);
            incident[c].push(a);
        }
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut order = vec![(start, None)];
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &a in &incident[x] {
                    let (p, c) = self.arcs[a];
                    let y = if p == x { c } else { p };
                    if !seen[y] {
                        seen[y] = true;
                        order.push((y, Some(a)));
                        queue.push_back(y);
                    }
                }
            }
            out.push(order);
        }
        out
    }
}

/// Document node of the second layer; its parents are the terms indexing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocNode {
    pub doc: DocIdx,
    pub parents: Vec<TermId>,
}

/// Two-layer retrieval network: a term-layer polytree plus document nodes
/// whose parents are terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    pub terms: TermDag,
    /// Root of every term tree, in increasing order of the tree's first node.
    pub roots: Vec<TermId>,
    pub docs: Vec<DocNode>,
}

impl Dag {
    pub fn nodes(&self) -> impl Iterator<Item = Variable> + '_ {
        (0..self.terms.len())
            .map(Variable::Term)
            .chain(self.docs.iter().map(|d| Variable::Document(d.doc)))
    }
}

/// Polytree check over the whole network: the term layer must be singly
/// connected and every document node needs a non-empty set of distinct, valid
/// term parents (documents never have children by construction).
pub fn validate_polytree(dag: &Dag) -> bool {
    let m = dag.terms.len();
    dag.terms.is_polytree()
        && dag.docs.iter().all(|d| {
            let mut ps = d.parents.clone();
            ps.sort_unstable();
            ps.dedup();
            !ps.is_empty() && ps.len() == d.parents.len() && ps.iter().all(|&t| t < m)
        })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Mutual information (nats) of two binary variables from a 2x2 contingency
/// table of counts. Cells with zero count contribute nothing.
pub fn mi_from_counts(both: usize, first: usize, second: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let cells = [
        (both, first, second),
        (first - both, first, total - second),
        (second - both, total - first, second),
        (total + both - first - second, total - first, total - second),
    ];
    let mi: f64 = cells
        .iter()
        .filter(|(c, _, _)| *c > 0)
        .map(|&(c, a, b)| {
            let c = c as f64;
            c / n * ((c * n) / (a as f64 * b as f64)).ln()
        })
        .sum();
    mi.max(0.0)
}

/// Mutual information between the presence indicators of two terms over all
/// `N` documents, using maximum-likelihood counts.
pub fn mutual_information(index: &CorpusIndex, i: TermId, k: TermId) -> Result<f64> {
    if i == k {
        return Err(Error::SameTerm(i));
    }
    let (pi, pk) = (index.postings(i), index.postings(k));
    let mut both = 0;
    let (mut a, mut b) = (0, 0);
    while a < pi.len() && b < pk.len() {
        match pi[a].0.cmp(&pk[b].0) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                both += 1;
                a += 1;
                b += 1;
            }
        }
    }
    Ok(mi_from_counts(both, pi.len(), pk.len(), index.doc_count()))
}

/// Undirected weighted edge with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl WeightedEdge {
    pub fn new(x: usize, y: usize, weight: f64) -> Self {
        WeightedEdge {
            a: x.min(y),
            b: x.max(y),
            weight,
        }
    }
}

/// Undirected forest over `nodes` vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub nodes: usize,
    pub edges: Vec<WeightedEdge>,
}

impl Forest {
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn is_forest(&self) -> bool {
        let mut uf = UnionFind::new(self.nodes);
        self.edges
            .iter()
            .all(|e| e.a < self.nodes && e.b < self.nodes && uf.union(e.a, e.b))
    }
}

/// Kruskal over the strictly positive edges: heaviest first, ties broken by
/// `(a, b)` ascending.
pub fn max_spanning_forest(nodes: usize, edges: impl IntoIterator<Item = WeightedEdge>) -> Forest {
    let mut edges: Vec<WeightedEdge> = edges.into_iter().filter(|e| e.weight > 0.0).collect();
    edges.sort_by(|x, y| y.weight.total_cmp(&x.weight).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
    let mut uf = UnionFind::new(nodes);
    let edges = edges.into_iter().filter(|e| uf.union(e.a, e.b)).collect();
    Forest { nodes, edges }
}

/// Every positive-MI term pair of the corpus.
pub fn mi_edges(index: &CorpusIndex) -> Vec<WeightedEdge> {
    let m = index.vocab_size();
    let mut co: HashMap<(TermId, TermId), usize> = HashMap::new();
    for d in 0..index.doc_count() {
        let row = index.doc_terms(d);
        for (x, &(i, _)) in row.iter().enumerate() {
            for &(k, _) in &row[x + 1..] {
                *co.entry((i, k)).or_default() += 1;
            }
        }
    }
    let n = index.doc_count();
    (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let co = &co;
            (i + 1..m).filter_map(move |k| {
                let both = co.get(&(i, k)).copied().unwrap_or(0);
                let w = mi_from_counts(both, index.df(i), index.df(k), n);
                (w > 0.0).then(|| WeightedEdge::new(i, k, w))
            })
        })
        .collect()
}

/// Maximum-total-MI spanning forest over the vocabulary (Chow–Liu), with
/// zero-MI pairs left unconnected.
pub fn chow_liu_forest(index: &CorpusIndex) -> Forest {
    max_spanning_forest(index.vocab_size(), mi_edges(index))
}

/// Directs each tree away from its root, the highest-df term of the tree
/// (lowest id on ties). Returns the directed term layer and the roots.
pub fn orient_forest(forest: &Forest, index: &CorpusIndex) -> (TermDag, Vec<TermId>) {
    let df: Vec<usize> = (0..forest.nodes).map(|t| index.df(t)).collect();
    orient_forest_by(forest, &df)
}

/// [`orient_forest`] with an explicit root score per node.
pub fn orient_forest_by(forest: &Forest, score: &[usize]) -> (TermDag, Vec<TermId>) {
    let n = forest.nodes;
    let mut adj = vec![Vec::new(); n];
    for e in &forest.edges {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut seen = vec![false; n];
    let mut placed = vec![false; n];
    let mut dag = TermDag::new(n);
    let mut roots = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut members = vec![start];
        seen[start] = true;
        let mut at = 0;
        while at < members.len() {
            let x = members[at];
            at += 1;
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    members.push(y);
                }
            }
        }
        let root = *members
            .iter()
            .max_by(|&&x, &&y| score[x].cmp(&score[y]).then(y.cmp(&x)))
            .expect("component is non-empty");
        roots.push(root);

        placed[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !placed[y] {
                    placed[y] = true;
                    dag.push_arc(x, y);
                    queue.push_back(y);
                }
            }
        }
    }
    (dag, roots)
}

/// Adds one document node per rankable document, with exactly its index terms
/// as parents.
pub fn attach_documents(terms: TermDag, roots: Vec<TermId>, index: &CorpusIndex) -> Dag {
    let docs = index
        .rankable_docs()
        .map(|d| DocNode {
            doc: d,
            parents: index.doc_terms(d).iter().map(|&(t, _)| t).collect(),
        })
        .collect();
    Dag { terms, roots, docs }
}

/// Full structure learning: Chow–Liu forest, orientation, document layer.
pub fn learn_structure(index: &CorpusIndex) -> Dag {
    let forest = chow_liu_forest(index);
    let (terms, roots) = orient_forest(&forest, index);
    attach_documents(terms, roots, index)
}
