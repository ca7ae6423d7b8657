//! Brute-force reference semantics. Every function here enumerates the full
//! configuration space and evaluates the joint directly from the tables; none
//! of them shares code with the message-passing engine.

use crate::corpus::TermId;
use crate::error::{Error, Result};
use crate::hybrid::Operator;
use crate::network::{Forest, WeightedEdge};
use crate::pir::{DocPossTables, QuerySemantics};
use crate::table::{CondTable, Evidence, ParentConfig, Value, NOT, REL};

/// Largest network the enumeration oracles accept.
pub const MAX_ENUM_NODES: usize = 20;
/// Largest graph [`best_spanning_forest`] accepts.
pub const MAX_FOREST_VERTICES: usize = 6;

/// Total assignment of the network variables: bit `i` set iff node `i` is
/// relevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullConfig(pub u32);

impl FullConfig {
    pub fn value(self, node: usize) -> Value {
        Value::from_bit(self.0 >> node & 1 == 1)
    }

    fn parent_config(self, parents: &[usize]) -> ParentConfig {
        ParentConfig::from_values(parents.iter().map(|&p| self.value(p)))
    }

    fn satisfies(self, evidence: &Evidence) -> bool {
        evidence.iter().all(|(n, v)| self.value(n) == v)
    }
}

fn guard(nodes: usize, evidence: &Evidence) -> Result<()> {
    if nodes > MAX_ENUM_NODES {
        return Err(Error::TooLarge {
            what: "enumerated network",
            size: nodes,
            limit: MAX_ENUM_NODES,
        });
    }
    evidence.check(nodes)
}

fn configs(nodes: usize) -> impl Iterator<Item = FullConfig> {
    (0..1u32 << nodes).map(FullConfig)
}

/// Entry of `tables[node]` selected by a full configuration.
fn entry(tables: &[CondTable], node: usize, c: FullConfig) -> f64 {
    let t = &tables[node];
    t.entry(c.parent_config(&t.parents), c.value(node))
}

/// `P(config) = ∏_i P(x_i | π(x_i))`.
pub fn joint_probability(tables: &[CondTable], c: FullConfig) -> f64 {
    (0..tables.len()).map(|i| entry(tables, i, c)).product()
}

/// Posterior `p(X_i = relevant | evidence)` for every node, by summing the
/// factorized joint over all configurations.
pub fn enum_prob_posteriors(tables: &[CondTable], evidence: &Evidence) -> Result<Vec<f64>> {
    let n = tables.len();
    guard(n, evidence)?;
    let mut relevant_mass = vec![0.0; n];
    let mut total = 0.0;
    for c in configs(n).filter(|c| c.satisfies(evidence)) {
        let p = joint_probability(tables, c);
        total += p;
        for (i, mass) in relevant_mass.iter_mut().enumerate() {
            if c.value(i) == Value::Relevant {
                *mass += p;
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    Ok(relevant_mass.into_iter().map(|m| m / total).collect())
}

/// `Π(config) = ⊗_i π(x_i | π(x_i))`.
pub fn joint_possibility(tables: &[CondTable], c: FullConfig, op: Operator) -> f64 {
    (0..tables.len()).fold(1.0, |acc, i| op.combine(acc, entry(tables, i, c)))
}

/// Unnormalized max-marginals `Π(X_i = v ∧ evidence)`.
pub fn enum_poss_marginals(tables: &[CondTable], evidence: &Evidence, op: Operator) -> Result<Vec<[f64; 2]>> {
    let n = tables.len();
    guard(n, evidence)?;
    let mut out = vec![[0.0f64; 2]; n];
    for c in configs(n).filter(|c| c.satisfies(evidence)) {
        let p = joint_possibility(tables, c, op);
        for (i, pair) in out.iter_mut().enumerate() {
            let v = c.value(i).index();
            pair[v] = pair[v].max(p);
        }
    }
    Ok(out)
}

/// `max_config π(d | θ) ⊗ Π(config | evidence)` for a document whose parents
/// carry max-normalized weights, with `π(d|θ) = max_{i ∈ R(θ)} w'_i` and the
/// joint conditioned on the evidence per `op`.
pub fn enum_hybrid_possibility(
    tables: &[CondTable],
    evidence: &Evidence,
    op: Operator,
    weights: &[(TermId, f64)],
) -> Result<f64> {
    let n = tables.len();
    guard(n, evidence)?;
    let joints: Vec<(FullConfig, f64)> = configs(n)
        .filter(|c| c.satisfies(evidence))
        .map(|c| (c, joint_possibility(tables, c, op)))
        .collect();
    let pq = joints.iter().map(|&(_, p)| p).fold(0.0, f64::max);
    if pq <= 0.0 {
        return Err(Error::ZeroEvidence);
    }
    Ok(joints
        .into_iter()
        .map(|(c, p)| {
            let conditioned = match op {
                Operator::Product => p / pq,
                Operator::Min if p == pq => 1.0,
                Operator::Min => p,
            };
            let doc = weights
                .iter()
                .filter(|&&(t, _)| c.value(t) == Value::Relevant)
                .map(|&(_, w)| w)
                .fold(0.0, f64::max);
            op.combine(doc, conditioned)
        })
        .fold(0.0, f64::max))
}

/// Literal evaluation of the possibilistic query joint
///
/// ```text
/// Π(Q ∧ D_j) = max_θ Π(Q|θ) · ∏_{shared} Π(θ_i|D_j) · Π(D_j) · ∏_{query only} Π(θ_k)
/// ```
///
/// for `D_j ∈ {d_j, d̄_j}`, maximizing over every instance `θ` of the query
/// parents.
pub fn enum_pir_joint(
    query: &[TermId],
    tables: &DocPossTables,
    priors: &[[f64; 2]],
    semantics: QuerySemantics,
) -> Result<[f64; 2]> {
    if query.len() > MAX_ENUM_NODES {
        return Err(Error::TooLarge {
            what: "query parent set",
            size: query.len(),
            limit: MAX_ENUM_NODES,
        });
    }
    let shared: Vec<usize> = (0..query.len()).filter(|&i| tables.term(query[i]).is_some()).collect();
    let only: Vec<usize> = (0..query.len()).filter(|&i| tables.term(query[i]).is_none()).collect();
    let mut out = [0.0f64; 2];
    for (slot, doc_relevant) in [(REL, true), (NOT, false)] {
        for theta in 0..1u32 << query.len() {
            let rel = |i: usize| theta >> i & 1 == 1;
            let idx = |i: usize| if rel(i) { REL } else { NOT };
            let relevant = (0..query.len()).filter(|&i| rel(i)).count();
            let mut value = semantics.gate(relevant, query.len());
            for &i in &shared {
                let g = tables.term(query[i]).expect("shared term");
                value *= g.given(doc_relevant)[idx(i)];
            }
            value *= tables.doc_prior[slot];
            for &i in &only {
                value *= priors[query[i]][idx(i)];
            }
            out[slot] = out[slot].max(value);
        }
    }
    Ok(out)
}

/// Maximum-weight spanning forest by exhaustive search over edge subsets.
/// Among optimal forests the lexicographically smallest edge list wins.
pub fn best_spanning_forest(nodes: usize, edges: &[WeightedEdge]) -> Result<Forest> {
    if nodes > MAX_FOREST_VERTICES {
        return Err(Error::TooLarge {
            what: "forest vertex set",
            size: nodes,
            limit: MAX_FOREST_VERTICES,
        });
    }
    let mut best: Option<(f64, Vec<WeightedEdge>)> = None;
    for mask in 0..1u64 << edges.len() {
        // A forest on `nodes` vertices has fewer than `nodes` edges.
        if mask.count_ones() as usize >= nodes.max(1) {
            continue;
        }
        let chosen: Vec<WeightedEdge> = (0..edges.len())
            .filter(|&e| mask >> e & 1 == 1)
            .map(|e| edges[e])
            .collect();
        if chosen.iter().any(|e| e.weight <= 0.0) || !acyclic(nodes, &chosen) {
            continue;
        }
        let total: f64 = chosen.iter().map(|e| e.weight).sum();
        let better = match &best {
            None => true,
            Some((w, _)) => total > *w,
        };
        if better {
            best = Some((total, chosen));
        }
    }
    let mut edges = best.map(|(_, e)| e).unwrap_or_default();
    edges.sort_by_key(|e| (e.a, e.b));
    Ok(Forest { nodes, edges })
}

/// Cycle check by repeated leaf stripping, independent of union-find.
fn acyclic(nodes: usize, edges: &[WeightedEdge]) -> bool {
    let mut alive: Vec<bool> = vec![true; edges.len()];
    loop {
        let mut degree = vec![0usize; nodes];
        for (e, edge) in edges.iter().enumerate() {
            if alive[e] {
                if edge.a >= nodes || edge.b >= nodes || edge.a == edge.b {
                    return false;
                }
                degree[edge.a] += 1;
                degree[edge.b] += 1;
            }
        }
        let before = alive.iter().filter(|&&a| a).count();
        if before == 0 {
            return true;
        }
        for (e, edge) in edges.iter().enumerate() {
            if alive[e] && (degree[edge.a] == 1 || degree[edge.b] == 1) {
                alive[e] = false;
            }
        }
        if alive.iter().filter(|&&a| a).count() == before {
            return false;
        }
    }
}
