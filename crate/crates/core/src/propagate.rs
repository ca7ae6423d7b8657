//! Pearl's polytree message passing, generic over the commutative semiring
//! that combines table entries.
//!
//! With (+, ×) the result is the usual λ/π belief propagation; with
//! (max, ×) or (max, min) it yields exact possibilistic max-marginals.
//!
//! For a node `X` with parents `U_1..U_k` and children `Y_1..Y_m`:
//!
//! ```text
//! π(x)        = ⊕_u  T(x|u) ⊗ ⨂_i π_X(u_i)
//! λ(x)        = e(x) ⊗ ⨂_j λ_{Y_j}(x)
//! π_{Y_j}(x)  = π(x) ⊗ e(x) ⊗ ⨂_{l≠j} λ_{Y_l}(x)
//! λ_X(u_i)    = ⊕_x λ(x) ⊗ ⊕_{u : u_i fixed} T(x|u) ⊗ ⨂_{l≠i} π_X(u_l)
//! belief(x)   = π(x) ⊗ λ(x)
//! ```
//!
//! Messages are scheduled by a collect/distribute sweep over each connected
//! component of the undirected skeleton.

use crate::error::{Error, Result};
use crate::network::TermDag;
use crate::table::{CondTable, Evidence, ParentConfig, Value};

/// Commutative semiring over `[0, 1]` used to combine table entries.
pub trait Semiring {
    const ZERO: f64;
    const ONE: f64;
    fn add(a: f64, b: f64) -> f64;
    fn mul(a: f64, b: f64) -> f64;
    /// Rescales a message in place when the semiring allows it.
    fn rescale(_msg: &mut [f64; 2]) {}
}

/// Probabilistic marginalization. Messages are rescaled to sum to 1, so
/// beliefs are only defined up to a positive factor.
pub struct SumProduct;

impl Semiring for SumProduct {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn add(a: f64, b: f64) -> f64 {
        a + b
    }
    fn mul(a: f64, b: f64) -> f64 {
        a * b
    }
    fn rescale(msg: &mut [f64; 2]) {
        let s = msg[0] + msg[1];
        if s > 0.0 {
            msg[0] /= s;
            msg[1] /= s;
        }
    }
}

/// Quantitative possibilistic max-marginals.
pub struct MaxProduct;

impl Semiring for MaxProduct {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn add(a: f64, b: f64) -> f64 {
        a.max(b)
    }
    fn mul(a: f64, b: f64) -> f64 {
        a * b
    }
}

/// Qualitative possibilistic max-marginals.
pub struct MaxMin;

impl Semiring for MaxMin {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn add(a: f64, b: f64) -> f64 {
        a.max(b)
    }
    fn mul(a: f64, b: f64) -> f64 {
        a.min(b)
    }
}

/// Checks that `tables` describe `dag`: one table per node, parent sets equal
/// to the DAG parents (in any order), and well-formed rows.
pub fn check_tables(dag: &TermDag, tables: &[CondTable]) -> Result<()> {
    if tables.len() != dag.len() {
        return Err(Error::TableMismatch(format!(
            "{} tables for {} nodes",
            tables.len(),
            dag.len()
        )));
    }
    for (node, table) in tables.iter().enumerate() {
        table.check_shape()?;
        let mut want = dag.parents(node).to_vec();
        let mut got = table.parents.clone();
        want.sort_unstable();
        got.sort_unstable();
        if want != got {
            return Err(Error::TableMismatch(format!(
                "node {node}: table parents {:?} differ from graph parents {:?}",
                table.parents,
                dag.parents(node)
            )));
        }
    }
    Ok(())
}

/// Per-node beliefs `[b(relevant), b(not_relevant)]` combining every table
/// entry and the evidence across the whole network (other components enter
/// as a common factor). For semirings without rescaling these are the exact
/// unnormalized marginals of `value ∧ evidence`.
pub fn beliefs<S: Semiring>(dag: &TermDag, tables: &[CondTable], evidence: &Evidence) -> Result<Vec<[f64; 2]>> {
    if !dag.is_polytree() {
        return Err(Error::NotSinglyConnected);
    }
    check_tables(dag, tables)?;
    evidence.check(dag.len())?;

    let engine = Engine::<S>::new(dag, tables, evidence);
    Ok(engine.run())
}

struct Engine<'a, S> {
    dag: &'a TermDag,
    tables: &'a [CondTable],
    evidence: &'a Evidence,
    /// For each node, the arc index feeding each table parent position.
    parent_arcs: Vec<Vec<usize>>,
    child_arcs: Vec<Vec<usize>>,
    /// Message from the arc's parent to its child, over the parent's values.
    pi_msg: Vec<[f64; 2]>,
    /// Message from the arc's child to its parent, over the parent's values.
    lambda_msg: Vec<[f64; 2]>,
    _semiring: std::marker::PhantomData<S>,
}

impl<'a, S: Semiring> Engine<'a, S> {
    fn new(dag: &'a TermDag, tables: &'a [CondTable], evidence: &'a Evidence) -> Self {
        let n = dag.len();
        let mut child_arcs = vec![Vec::new(); n];
        let mut arc_of = std::collections::HashMap::new();
        for (a, &(p, c)) in dag.arcs().iter().enumerate() {
            child_arcs[p].push(a);
            arc_of.insert((p, c), a);
        }
        let parent_arcs = (0..n)
            .map(|x| tables[x].parents.iter().map(|&p| arc_of[&(p, x)]).collect())
            .collect();
        let arcs = dag.arcs().len();
        Engine {
            dag,
            tables,
            evidence,
            parent_arcs,
            child_arcs,
            pi_msg: vec![[S::ONE; 2]; arcs],
            lambda_msg: vec![[S::ONE; 2]; arcs],
            _semiring: std::marker::PhantomData,
        }
    }

    fn indicator(&self, x: usize, v: Value) -> f64 {
        if self.evidence.admits(x, v) {
            S::ONE
        } else {
            S::ZERO
        }
    }

    /// `e(x) ⊗ ⨂ λ_{Y}(x)` over all children except the one on `skip`.
    fn lambda_excluding(&self, x: usize, skip: Option<usize>) -> [f64; 2] {
        Value::BOTH.map(|v| {
            self.child_arcs[x]
                .iter()
                .filter(|&&a| Some(a) != skip)
                .fold(self.indicator(x, v), |acc, &a| {
                    S::mul(acc, self.lambda_msg[a][v.index()])
                })
        })
    }

    /// Product of incoming π messages for one parent configuration, leaving
    /// out parent position `skip`.
    fn pi_weight(&self, x: usize, config: ParentConfig, skip: Option<usize>) -> f64 {
        self.parent_arcs[x]
            .iter()
            .enumerate()
            .filter(|&(pos, _)| Some(pos) != skip)
            .fold(S::ONE, |acc, (pos, &a)| {
                S::mul(acc, self.pi_msg[a][config.value(pos).index()])
            })
    }

    fn pi(&self, x: usize) -> [f64; 2] {
        let table = &self.tables[x];
        Value::BOTH.map(|v| {
            ParentConfig::all(table.arity()).fold(S::ZERO, |acc, c| {
                S::add(acc, S::mul(table.entry(c, v), self.pi_weight(x, c, None)))
            })
        })
    }

    fn send_pi(&mut self, x: usize, arc: usize) {
        let pi = self.pi(x);
        let lam = self.lambda_excluding(x, Some(arc));
        let mut msg = [S::mul(pi[0], lam[0]), S::mul(pi[1], lam[1])];
        S::rescale(&mut msg);
        self.pi_msg[arc] = msg;
    }

    fn send_lambda(&mut self, x: usize, arc: usize) {
        let table = &self.tables[x];
        let pos = self.parent_arcs[x]
            .iter()
            .position(|&a| a == arc)
            .expect("arc enters x");
        let lam = self.lambda_excluding(x, None);
        let mut msg = [S::ZERO; 2];
        for c in ParentConfig::all(table.arity()) {
            let w = self.pi_weight(x, c, Some(pos));
            let u = c.value(pos).index();
            for v in Value::BOTH {
                let term = S::mul(lam[v.index()], S::mul(table.entry(c, v), w));
                msg[u] = S::add(msg[u], term);
            }
        }
        S::rescale(&mut msg);
        self.lambda_msg[arc] = msg;
    }

    /// Sends the message from `x` across `arc`, whichever direction it has.
    fn send(&mut self, x: usize, arc: usize) {
        if self.dag.arcs()[arc].0 == x {
            self.send_pi(x, arc);
        } else {
            self.send_lambda(x, arc);
        }
    }

    fn run(mut self) -> Vec<[f64; 2]> {
        let n = self.dag.len();
        let components = self.dag.components();
        for order in &components {
            for &(x, arc) in order.iter().rev() {
                if let Some(a) = arc {
                    self.send(x, a);
                }
            }
            for &(y, arc) in order {
                if let Some(a) = arc {
                    let (p, c) = self.dag.arcs()[a];
                    let x = if p == y { c } else { p };
                    self.send(x, a);
                }
            }
        }

        let mut out = vec![[S::ZERO; 2]; n];
        let mut totals = Vec::with_capacity(components.len());
        for order in &components {
            for &(x, _) in order {
                let pi = self.pi(x);
                let lam = self.lambda_excluding(x, None);
                out[x] = [S::mul(pi[0], lam[0]), S::mul(pi[1], lam[1])];
            }
            let first = out[order[0].0];
            totals.push(S::add(first[0], first[1]));
        }

        // ⊗ of every other component's total, via prefix/suffix products.
        let k = components.len();
        let mut suffix = vec![S::ONE; k + 1];
        for i in (0..k).rev() {
            suffix[i] = S::mul(totals[i], suffix[i + 1]);
        }
        let mut prefix = S::ONE;
        for (i, order) in components.iter().enumerate() {
            let others = S::mul(prefix, suffix[i + 1]);
            for &(x, _) in order {
                out[x] = out[x].map(|b| S::mul(b, others));
            }
            prefix = S::mul(prefix, totals[i]);
        }
        out
    }
}
