//! Binary variables, evidence and conditional tables shared by the
//! probabilistic and possibilistic layers.
//!
//! Every variable in the network is binary. A pair `[f64; 2]` is always laid
//! out as `[relevant, not_relevant]`, and a table row is selected by a
//! [`ParentConfig`] bitmask where bit `i` is set iff the `i`-th parent is
//! relevant.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the relevant value inside a pair.
pub const REL: usize = 0;
/// Index of the not-relevant value inside a pair.
pub const NOT: usize = 1;

/// Largest parent set a dense table may have.
pub const MAX_TABLE_PARENTS: usize = 20;

/// Value of a binary term or document variable (`t_i` / `t̄_i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Relevant,
    NotRelevant,
}

impl Value {
    pub const BOTH: [Value; 2] = [Value::Relevant, Value::NotRelevant];

    /// Position of this value inside a `[relevant, not_relevant]` pair.
    pub const fn index(self) -> usize {
        match self {
            Value::Relevant => REL,
            Value::NotRelevant => NOT,
        }
    }

    pub const fn from_bit(relevant: bool) -> Self {
        if relevant {
            Value::Relevant
        } else {
            Value::NotRelevant
        }
    }
}

/// Assignment of the parents of one node, as a bitmask over parent positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParentConfig(pub usize);

impl ParentConfig {
    pub fn is_relevant(self, position: usize) -> bool {
        self.0 >> position & 1 == 1
    }

    pub fn value(self, position: usize) -> Value {
        Value::from_bit(self.is_relevant(position))
    }

    /// Positions assigned relevant (the set `R(config)`).
    pub fn relevant_positions(self, arity: usize) -> impl Iterator<Item = usize> {
        (0..arity).filter(move |&p| self.is_relevant(p))
    }

    /// Every configuration of `arity` parents, in bitmask order.
    pub fn all(arity: usize) -> impl Iterator<Item = ParentConfig> {
        (0..1usize << arity).map(ParentConfig)
    }

    /// Builds the configuration induced by a per-parent value lookup.
    pub fn from_values(values: impl IntoIterator<Item = Value>) -> Self {
        ParentConfig(
            values
                .into_iter()
                .enumerate()
                .filter(|(_, v)| *v == Value::Relevant)
                .fold(0, |acc, (p, _)| acc | 1 << p),
        )
    }
}

/// Conditional table of one binary node: one `[relevant, not_relevant]` pair
/// per parent configuration.
///
/// Probabilistic tables (CPTs) have rows summing to 1, possibilistic tables
/// have rows whose maximum is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondTable {
    pub parents: Vec<usize>,
    pub rows: Vec<[f64; 2]>,
}

/// Conditional probability table.
pub type Cpt = CondTable;
/// Conditional possibility table.
pub type PossTable = CondTable;

impl CondTable {
    /// Table of a parentless node.
    pub fn root(pair: [f64; 2]) -> Self {
        CondTable {
            parents: Vec::new(),
            rows: vec![pair],
        }
    }

    /// Builds a table by evaluating `row` on every parent configuration.
    pub fn from_fn(parents: Vec<usize>, row: impl FnMut(ParentConfig) -> [f64; 2]) -> Result<Self> {
        if parents.len() > MAX_TABLE_PARENTS {
            return Err(Error::TooLarge {
                what: "parent set",
                size: parents.len(),
                limit: MAX_TABLE_PARENTS,
            });
        }
        let rows = ParentConfig::all(parents.len()).map(row).collect();
        Ok(CondTable { parents, rows })
    }

    pub fn arity(&self) -> usize {
        self.parents.len()
    }

    pub fn row(&self, config: ParentConfig) -> [f64; 2] {
        self.rows[config.0]
    }

    pub fn entry(&self, config: ParentConfig, value: Value) -> f64 {
        self.rows[config.0][value.index()]
    }

    /// Shape check: one row per configuration, entries finite and in `[0, 1]`.
    pub fn check_shape(&self) -> Result<()> {
        if self.rows.len() != 1usize << self.parents.len() {
            return Err(Error::TableMismatch(format!(
                "{} rows for {} parents",
                self.rows.len(),
                self.parents.len()
            )));
        }
        let bad = self
            .rows
            .iter()
            .flatten()
            .any(|x| !x.is_finite() || !(0.0..=1.0).contains(x));
        if bad {
            return Err(Error::TableMismatch("entry outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// Hard evidence: a partial assignment of network variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence(BTreeMap<usize, Value>);

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evidence instantiating every listed node to relevant.
    pub fn all_relevant(nodes: impl IntoIterator<Item = usize>) -> Self {
        Evidence(nodes.into_iter().map(|n| (n, Value::Relevant)).collect())
    }

    /// Sets `node` to `value`. Returns the previous value if one was set.
    pub fn set(&mut self, node: usize, value: Value) -> Option<Value> {
        self.0.insert(node, value)
    }

    pub fn with(mut self, node: usize, value: Value) -> Self {
        self.0.insert(node, value);
        self
    }

    pub fn get(&self, node: usize) -> Option<Value> {
        self.0.get(&node).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Value)> + '_ {
        self.0.iter().map(|(&n, &v)| (n, v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether `value` of `node` agrees with the evidence.
    pub fn admits(&self, node: usize, value: Value) -> bool {
        self.get(node).is_none_or(|v| v == value)
    }

    /// Fails if some instantiated node is outside `0..node_count`.
    pub fn check(&self, node_count: usize) -> Result<()> {
        match self.0.keys().find(|&&n| n >= node_count) {
            Some(&n) => Err(Error::UnknownNode(n)),
            None => Ok(()),
        }
    }
}

impl FromIterator<(usize, Value)> for Evidence {
    fn from_iter<I: IntoIterator<Item = (usize, Value)>>(iter: I) -> Self {
        Evidence(iter.into_iter().collect())
    }
}
