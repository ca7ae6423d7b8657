//! Document retrieval over one indexed corpus with three ranking models:
//!
//! - [`bnr`]: a Bayesian network whose term layer is a learned polytree and
//!   whose document layer adds up term weights; scores are `p(d_j | Q)`.
//! - [`pir`]: a possibilistic document → term → query network; scores are a
//!   possibility/necessity pair.
//! - [`hybrid`]: the Bayesian network topology with possibility tables,
//!   (max, ⊗) propagation and possibility/necessity scores.
//!
//! [`oracle`] holds brute-force enumeration counterparts of every inference
//! path.

pub mod bnr;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod hybrid;
pub mod network;
pub mod oracle;
pub mod pir;
pub mod propagate;
pub mod ranking;
pub mod table;

pub use corpus::{build_index, tokenize, CorpusIndex, Document, IndexOptions, Query};
pub use error::{Error, Result};
pub use hybrid::Operator;
pub use ranking::{ModelKind, RankedList, Score, ScorePair};
pub use table::{CondTable, Evidence, Value};
