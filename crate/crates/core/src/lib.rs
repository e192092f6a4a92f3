//! Exact evaluation of genus-0 gravitational descendants and their twisted
//! variants on moduli spaces of stable maps to projective space, together
//! with the characteristic numbers of rational curves built from them.
//!
//! All arithmetic is exact. Results are memoized in a shared [`MemoCache`]
//! that can be persisted between runs.

pub mod cache;
pub mod charnum;
pub mod checks;
pub mod correlator;
pub mod descendant;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod exec;
pub mod gw;
pub mod rational;
pub mod split;
pub mod twisted;

pub use cache::MemoCache;
pub use charnum::{CharnumQuery, ConditionSpec, Grid, TableName};
pub use correlator::{canonical_key, codimension, dimension, is_top, CanonicalKey, Correlator, Insertion};
pub use dsl::{parse_correlator, parse_insertions};
pub use engine::{Engine, Strategy};
pub use error::{Error, Result};
pub use exec::Exec;
pub use gw::GwQuery;
pub use rational::ExactRational;
