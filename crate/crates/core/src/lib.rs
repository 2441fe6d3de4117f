//! Fully dynamic approximate maximum matching with sparse certificates.
//!
//! The crate maintains a `(1 − ε)`-approximate matching of a graph under edge
//! insertions and deletions. Work is measured in two currencies: adjacency
//! matrix probes and adjacency list reads.

pub mod baselines;
pub mod bench;
pub mod boost;
pub mod certify;
pub mod engine;
pub mod error;
pub mod graph;
pub mod matching;
pub mod oracle;
pub mod ors;
pub mod sparsifier;
pub mod static_matcher;
pub mod stream;

pub use engine::{Engine, EngineConfig, Metrics};
pub use error::{Error, Result};
pub use graph::{DynamicGraph, Edge};
pub use matching::Matching;
pub use stream::{UpdateEvent, UpdateStream};
