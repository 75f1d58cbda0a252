//! Antimagic labelings of bipartite graphs with minimum degree at least 15.
//!
//! The [`pipeline`] module builds a labeling by decomposing the graph
//! ([`decompose`]) and assigning labels step by step ([`assemble`]); the
//! [`verify`] module checks any labeling from scratch.

pub mod assemble;
pub mod decompose;
pub mod generators;
pub mod graph;
pub mod io;
pub mod labeling;
pub mod mod3;
pub mod oracle;
pub mod pairing;
pub mod pipeline;
pub mod trails;
pub mod verify;
