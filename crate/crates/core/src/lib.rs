//! Transitive credit for scholarly products.
//!
//! A *creditmap* declares how credit for one product (a paper, a software
//! package, a dataset) is split among its contributors and the products it
//! builds on. Registered creditmaps link into a directed acyclic graph, and
//! credit flows through it by multiplying weights along citation paths: if a
//! paper gives 25% to a package whose lead developer holds 50%, that
//! developer holds 12.5% of the paper.
//!
//! - [`model`]: identifiers, entries, validation, category-level weights.
//! - [`jsonld`]: the JSON-LD document profile.
//! - [`registry`]: file-backed store of registered creditmaps.
//! - [`graph`]: corpus graph, cycle detection, topological order.
//! - [`engine`]: direct and transitive allocations, aggregate ranking.
//! - [`cli`]: the `credit-ledger` command line.

pub mod cli;
pub mod engine;
pub mod graph;
pub mod jsonld;
pub mod model;
pub mod registry;
pub mod sum;
