//! File formats, persistence, HTTP service, CLI plumbing and the simulation
//! harness around [`committee_core`].

pub mod config;
pub mod corpus_file;
pub mod report;
pub mod service;
pub mod sim;
pub mod snapshot;

pub use committee_core as core;
