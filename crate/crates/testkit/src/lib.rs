//! Test support: a toy DBLP graph, an evaluator for the supported SPARQL
//! subset, a synthetic benchmark corpus and local fake DBLP services.

pub mod corpus;
pub mod engine;
pub mod kg;
pub mod server;
