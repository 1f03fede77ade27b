pub mod config;
pub mod eval;
pub mod fixture;
pub mod linker;
pub mod logical_form;
pub mod query;
pub mod session;
pub mod sparql;
pub mod templates;
pub mod translator;
