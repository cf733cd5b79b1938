//! Decomposition of higher-order session-typed processes into processes
//! typable with minimal session types.

pub mod ast;
pub mod cli;
pub mod corpus;
pub mod decompose;
pub mod np;
pub mod optimize;
pub mod parse;
pub mod print;
pub mod semantics;
pub mod typeck;
pub mod types;
