//! Library surface of the scenario runner (the `lplab` binary drives
//! these; tests exercise them directly).

pub mod expr;
pub mod runner;
pub mod scenario;
