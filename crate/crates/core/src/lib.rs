pub mod ast;
pub mod batch;
pub mod diagnostic;
pub mod harness;
pub mod linter;
pub mod parser;
pub mod promptgen;
pub mod report;
pub mod scorer;
pub mod taxonomy;
