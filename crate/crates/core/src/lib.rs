pub mod ast;
pub mod diag;
pub mod parser;
pub mod typecheck;
pub mod types;
pub mod unstage;
pub mod backends;
pub mod engine;
pub mod difftest;
pub mod cli;
