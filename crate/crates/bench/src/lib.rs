//! Instance generators, bound-checking suites and the `shuttle` command-line tool.

pub mod gen;
pub mod suite;
