//! Explanations for decision lists.

pub mod brute;
pub mod cli;
pub mod dl;
pub mod encode;
pub mod enumerate;
pub mod error;
pub mod explain;
pub mod horn;
pub mod model_io;
pub mod reductions;
pub mod sat;
