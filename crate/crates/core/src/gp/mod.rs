//! The rule-learning engine: expression-tree individuals, decoding into
//! team plans, and the evolutionary machinery.

mod decode;
mod evolve;
mod tree;

pub use decode::{DecodeContext, DecodeOutcome, Decoder};
pub use evolve::{
    compose_population, crossover, evolve_generation, init_population, mutate, select,
    select_index, EvolveStats, GpConfig, GpError, Population, Scored,
};
pub use tree::{
    random_subtree, random_tree, BinaryOp, GrowMethod, Node, ParseError, RuleTree, Terminal,
    UnaryOp,
};
