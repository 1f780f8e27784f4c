pub mod analyze;
pub mod archive;
pub mod baseline;
pub mod battle;
pub mod drq;
pub mod eval;
pub mod mutator;
pub mod parse;
