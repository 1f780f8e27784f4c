//! Core War self-play engine: a Redcode assembler, an ICWS'94 MARS,
//! seeded battles with time-shared survival fitness, a MAP-Elites archive
//! over (spawned threads, memory coverage), the round-by-round self-play
//! loop and the population analyses built on top of it.

pub mod analysis;
pub mod archive;
pub mod battle;
pub mod corpus;
pub mod drq;
pub mod format;
pub mod mars;
pub mod mutation;
pub mod optimize;
mod par;
pub mod redcode;
pub mod render;
pub mod seeds;
