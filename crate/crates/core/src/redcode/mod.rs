//! Redcode: instruction model, assembler and canonical printer.

mod emit;
mod parser;
mod types;

pub use emit::emit;
pub use parser::{is_statement, parse, parse_with, AsmOptions, ParseError, ParseErrorKind};
pub use types::{default_modifier, AddressingMode, Field, Instruction, Modifier, Opcode, Warrior};
