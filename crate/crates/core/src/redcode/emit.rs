use std::fmt::Write;

use super::types::Warrior;

/// Canonical text: optional `;name` line, `ORG`, one fully explicit
/// instruction per line, `END`. Parsing the result yields an equal warrior.
pub fn emit(w: &Warrior) -> String {
    let mut out = String::new();
    let name = w.name.lines().next().unwrap_or("").trim();
    if !name.is_empty() {
        let _ = writeln!(out, ";name {name}");
    }
    let _ = writeln!(out, "ORG {}", w.start);
    for ins in &w.instructions {
        let _ = writeln!(out, "{ins}");
    }
    out.push_str("END");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::redcode::{parse, Field, Instruction, Modifier, Opcode};

    #[test]
    fn single_instruction() {
        let w = Warrior {
            name: String::new(),
            instructions: vec![Instruction::new(Opcode::Mov, Modifier::I, Field::direct(0), Field::direct(1))],
            start: 0,
            source: String::new(),
        };
        assert_eq!(emit(&w), "ORG 0\nMOV.I $0, $1\nEND");
    }

    #[test]
    fn name_survives_round_trip() {
        let w = parse("; name Imp\nMOV 0, 1", 8000, 100).unwrap();
        let text = emit(&w);
        assert!(text.lines().next().unwrap().contains("Imp"));
        assert_eq!(parse(&text, 8000, 100).unwrap(), w);
    }
}
