use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Redcode opcodes. `CMP` is accepted by the assembler as an alias of `SEQ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Opcode {
    Dat,
    Mov,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Jmp,
    Jmz,
    Jmn,
    Djn,
    Spl,
    Seq,
    Sne,
    Slt,
    Nop,
}

impl Opcode {
    pub const ALL: [Opcode; 16] = [
        Opcode::Dat,
        Opcode::Mov,
        Opcode::Add,
        Opcode::Sub,
        Opcode::Mul,
        Opcode::Div,
        Opcode::Mod,
        Opcode::Jmp,
        Opcode::Jmz,
        Opcode::Jmn,
        Opcode::Djn,
        Opcode::Spl,
        Opcode::Seq,
        Opcode::Sne,
        Opcode::Slt,
        Opcode::Nop,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Dat => "DAT",
            Opcode::Mov => "MOV",
            Opcode::Add => "ADD",
            Opcode::Sub => "SUB",
            Opcode::Mul => "MUL",
            Opcode::Div => "DIV",
            Opcode::Mod => "MOD",
            Opcode::Jmp => "JMP",
            Opcode::Jmz => "JMZ",
            Opcode::Jmn => "JMN",
            Opcode::Djn => "DJN",
            Opcode::Spl => "SPL",
            Opcode::Seq => "SEQ",
            Opcode::Sne => "SNE",
            Opcode::Slt => "SLT",
            Opcode::Nop => "NOP",
        }
    }

    /// Case-insensitive lookup; `CMP` maps to [`Opcode::Seq`].
    pub fn from_mnemonic(s: &str) -> Option<Opcode> {
        let upper = s.to_ascii_uppercase();
        if upper == "CMP" {
            return Some(Opcode::Seq);
        }
        Opcode::ALL.into_iter().find(|op| op.mnemonic() == upper)
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Modifier {
    A,
    B,
    AB,
    BA,
    F,
    X,
    I,
}

impl Modifier {
    pub const ALL: [Modifier; 7] =
        [Modifier::A, Modifier::B, Modifier::AB, Modifier::BA, Modifier::F, Modifier::X, Modifier::I];

    pub fn as_str(self) -> &'static str {
        match self {
            Modifier::A => "A",
            Modifier::B => "B",
            Modifier::AB => "AB",
            Modifier::BA => "BA",
            Modifier::F => "F",
            Modifier::X => "X",
            Modifier::I => "I",
        }
    }

    pub fn parse(s: &str) -> Option<Modifier> {
        let upper = s.to_ascii_uppercase();
        Modifier::ALL.into_iter().find(|m| m.as_str() == upper)
    }
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum AddressingMode {
    /// `#`
    Immediate,
    /// `$`
    Direct,
    /// `*`
    AIndirect,
    /// `@`
    BIndirect,
    /// `{`
    APredecrement,
    /// `<`
    BPredecrement,
    /// `}`
    APostincrement,
    /// `>`
    BPostincrement,
}

impl AddressingMode {
    pub const ALL: [AddressingMode; 8] = [
        AddressingMode::Immediate,
        AddressingMode::Direct,
        AddressingMode::AIndirect,
        AddressingMode::BIndirect,
        AddressingMode::APredecrement,
        AddressingMode::BPredecrement,
        AddressingMode::APostincrement,
        AddressingMode::BPostincrement,
    ];

    pub fn symbol(self) -> char {
        match self {
            AddressingMode::Immediate => '#',
            AddressingMode::Direct => '$',
            AddressingMode::AIndirect => '*',
            AddressingMode::BIndirect => '@',
            AddressingMode::APredecrement => '{',
            AddressingMode::BPredecrement => '<',
            AddressingMode::APostincrement => '}',
            AddressingMode::BPostincrement => '>',
        }
    }

    pub fn from_symbol(c: char) -> Option<AddressingMode> {
        AddressingMode::ALL.into_iter().find(|m| m.symbol() == c)
    }

    /// True for the modes whose secondary offset lives in the A-number of the
    /// referenced cell (`*`, `{`, `}`).
    pub fn uses_a_number(self) -> bool {
        matches!(self, AddressingMode::AIndirect | AddressingMode::APredecrement | AddressingMode::APostincrement)
    }

    pub fn is_indirect(self) -> bool {
        !matches!(self, AddressingMode::Immediate | AddressingMode::Direct)
    }
}

impl fmt::Display for AddressingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One operand: addressing mode plus a number already reduced modulo the core size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Field {
    pub mode: AddressingMode,
    pub value: u32,
}

impl Field {
    pub const fn new(mode: AddressingMode, value: u32) -> Self {
        Field { mode, value }
    }

    pub const fn direct(value: u32) -> Self {
        Field::new(AddressingMode::Direct, value)
    }

    pub const fn immediate(value: u32) -> Self {
        Field::new(AddressingMode::Immediate, value)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.mode.symbol(), self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instruction {
    pub opcode: Opcode,
    pub modifier: Modifier,
    pub a: Field,
    pub b: Field,
}

impl Instruction {
    pub const fn new(opcode: Opcode, modifier: Modifier, a: Field, b: Field) -> Self {
        Instruction { opcode, modifier, a, b }
    }

    /// `DAT.F #0, #0`, the content of an empty core cell.
    pub const fn empty() -> Self {
        Instruction::new(Opcode::Dat, Modifier::F, Field::immediate(0), Field::immediate(0))
    }
}

impl Default for Instruction {
    fn default() -> Self {
        Instruction::empty()
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{} {}, {}", self.opcode, self.modifier, self.a, self.b)
    }
}

/// The ICWS'94 default modifier for an instruction written without one.
pub fn default_modifier(op: Opcode, a_mode: AddressingMode, b_mode: AddressingMode) -> Modifier {
    use AddressingMode::Immediate;
    match op {
        Opcode::Dat => Modifier::F,
        Opcode::Mov | Opcode::Seq | Opcode::Sne => {
            if a_mode == Immediate {
                Modifier::AB
            } else if b_mode == Immediate {
                Modifier::B
            } else {
                Modifier::I
            }
        }
        Opcode::Add | Opcode::Sub | Opcode::Mul | Opcode::Div | Opcode::Mod => {
            if a_mode == Immediate {
                Modifier::AB
            } else if b_mode == Immediate {
                Modifier::B
            } else {
                Modifier::F
            }
        }
        Opcode::Slt => {
            if a_mode == Immediate {
                Modifier::AB
            } else {
                Modifier::B
            }
        }
        Opcode::Jmp | Opcode::Jmz | Opcode::Jmn | Opcode::Djn | Opcode::Spl | Opcode::Nop => Modifier::B,
    }
}

/// A fully resolved program.
///
/// Equality compares name, instructions and start offset; the original
/// `source` text is kept for provenance only.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Warrior {
    pub name: String,
    pub instructions: Vec<Instruction>,
    pub start: usize,
    #[serde(default)]
    pub source: String,
}

impl PartialEq for Warrior {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.start == other.start && self.instructions == other.instructions
    }
}

impl Eq for Warrior {}

impl Warrior {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Content digest over the executable part (instructions and start), so
    /// renaming a warrior does not change its identity in battle seeding.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update((self.start as u64).to_le_bytes());
        for ins in &self.instructions {
            hasher.update([ins.opcode as u8, ins.modifier as u8, ins.a.mode as u8, ins.b.mode as u8]);
            hasher.update(ins.a.value.to_le_bytes());
            hasher.update(ins.b.value.to_le_bytes());
        }
        hasher.finalize().into()
    }

    pub fn digest_hex(&self) -> String {
        self.digest().iter().map(|b| format!("{b:02x}")).collect()
    }
}
