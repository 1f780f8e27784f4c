//! Hostile assembler inputs: token soup, raw noise and damaged real programs.

use rand::seq::SliceRandom;
use rand::Rng;

const TOKENS: &[&str] = &[
    "MOV",
    "mov",
    "DAT",
    "SPL",
    "JMP",
    "JMZ",
    "JMN",
    "DJN",
    "ADD",
    "SUB",
    "MUL",
    "DIV",
    "MOD",
    "SEQ",
    "SNE",
    "CMP",
    "SLT",
    "NOP",
    "ORG",
    "END",
    "EQU",
    "FOR",
    "ROF",
    ".A",
    ".B",
    ".AB",
    ".BA",
    ".F",
    ".X",
    ".I",
    ".",
    "#",
    "$",
    "*",
    "@",
    "{",
    "<",
    "}",
    ">",
    ",",
    ",",
    "(",
    ")",
    "+",
    "-",
    "*",
    "/",
    "%",
    ":",
    ";",
    ";name",
    "0",
    "1",
    "-1",
    "7999",
    "8000",
    "99999999999999999999",
    "-9223372036854775808",
    "9223372036854775807",
    "label",
    "start",
    "x",
    "_",
    "a1",
    "loop:",
    "\t",
    " ",
    "  ",
    "\u{00e9}",
    "\u{1F600}",
];

pub fn token_soup<R: Rng + ?Sized>(rng: &mut R) -> String {
    let lines = rng.gen_range(0..12);
    let mut out = String::new();
    for _ in 0..lines {
        for _ in 0..rng.gen_range(0..9) {
            out.push_str(TOKENS.choose(rng).unwrap());
            if rng.gen_bool(0.6) {
                out.push(' ');
            }
        }
        out.push('\n');
    }
    out
}

pub fn noise<R: Rng + ?Sized>(rng: &mut R) -> String {
    let len = rng.gen_range(0..200);
    (0..len)
        .map(|_| match rng.gen_range(0..10) {
            0 => '\n',
            1 => char::from_u32(rng.gen_range(0x80..0x3000)).unwrap_or('?'),
            _ => rng.gen_range(0x20u8..0x7f) as char,
        })
        .collect()
}

/// Random byte-level damage to a valid program, kept on char boundaries.
pub fn damaged<R: Rng + ?Sized>(rng: &mut R, source: &str) -> String {
    let mut chars: Vec<char> = source.chars().collect();
    for _ in 0..rng.gen_range(1..6) {
        let pos = rng.gen_range(0..=chars.len());
        match rng.gen_range(0..3) {
            0 if pos < chars.len() => {
                chars.remove(pos);
            }
            1 => chars.insert(pos, rng.gen_range(0x20u8..0x7f) as char),
            _ => {
                let tok: Vec<char> = TOKENS.choose(rng).unwrap().chars().collect();
                for (k, c) in tok.into_iter().enumerate() {
                    chars.insert(pos + k, c);
                }
            }
        }
    }
    chars.into_iter().collect()
}

pub fn fuzz_input<R: Rng + ?Sized>(rng: &mut R, seeds: &[String]) -> String {
    match rng.gen_range(0..3) {
        0 => token_soup(rng),
        1 => noise(rng),
        _ => {
            let seed = seeds.choose(rng).map_or("MOV 0, 1", String::as_str);
            damaged(rng, seed)
        }
    }
}
