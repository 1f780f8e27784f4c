//! Helpers shared by the integration tests and the acceptance harness.

#![allow(dead_code)]

pub mod fuzz;
pub mod hand_traces;
pub mod reference_mars;

use std::path::{Path, PathBuf};

use drq_core::battle::{prepare_battle, BattleConfig};
use drq_core::mars::Mars;
use drq_core::redcode::{parse, Field, Instruction, Warrior};
use reference_mars::{RefField, RefInsn, RefMars};

pub fn warriors_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("warriors")
}

/// Source text of the bundled classic programs, sorted by file name.
pub fn classic_sources() -> Vec<String> {
    let mut paths: Vec<_> = std::fs::read_dir(warriors_dir())
        .expect("warriors directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "red"))
        .collect();
    paths.sort();
    paths.iter().map(|p| std::fs::read_to_string(p).unwrap()).collect()
}

pub fn classic_warriors(core_size: u32, max_length: usize) -> Vec<Warrior> {
    classic_sources()
        .iter()
        .map(|text| parse(text, core_size, max_length).unwrap_or_else(|e| panic!("{e}\n{text}")))
        .collect()
}

/// Maps engine instructions to the oracle's representation by name only.
pub fn to_ref(insn: &Instruction) -> RefInsn {
    let field = |f: &Field| RefField { mode: f.mode.symbol(), value: f.value as i64 };
    RefInsn { opcode: insn.opcode.mnemonic(), modifier: insn.modifier.as_str(), a: field(&insn.a), b: field(&insn.b) }
}

/// Sets up battle `index` in both engines with identical placements and
/// load order, then compares the full core and every process queue after
/// each cycle. Returns the number of cycles compared.
pub fn differential(warriors: &[Warrior], bc: &BattleConfig, index: u32, cycles: u32) -> Result<u32, String> {
    let (mut mars, load_order, slots) = prepare_battle(warriors, bc, index).map_err(|e| e.to_string())?;
    let mut reference = RefMars::new(bc.mars.core_size as i64, bc.mars.max_processes as usize);
    for (k, &i) in load_order.iter().enumerate() {
        let w = &warriors[i];
        let code: Vec<RefInsn> = w.instructions.iter().map(to_ref).collect();
        reference.load(&code, slots[k] as i64, w.start as i64);
    }
    compare(&mars, &reference, 0)?;
    for c in 1..=cycles {
        if mars.is_finished(bc.mars.max_cycles) {
            return Ok(c - 1);
        }
        mars.step();
        reference.step();
        compare(&mars, &reference, c)?;
    }
    Ok(cycles)
}

pub fn compare(mars: &Mars, reference: &RefMars, cycle: u32) -> Result<(), String> {
    for (addr, (a, b)) in mars.cells().iter().zip(&reference.core).enumerate() {
        let a = to_ref(a);
        if a != *b {
            return Err(format!("cycle {cycle}: cell {addr} differs: engine {a:?}, reference {b:?}"));
        }
    }
    for w in 0..mars.warrior_count() {
        let ours: Vec<i64> = mars.queue(w).iter().map(|&p| p as i64).collect();
        let theirs: Vec<i64> = reference.queues[w].iter().copied().collect();
        if ours != theirs {
            return Err(format!("cycle {cycle}: queue of warrior {w} differs: engine {ours:?}, reference {theirs:?}"));
        }
    }
    Ok(())
}
