//! Small programs with their core state worked out by hand.

use drq_core::mars::{Mars, MarsConfig};
use drq_core::redcode::parse;

pub struct TraceCase {
    pub name: &'static str,
    pub source: &'static str,
    pub max_processes: u32,
    pub steps: u32,
    /// (address, expected instruction text)
    pub cells: &'static [(u32, &'static str)],
    pub queue: &'static [u32],
}

const fn case(
    name: &'static str,
    source: &'static str,
    steps: u32,
    cells: &'static [(u32, &'static str)],
    queue: &'static [u32],
) -> TraceCase {
    TraceCase { name, source, max_processes: 8000, steps, cells, queue }
}

pub const CASES: &[TraceCase] = &[
    case("imp copies itself", "MOV.I $0, $1", 1, &[(1, "MOV.I $0, $1")], &[1]),
    case(
        "dwarf drops its first bomb",
        "ADD.AB #4, $3\nMOV.I $2, @2\nJMP $-2\nDAT.F #0, #0",
        3,
        &[(3, "DAT.F #0, #4"), (7, "DAT.F #0, #4")],
        &[0],
    ),
    case(
        "b-predecrement before the read",
        "MOV.AB #7, <1\nDAT.F #0, #3",
        1,
        &[(1, "DAT.F #0, #2"), (3, "DAT.F #0, #7")],
        &[1],
    ),
    case(
        "postincrement after the read",
        "MOV.I }1, >1\nDAT.F #2, #3\nDAT.F #0, #0\nNOP.B $9, $9",
        1,
        &[(1, "DAT.F #3, #4"), (4, "NOP.B $9, $9")],
        &[1],
    ),
    case("a-indirect", "MOV.I *1, $5\nDAT.F #2, #0\nDAT.F #0, #0\nNOP.B $7, $8", 1, &[(5, "NOP.B $7, $8")], &[1]),
    case("spl queues next then target", "SPL.B $2, $0\nJMP.B $0, $0\nJMP.B $0, $0", 1, &[], &[1, 2]),
    TraceCase {
        name: "spl at the process limit",
        source: "SPL.B $2, $0\nJMP.B $0, $0\nJMP.B $0, $0",
        max_processes: 1,
        steps: 1,
        cells: &[],
        queue: &[1],
    },
    case("djn counts down to fall through", "DJN.B $0, #2", 2, &[(0, "DJN.B $0, #0")], &[1]),
    case(
        "div by zero kills but writes the other field",
        "DIV.F $2, $1\nDAT.F #4, #6\nDAT.F #0, #3",
        1,
        &[(1, "DAT.F #4, #2")],
        &[],
    ),
    case("mod", "MOD.AB #4, $1\nDAT.F #0, #11", 1, &[(1, "DAT.F #0, #3")], &[1]),
    case("sub wraps modulo the core", "SUB.AB #5, $1\nDAT.F #0, #2", 1, &[(1, "DAT.F #0, #7997")], &[1]),
    case("mul.f", "MUL.F $1, $1\nDAT.F #3, #4", 1, &[(1, "DAT.F #9, #16")], &[1]),
    case("mov.x crosses fields", "MOV.X $1, $2\nDAT.F #1, #2", 1, &[(2, "DAT.F #2, #1")], &[1]),
    case("seq.i skips on equal", "SEQ.I $1, $2\nDAT.F #1, #2\nDAT.F #1, #2", 1, &[], &[2]),
    case("sne.i falls through on equal", "SNE.I $1, $2\nDAT.F #1, #2\nDAT.F #1, #2", 1, &[], &[1]),
    case("slt.ab", "SLT.AB #3, $1\nDAT.F #0, #5", 1, &[], &[2]),
    case("jmz.f needs both fields zero", "JMZ.F $5, $1\nDAT.F #0, #1", 1, &[], &[1]),
    case("jmn.f jumps on either field", "JMN.F $5, $1\nDAT.F #0, #1", 1, &[], &[5]),
    case("cmp is seq", "CMP.AB #0, $1\nDAT #0, #0", 1, &[], &[2]),
    case("immediate b operand sees the a-side increment", "ADD.BA }0, #5", 1, &[(0, "ADD.BA }6, #5")], &[1]),
    case("dat kills", "DAT.F #0, #0", 1, &[], &[]),
    case("jmp through b-indirect", "JMP.B @1, $0\nDAT.F #0, #3", 1, &[], &[4]),
    case("djn.f decrements both fields", "DJN.F $3, $1\nDAT.F #1, #5", 1, &[(1, "DAT.F #0, #4")], &[3]),
    case("nop", "NOP.B $0, $0", 1, &[], &[1]),
    case(
        "a-predecrement through a-number",
        "MOV.I {1, $3\nDAT.F #2, #0\nNOP.B $1, $2",
        1,
        &[(1, "DAT.F #1, #0"), (3, "NOP.B $1, $2")],
        &[1],
    ),
];

pub fn run_case(c: &TraceCase) -> Result<(), String> {
    let cfg = MarsConfig {
        core_size: 8000,
        max_cycles: 100,
        max_processes: c.max_processes,
        min_separation: 100,
        max_length: 100,
    };
    let w = parse(c.source, cfg.core_size, cfg.max_length as usize).map_err(|e| format!("{}: {e}", c.name))?;
    let mut mars = Mars::load(&[w], &[0], &cfg).map_err(|e| format!("{}: {e}", c.name))?;
    for _ in 0..c.steps {
        mars.step();
    }
    for &(addr, expected) in c.cells {
        let got = mars.cells()[addr as usize].to_string();
        if got != expected {
            return Err(format!("{}: cell {addr} is `{got}`, expected `{expected}`", c.name));
        }
    }
    let queue: Vec<u32> = mars.queue(0).iter().copied().collect();
    if queue != c.queue {
        return Err(format!("{}: queue is {queue:?}, expected {:?}", c.name, c.queue));
    }
    Ok(())
}
