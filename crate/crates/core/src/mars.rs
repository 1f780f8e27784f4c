//! Memory Array Redcode Simulator.
//!
//! Warriors share a circular core of `core_size` instructions. Each timestep
//! every living warrior, in loading order, pops one program counter from its
//! FIFO process queue and executes it with ICWS'94 semantics: the A-operand
//! is evaluated completely (pre-decrement, read, post-increment) before the
//! B-operand. A warrior with an empty queue is dead.
//!
//! The simulator also records what the battle statistics need: the timestep
//! at which each warrior died, successful `SPL` activations, the set of
//! addresses each warrior read, wrote or executed, and the warrior that last
//! wrote each cell.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::redcode::{AddressingMode, Instruction, Modifier, Opcode, Warrior};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarsConfig {
    pub core_size: u32,
    pub max_cycles: u32,
    /// Per-warrior process limit.
    pub max_processes: u32,
    pub min_separation: u32,
    pub max_length: u32,
}

impl MarsConfig {
    /// 8000-cell core, 80k timesteps, 8000 processes, 100-instruction
    /// warriors at least 100 cells apart.
    pub const PAPER: MarsConfig =
        MarsConfig { core_size: 8000, max_cycles: 80_000, max_processes: 8000, min_separation: 100, max_length: 100 };

    /// Scaled-down setting for fast experiments and tests.
    pub const DESK: MarsConfig =
        MarsConfig { core_size: 800, max_cycles: 8000, max_processes: 800, min_separation: 20, max_length: 20 };

    /// Cells reserved per warrior when placing: its maximum extent plus the
    /// mandatory gap.
    pub fn footprint(&self) -> u64 {
        self.max_length as u64 + self.min_separation as u64
    }

    pub fn max_warriors(&self) -> usize {
        (self.core_size as u64 / self.footprint()).min(MAX_WARRIORS as u64) as usize
    }

    pub fn validate(&self) -> Result<(), MarsError> {
        let fields = [
            ("core_size", self.core_size),
            ("max_cycles", self.max_cycles),
            ("max_processes", self.max_processes),
            ("min_separation", self.min_separation),
            ("max_length", self.max_length),
        ];
        for (name, value) in fields {
            if value == 0 {
                return Err(MarsError::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.core_size > 1 << 30 {
            return Err(MarsError::InvalidConfig("core_size above 2^30".into()));
        }
        Ok(())
    }
}

impl Default for MarsConfig {
    fn default() -> Self {
        MarsConfig::PAPER
    }
}

/// Warrior ids are stored in a byte.
pub const MAX_WARRIORS: usize = 255;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MarsError {
    #[error("invalid MARS configuration: {0}")]
    InvalidConfig(String),
    #[error("warriors {first} and {second} are placed closer than the required separation")]
    PlacementOverlap { first: usize, second: usize },
    #[error("{n} warriors do not fit (at most {max})")]
    TooManyWarriors { n: usize, max: usize },
    #[error("warrior {index} has {len} instructions, limit is {max}")]
    WarriorTooLong { index: usize, len: usize, max: u32 },
    #[error("expected {expected} placements, got {got}")]
    PlacementCount { expected: usize, got: usize },
    #[error("placement {0} outside the core")]
    PlacementOutOfCore(u32),
    #[error("no warriors to load")]
    NoWarriors,
}

/// Outcome of one simulation.
///
/// The alive mask `A[i][tau]` for `tau = 1..=end_cycle` is implied by
/// `death_cycle`: a warrior is alive at `tau` iff it has not died at or
/// before `tau`. Storing only the death time keeps traces small and makes
/// the mask monotone by construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BattleTrace {
    pub end_cycle: u32,
    pub death_cycle: Vec<Option<u32>>,
    /// Successful `SPL` activations; the initial process is not counted.
    pub spawned_threads: Vec<u64>,
    /// Distinct addresses read, written or executed.
    pub memory_coverage: Vec<u32>,
}

impl BattleTrace {
    pub fn warriors(&self) -> usize {
        self.death_cycle.len()
    }

    /// `A[warrior][tau]`, with `tau` 1-based. Past `end_cycle` the last
    /// recorded state persists.
    pub fn alive(&self, warrior: usize, tau: u32) -> bool {
        self.death_cycle[warrior].is_none_or(|d| tau < d)
    }

    pub fn alive_mask(&self) -> Vec<Vec<bool>> {
        (1..=self.end_cycle).map(|tau| (0..self.warriors()).map(|w| self.alive(w, tau)).collect()).collect()
    }

    pub fn survivors(&self) -> usize {
        self.death_cycle.iter().filter(|d| d.is_none()).count()
    }
}

#[derive(Clone, Debug)]
struct WarriorState {
    queue: VecDeque<u32>,
    spawned: u64,
    touched: Vec<u64>,
    coverage: u32,
    death: Option<u32>,
}

impl WarriorState {
    fn touch(&mut self, addr: u32) {
        let (word, bit) = ((addr >> 6) as usize, 1u64 << (addr & 63));
        if self.touched[word] & bit == 0 {
            self.touched[word] |= bit;
            self.coverage += 1;
        }
    }
}

#[derive(Clone, Debug)]
pub struct Mars {
    cfg: MarsConfig,
    cells: Vec<Instruction>,
    last_writer: Vec<Option<u8>>,
    warriors: Vec<WarriorState>,
    cycle: u32,
}

impl Mars {
    pub fn load(warriors: &[Warrior], placements: &[u32], cfg: &MarsConfig) -> Result<Mars, MarsError> {
        cfg.validate()?;
        let n = warriors.len();
        if n == 0 {
            return Err(MarsError::NoWarriors);
        }
        if placements.len() != n {
            return Err(MarsError::PlacementCount { expected: n, got: placements.len() });
        }
        if n > cfg.max_warriors() {
            return Err(MarsError::TooManyWarriors { n, max: cfg.max_warriors() });
        }
        let size = cfg.core_size;
        for (index, w) in warriors.iter().enumerate() {
            if w.len() > cfg.max_length as usize {
                return Err(MarsError::WarriorTooLong { index, len: w.len(), max: cfg.max_length });
            }
        }
        for &p in placements {
            if p >= size {
                return Err(MarsError::PlacementOutOfCore(p));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let d = (placements[j] + size - placements[i]) % size;
                if (d.min(size - d) as u64) < cfg.footprint() {
                    return Err(MarsError::PlacementOverlap { first: i, second: j });
                }
            }
        }

        let mut cells = vec![Instruction::empty(); size as usize];
        let mut last_writer = vec![None; size as usize];
        let words = (size as usize).div_ceil(64);
        let mut states = Vec::with_capacity(n);
        for (id, (w, &base)) in warriors.iter().zip(placements).enumerate() {
            for (offset, ins) in w.instructions.iter().enumerate() {
                let addr = ((base as u64 + offset as u64) % size as u64) as usize;
                cells[addr] = *ins;
                last_writer[addr] = Some(id as u8);
            }
            let mut queue = VecDeque::with_capacity(16);
            queue.push_back(((base as u64 + w.start as u64) % size as u64) as u32);
            states.push(WarriorState { queue, spawned: 0, touched: vec![0; words], coverage: 0, death: None });
        }
        Ok(Mars { cfg: *cfg, cells, last_writer, warriors: states, cycle: 0 })
    }

    pub fn config(&self) -> &MarsConfig {
        &self.cfg
    }

    pub fn cells(&self) -> &[Instruction] {
        &self.cells
    }

    pub fn last_writers(&self) -> &[Option<u8>] {
        &self.last_writer
    }

    pub fn cycle(&self) -> u32 {
        self.cycle
    }

    pub fn warrior_count(&self) -> usize {
        self.warriors.len()
    }

    pub fn queue(&self, warrior: usize) -> &VecDeque<u32> {
        &self.warriors[warrior].queue
    }

    pub fn is_alive(&self, warrior: usize) -> bool {
        !self.warriors[warrior].queue.is_empty()
    }

    pub fn living(&self) -> usize {
        self.warriors.iter().filter(|w| !w.queue.is_empty()).count()
    }

    pub fn spawned_threads(&self, warrior: usize) -> u64 {
        self.warriors[warrior].spawned
    }

    pub fn memory_coverage(&self, warrior: usize) -> u32 {
        self.warriors[warrior].coverage
    }

    /// True when a battle would stop here: one or no survivors among several
    /// warriors, a lone warrior dead, or the cycle budget spent.
    pub fn is_finished(&self, max_cycles: u32) -> bool {
        let living = self.living();
        self.cycle >= max_cycles
            || (self.warriors.len() >= 2 && living <= 1)
            || (self.warriors.len() == 1 && living == 0)
    }

    /// One timestep: each living warrior executes one process.
    pub fn step(&mut self) {
        self.cycle += 1;
        for w in 0..self.warriors.len() {
            let Some(pc) = self.warriors[w].queue.pop_front() else {
                continue;
            };
            self.execute(w, pc);
            if self.warriors[w].queue.is_empty() {
                self.warriors[w].death = Some(self.cycle);
            }
        }
    }

    pub fn run(&mut self, max_cycles: u32) -> BattleTrace {
        self.run_observed(max_cycles, |_| {})
    }

    /// Like [`Mars::run`], calling `observe` after every timestep.
    pub fn run_observed(&mut self, max_cycles: u32, mut observe: impl FnMut(&Mars)) -> BattleTrace {
        while !self.is_finished(max_cycles) {
            self.step();
            observe(self);
        }
        self.trace()
    }

    pub fn trace(&self) -> BattleTrace {
        BattleTrace {
            end_cycle: self.cycle,
            death_cycle: self.warriors.iter().map(|w| w.death).collect(),
            spawned_threads: self.warriors.iter().map(|w| w.spawned).collect(),
            memory_coverage: self.warriors.iter().map(|w| w.coverage).collect(),
        }
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.cfg.core_size {
            s - self.cfg.core_size
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.cfg.core_size - b
        }
    }

    #[inline]
    fn write(&mut self, w: usize, addr: u32) {
        self.last_writer[addr as usize] = Some(w as u8);
        self.warriors[w].touch(addr);
    }

    /// Resolve one operand. Returns the pointer (offset from `pc`) and a copy
    /// of the instruction it designates, taken after any pre-decrement and
    /// before any post-increment.
    fn operand(&mut self, w: usize, pc: u32, mode: AddressingMode, value: u32) -> (u32, Instruction) {
        let mut ptr = value;
        let mut post = None;
        match mode {
            AddressingMode::Immediate => ptr = 0,
            AddressingMode::Direct => {}
            _ => {
                let ind = self.add(pc, value);
                self.warriors[w].touch(ind);
                let use_a = mode.uses_a_number();
                match mode {
                    AddressingMode::APredecrement => {
                        let v = self.cells[ind as usize].a.value;
                        self.cells[ind as usize].a.value = self.sub(v, 1);
                        self.write(w, ind);
                    }
                    AddressingMode::BPredecrement => {
                        let v = self.cells[ind as usize].b.value;
                        self.cells[ind as usize].b.value = self.sub(v, 1);
                        self.write(w, ind);
                    }
                    AddressingMode::APostincrement | AddressingMode::BPostincrement => post = Some(ind),
                    _ => {}
                }
                let cell = &self.cells[ind as usize];
                let secondary = if use_a { cell.a.value } else { cell.b.value };
                ptr = self.add(value, secondary);
            }
        }
        let target = self.add(pc, ptr);
        self.warriors[w].touch(target);
        let register = self.cells[target as usize];
        if let Some(ind) = post {
            let cell = &mut self.cells[ind as usize];
            let size = self.cfg.core_size;
            let field = if mode == AddressingMode::APostincrement { &mut cell.a.value } else { &mut cell.b.value };
            *field = if *field + 1 == size { 0 } else { *field + 1 };
            self.write(w, ind);
        }
        (ptr, register)
    }

    fn execute(&mut self, w: usize, pc: u32) {
        let ir = self.cells[pc as usize];
        self.warriors[w].touch(pc);
        let (ptr_a, ira) = self.operand(w, pc, ir.a.mode, ir.a.value);
        let (ptr_b, irb) = self.operand(w, pc, ir.b.mode, ir.b.value);
        let a_addr = self.add(pc, ptr_a);
        let b_addr = self.add(pc, ptr_b);
        let next = self.add(pc, 1);
        let size = self.cfg.core_size;
        let modifier = ir.modifier;

        match ir.opcode {
            Opcode::Dat => {}
            Opcode::Mov => {
                let dst = &mut self.cells[b_addr as usize];
                match modifier {
                    Modifier::A => dst.a.value = ira.a.value,
                    Modifier::B => dst.b.value = ira.b.value,
                    Modifier::AB => dst.b.value = ira.a.value,
                    Modifier::BA => dst.a.value = ira.b.value,
                    Modifier::F => {
                        dst.a.value = ira.a.value;
                        dst.b.value = ira.b.value;
                    }
                    Modifier::X => {
                        dst.a.value = ira.b.value;
                        dst.b.value = ira.a.value;
                    }
                    Modifier::I => *dst = ira,
                }
                self.write(w, b_addr);
                self.warriors[w].queue.push_back(next);
            }
            Opcode::Add | Opcode::Sub | Opcode::Mul | Opcode::Div | Opcode::Mod => {
                let op = ir.opcode;
                let apply = |x: u32, y: u32| -> Option<u32> {
                    let (x, y, m) = (x as u64, y as u64, size as u64);
                    match op {
                        Opcode::Add => Some(((x + y) % m) as u32),
                        Opcode::Sub => Some(((x + m - y) % m) as u32),
                        Opcode::Mul => Some(((x * y) % m) as u32),
                        Opcode::Div => (y != 0).then(|| (x / y) as u32),
                        _ => (y != 0).then(|| (x % y) as u32),
                    }
                };
                // (write A-number?, left, right) pairs per modifier.
                let pairs: [Option<(bool, u32, u32)>; 2] = match modifier {
                    Modifier::A => [Some((true, irb.a.value, ira.a.value)), None],
                    Modifier::B => [Some((false, irb.b.value, ira.b.value)), None],
                    Modifier::AB => [Some((false, irb.b.value, ira.a.value)), None],
                    Modifier::BA => [Some((true, irb.a.value, ira.b.value)), None],
                    Modifier::F | Modifier::I => {
                        [Some((true, irb.a.value, ira.a.value)), Some((false, irb.b.value, ira.b.value))]
                    }
                    Modifier::X => [Some((true, irb.a.value, ira.b.value)), Some((false, irb.b.value, ira.a.value))],
                };
                let mut survives = true;
                for (to_a, x, y) in pairs.into_iter().flatten() {
                    match apply(x, y) {
                        Some(v) => {
                            let dst = &mut self.cells[b_addr as usize];
                            if to_a {
                                dst.a.value = v;
                            } else {
                                dst.b.value = v;
                            }
                        }
                        None => survives = false,
                    }
                }
                self.write(w, b_addr);
                if survives {
                    self.warriors[w].queue.push_back(next);
                }
            }
            Opcode::Jmp => self.warriors[w].queue.push_back(a_addr),
            Opcode::Jmz | Opcode::Jmn => {
                let zero = match modifier {
                    Modifier::A | Modifier::BA => irb.a.value == 0,
                    Modifier::B | Modifier::AB => irb.b.value == 0,
                    _ => irb.a.value == 0 && irb.b.value == 0,
                };
                let jump = if ir.opcode == Opcode::Jmz { zero } else { !zero };
                self.warriors[w].queue.push_back(if jump { a_addr } else { next });
            }
            Opcode::Djn => {
                let dec_a = matches!(modifier, Modifier::A | Modifier::BA | Modifier::F | Modifier::X | Modifier::I);
                let dec_b = matches!(modifier, Modifier::B | Modifier::AB | Modifier::F | Modifier::X | Modifier::I);
                let mut jump = false;
                if dec_a {
                    let v = self.cells[b_addr as usize].a.value;
                    self.cells[b_addr as usize].a.value = self.sub(v, 1);
                    jump |= self.sub(irb.a.value, 1) != 0;
                }
                if dec_b {
                    let v = self.cells[b_addr as usize].b.value;
                    self.cells[b_addr as usize].b.value = self.sub(v, 1);
                    jump |= self.sub(irb.b.value, 1) != 0;
                }
                self.write(w, b_addr);
                self.warriors[w].queue.push_back(if jump { a_addr } else { next });
            }
            Opcode::Seq | Opcode::Sne => {
                let equal = match modifier {
                    Modifier::A => ira.a.value == irb.a.value,
                    Modifier::B => ira.b.value == irb.b.value,
                    Modifier::AB => ira.a.value == irb.b.value,
                    Modifier::BA => ira.b.value == irb.a.value,
                    Modifier::F => ira.a.value == irb.a.value && ira.b.value == irb.b.value,
                    Modifier::X => ira.a.value == irb.b.value && ira.b.value == irb.a.value,
                    Modifier::I => ira == irb,
                };
                let skip = if ir.opcode == Opcode::Seq { equal } else { !equal };
                let target = if skip { self.add(pc, 2) } else { next };
                self.warriors[w].queue.push_back(target);
            }
            Opcode::Slt => {
                let less = match modifier {
                    Modifier::A => ira.a.value < irb.a.value,
                    Modifier::B => ira.b.value < irb.b.value,
                    Modifier::AB => ira.a.value < irb.b.value,
                    Modifier::BA => ira.b.value < irb.a.value,
                    Modifier::F | Modifier::I => ira.a.value < irb.a.value && ira.b.value < irb.b.value,
                    Modifier::X => ira.a.value < irb.b.value && ira.b.value < irb.a.value,
                };
                let target = if less { self.add(pc, 2) } else { next };
                self.warriors[w].queue.push_back(target);
            }
            Opcode::Spl => {
                let limit = self.cfg.max_processes as usize;
                let state = &mut self.warriors[w];
                state.queue.push_back(next);
                if state.queue.len() < limit {
                    state.queue.push_back(a_addr);
                    state.spawned += 1;
                }
            }
            Opcode::Nop => self.warriors[w].queue.push_back(next),
        }
    }
}
