//! Straight transcription of the ICWS'94 draft emulation procedure, used as
//! a differential oracle. Deliberately naive: i64 arithmetic, string
//! opcodes, no shared code with the engine beyond the assembler output.

#![allow(dead_code)]

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefField {
    pub mode: char,
    pub value: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefInsn {
    pub opcode: &'static str,
    pub modifier: &'static str,
    pub a: RefField,
    pub b: RefField,
}

impl RefInsn {
    pub fn dat0() -> Self {
        RefInsn {
            opcode: "DAT",
            modifier: "F",
            a: RefField { mode: '#', value: 0 },
            b: RefField { mode: '#', value: 0 },
        }
    }
}

pub struct RefMars {
    pub m: i64,
    pub max_processes: usize,
    pub core: Vec<RefInsn>,
    pub queues: Vec<VecDeque<i64>>,
}

impl RefMars {
    pub fn new(m: i64, max_processes: usize) -> Self {
        RefMars { m, max_processes, core: vec![RefInsn::dat0(); m as usize], queues: Vec::new() }
    }

    /// Copies `code` to `base` and starts one process at `base + start`.
    pub fn load(&mut self, code: &[RefInsn], base: i64, start: i64) {
        for (i, insn) in code.iter().enumerate() {
            let mut insn = *insn;
            insn.a.value = insn.a.value.rem_euclid(self.m);
            insn.b.value = insn.b.value.rem_euclid(self.m);
            self.core[((base + i as i64) % self.m) as usize] = insn;
        }
        let mut q = VecDeque::new();
        q.push_back((base + start) % self.m);
        self.queues.push(q);
    }

    fn at(&mut self, addr: i64) -> &mut RefInsn {
        let m = self.m;
        &mut self.core[addr.rem_euclid(m) as usize]
    }

    /// One timestep: every warrior with processes executes once, in load order.
    pub fn step(&mut self) {
        for w in 0..self.queues.len() {
            if let Some(pc) = self.queues[w].pop_front() {
                self.emulate(w, pc);
            }
        }
    }

    fn queue(&mut self, w: usize, addr: i64) {
        let m = self.m;
        self.queues[w].push_back(addr.rem_euclid(m));
    }

    fn emulate(&mut self, w: usize, pc: i64) {
        let ir = *self.at(pc);
        let (rpa, ira) = self.operand(pc, ir.a);
        let (rpb, irb) = self.operand(pc, ir.b);
        self.execute(w, pc, ir, rpa, ira, rpb, irb);
    }

    /// Resolves one operand: returns its pointer (relative to pc) and the
    /// instruction register read through it. Pre-decrement happens before
    /// the read, post-increment after.
    fn operand(&mut self, pc: i64, f: RefField) -> (i64, RefInsn) {
        let m = self.m;
        if f.mode == '#' {
            return (0, *self.at(pc));
        }
        if f.mode == '$' {
            return (f.value, *self.at(pc + f.value));
        }
        let cell = pc + f.value;
        match f.mode {
            '{' => {
                let c = self.at(cell);
                c.a.value = (c.a.value + m - 1) % m;
            }
            '<' => {
                let c = self.at(cell);
                c.b.value = (c.b.value + m - 1) % m;
            }
            _ => {}
        }
        let secondary = match f.mode {
            '*' | '{' | '}' => self.at(cell).a.value,
            _ => self.at(cell).b.value,
        };
        let p = (f.value + secondary) % m;
        let reg = *self.at(pc + p);
        match f.mode {
            '}' => {
                let c = self.at(cell);
                c.a.value = (c.a.value + 1) % m;
            }
            '>' => {
                let c = self.at(cell);
                c.b.value = (c.b.value + 1) % m;
            }
            _ => {}
        }
        (p, reg)
    }

    #[allow(clippy::too_many_arguments)]
    fn execute(&mut self, w: usize, pc: i64, ir: RefInsn, rpa: i64, ira: RefInsn, wpb: i64, irb: RefInsn) {
        let m = self.m;
        let next = pc + 1;
        let dst = pc + wpb;
        match ir.opcode {
            "DAT" => {}
            "MOV" => {
                let c = self.at(dst);
                match ir.modifier {
                    "A" => c.a.value = ira.a.value,
                    "B" => c.b.value = ira.b.value,
                    "AB" => c.b.value = ira.a.value,
                    "BA" => c.a.value = ira.b.value,
                    "F" => {
                        c.a.value = ira.a.value;
                        c.b.value = ira.b.value;
                    }
                    "X" => {
                        c.b.value = ira.a.value;
                        c.a.value = ira.b.value;
                    }
                    "I" => *c = ira,
                    _ => unreachable!(),
                }
                self.queue(w, next);
            }
            "ADD" | "SUB" | "MUL" | "DIV" | "MOD" => {
                // Pairs of (source, destination-current, which destination field).
                let pairs: Vec<(i64, i64, char)> = match ir.modifier {
                    "A" => vec![(ira.a.value, irb.a.value, 'a')],
                    "B" => vec![(ira.b.value, irb.b.value, 'b')],
                    "AB" => vec![(ira.a.value, irb.b.value, 'b')],
                    "BA" => vec![(ira.b.value, irb.a.value, 'a')],
                    "F" | "I" => vec![(ira.a.value, irb.a.value, 'a'), (ira.b.value, irb.b.value, 'b')],
                    "X" => vec![(ira.b.value, irb.a.value, 'a'), (ira.a.value, irb.b.value, 'b')],
                    _ => unreachable!(),
                };
                let mut divide_by_zero = false;
                for (src, cur, field) in pairs {
                    let value = match ir.opcode {
                        "ADD" => Some((cur + src) % m),
                        "SUB" => Some((cur + m - src) % m),
                        "MUL" => Some((cur * src) % m),
                        "DIV" => {
                            if src == 0 {
                                None
                            } else {
                                Some(cur / src)
                            }
                        }
                        "MOD" => {
                            if src == 0 {
                                None
                            } else {
                                Some(cur % src)
                            }
                        }
                        _ => unreachable!(),
                    };
                    match value {
                        Some(v) => {
                            let c = self.at(dst);
                            if field == 'a' {
                                c.a.value = v;
                            } else {
                                c.b.value = v;
                            }
                        }
                        None => divide_by_zero = true,
                    }
                }
                if !divide_by_zero {
                    self.queue(w, next);
                }
            }
            "JMP" => self.queue(w, pc + rpa),
            "JMZ" | "JMN" => {
                let zero = match ir.modifier {
                    "A" | "BA" => irb.a.value == 0,
                    "B" | "AB" => irb.b.value == 0,
                    _ => irb.a.value == 0 && irb.b.value == 0,
                };
                let take = if ir.opcode == "JMZ" { zero } else { !zero };
                self.queue(w, if take { pc + rpa } else { next });
            }
            "DJN" => {
                let mut irb = irb;
                {
                    let c = self.at(dst);
                    match ir.modifier {
                        "A" | "BA" => c.a.value = (c.a.value + m - 1) % m,
                        "B" | "AB" => c.b.value = (c.b.value + m - 1) % m,
                        _ => {
                            c.a.value = (c.a.value + m - 1) % m;
                            c.b.value = (c.b.value + m - 1) % m;
                        }
                    }
                }
                irb.a.value = (irb.a.value + m - 1) % m;
                irb.b.value = (irb.b.value + m - 1) % m;
                let nonzero = match ir.modifier {
                    "A" | "BA" => irb.a.value != 0,
                    "B" | "AB" => irb.b.value != 0,
                    _ => irb.a.value != 0 || irb.b.value != 0,
                };
                self.queue(w, if nonzero { pc + rpa } else { next });
            }
            "SEQ" | "SNE" => {
                let equal = match ir.modifier {
                    "A" => ira.a.value == irb.a.value,
                    "B" => ira.b.value == irb.b.value,
                    "AB" => ira.a.value == irb.b.value,
                    "BA" => ira.b.value == irb.a.value,
                    "F" => ira.a.value == irb.a.value && ira.b.value == irb.b.value,
                    "X" => ira.a.value == irb.b.value && ira.b.value == irb.a.value,
                    "I" => ira == irb,
                    _ => unreachable!(),
                };
                let skip = if ir.opcode == "SEQ" { equal } else { !equal };
                self.queue(w, if skip { pc + 2 } else { next });
            }
            "SLT" => {
                let less = match ir.modifier {
                    "A" => ira.a.value < irb.a.value,
                    "B" => ira.b.value < irb.b.value,
                    "AB" => ira.a.value < irb.b.value,
                    "BA" => ira.b.value < irb.a.value,
                    "F" | "I" => ira.a.value < irb.a.value && ira.b.value < irb.b.value,
                    "X" => ira.a.value < irb.b.value && ira.b.value < irb.a.value,
                    _ => unreachable!(),
                };
                self.queue(w, if less { pc + 2 } else { next });
            }
            "SPL" => {
                self.queue(w, next);
                if self.queues[w].len() < self.max_processes {
                    self.queue(w, pc + rpa);
                }
            }
            "NOP" => self.queue(w, next),
            other => panic!("unknown opcode {other}"),
        }
    }
}
