use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{MutationError, MutationRequest, Mutator, Proposal, Provenance, RequestKind};
use crate::redcode::{emit, parse, AddressingMode, Field, Instruction, Modifier, Opcode, ParseError, Warrior};

fn random_number<R: Rng + ?Sized>(rng: &mut R, core_size: u32) -> u32 {
    if rng.gen_bool(0.5) {
        rng.gen_range(0..core_size)
    } else {
        rng.gen_range(-16i64..=16).rem_euclid(core_size as i64) as u32
    }
}

fn random_field<R: Rng + ?Sized>(rng: &mut R, core_size: u32) -> Field {
    Field::new(*AddressingMode::ALL.choose(rng).unwrap(), random_number(rng, core_size))
}

pub fn random_instruction<R: Rng + ?Sized>(rng: &mut R, core_size: u32) -> Instruction {
    Instruction::new(
        *Opcode::ALL.choose(rng).unwrap(),
        *Modifier::ALL.choose(rng).unwrap(),
        random_field(rng, core_size),
        random_field(rng, core_size),
    )
}

/// A fresh program of uniformly random length in `1..=max_length`.
pub fn random_generate<R: Rng + ?Sized>(rng: &mut R, core_size: u32, max_length: usize) -> String {
    assert!(max_length >= 1 && core_size >= 1);
    let len = rng.gen_range(1..=max_length);
    let instructions = (0..len).map(|_| random_instruction(rng, core_size)).collect();
    let warrior = Warrior {
        name: format!("rnd-{:08x}", rng.gen::<u32>()),
        instructions,
        start: rng.gen_range(0..len),
        source: String::new(),
    };
    emit(&warrior)
}

#[derive(Clone, Copy, Debug)]
enum Edit {
    Opcode,
    Modifier,
    AMode,
    BMode,
    PerturbA,
    PerturbB,
    ResampleA,
    ResampleB,
    Insert,
    Delete,
}

const EDITS: [Edit; 10] = [
    Edit::Opcode,
    Edit::Modifier,
    Edit::AMode,
    Edit::BMode,
    Edit::PerturbA,
    Edit::PerturbB,
    Edit::ResampleA,
    Edit::ResampleB,
    Edit::Insert,
    Edit::Delete,
];

fn perturb<R: Rng + ?Sized>(rng: &mut R, value: u32, core_size: u32) -> u32 {
    if core_size == 1 {
        return 0;
    }
    let max_exp = 31 - (core_size - 1).leading_zeros();
    let delta = 1i64 << rng.gen_range(0..=max_exp);
    let delta = if rng.gen_bool(0.5) { delta } else { -delta };
    (value as i64 + delta).rem_euclid(core_size as i64) as u32
}

fn apply_edit<R: Rng + ?Sized>(w: &mut Warrior, edit: Edit, rng: &mut R, core_size: u32, max_length: usize) {
    let len = w.instructions.len();
    let edit = match edit {
        Edit::Insert if len >= max_length => Edit::Opcode,
        Edit::Delete if len <= 1 => Edit::Opcode,
        e => e,
    };
    let i = rng.gen_range(0..len);
    match edit {
        Edit::Opcode => w.instructions[i].opcode = *Opcode::ALL.choose(rng).unwrap(),
        Edit::Modifier => w.instructions[i].modifier = *Modifier::ALL.choose(rng).unwrap(),
        Edit::AMode => w.instructions[i].a.mode = *AddressingMode::ALL.choose(rng).unwrap(),
        Edit::BMode => w.instructions[i].b.mode = *AddressingMode::ALL.choose(rng).unwrap(),
        Edit::PerturbA => {
            let ins = &mut w.instructions[i];
            ins.a.value = perturb(rng, ins.a.value, core_size);
        }
        Edit::PerturbB => {
            let ins = &mut w.instructions[i];
            ins.b.value = perturb(rng, ins.b.value, core_size);
        }
        Edit::ResampleA => w.instructions[i].a.value = random_number(rng, core_size),
        Edit::ResampleB => w.instructions[i].b.value = random_number(rng, core_size),
        Edit::Insert => {
            let pos = rng.gen_range(0..=len);
            w.instructions.insert(pos, random_instruction(rng, core_size));
            if pos <= w.start {
                w.start += 1;
            }
        }
        Edit::Delete => {
            w.instructions.remove(i);
            if i < w.start {
                w.start -= 1;
            }
            w.start = w.start.min(w.instructions.len() - 1);
        }
    }
}

/// One to three local edits. The result always differs from the parent.
pub fn random_mutate<R: Rng + ?Sized>(
    parent: &str,
    rng: &mut R,
    core_size: u32,
    max_length: usize,
) -> Result<String, ParseError> {
    let original = parse(parent, core_size, max_length)?;
    loop {
        let mut child = original.clone();
        for _ in 0..rng.gen_range(1..=3) {
            let edit = *EDITS.choose(rng).unwrap();
            apply_edit(&mut child, edit, rng, core_size, max_length);
        }
        if child.instructions != original.instructions || child.start != original.start {
            return Ok(emit(&child));
        }
    }
}

/// Model-free operator: generation and mutation draw on the same primitives.
#[derive(Clone, Debug)]
pub struct RandomMutator {
    pub core_size: u32,
    pub max_length: usize,
}

impl RandomMutator {
    pub fn new(core_size: u32, max_length: usize) -> Self {
        RandomMutator { core_size, max_length }
    }

    pub(crate) fn fresh_or_mutated(&self, req: &MutationRequest, rng: &mut ChaCha8Rng) -> String {
        match (&req.kind, &req.parent) {
            (RequestKind::MutateExisting, Some(parent)) => random_mutate(parent, rng, self.core_size, self.max_length)
                .unwrap_or_else(|_| random_generate(rng, self.core_size, self.max_length)),
            _ => random_generate(rng, self.core_size, self.max_length),
        }
    }
}

impl Mutator for RandomMutator {
    fn name(&self) -> &str {
        "random"
    }

    fn propose(&self, req: &MutationRequest, rng: &mut ChaCha8Rng) -> Result<Proposal, MutationError> {
        if req.kind == RequestKind::MutateExisting && req.parent.is_none() {
            return Err(MutationError::MissingParent);
        }
        Ok(Proposal { source: self.fresh_or_mutated(req, rng), provenance: Provenance::Random })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_programs_assemble_within_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let src = random_generate(&mut rng, 800, 20);
            let w = parse(&src, 800, 20).unwrap();
            assert!((1..=20).contains(&w.len()));
            assert!(w.start < w.len());
        }
    }

    #[test]
    fn mutation_changes_program_and_stays_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let parent = "MOV 0, 1";
        for _ in 0..500 {
            let child = random_mutate(parent, &mut rng, 800, 3).unwrap();
            let cw = parse(&child, 800, 3).unwrap();
            assert_ne!(cw, parse(parent, 800, 3).unwrap());
            assert!(cw.start < cw.len());
        }
    }

    #[test]
    fn mutation_at_length_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let parent = "ORG 1\nDAT 0, 0\nMOV 0, 1\nEND";
        for _ in 0..300 {
            let child = random_mutate(parent, &mut rng, 800, 2).unwrap();
            assert!(parse(&child, 800, 2).unwrap().len() <= 2);
        }
    }

    #[test]
    fn perturbation_is_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for core in [2u32, 3, 800, 8000] {
            for v in 0..core.min(50) {
                assert_ne!(perturb(&mut rng, v, core), v);
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let m = RandomMutator::new(8000, 100);
        let req = MutationRequest::generate();
        let a = m.propose(&req, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = m.propose(&req, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
