//! Browser bindings: assemble a program, step a battle frame by frame, and
//! grow a small MAP-Elites archive against a few classic opponents.

use drq_core::archive::{ArchiveSnapshot, GridSpec};
use drq_core::battle::{fitness_from_trace, prepare_battle, BattleConfig};
use drq_core::mars::{Mars, MarsConfig};
use drq_core::mutation::RandomMutator;
use drq_core::optimize::{optimize, OptimizeConfig};
use drq_core::redcode::{emit, parse_with, AsmOptions, Warrior};
use drq_core::render::{glyph, palette};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const CLASSICS: &[(&str, &str)] = &[
    ("imp", include_str!("../../core/warriors/imp.red")),
    ("dwarf", include_str!("../../core/warriors/dwarf.red")),
    ("stone", include_str!("../../core/warriors/stone.red")),
    ("scanner", include_str!("../../core/warriors/scanner.red")),
    ("paper", include_str!("../../core/warriors/paper.red")),
    ("impring", include_str!("../../core/warriors/impring.red")),
    ("vampire", include_str!("../../core/warriors/vampire.red")),
];

/// The browser runs single-threaded, so everything uses the small core.
const MARS: MarsConfig = MarsConfig::DESK;

fn asm() -> AsmOptions {
    AsmOptions::new(MARS.core_size, MARS.max_length as usize)
}

fn source(name: &str) -> Result<&'static str, String> {
    CLASSICS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).ok_or_else(|| format!("unknown program `{name}`"))
}

fn assemble_named(name: &str, text: &str) -> Result<Warrior, String> {
    parse_with(text, &asm().with_default_name(name.to_string())).map_err(|e| format!("line {}: {}", e.line, e.kind))
}

#[derive(Serialize)]
#[serde(untagged)]
enum Assembled {
    Ok { ok: bool, name: String, length: usize, digest: String, canonical: String },
    Err { ok: bool, line: usize, error: String },
}

fn assemble_inner(text: &str) -> Assembled {
    match parse_with(text, &asm().with_default_name("untitled".to_string())) {
        Ok(w) => Assembled::Ok { ok: true, length: w.len(), digest: w.digest_hex(), canonical: emit(&w), name: w.name },
        Err(e) => Assembled::Err { ok: false, line: e.line, error: e.kind.to_string() },
    }
}

/// Names of the bundled opponents, as a JSON array.
#[wasm_bindgen]
pub fn classics() -> String {
    serde_json::to_string(&CLASSICS.iter().map(|(n, _)| *n).collect::<Vec<_>>()).unwrap()
}

#[wasm_bindgen(js_name = classicSource)]
pub fn classic_source(name: &str) -> Result<String, JsError> {
    source(name).map(str::to_string).map_err(|e| JsError::new(&e))
}

/// Assembles `text` and returns `{ok, name, length, digest, canonical}` or
/// `{ok: false, line, error}` as JSON.
#[wasm_bindgen]
pub fn assemble(text: &str) -> String {
    serde_json::to_string(&assemble_inner(text)).unwrap()
}

/// A battle between the user's program and one opponent, advanced by the page.
#[wasm_bindgen]
pub struct Battle {
    mars: Mars,
    names: Vec<String>,
    load_order: Vec<usize>,
}

impl Battle {
    fn create(text: &str, opponent: &str, seed: u32) -> Result<Battle, String> {
        let warriors = vec![assemble_named("yours", text)?, assemble_named(opponent, source(opponent)?)?];
        let bc = BattleConfig::new(MARS, 1, u64::from(seed));
        let (mars, load_order, _) = prepare_battle(&warriors, &bc, 0).map_err(|e| e.to_string())?;
        Ok(Battle { mars, names: warriors.into_iter().map(|w| w.name).collect(), load_order })
    }

    fn warrior_slot(&self, warrior: usize) -> usize {
        self.load_order.iter().position(|&i| i == warrior).expect("every warrior is loaded")
    }
}

#[derive(Serialize)]
struct Status {
    cycle: u32,
    finished: bool,
    warriors: Vec<WarriorStatus>,
}

#[derive(Serialize)]
struct WarriorStatus {
    name: String,
    color: String,
    alive: bool,
    processes: usize,
    spawned_threads: u64,
    memory_coverage: u32,
    fitness: Option<f64>,
}

#[wasm_bindgen]
impl Battle {
    #[wasm_bindgen(constructor)]
    pub fn new(text: &str, opponent: &str, seed: u32) -> Result<Battle, JsError> {
        Battle::create(text, opponent, seed).map_err(|e| JsError::new(&e))
    }

    /// Runs up to `cycles` timesteps; true once the battle is over.
    pub fn advance(&mut self, cycles: u32) -> bool {
        for _ in 0..cycles {
            if self.is_finished() {
                break;
            }
            self.mars.step();
        }
        self.is_finished()
    }

    #[wasm_bindgen(js_name = isFinished)]
    pub fn is_finished(&self) -> bool {
        self.mars.is_finished(MARS.max_cycles)
    }

    #[wasm_bindgen(getter, js_name = coreSize)]
    pub fn core_size(&self) -> u32 {
        MARS.core_size
    }

    /// RGBA pixels, one per cell, colored by the last writer.
    pub fn pixels(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.mars.cells().len() * 4);
        for owner in self.mars.last_writers() {
            out.extend_from_slice(&palette(*owner));
            out.push(255);
        }
        out
    }

    /// Opcode glyphs of the whole core, for hover text.
    pub fn glyphs(&self) -> String {
        self.mars.cells().iter().map(|c| glyph(c.opcode)).collect()
    }

    /// Cycle, per-warrior state and, when finished, the fitness split.
    pub fn status(&self) -> String {
        let trace = self.mars.trace();
        let finished = self.is_finished();
        let fitness = finished.then(|| fitness_from_trace(&trace, self.names.len(), MARS.max_cycles));
        let warriors = (0..self.names.len())
            .map(|i| {
                let slot = self.warrior_slot(i);
                let [r, g, b] = palette(Some(slot as u8));
                WarriorStatus {
                    name: self.names[i].clone(),
                    color: format!("#{r:02x}{g:02x}{b:02x}"),
                    alive: self.mars.is_alive(slot),
                    processes: self.mars.queue(slot).len(),
                    spawned_threads: self.mars.spawned_threads(slot),
                    memory_coverage: self.mars.memory_coverage(slot),
                    fitness: fitness.as_ref().map(|f| f[slot]),
                }
            })
            .collect();
        serde_json::to_string(&Status { cycle: self.mars.cycle(), finished, warriors }).unwrap()
    }
}

#[derive(Serialize)]
struct Evolved {
    grid: Vec<Vec<Option<f64>>>,
    occupied: usize,
    evaluations: u64,
    invalid: u64,
    best_fitness: Option<f64>,
    best_program: Option<String>,
}

fn evolve_inner(opponents: &[String], iterations: u32, seed: u32) -> Result<Evolved, String> {
    if opponents.is_empty() {
        return Err("pick at least one opponent".into());
    }
    let opponents: Vec<Warrior> = opponents.iter().map(|n| assemble_named(n, source(n)?)).collect::<Result<_, _>>()?;
    let cfg = OptimizeConfig {
        iterations: u64::from(iterations),
        grid: GridSpec::for_mars(&MARS, 8),
        battle: BattleConfig::new(MARS, 2, u64::from(seed)),
        batch_size: 8,
        rng_seed: u64::from(seed),
        round: 1,
    };
    let mutator = RandomMutator::new(MARS.core_size, MARS.max_length as usize);
    let result = optimize(&opponents, &[], &mutator, &cfg).map_err(|e| e.to_string())?;
    let snapshot: ArchiveSnapshot = result.archive.snapshot();
    let best = result.archive.best();
    Ok(Evolved {
        grid: ArchiveSnapshot::mean_grid(std::slice::from_ref(&snapshot)).expect("one snapshot"),
        occupied: result.archive.len(),
        evaluations: result.evaluations,
        invalid: result.invalid,
        best_fitness: best.map(|e| e.fitness),
        best_program: best.map(|e| emit(&e.warrior)),
    })
}

/// Random-mutation MAP-Elites against the named opponents (JSON array).
/// Returns the fitness grid, rows by thread bin, and the best program.
#[wasm_bindgen]
pub fn evolve(opponents_json: &str, iterations: u32, seed: u32) -> Result<String, JsError> {
    let names: Vec<String> = serde_json::from_str(opponents_json).map_err(|e| JsError::new(&e.to_string()))?;
    let out = evolve_inner(&names, iterations.min(5000), seed).map_err(|e| JsError::new(&e))?;
    Ok(serde_json::to_string(&out).unwrap())
}
