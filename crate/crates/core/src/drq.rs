//! Round-by-round self-play: each round optimizes a new champion against
//! the most recent earlier champions.
//!
//! Run directory layout:
//!
//! ```text
//! lineage.index             config plus one record per completed round
//! round_<t>/champion.red
//! round_<t>/archive.snapshot
//! round_<t>/events.log
//! round_<t>/timing.log      wall-clock only; excluded from reproducibility
//! ```
//!
//! `lineage.index` is rewritten atomically after a round's files are in
//! place, so it is the commit point for resuming.

use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::{Archive, ArchiveSnapshot, GridSpec, SnapshotRecord};
use crate::battle::{BattleConfig, BattleError};
use crate::format::{self, FormatError};
use crate::mars::MarsConfig;
use crate::mutation::{MutationRequest, Mutator};
use crate::optimize::{optimize, score_against, Event, OptimizeConfig, OptimizeError};
use crate::par;
use crate::redcode::{emit, parse_with, AsmOptions, ParseError, Warrior};
use crate::seeds::{derive_rng, derive_seed};

/// How many earlier champions form a round's opponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum History {
    All,
    Last(u32),
}

impl History {
    /// Rounds whose champions oppose round `t` (`t >= 1`).
    pub fn environment_rounds(self, t: u32) -> std::ops::Range<u32> {
        let k = match self {
            History::All => t,
            History::Last(k) => k.min(t),
        };
        t - k..t
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            History::All => f.write_str("all"),
            History::Last(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for History {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(History::All);
        }
        match s.parse::<u32>() {
            Ok(k) if k >= 1 => Ok(History::Last(k)),
            _ => Err(format!("history must be `all` or a positive integer, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrqConfig {
    pub rounds: u32,
    pub history: History,
    pub iterations_per_round: u64,
    pub init_with_champions: bool,
    pub grid_bins: u32,
    pub mars: MarsConfig,
    pub seeds_per_battle: u32,
    pub batch_size: usize,
    /// Top archive elites re-scored on fresh seeds when picking a champion.
    pub selection_candidates: usize,
    pub rng_seed: u64,
}

impl DrqConfig {
    pub fn desk(rounds: u32, iterations_per_round: u64, rng_seed: u64) -> Self {
        DrqConfig {
            rounds,
            history: History::All,
            iterations_per_round,
            init_with_champions: false,
            grid_bins: crate::archive::DEFAULT_BINS,
            mars: MarsConfig::DESK,
            seeds_per_battle: 20,
            batch_size: 16,
            selection_candidates: 8,
            rng_seed,
        }
    }

    pub fn asm_options(&self) -> AsmOptions {
        AsmOptions::new(self.mars.core_size, self.mars.max_length as usize)
    }

    fn round_seed(&self, t: u32) -> u64 {
        derive_seed(self.rng_seed, "round", t as u64)
    }

    /// The configuration used to score round `t`'s champion during selection.
    pub fn selection_battle(&self, t: u32) -> BattleConfig {
        BattleConfig::new(self.mars, self.seeds_per_battle, derive_seed(self.round_seed(t), "select", 0))
    }

    fn optimize_config(&self, t: u32) -> OptimizeConfig {
        let round_seed = self.round_seed(t);
        OptimizeConfig {
            iterations: self.iterations_per_round,
            grid: GridSpec::for_mars(&self.mars, self.grid_bins),
            battle: BattleConfig::new(self.mars, self.seeds_per_battle, derive_seed(round_seed, "battle", 0)),
            batch_size: self.batch_size,
            rng_seed: derive_seed(round_seed, "optimize", 0),
            round: t,
        }
    }

    /// Equal apart from the round count, which may grow on resume.
    fn resumable_from(&self, other: &DrqConfig) -> bool {
        DrqConfig { rounds: 0, ..self.clone() } == DrqConfig { rounds: 0, ..other.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub name: String,
    pub digest: String,
    /// Rounds whose champions were the opponents.
    pub environment: Vec<u32>,
    /// Fitness measured on the selection seeds; `None` for the initial program.
    pub fitness: Option<f64>,
    pub archive_fitness: Option<f64>,
    pub occupancy: usize,
    #[serde(default)]
    pub archive_digest: String,
    /// Best archive fitness after each iteration.
    #[serde(default)]
    pub trajectory: Vec<Option<f64>>,
    pub evaluations: u64,
    pub invalid: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum IndexLine {
    Config { config: DrqConfig, mutator: String },
    Round(RoundRecord),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SnapshotLine {
    Grid(GridSpec),
    Elite(SnapshotRecord),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Error)]
pub enum DrqError {
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Battle(#[from] BattleError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("round {0} produced an empty archive")]
    EmptyArchive(u32),
    #[error("existing run was created with a different configuration")]
    ConfigMismatch,
    #[error("existing run starts from a different initial program")]
    InitialMismatch,
    #[error("stored champion for round {0} does not match the lineage index")]
    CorruptChampion(u32),
    #[error("lineage index has no configuration line")]
    MissingConfig,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DrqError + '_ {
    move |source| DrqError::Io { path: path.to_path_buf(), source }
}

pub struct RoundOutput {
    pub champion: Warrior,
    pub record: RoundRecord,
    pub archive: Archive,
    pub events: Vec<Event>,
    pub best_per_iteration: Vec<Option<f64>>,
}

/// Ranks by fitness, then prefers shorter programs, then the smaller
/// canonical source.
fn better(a: (&Warrior, f64), b: (&Warrior, f64)) -> bool {
    if a.1 != b.1 {
        return a.1 > b.1;
    }
    if a.0.len() != b.0.len() {
        return a.0.len() < b.0.len();
    }
    emit(a.0) < emit(b.0)
}

/// Runs round `t >= 1` given champions `0..t`.
pub fn run_round(
    t: u32,
    champions: &[Warrior],
    cfg: &DrqConfig,
    mutator: &dyn Mutator,
) -> Result<RoundOutput, DrqError> {
    assert!(t >= 1 && champions.len() >= t as usize);
    let env_rounds = cfg.history.environment_rounds(t);
    let opponents = &champions[env_rounds.start as usize..env_rounds.end as usize];
    let initial = if cfg.init_with_champions { &champions[..t as usize] } else { &[][..] };
    let result = optimize(opponents, initial, mutator, &cfg.optimize_config(t))?;

    let mut ranked: Vec<_> = result.archive.iter().map(|(_, e)| e).collect();
    ranked.sort_by(|a, b| {
        if better((&a.warrior, a.fitness), (&b.warrior, b.fitness)) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    ranked.truncate(cfg.selection_candidates.max(1));
    if ranked.is_empty() {
        return Err(DrqError::EmptyArchive(t));
    }
    let sel = cfg.selection_battle(t);
    let rescored = par::map_slice(&ranked, |e| score_against(&e.warrior, opponents, &sel).map(|(f, _)| f));
    let mut best: Option<(usize, f64)> = None;
    for (i, f) in rescored.into_iter().enumerate() {
        let f = f?;
        if best.is_none_or(|(j, g)| better((&ranked[i].warrior, f), (&ranked[j].warrior, g))) {
            best = Some((i, f));
        }
    }
    let (idx, fitness) = best.expect("non-empty");
    let elite = ranked[idx];
    let champion = elite.warrior.clone();
    let record = RoundRecord {
        round: t,
        name: champion.name.clone(),
        digest: champion.digest_hex(),
        environment: env_rounds.collect(),
        fitness: Some(fitness),
        archive_fitness: Some(elite.fitness),
        occupancy: result.archive.len(),
        archive_digest: result.archive.snapshot().digest_hex(),
        trajectory: result.best_per_iteration.clone(),
        evaluations: result.evaluations,
        invalid: result.invalid,
    };
    Ok(RoundOutput {
        champion,
        record,
        archive: result.archive,
        events: result.events,
        best_per_iteration: result.best_per_iteration,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lineage {
    pub config: DrqConfig,
    pub champions: Vec<Warrior>,
    pub rounds: Vec<RoundRecord>,
}

fn initial_record(w0: &Warrior) -> RoundRecord {
    RoundRecord {
        round: 0,
        name: w0.name.clone(),
        digest: w0.digest_hex(),
        environment: Vec::new(),
        fitness: None,
        archive_fitness: None,
        occupancy: 0,
        archive_digest: String::new(),
        trajectory: Vec::new(),
        evaluations: 0,
        invalid: 0,
    }
}

/// A run directory on disk.
#[derive(Clone, Debug)]
pub struct RunStore {
    root: PathBuf,
}

pub const LINEAGE_FORMAT: &str = "drq.lineage";
pub const ARCHIVE_FORMAT: &str = "drq.archive";
pub const EVENTS_FORMAT: &str = "drq.events";
pub const TIMING_FORMAT: &str = "drq.timing";

impl RunStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn index_path(&self) -> PathBuf {
        self.root.join("lineage.index")
    }

    pub fn round_dir(&self, t: u32) -> PathBuf {
        self.root.join(format!("round_{t}"))
    }

    pub fn exists(&self) -> bool {
        self.index_path().is_file()
    }

    fn write_index(&self, lineage: &Lineage, mutator: &str) -> Result<(), DrqError> {
        let mut lines = vec![IndexLine::Config { config: lineage.config.clone(), mutator: mutator.into() }];
        lines.extend(lineage.rounds.iter().cloned().map(IndexLine::Round));
        let mut buf = Vec::new();
        format::write_jsonl(&mut buf, LINEAGE_FORMAT, &lines)?;
        let path = self.index_path();
        format::write_atomic(&path, &buf).map_err(io_err(&path))
    }

    fn write_round(
        &self,
        t: u32,
        champion: &Warrior,
        archive: Option<&ArchiveSnapshot>,
        events: &[Event],
        timing: &[TimingRecord],
    ) -> Result<(), DrqError> {
        let dir = self.round_dir(t);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let write = |name: &str, bytes: Vec<u8>| {
            let path = dir.join(name);
            format::write_atomic(&path, &bytes).map_err(io_err(&path))
        };
        write("champion.red", (emit(champion) + "\n").into_bytes())?;
        if let Some(snapshot) = archive {
            let mut lines = vec![SnapshotLine::Grid(snapshot.grid)];
            lines.extend(snapshot.records.iter().cloned().map(SnapshotLine::Elite));
            let mut buf = Vec::new();
            format::write_jsonl(&mut buf, ARCHIVE_FORMAT, &lines)?;
            write("archive.snapshot", buf)?;
            let mut buf = Vec::new();
            format::write_jsonl(&mut buf, EVENTS_FORMAT, events)?;
            write("events.log", buf)?;
            let mut buf = Vec::new();
            format::write_jsonl(&mut buf, TIMING_FORMAT, timing)?;
            write("timing.log", buf)?;
        }
        Ok(())
    }

    pub fn load_lineage(&self) -> Result<Lineage, DrqError> {
        let path = self.index_path();
        let file = fs::File::open(&path).map_err(io_err(&path))?;
        let lines: Vec<IndexLine> = format::read_jsonl(BufReader::new(file), LINEAGE_FORMAT)?;
        let mut config = None;
        let mut rounds = Vec::new();
        for line in lines {
            match line {
                IndexLine::Config { config: c, .. } => config = Some(c),
                IndexLine::Round(r) => rounds.push(r),
            }
        }
        let config = config.ok_or(DrqError::MissingConfig)?;
        let asm = config.asm_options();
        let mut champions = Vec::with_capacity(rounds.len());
        for r in &rounds {
            let path = self.round_dir(r.round).join("champion.red");
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let w = parse_with(&text, &asm).map_err(|source| DrqError::Parse { path: path.clone(), source })?;
            if w.digest_hex() != r.digest {
                return Err(DrqError::CorruptChampion(r.round));
            }
            champions.push(w);
        }
        Ok(Lineage { config, champions, rounds })
    }

    pub fn load_archive(&self, t: u32) -> Result<ArchiveSnapshot, DrqError> {
        load_archive_file(&self.round_dir(t).join("archive.snapshot"))
    }

    pub fn load_events(&self, t: u32) -> Result<Vec<Event>, DrqError> {
        let path = self.round_dir(t).join("events.log");
        let file = fs::File::open(&path).map_err(io_err(&path))?;
        Ok(format::read_jsonl(BufReader::new(file), EVENTS_FORMAT)?)
    }
}

pub fn load_archive_file(path: &Path) -> Result<ArchiveSnapshot, DrqError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let lines: Vec<SnapshotLine> = format::read_jsonl(BufReader::new(file), ARCHIVE_FORMAT)?;
    let mut grid = None;
    let mut records = Vec::new();
    for line in lines {
        match line {
            SnapshotLine::Grid(g) => grid = Some(g),
            SnapshotLine::Elite(r) => records.push(r),
        }
    }
    let grid = grid.ok_or_else(|| FormatError::Json {
        line: 2,
        source: serde::de::Error::custom("archive snapshot has no grid line"),
    })?;
    Ok(ArchiveSnapshot { grid, records })
}

#[cfg(not(target_arch = "wasm32"))]
struct Stopwatch(std::time::Instant);

#[cfg(not(target_arch = "wasm32"))]
impl Stopwatch {
    fn start() -> Self {
        Stopwatch(std::time::Instant::now())
    }
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(target_arch = "wasm32")]
struct Stopwatch;

#[cfg(target_arch = "wasm32")]
impl Stopwatch {
    fn start() -> Self {
        Stopwatch
    }
    fn seconds(&self) -> f64 {
        0.0
    }
}

/// Runs rounds `1..=cfg.rounds` from `w0`. With a store, completed rounds
/// are persisted and an existing run with a compatible configuration is
/// resumed where it stopped.
pub fn run(
    w0: &Warrior,
    cfg: &DrqConfig,
    mutator: &dyn Mutator,
    store: Option<&RunStore>,
    mut on_round: impl FnMut(&RoundRecord),
) -> Result<Lineage, DrqError> {
    let mut lineage = match store {
        Some(s) if s.exists() => {
            let existing = s.load_lineage()?;
            if !existing.config.resumable_from(cfg) {
                return Err(DrqError::ConfigMismatch);
            }
            if existing.champions.first().map(Warrior::digest_hex) != Some(w0.digest_hex()) {
                return Err(DrqError::InitialMismatch);
            }
            Lineage { config: cfg.clone(), ..existing }
        }
        _ => {
            let lineage =
                Lineage { config: cfg.clone(), champions: vec![w0.clone()], rounds: vec![initial_record(w0)] };
            if let Some(s) = store {
                fs::create_dir_all(s.root()).map_err(io_err(s.root()))?;
                s.write_round(0, w0, None, &[], &[])?;
                s.write_index(&lineage, mutator.name())?;
            }
            lineage
        }
    };

    for t in lineage.rounds.len() as u32..=cfg.rounds {
        let clock = Stopwatch::start();
        let out = run_round(t, &lineage.champions, cfg, mutator)?;
        let elapsed = clock.seconds();
        lineage.champions.push(out.champion.clone());
        lineage.rounds.push(out.record.clone());
        if let Some(s) = store {
            let timing = [TimingRecord { phase: "round".into(), seconds: elapsed }];
            s.write_round(t, &out.champion, Some(&out.archive.snapshot()), &out.events, &timing)?;
            s.write_index(&lineage, mutator.name())?;
        }
        on_round(&out.record);
    }
    lineage.rounds.truncate(cfg.rounds as usize + 1);
    lineage.champions.truncate(cfg.rounds as usize + 1);
    Ok(lineage)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestOfN {
    /// Highest-scoring valid sample and its fitness.
    pub best: Option<(Warrior, f64)>,
    /// Per-sample fitness; `None` where the sample did not assemble.
    pub fitness: Vec<Option<f64>>,
}

/// Draws `n` independent fresh programs and keeps the best against
/// `opponents`. `n = 1` is the zero-shot baseline.
pub fn best_of_n(
    n: usize,
    mutator: &dyn Mutator,
    opponents: &[Warrior],
    bc: &BattleConfig,
    rng_seed: u64,
) -> Result<BestOfN, DrqError> {
    let asm = AsmOptions::new(bc.mars.core_size, bc.mars.max_length as usize);
    let samples = par::map_range(n, |i| -> Result<Option<(Warrior, f64)>, DrqError> {
        let mut rng = derive_rng(rng_seed, "sample", i as u64);
        let proposal = mutator.propose(&MutationRequest::generate(), &mut rng).map_err(OptimizeError::from)?;
        let Ok(mut w) = parse_with(&proposal.source, &asm.clone().with_default_name(format!("sample-{i}"))) else {
            return Ok(None);
        };
        w.source = proposal.source;
        let (f, _) = score_against(&w, opponents, bc)?;
        Ok(Some((w, f)))
    });
    let mut best: Option<(Warrior, f64)> = None;
    let mut fitness = Vec::with_capacity(n);
    for s in samples {
        let s = s?;
        fitness.push(s.as_ref().map(|(_, f)| *f));
        if let Some((w, f)) = s {
            if best.as_ref().is_none_or(|(bw, bf)| better((&w, f), (bw, *bf))) {
                best = Some((w, f));
            }
        }
    }
    Ok(BestOfN { best, fitness })
}
