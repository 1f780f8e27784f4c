//! MAP-Elites archive over (spawned threads, memory coverage).
//!
//! Both axes are binned in log space:
//! `bin = floor(bins * log2(1 + x) / log2(1 + max))`, clamped to the grid.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mars::MarsConfig;
use crate::redcode::{emit, Warrior};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorDescriptor {
    pub spawned_threads: f64,
    pub memory_coverage: f64,
}

/// Grid cell: (thread bin, coverage bin).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub threads: u32,
    pub coverage: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub thread_bins: u32,
    pub coverage_bins: u32,
    pub thread_max: f64,
    pub coverage_max: f64,
}

pub const DEFAULT_BINS: u32 = 16;

impl GridSpec {
    /// `bins` x `bins` grid with axis ranges taken from the MARS limits.
    pub fn for_mars(cfg: &MarsConfig, bins: u32) -> Self {
        GridSpec {
            thread_bins: bins,
            coverage_bins: bins,
            thread_max: cfg.max_processes as f64,
            coverage_max: cfg.core_size as f64,
        }
    }

    /// Every candidate lands in the same cell: plain elitist hill climbing.
    pub fn single_cell(cfg: &MarsConfig) -> Self {
        GridSpec::for_mars(cfg, 1)
    }

    pub fn is_single_cell(&self) -> bool {
        self.thread_bins == 1 && self.coverage_bins == 1
    }

    pub fn cell_index(&self, bd: &BehaviorDescriptor) -> Cell {
        Cell {
            threads: log_bin(bd.spawned_threads, self.thread_max, self.thread_bins),
            coverage: log_bin(bd.memory_coverage, self.coverage_max, self.coverage_bins),
        }
    }
}

fn log_bin(x: f64, max: f64, bins: u32) -> u32 {
    if bins <= 1 || !(x > 0.0) {
        return 0;
    }
    let scaled = bins as f64 * (1.0 + x).log2() / (1.0 + max).log2();
    (scaled.floor() as u64).min(bins as u64 - 1) as u32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Elite {
    pub warrior: Warrior,
    pub fitness: f64,
    pub descriptor: BehaviorDescriptor,
    pub round: u32,
    pub iteration: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Insertion {
    Inserted,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArchiveError {
    #[error("archive is empty")]
    EmptyArchive,
}

#[derive(Clone, Debug)]
pub struct Archive {
    grid: GridSpec,
    cells: BTreeMap<Cell, Elite>,
    inserted: u64,
    rejected: u64,
}

impl Archive {
    pub fn new(grid: GridSpec) -> Self {
        Archive { grid, cells: BTreeMap::new(), inserted: 0, rejected: 0 }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    pub fn get(&self, cell: &Cell) -> Option<&Elite> {
        self.cells.get(cell)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cell, &Elite)> {
        self.cells.iter()
    }

    /// Insert when the cell is empty or the candidate is strictly fitter.
    pub fn try_insert(&mut self, candidate: Elite) -> (Cell, Insertion) {
        assert!(candidate.fitness.is_finite(), "fitness must be finite");
        let cell = self.grid.cell_index(&candidate.descriptor);
        let accept = self.cells.get(&cell).is_none_or(|e| candidate.fitness > e.fitness);
        if accept {
            self.cells.insert(cell, candidate);
            self.inserted += 1;
            (cell, Insertion::Inserted)
        } else {
            self.rejected += 1;
            (cell, Insertion::Rejected)
        }
    }

    /// Uniform over occupied cells.
    pub fn sample_elite<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&Elite, ArchiveError> {
        if self.cells.is_empty() {
            return Err(ArchiveError::EmptyArchive);
        }
        let k = rng.gen_range(0..self.cells.len());
        Ok(self.cells.values().nth(k).expect("index within occupancy"))
    }

    pub fn best(&self) -> Option<&Elite> {
        self.cells.values().fold(None, |best: Option<&Elite>, e| match best {
            Some(b) if b.fitness >= e.fitness => Some(b),
            _ => Some(e),
        })
    }

    pub fn snapshot(&self) -> ArchiveSnapshot {
        ArchiveSnapshot {
            grid: self.grid,
            records: self
                .cells
                .iter()
                .map(|(cell, e)| SnapshotRecord {
                    cell: *cell,
                    name: e.warrior.name.clone(),
                    digest: e.warrior.digest_hex(),
                    fitness: e.fitness,
                    descriptor: e.descriptor,
                    round: e.round,
                    iteration: e.iteration,
                    source: emit(&e.warrior),
                })
                .collect(),
        }
    }
}

/// Immutable export of an archive: one record per occupied cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchiveSnapshot {
    pub grid: GridSpec,
    pub records: Vec<SnapshotRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub cell: Cell,
    pub name: String,
    pub digest: String,
    pub fitness: f64,
    pub descriptor: BehaviorDescriptor,
    pub round: u32,
    pub iteration: u64,
    /// Canonical source of the elite.
    pub source: String,
}

impl ArchiveSnapshot {
    /// SHA-256 over the JSON serialization.
    pub fn digest_hex(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("snapshot serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Per-cell fitness grid, `[thread bin][coverage bin]`.
    pub fn fitness_grid(&self) -> Vec<Vec<Option<f64>>> {
        let mut grid = vec![vec![None; self.grid.coverage_bins as usize]; self.grid.thread_bins as usize];
        for r in &self.records {
            grid[r.cell.threads as usize][r.cell.coverage as usize] = Some(r.fitness);
        }
        grid
    }

    /// Cell-wise mean over the snapshots that occupy each cell. All snapshots
    /// must share grid dimensions; returns `None` otherwise.
    pub fn mean_grid(snapshots: &[ArchiveSnapshot]) -> Option<Vec<Vec<Option<f64>>>> {
        let first = snapshots.first()?;
        let (rows, cols) = (first.grid.thread_bins, first.grid.coverage_bins);
        if snapshots.iter().any(|s| s.grid.thread_bins != rows || s.grid.coverage_bins != cols) {
            return None;
        }
        let mut sum = vec![vec![(0.0, 0u32); cols as usize]; rows as usize];
        for s in snapshots {
            for r in &s.records {
                let slot = &mut sum[r.cell.threads as usize][r.cell.coverage as usize];
                slot.0 += r.fitness;
                slot.1 += 1;
            }
        }
        Some(sum.into_iter().map(|row| row.into_iter().map(|(s, n)| (n > 0).then(|| s / n as f64)).collect()).collect())
    }
}
