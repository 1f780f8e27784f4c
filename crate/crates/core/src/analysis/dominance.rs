use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::battle::{outcome, BattleConfig, Outcome};
use crate::par;
use crate::redcode::Warrior;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Win,
    Loss,
    Tie,
    #[serde(rename = "self")]
    SelfPair,
}

impl Relation {
    pub fn inverse(self) -> Relation {
        match self {
            Relation::Win => Relation::Loss,
            Relation::Loss => Relation::Win,
            r => r,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Relation::Win => 'W',
            Relation::Loss => 'L',
            Relation::Tie => 'T',
            Relation::SelfPair => '-',
        }
    }
}

/// Row player's result against the column player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceMatrix {
    entries: Vec<Vec<Relation>>,
}

impl DominanceMatrix {
    pub fn from_entries(entries: Vec<Vec<Relation>>) -> Result<Self, AnalysisError> {
        let n = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(AnalysisError::InvalidMatrix(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != Relation::SelfPair {
                return Err(AnalysisError::InvalidMatrix(format!("diagonal entry {i} is not self")));
            }
            for j in 0..n {
                if i != j && (row[j] == Relation::SelfPair || entries[j][i] != row[j].inverse()) {
                    return Err(AnalysisError::InvalidMatrix(format!("entries ({i},{j}) and ({j},{i}) disagree")));
                }
            }
        }
        Ok(DominanceMatrix { entries })
    }

    /// Pairwise 1-on-1 outcomes; pairs are evaluated in parallel.
    pub fn build(warriors: &[Warrior], bc: &BattleConfig, tie_epsilon: f64) -> Result<Self, AnalysisError> {
        let n = warriors.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let results = par::map_slice(&pairs, |&(i, j)| outcome(&warriors[i], &warriors[j], bc, tie_epsilon));
        let mut entries = vec![vec![Relation::Tie; n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Relation::SelfPair;
        }
        for (&(i, j), r) in pairs.iter().zip(results) {
            let rel = match r? {
                Outcome::AWins => Relation::Win,
                Outcome::BWins => Relation::Loss,
                Outcome::Tie => Relation::Tie,
            };
            entries[i][j] = rel;
            entries[j][i] = rel.inverse();
        }
        Ok(DominanceMatrix { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Relation {
        self.entries[i][j]
    }

    pub fn beats(&self, i: usize, j: usize) -> bool {
        self.entries[i][j] == Relation::Win
    }

    pub fn rows(&self) -> &[Vec<Relation>] {
        &self.entries
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| self.entries[j][i] == self.entries[i][j].inverse()))
    }
}

/// Unordered triplets whose Win edges form a directed cycle.
pub fn count_3cycles(m: &DominanceMatrix) -> u64 {
    let n = m.len();
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let forward = m.beats(i, j) && m.beats(j, k) && m.beats(k, i);
                let backward = m.beats(i, k) && m.beats(k, j) && m.beats(j, i);
                if forward || backward {
                    count += 1;
                }
            }
        }
    }
    count
}
