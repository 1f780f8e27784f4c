//! Command failures and their exit codes.

use std::fmt;

use drq_core::analysis::AnalysisError;
use drq_core::battle::BattleError;
use drq_core::drq::DrqError;
use drq_core::mutation::MutationError;
use drq_core::optimize::OptimizeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Unreadable or malformed input, bad flags.
    Input = 2,
    /// Warriors cannot be placed in the core.
    Infeasible = 3,
    /// The model service could not be reached.
    Transport = 4,
    /// Anything else, such as failing to write output.
    Other = 1,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Failure { kind, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Failure::new(Kind::Input, message)
    }

    pub fn other(message: impl Into<String>) -> Self {
        Failure::new(Kind::Other, message)
    }

    pub fn exit_code(&self) -> u8 {
        self.kind as u8
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<BattleError> for Failure {
    fn from(e: BattleError) -> Self {
        let kind = match e {
            BattleError::Infeasible { .. } => Kind::Infeasible,
            _ => Kind::Input,
        };
        Failure::new(kind, e.to_string())
    }
}

impl From<MutationError> for Failure {
    fn from(e: MutationError) -> Self {
        let kind = match e {
            MutationError::Transport(_) => Kind::Transport,
            MutationError::MissingParent => Kind::Other,
        };
        Failure::new(kind, e.to_string())
    }
}

impl From<OptimizeError> for Failure {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Battle(b) => b.into(),
            OptimizeError::Mutation(m) => m.into(),
        }
    }
}

impl From<DrqError> for Failure {
    fn from(e: DrqError) -> Self {
        match e {
            DrqError::Optimize(o) => o.into(),
            DrqError::Battle(b) => b.into(),
            DrqError::EmptyArchive(_) => Failure::other(e.to_string()),
            other => Failure::input(other.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Battle(b) => b.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

/// Attaches a path to an I/O error raised while reading input.
pub fn read_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::input(format!("{}: {e}", path.display()))
}

/// Attaches a path to an I/O error raised while writing output.
pub fn write_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::other(format!("{}: {e}", path.display()))
}
