//! Variation operators: random generation/mutation and model-backed proposals.

mod llm;
mod random;

pub use llm::{
    extract_program, llm_propose, ChatClientSpec, ChatMessage, ChatRequest, ChatTransport, LlmMutator, PromptBundle,
    PromptError, Role, TransportError,
};
pub use random::{random_generate, random_instruction, random_mutate, RandomMutator};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    GenerateNew,
    MutateExisting,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationRequest {
    pub kind: RequestKind,
    /// Parent source text; required for [`RequestKind::MutateExisting`].
    pub parent: Option<String>,
    pub context: Option<String>,
}

impl MutationRequest {
    pub fn generate() -> Self {
        MutationRequest { kind: RequestKind::GenerateNew, parent: None, context: None }
    }

    pub fn mutate(parent: impl Into<String>) -> Self {
        MutationRequest { kind: RequestKind::MutateExisting, parent: Some(parent.into()), context: None }
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = Some(context.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Random,
    Llm,
    /// A model call failed to produce a parseable program and the random
    /// operator was used instead.
    Fallback,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Random => "random",
            Provenance::Llm => "llm",
            Provenance::Fallback => "fallback",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proposal {
    pub source: String,
    pub provenance: Provenance,
}

#[derive(Debug, Error)]
pub enum MutationError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("mutation request has no parent")]
    MissingParent,
}

/// Something that turns a request into candidate source text.
///
/// Proposals are not guaranteed to assemble; the optimizer counts failures
/// as invalid candidates.
pub trait Mutator: Send + Sync {
    fn name(&self) -> &str;
    fn propose(&self, req: &MutationRequest, rng: &mut ChaCha8Rng) -> Result<Proposal, MutationError>;
}
