use std::path::Path;

use drq_core::mutation::{LlmMutator, Mutator, PromptBundle, RandomMutator};
use drq_core::redcode::AsmOptions;

use crate::config::{FileConfig, ServiceSettings};
use crate::failure::Failure;
use crate::http::HttpChat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MutatorKind {
    Random,
    Llm,
}

#[derive(Clone, Debug, Default, clap::Args)]
pub struct LlmArgs {
    /// Chat-completion base URL (overrides DRQ_LLM_ENDPOINT).
    #[arg(long)]
    pub llm_endpoint: Option<String>,
    /// Model identifier (overrides DRQ_LLM_MODEL).
    #[arg(long)]
    pub llm_model: Option<String>,
    /// Directory with system.txt, generate_new.txt and mutate_existing.txt.
    #[arg(long)]
    pub prompts: Option<std::path::PathBuf>,
    /// Fail with exit code 4 on transport errors instead of falling back to
    /// the random operator.
    #[arg(long)]
    pub strict_llm: bool,
}

pub fn build(
    kind: MutatorKind,
    llm: &LlmArgs,
    file: &FileConfig,
    asm: &AsmOptions,
) -> Result<Box<dyn Mutator>, Failure> {
    match kind {
        MutatorKind::Random => Ok(Box::new(RandomMutator::new(asm.core_size, asm.max_length))),
        MutatorKind::Llm => {
            let settings =
                ServiceSettings::resolve((llm.llm_endpoint.as_deref(), llm.llm_model.as_deref()), "DRQ_LLM", &file.llm);
            let spec = settings.client_spec("LLM")?;
            let prompt_dir = llm.prompts.clone().or(settings.prompts.map(Into::into));
            let prompts = match prompt_dir {
                Some(dir) => load_prompts(&dir)?,
                None => PromptBundle::builtin(),
            };
            let mut mutator = LlmMutator::new(HttpChat::new(&spec), spec, prompts, asm.clone());
            mutator.strict = llm.strict_llm;
            Ok(Box::new(mutator))
        }
    }
}

fn load_prompts(dir: &Path) -> Result<PromptBundle, Failure> {
    PromptBundle::load_dir(dir).map_err(|e| Failure::input(e.to_string()))
}
