use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::random::RandomMutator;
use super::{MutationError, MutationRequest, Mutator, Proposal, Provenance, RequestKind};
use crate::redcode::{is_statement, parse_with, AsmOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatClientSpec {
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub api_key: Option<String>,
    pub timeout_secs: f64,
    /// Bounds both network retries per call and re-prompts after a parse failure.
    pub max_retries: u32,
    pub temperature: f64,
    pub max_in_flight: usize,
}

impl ChatClientSpec {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        ChatClientSpec {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            timeout_secs: 60.0,
            max_retries: 2,
            temperature: 1.0,
            max_in_flight: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        ChatMessage { role, content: content.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    /// Forwarded to backends that support seeded sampling.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

/// Sends one chat request and returns the assistant text.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, spec: &ChatClientSpec, req: &ChatRequest) -> Result<String, TransportError>;
}

impl<T: ChatTransport + ?Sized> ChatTransport for Box<T> {
    fn complete(&self, spec: &ChatClientSpec, req: &ChatRequest) -> Result<String, TransportError> {
        (**self).complete(spec, req)
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}: unknown placeholder {{{name}}}")]
    UnknownPlaceholder { file: String, name: String },
    #[error("mutate_existing.txt must contain {{parent}}")]
    MissingParentPlaceholder,
}

/// System prompt plus the two user templates. Templates may reference
/// `{parent}` and `{context}` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptBundle {
    pub system: String,
    pub generate_new: String,
    pub mutate_existing: String,
}

const PLACEHOLDERS: [&str; 2] = ["parent", "context"];

impl PromptBundle {
    pub fn builtin() -> Self {
        PromptBundle {
            system: include_str!("../../prompts/system.txt").to_string(),
            generate_new: include_str!("../../prompts/generate_new.txt").to_string(),
            mutate_existing: include_str!("../../prompts/mutate_existing.txt").to_string(),
        }
    }

    /// Reads `system.txt`, `generate_new.txt` and `mutate_existing.txt`.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| PromptError::Io { path, source })
        };
        let bundle = PromptBundle {
            system: read("system.txt")?,
            generate_new: read("generate_new.txt")?,
            mutate_existing: read("mutate_existing.txt")?,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        for (file, text) in [
            ("system.txt", &self.system),
            ("generate_new.txt", &self.generate_new),
            ("mutate_existing.txt", &self.mutate_existing),
        ] {
            for name in placeholders(text) {
                if !PLACEHOLDERS.contains(&name) {
                    return Err(PromptError::UnknownPlaceholder { file: file.into(), name: name.into() });
                }
            }
        }
        if !placeholders(&self.mutate_existing).contains(&"parent") {
            return Err(PromptError::MissingParentPlaceholder);
        }
        Ok(())
    }

    pub fn render_user(&self, req: &MutationRequest) -> String {
        let template = match req.kind {
            RequestKind::GenerateNew => &self.generate_new,
            RequestKind::MutateExisting => &self.mutate_existing,
        };
        template
            .replace("{parent}", req.parent.as_deref().unwrap_or("").trim_end())
            .replace("{context}", req.context.as_deref().unwrap_or("").trim_end())
    }
}

/// `{identifier}` occurrences, where identifier is `[a-z_]+`.
fn placeholders(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        rest = &rest[open + 1..];
        let name_len = rest.bytes().take_while(|b| b.is_ascii_lowercase() || *b == b'_').count();
        if name_len > 0 && rest.as_bytes().get(name_len) == Some(&b'}') {
            out.push(&rest[..name_len]);
        }
    }
    out
}

/// Pulls a program out of a model reply: the first fenced block if there is
/// one, otherwise the longest run of consecutive statement lines. The
/// candidate must assemble; the error is the assembler diagnostic.
pub fn extract_program(reply: &str, asm: &AsmOptions) -> Result<String, String> {
    let candidate = fenced_block(reply)
        .or_else(|| longest_statement_run(reply))
        .ok_or_else(|| "no program found in the reply".to_string())?;
    match parse_with(&candidate, asm) {
        Ok(_) => Ok(candidate),
        Err(e) => Err(e.to_string()),
    }
}

fn fenced_block(text: &str) -> Option<String> {
    let mut lines = text.lines();
    lines.by_ref().find(|l| l.trim_start().starts_with("```"))?;
    let body: Vec<&str> = lines.take_while(|l| !l.trim_start().starts_with("```")).collect();
    Some(body.join("\n"))
}

fn longest_statement_run(text: &str) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < lines.len() {
        if !is_statement(lines[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < lines.len() && is_statement(lines[i]) {
            i += 1;
        }
        if best.is_none_or(|(s, e)| i - start > e - s) {
            best = Some((start, i));
        }
    }
    best.map(|(s, e)| lines[s..e].join("\n"))
}

fn complete_with_retries<T: ChatTransport + ?Sized>(
    transport: &T,
    spec: &ChatClientSpec,
    req: &ChatRequest,
) -> Result<String, TransportError> {
    let mut last = None;
    for _ in 0..=spec.max_retries {
        match transport.complete(spec, req) {
            Ok(text) => return Ok(text),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Asks the model for a program. A reply that does not assemble is sent
/// back with the diagnostic, up to `spec.max_retries` times; after that the
/// random operator supplies the candidate and the proposal is marked
/// [`Provenance::Fallback`]. Transport failures are returned as errors.
pub fn llm_propose<T: ChatTransport + ?Sized>(
    req: &MutationRequest,
    prompts: &PromptBundle,
    spec: &ChatClientSpec,
    transport: &T,
    asm: &AsmOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Proposal, TransportError> {
    let mut chat = ChatRequest {
        model: spec.model.clone(),
        messages: vec![
            ChatMessage::new(Role::System, prompts.system.clone()),
            ChatMessage::new(Role::User, prompts.render_user(req)),
        ],
        temperature: spec.temperature,
        seed: rng.gen(),
    };
    for _ in 0..=spec.max_retries {
        let reply = complete_with_retries(transport, spec, &chat)?;
        match extract_program(&reply, asm) {
            Ok(source) => return Ok(Proposal { source, provenance: Provenance::Llm }),
            Err(diagnostic) => {
                chat.messages.push(ChatMessage::new(Role::Assistant, reply));
                chat.messages.push(ChatMessage::new(
                    Role::User,
                    format!(
                        "That program does not assemble ({diagnostic}). \
                         Reply with a corrected full program in one ```redcode block."
                    ),
                ));
                chat.seed = rng.gen();
            }
        }
    }
    let random = RandomMutator::new(asm.core_size, asm.max_length);
    Ok(Proposal { source: random.fresh_or_mutated(req, rng), provenance: Provenance::Fallback })
}

/// [`Mutator`] backed by a chat model.
pub struct LlmMutator<T> {
    pub transport: T,
    pub spec: ChatClientSpec,
    pub prompts: PromptBundle,
    pub asm: AsmOptions,
    /// When false, transport failures degrade to the random operator.
    pub strict: bool,
}

impl<T: ChatTransport> LlmMutator<T> {
    pub fn new(transport: T, spec: ChatClientSpec, prompts: PromptBundle, asm: AsmOptions) -> Self {
        LlmMutator { transport, spec, prompts, asm, strict: true }
    }

    fn with_limits(&self, req: &MutationRequest) -> MutationRequest {
        let limits = format!(
            "The core has {} cells. The program may have at most {} instructions.",
            self.asm.core_size, self.asm.max_length
        );
        let context = match &req.context {
            Some(c) if !c.trim().is_empty() => format!("{limits}\n{c}"),
            _ => limits,
        };
        MutationRequest { context: Some(context), ..req.clone() }
    }
}

impl<T: ChatTransport> Mutator for LlmMutator<T> {
    fn name(&self) -> &str {
        "llm"
    }

    fn propose(&self, req: &MutationRequest, rng: &mut ChaCha8Rng) -> Result<Proposal, MutationError> {
        if req.kind == RequestKind::MutateExisting && req.parent.is_none() {
            return Err(MutationError::MissingParent);
        }
        let req = self.with_limits(req);
        match llm_propose(&req, &self.prompts, &self.spec, &self.transport, &self.asm, rng) {
            Ok(p) => Ok(p),
            Err(e) if self.strict => Err(e.into()),
            Err(_) => {
                let random = RandomMutator::new(self.asm.core_size, self.asm.max_length);
                Ok(Proposal { source: random.fresh_or_mutated(&req, rng), provenance: Provenance::Fallback })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    struct Scripted {
        replies: Mutex<Vec<Result<String, TransportError>>>,
        calls: AtomicUsize,
        seen: Mutex<Vec<ChatRequest>>,
    }

    impl Scripted {
        fn new(replies: Vec<Result<&str, &str>>) -> Self {
            let mut replies: Vec<_> =
                replies.into_iter().map(|r| r.map(str::to_string).map_err(|e| TransportError(e.into()))).collect();
            replies.reverse();
            Scripted { replies: Mutex::new(replies), calls: AtomicUsize::new(0), seen: Mutex::new(Vec::new()) }
        }
    }

    impl ChatTransport for Scripted {
        fn complete(&self, _: &ChatClientSpec, req: &ChatRequest) -> Result<String, TransportError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.seen.lock().unwrap().push(req.clone());
            self.replies.lock().unwrap().pop().unwrap_or_else(|| Err(TransportError("exhausted".into())))
        }
    }

    fn asm() -> AsmOptions {
        AsmOptions::new(8000, 100)
    }

    fn spec() -> ChatClientSpec {
        ChatClientSpec::new("http://localhost", "m")
    }

    #[test]
    fn extracts_first_fenced_block() {
        let reply = "Here:\n```redcode\nMOV 0, 1\n```\nand\n```\nDAT 0\n```";
        assert_eq!(extract_program(reply, &asm()).unwrap(), "MOV 0, 1");
    }

    #[test]
    fn extracts_longest_statement_run() {
        let reply = "Try this\nDAT 0\n\nstart MOV 0, 1\nJMP start\nthat's all";
        assert_eq!(extract_program(reply, &asm()).unwrap(), "start MOV 0, 1\nJMP start");
        assert!(extract_program("nothing here", &asm()).is_err());
    }

    #[test]
    fn bad_fence_reports_diagnostic() {
        let err = extract_program("```\nFOO 1, 2\n```", &asm()).unwrap_err();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn reprompts_then_succeeds() {
        let t = Scripted::new(vec![Ok("```\nBAD\n```"), Ok("```\nMOV 0, 1\n```")]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p =
            llm_propose(&MutationRequest::generate(), &PromptBundle::builtin(), &spec(), &t, &asm(), &mut rng).unwrap();
        assert_eq!(p, Proposal { source: "MOV 0, 1".into(), provenance: Provenance::Llm });
        let seen = t.seen.lock().unwrap();
        assert_eq!(seen.len(), 2);
        assert_eq!(seen[1].messages.len(), 4);
        assert!(seen[1].messages[3].content.contains("does not assemble"));
    }

    #[test]
    fn falls_back_after_retries() {
        let t = Scripted::new(vec![Ok("junk"), Ok("junk"), Ok("junk")]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p =
            llm_propose(&MutationRequest::generate(), &PromptBundle::builtin(), &spec(), &t, &asm(), &mut rng).unwrap();
        assert_eq!(p.provenance, Provenance::Fallback);
        assert!(parse_with(&p.source, &asm()).is_ok());
        assert_eq!(t.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn transport_errors_retry_then_surface() {
        let t = Scripted::new(vec![Err("down"), Ok("```\nMOV 0, 1\n```")]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = llm_propose(&MutationRequest::generate(), &PromptBundle::builtin(), &spec(), &t, &asm(), &mut rng);
        assert_eq!(p.unwrap().provenance, Provenance::Llm);

        let t = Scripted::new(vec![Err("down"), Err("down"), Err("down")]);
        let strict = LlmMutator::new(t, spec(), PromptBundle::builtin(), asm());
        assert!(matches!(strict.propose(&MutationRequest::generate(), &mut rng), Err(MutationError::Transport(_))));
        let mut lenient = strict;
        lenient.strict = false;
        let p = lenient.propose(&MutationRequest::generate(), &mut rng).unwrap();
        assert_eq!(p.provenance, Provenance::Fallback);
    }

    #[test]
    fn prompt_rendering_and_validation() {
        let b = PromptBundle::builtin();
        b.validate().unwrap();
        let user = b.render_user(&MutationRequest::mutate("MOV 0, 1").with_context("ctx"));
        assert!(user.contains("MOV 0, 1") && user.contains("ctx"));
        assert!(!user.contains("{parent}"));

        let mut bad = b.clone();
        bad.generate_new.push_str("{opponent}");
        assert!(matches!(bad.validate(), Err(PromptError::UnknownPlaceholder { .. })));
        let mut bad = b;
        bad.mutate_existing = "improve".into();
        assert!(matches!(bad.validate(), Err(PromptError::MissingParentPlaceholder)));
    }

    #[test]
    fn prompt_dir_loading() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(PromptBundle::load_dir(dir.path()), Err(PromptError::Io { .. })));
        let b = PromptBundle::builtin();
        std::fs::write(dir.path().join("system.txt"), &b.system).unwrap();
        std::fs::write(dir.path().join("generate_new.txt"), &b.generate_new).unwrap();
        std::fs::write(dir.path().join("mutate_existing.txt"), &b.mutate_existing).unwrap();
        assert_eq!(PromptBundle::load_dir(dir.path()).unwrap(), b);
    }
}
