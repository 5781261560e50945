//! Retrieve-then-generate loop.
//!
//! Each turn decides whether the current retrieval set can be reused or a
//! new catalog query is needed, builds the generator context from the method
//! vocabulary, the retrieved sound objects and the previous script, asks the
//! generator for a script (with one repair round on invalid output), and
//! renders it. A turn depends only on the previous state, the prompt, the
//! generator, the catalog and the render session.

mod context;
mod generator;
mod heuristic;
mod mock;
mod remote;

use std::fmt;

use crate::catalog::{Catalog, CatalogError, RetrievalSet, DEFAULT_K};
use crate::dsp::{render, RenderError, RenderSession, Rendered};
use crate::script::{parse_script, validate_for_rate, Diagnostic, ScriptAst, Span};

pub use context::{
    asset_block, build_context, method_reference, GeneratorContext, ASSET_BLOCK_HEADER,
    CURRENT_SCRIPT_HEADING,
};
pub use generator::{extract_script, parse_verdict, GeneratorError, ScriptGenerator, Verdict};
pub use heuristic::missing_content_words;
pub use mock::{MockFixture, MockGenerator, MockTurn};
pub use remote::{
    request_body, response_content, verdict_system_text, RemoteConfig, RemoteGenerator,
    DEFAULT_TIMEOUT_S, ENV_ENDPOINT, ENV_KEY, ENV_MODEL, ENV_TIMEOUT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    User,
    Assistant,
    System,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::User => "user",
            Role::Assistant => "assistant",
            Role::System => "system",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEntry {
    pub role: Role,
    pub text: String,
}

/// Dialogue state between turns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionState {
    /// Completed turns.
    pub turn: usize,
    pub prev_script: Option<ScriptAst>,
    /// Text of the accepted script, as the generator produced it.
    pub prev_script_text: Option<String>,
    pub retrieval: Option<RetrievalSet>,
    pub transcript: Vec<TranscriptEntry>,
}

impl SessionState {
    pub fn new() -> Self {
        Self::default()
    }

    /// The transcript as plain text, one `role: text` block per entry.
    pub fn transcript_text(&self) -> String {
        let mut out = String::new();
        for entry in &self.transcript {
            out.push_str(&format!("[{}]\n{}\n", entry.role, entry.text.trim_end()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RetrievalDecision {
    Reuse,
    NewQuery { query: String, k: usize },
}

impl fmt::Display for RetrievalDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetrievalDecision::Reuse => f.write_str("reuse"),
            RetrievalDecision::NewQuery { query, k } => write!(f, "new query \"{query}\" (k={k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    /// Retrieval size for new queries.
    pub k: usize,
    pub session: RenderSession,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            session: RenderSession::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error("no assets available for this prompt")]
    NoAssets,
    #[error("generator produced an invalid script twice:\nfirst attempt:\n{}\nsecond attempt:\n{}", join(.first), join(.second))]
    InvalidScript {
        first: Vec<Diagnostic>,
        second: Vec<Diagnostic>,
    },
    #[error("generator failed: {0}")]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("render failed: {0}")]
    Render(#[from] RenderError),
}

fn join(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Result of one completed turn.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SessionState,
    pub script: ScriptAst,
    pub script_text: String,
    pub audio: Rendered,
    pub decision: RetrievalDecision,
    pub context: GeneratorContext,
    /// Repair rounds used (0 or 1).
    pub repairs: usize,
    pub warnings: Vec<String>,
}

/// Decide whether this turn reuses the retrieval set or queries anew.
///
/// The first turn always queries with the prompt. Later turns ask the
/// generator; if it defers or fails, the content-word heuristic decides.
/// The optional string is a warning.
pub fn decide_retrieval(
    state: &SessionState,
    prompt: &str,
    generator: &mut dyn ScriptGenerator,
    k: usize,
) -> (RetrievalDecision, Option<String>) {
    let Some(current) = state.retrieval.as_ref().filter(|_| state.turn > 0) else {
        return (
            RetrievalDecision::NewQuery {
                query: prompt.to_string(),
                k,
            },
            None,
        );
    };
    let (verdict, warning) = match generator.retrieval_verdict(state, prompt) {
        Ok(Some(Verdict::NewQuery(q))) if q.trim().is_empty() => (
            None,
            Some("generator returned an empty query; using heuristic".to_string()),
        ),
        Ok(verdict) => (verdict, None),
        Err(e) => (
            None,
            Some(format!("retrieval verdict failed ({e}); using heuristic")),
        ),
    };
    let decision = match verdict {
        Some(Verdict::Reuse) => RetrievalDecision::Reuse,
        Some(Verdict::NewQuery(query)) => RetrievalDecision::NewQuery { query, k },
        None => {
            let missing = missing_content_words(prompt, current);
            if missing.is_empty() {
                RetrievalDecision::Reuse
            } else {
                RetrievalDecision::NewQuery {
                    query: missing.join(" "),
                    k,
                }
            }
        }
    };
    (decision, warning)
}

fn check_reply(
    reply: &str,
    retrieval: &RetrievalSet,
    sample_rate: u32,
) -> Result<(String, ScriptAst, Vec<Diagnostic>), Vec<Diagnostic>> {
    let text = extract_script(reply).map_err(|m| vec![Diagnostic::error(Span::new(1, 1), m)])?;
    let ast = parse_script(&text)?;
    let diagnostics = validate_for_rate(&ast, retrieval, sample_rate);
    if diagnostics.iter().any(Diagnostic::is_error) {
        return Err(diagnostics);
    }
    Ok((text, ast, diagnostics))
}

/// Run one turn of the loop. On error the caller's state is untouched.
pub fn step(
    state: &SessionState,
    prompt: &str,
    generator: &mut dyn ScriptGenerator,
    catalog: &Catalog,
    config: &LoopConfig,
) -> Result<StepOutcome, OrchestratorError> {
    let mut warnings = Vec::new();
    let mut transcript = state.transcript.clone();
    transcript.push(TranscriptEntry {
        role: Role::User,
        text: prompt.to_string(),
    });

    let (decision, warning) = decide_retrieval(state, prompt, generator, config.k);
    warnings.extend(warning);
    let retrieval = match (&decision, &state.retrieval) {
        (RetrievalDecision::Reuse, Some(current)) => current.clone(),
        (RetrievalDecision::NewQuery { query, k }, _) => catalog.query(query, *k)?,
        (RetrievalDecision::Reuse, None) => catalog.query(prompt, config.k)?,
    };
    if retrieval.is_empty() {
        return Err(OrchestratorError::NoAssets);
    }
    transcript.push(TranscriptEntry {
        role: Role::System,
        text: format!(
            "retrieval: {decision}; assets: {}",
            retrieval.names().join(", ")
        ),
    });

    let context = build_context(state, &retrieval, prompt);
    let rate = config.session.sample_rate;
    let reply = generator.generate(&context)?;
    transcript.push(TranscriptEntry {
        role: Role::Assistant,
        text: reply.clone(),
    });

    let mut repairs = 0;
    let (text, ast, diagnostics) = match check_reply(&reply, &retrieval, rate) {
        Ok(ok) => ok,
        Err(first) => {
            repairs = 1;
            let report = first
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("\n");
            transcript.push(TranscriptEntry {
                role: Role::System,
                text: format!("repair: script rejected\n{report}"),
            });
            let mut repair_context = context.clone();
            repair_context.repair = Some(report);
            let second_reply = generator.generate(&repair_context)?;
            transcript.push(TranscriptEntry {
                role: Role::Assistant,
                text: second_reply.clone(),
            });
            check_reply(&second_reply, &retrieval, rate)
                .map_err(|second| OrchestratorError::InvalidScript { first, second })?
        }
    };
    warnings.extend(diagnostics.iter().map(ToString::to_string));

    let audio = render(&ast, catalog, &config.session)?;
    warnings.extend(audio.warnings.iter().cloned());

    let next = SessionState {
        turn: state.turn + 1,
        prev_script: Some(ast.clone()),
        prev_script_text: Some(text.clone()),
        retrieval: Some(retrieval),
        transcript,
    };
    Ok(StepOutcome {
        state: next,
        script: ast,
        script_text: text,
        audio,
        decision,
        context,
        repairs,
        warnings,
    })
}
