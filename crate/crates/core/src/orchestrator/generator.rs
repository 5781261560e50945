use super::{GeneratorContext, SessionState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("generator configuration: {0}")]
    Config(String),
    #[error("request failed: {0}")]
    Transport(String),
    #[error("unexpected response: {0}")]
    BadResponse(String),
    #[error("no scripted response for prompt '{0}'")]
    NoResponse(String),
    #[error("scripted responses for prompt '{0}' are exhausted")]
    Exhausted(String),
}

/// The generator's answer to "does this prompt need new assets?".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Reuse,
    NewQuery(String),
}

/// The language-model port.
pub trait ScriptGenerator {
    /// `Ok(None)` defers the decision to the built-in heuristic.
    fn retrieval_verdict(
        &mut self,
        state: &SessionState,
        prompt: &str,
    ) -> Result<Option<Verdict>, GeneratorError>;

    /// Produce script text, optionally wrapped in a fenced code block.
    fn generate(&mut self, context: &GeneratorContext) -> Result<String, GeneratorError>;
}

/// Parse a one-token verdict: `REUSE`, or `NEW` followed by an optional
/// query string. An empty query falls back to `prompt`.
pub fn parse_verdict(text: &str, prompt: &str) -> Result<Verdict, GeneratorError> {
    let trimmed = text.trim().trim_matches('`').trim();
    let (head, rest) = match trimmed.find(|c: char| c.is_whitespace() || c == ':') {
        Some(at) => trimmed.split_at(at),
        None => (trimmed, ""),
    };
    let head = head
        .trim_matches(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .to_ascii_uppercase();
    match head.as_str() {
        "REUSE" => Ok(Verdict::Reuse),
        "NEW" | "NEW_QUERY" | "NEWQUERY" => {
            let query = rest
                .trim_start_matches(|c: char| c.is_whitespace() || c == ':')
                .trim()
                .trim_matches(|c| c == '"' || c == '\'')
                .trim();
            let query = if query.is_empty() { prompt } else { query };
            Ok(Verdict::NewQuery(query.to_string()))
        }
        _ => Err(GeneratorError::BadResponse(format!(
            "expected REUSE or NEW, got '{}'",
            text.trim()
        ))),
    }
}

/// Pull the script out of a reply. Text without fences is taken whole; a
/// single fenced block is unwrapped; anything else is rejected.
pub fn extract_script(reply: &str) -> Result<String, String> {
    let lines: Vec<&str> = reply.lines().collect();
    let fences: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.trim_start().starts_with("```"))
        .map(|(i, _)| i)
        .collect();
    match fences.len() {
        0 => Ok(reply.trim().to_string() + "\n"),
        2 => {
            let body = &lines[fences[0] + 1..fences[1]];
            let mut script = body.join("\n");
            script.push('\n');
            Ok(script)
        }
        n if n % 2 == 1 => Err("unterminated fenced code block".into()),
        n => Err(format!(
            "expected a single fenced Mixer Script block, found {}",
            n / 2
        )),
    }
}
