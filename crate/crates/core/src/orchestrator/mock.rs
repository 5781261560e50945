use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generator::{parse_verdict, GeneratorError, ScriptGenerator, Verdict};
use super::{GeneratorContext, SessionState};

/// One scripted turn: the prompt it answers, the replies returned in order
/// (later entries are used for repair rounds), and an optional verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockTurn {
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub responses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MockFixture {
    pub turns: Vec<MockTurn>,
}

/// Table-driven generator for tests and offline sessions. Without a scripted
/// verdict it defers retrieval decisions to the heuristic.
#[derive(Debug, Clone, Default)]
pub struct MockGenerator {
    turns: Vec<MockTurn>,
    cursors: HashMap<usize, usize>,
    seen: Vec<GeneratorContext>,
}

impl MockGenerator {
    pub fn new(turns: Vec<MockTurn>) -> Self {
        Self {
            turns,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GeneratorError> {
        let fixture: MockFixture = serde_json::from_str(text)
            .map_err(|e| GeneratorError::Config(format!("invalid mock fixture: {e}")))?;
        Ok(Self::new(fixture.turns))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, GeneratorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeneratorError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Contexts passed to `generate`, in call order.
    pub fn contexts(&self) -> &[GeneratorContext] {
        &self.seen
    }

    /// Turns with the same prompt are consumed in fixture order.
    fn turn_for(&self, prompt: &str) -> Option<usize> {
        let mut matching = self
            .turns
            .iter()
            .enumerate()
            .filter(|(_, t)| t.prompt == prompt)
            .map(|(i, _)| i);
        let first = matching.next()?;
        std::iter::once(first)
            .chain(matching)
            .find(|i| self.cursors.get(i).copied().unwrap_or(0) < self.turns[*i].responses.len())
            .or(Some(first))
    }
}

impl ScriptGenerator for MockGenerator {
    fn retrieval_verdict(
        &mut self,
        _state: &SessionState,
        prompt: &str,
    ) -> Result<Option<Verdict>, GeneratorError> {
        let Some(i) = self.turn_for(prompt) else {
            return Ok(None);
        };
        match &self.turns[i].verdict {
            Some(v) => parse_verdict(v, prompt).map(Some),
            None => Ok(None),
        }
    }

    fn generate(&mut self, context: &GeneratorContext) -> Result<String, GeneratorError> {
        self.seen.push(context.clone());
        let i = self
            .turn_for(&context.prompt)
            .ok_or_else(|| GeneratorError::NoResponse(context.prompt.clone()))?;
        let cursor = self.cursors.entry(i).or_insert(0);
        let response = self.turns[i]
            .responses
            .get(*cursor)
            .cloned()
            .ok_or_else(|| GeneratorError::Exhausted(context.prompt.clone()))?;
        *cursor += 1;
        Ok(response)
    }
}
