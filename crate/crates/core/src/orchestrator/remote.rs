//! Chat-completion generator over HTTP.
//!
//! Requests are OpenAI-style `{"model", "messages": [system, user]}` bodies;
//! the reply text is read from `choices[0].message.content`.

use std::time::Duration;

use serde_json::{json, Value};

use super::context::{asset_block, CURRENT_SCRIPT_HEADING};
use super::generator::{parse_verdict, GeneratorError, ScriptGenerator, Verdict};
use super::{GeneratorContext, SessionState};

pub const ENV_ENDPOINT: &str = "SONICRAG_LLM_ENDPOINT";
pub const ENV_KEY: &str = "SONICRAG_LLM_KEY";
pub const ENV_MODEL: &str = "SONICRAG_LLM_MODEL";
pub const ENV_TIMEOUT: &str = "SONICRAG_LLM_TIMEOUT_S";
pub const DEFAULT_TIMEOUT_S: u64 = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub key: Option<String>,
    pub model: Option<String>,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn from_env() -> Result<Self, GeneratorError> {
        Self::from_lookup(|name| std::env::var(name).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, GeneratorError> {
        let non_empty = |name: &str| lookup(name).filter(|v| !v.trim().is_empty());
        let endpoint = non_empty(ENV_ENDPOINT).ok_or_else(|| {
            GeneratorError::Config(format!(
                "{ENV_ENDPOINT} is not set; point it at a chat-completion URL \
                 (optionally with {ENV_KEY}, {ENV_MODEL}, {ENV_TIMEOUT}) or use --mock"
            ))
        })?;
        let timeout = match non_empty(ENV_TIMEOUT) {
            None => DEFAULT_TIMEOUT_S as f64,
            Some(v) => v
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|s| *s > 0.0 && s.is_finite())
                .ok_or_else(|| {
                    GeneratorError::Config(format!(
                        "{ENV_TIMEOUT} must be a positive number of seconds"
                    ))
                })?,
        };
        Ok(Self {
            endpoint,
            key: non_empty(ENV_KEY),
            model: non_empty(ENV_MODEL),
            timeout: Duration::from_secs_f64(timeout),
        })
    }
}

pub struct RemoteGenerator {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteGenerator {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Self { config, agent }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn complete(&self, system: &str, user: &str) -> Result<String, GeneratorError> {
        let body = request_body(self.config.model.as_deref(), system, user);
        let mut request = self
            .agent
            .post(&self.config.endpoint)
            .set("Content-Type", "application/json");
        if let Some(key) = &self.config.key {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        let response = match request.send_string(&body.to_string()) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) => {
                let detail = r.into_string().unwrap_or_default();
                return Err(GeneratorError::Transport(format!(
                    "HTTP {code}: {}",
                    detail.trim()
                )));
            }
            Err(e) => return Err(GeneratorError::Transport(e.to_string())),
        };
        let text = response
            .into_string()
            .map_err(|e| GeneratorError::Transport(e.to_string()))?;
        response_content(&text)
    }
}

pub fn request_body(model: Option<&str>, system: &str, user: &str) -> Value {
    let mut body = json!({
        "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ],
        "temperature": 0,
    });
    if let Some(model) = model {
        body["model"] = json!(model);
    }
    body
}

pub fn response_content(body: &str) -> Result<String, GeneratorError> {
    let value: Value = serde_json::from_str(body)
        .map_err(|e| GeneratorError::BadResponse(format!("not JSON: {e}")))?;
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| GeneratorError::BadResponse("missing choices[0].message.content".into()))
}

/// System text for the retrieval decision call.
pub fn verdict_system_text(state: &SessionState) -> String {
    let mut out = String::from(
        "Decide whether the user's request needs sound assets that are not in the current asset list.\n\
         Answer with a single token: REUSE if the current assets are enough, or NEW followed by a short \
         English search query describing the missing sounds (for example: NEW breaking glass).\n\n\
         ## Current assets\n",
    );
    if let Some(retrieval) = &state.retrieval {
        for hit in &retrieval.hits {
            out.push_str(&asset_block(&hit.object));
        }
    }
    if let Some(script) = &state.prev_script_text {
        out.push('\n');
        out.push_str(CURRENT_SCRIPT_HEADING);
        out.push('\n');
        out.push_str(script);
    }
    out
}

impl ScriptGenerator for RemoteGenerator {
    fn retrieval_verdict(
        &mut self,
        state: &SessionState,
        prompt: &str,
    ) -> Result<Option<Verdict>, GeneratorError> {
        let reply = self.complete(&verdict_system_text(state), prompt)?;
        parse_verdict(&reply, prompt).map(Some)
    }

    fn generate(&mut self, context: &GeneratorContext) -> Result<String, GeneratorError> {
        self.complete(&context.system_text(), &context.prompt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn lookup(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: HashMap<String, String> = pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        move |k| map.get(k).cloned()
    }

    #[test]
    fn config_requires_endpoint() {
        let err = RemoteConfig::from_lookup(lookup(&[])).unwrap_err();
        assert!(err.to_string().contains(ENV_ENDPOINT));
        let cfg = RemoteConfig::from_lookup(lookup(&[
            (ENV_ENDPOINT, "http://localhost:1/v1/chat/completions"),
            (ENV_TIMEOUT, "2.5"),
            (ENV_MODEL, "m"),
        ]))
        .unwrap();
        assert_eq!(cfg.timeout, Duration::from_millis(2500));
        assert_eq!(cfg.model.as_deref(), Some("m"));
        assert_eq!(cfg.key, None);
        assert!(
            RemoteConfig::from_lookup(lookup(&[(ENV_ENDPOINT, "x"), (ENV_TIMEOUT, "-1")])).is_err()
        );
    }

    #[test]
    fn wire_format() {
        let body = request_body(Some("m"), "sys", "user prompt");
        assert_eq!(body["model"], "m");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "user prompt");
        assert!(request_body(None, "s", "u").get("model").is_none());

        let reply = r#"{"choices":[{"message":{"role":"assistant","content":"```\n\"a\"\n```"}}]}"#;
        assert_eq!(response_content(reply).unwrap(), "```\n\"a\"\n```");
        assert!(response_content("{}").is_err());
        assert!(response_content("nope").is_err());
    }
}
