//! Chat-completions client.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{CompletionRequest, Provider, ProviderFailure};

#[derive(Debug, Clone)]
pub struct HttpProvider {
    endpoint: String,
    model: String,
    token_env: Option<String>,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatBody<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, token_env: Option<String>) -> Self {
        HttpProvider {
            endpoint: endpoint.into(),
            model: model.into(),
            token_env,
        }
    }

    fn bearer(&self) -> Option<String> {
        let var = self.token_env.as_deref()?;
        std::env::var(var).ok().filter(|t| !t.is_empty())
    }
}

impl Provider for HttpProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ProviderFailure> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(request.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        let body = ChatBody {
            model: &self.model,
            messages: vec![ChatMessage {
                role: "user",
                content: &request.prompt,
            }],
            max_tokens: request.max_tokens,
            temperature: request.temperature,
        };
        let mut call = agent.post(&self.endpoint);
        if let Some(token) = self.bearer() {
            call = call.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = call
            .send_json(&body)
            .map_err(|e| ProviderFailure(format!("request to {} failed: {e}", self.endpoint)))?;
        let status = response.status();
        if !status.is_success() {
            return Err(ProviderFailure(format!("{} returned status {status}", self.endpoint)));
        }
        let parsed: ChatResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderFailure(format!("unreadable response body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .filter(|t| !t.trim().is_empty())
            .ok_or_else(|| ProviderFailure("response has no message content".into()))
    }
}
