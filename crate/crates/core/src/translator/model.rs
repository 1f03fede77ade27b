use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use super::{TranslateError, Translation, Translator, TranslatorConfig, TranslatorConfigError};
use crate::logical_form::{parse, Vocabulary};

#[derive(Serialize)]
struct ModelRequest<'a> {
    question: &'a str,
}

#[derive(Deserialize)]
struct ModelResponse {
    tokens: String,
}

/// Speaks `{"question": ...}` -> `{"tokens": ...}` to a hosted
/// sequence-to-sequence model.
pub struct ModelEndpointTranslator {
    url: String,
    http: reqwest::Client,
    permits: Semaphore,
    timeout_ms: u64,
    max_output_tokens: usize,
    vocab: Arc<Vocabulary>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelSetupError {
    #[error(transparent)]
    Config(#[from] TranslatorConfigError),
    #[error("cannot build HTTP client: {0}")]
    Http(#[from] reqwest::Error),
}

impl ModelEndpointTranslator {
    pub fn new(config: &TranslatorConfig, vocab: Arc<Vocabulary>) -> Result<Self, ModelSetupError> {
        config.validate()?;
        let url = config
            .endpoint_url
            .clone()
            .ok_or(TranslatorConfigError::MissingEndpointUrl)?;
        let http = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()?;
        Ok(Self {
            url,
            http,
            permits: Semaphore::new(config.max_in_flight),
            timeout_ms: config.timeout_ms,
            max_output_tokens: config.max_output_tokens,
            vocab,
        })
    }

    fn transport_error(&self, e: reqwest::Error) -> TranslateError {
        if e.is_timeout() {
            TranslateError::EndpointTimeout {
                timeout_ms: self.timeout_ms,
            }
        } else {
            TranslateError::EndpointUnavailable { message: e.to_string() }
        }
    }
}

#[async_trait]
impl Translator for ModelEndpointTranslator {
    async fn translate(&self, question: &str) -> Result<Translation, TranslateError> {
        let question = question.trim();
        if question.is_empty() {
            return Err(TranslateError::EmptyQuestion);
        }
        let _permit = self.permits.acquire().await.expect("semaphore is never closed");
        let resp = self
            .http
            .post(&self.url)
            .json(&ModelRequest { question })
            .send()
            .await
            .map_err(|e| self.transport_error(e))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(TranslateError::EndpointUnavailable {
                message: format!("HTTP {}", status.as_u16()),
            });
        }
        let body = resp.text().await.map_err(|e| self.transport_error(e))?;
        let raw = match serde_json::from_str::<ModelResponse>(&body) {
            Ok(r) => r.tokens,
            Err(e) => {
                return Err(TranslateError::MalformedModelOutput {
                    raw: body,
                    error: format!("response is not {{\"tokens\": string}}: {e}"),
                })
            }
        };
        let count = raw.split_whitespace().count();
        if count > self.max_output_tokens {
            return Err(TranslateError::MalformedModelOutput {
                raw,
                error: format!("{count} tokens exceed the limit of {}", self.max_output_tokens),
            });
        }
        match parse(&raw, &self.vocab) {
            Ok(form) => Ok(Translation {
                text: form.serialize(),
                form,
            }),
            Err(e) => Err(TranslateError::malformed(raw, &e)),
        }
    }
}
