//! Question to logical form: a deterministic rule-based translator and an
//! adapter for an external sequence-to-sequence model service.

mod model;
mod rules;

use std::path::PathBuf;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logical_form::{LogicalForm, ParseError};

pub use model::{ModelEndpointTranslator, ModelSetupError};
pub use rules::{PatternError, PatternInfo, QuestionPattern, RuleBasedTranslator, SlotKind, DEFAULT_PATTERNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranslatorMode {
    #[default]
    RuleBased,
    ModelEndpoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TranslatorConfig {
    pub mode: TranslatorMode,
    /// Pattern file for rule-based mode; the bundled set when absent.
    pub patterns: Option<PathBuf>,
    /// Year that "last N years" counts back from; the current year when
    /// absent.
    pub reference_year: Option<i64>,
    pub endpoint_url: Option<String>,
    pub timeout_ms: u64,
    /// Model outputs with more whitespace-separated tokens are rejected.
    pub max_output_tokens: usize,
    /// Concurrent requests allowed to the model endpoint.
    pub max_in_flight: usize,
}

impl Default for TranslatorConfig {
    fn default() -> Self {
        Self {
            mode: TranslatorMode::RuleBased,
            patterns: None,
            reference_year: None,
            endpoint_url: None,
            timeout_ms: 30_000,
            max_output_tokens: 256,
            max_in_flight: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslatorConfigError {
    #[error("endpoint_url is required in model-endpoint mode")]
    MissingEndpointUrl,
    #[error("endpoint_url is only meaningful in model-endpoint mode")]
    UnexpectedEndpointUrl,
    #[error("timeout_ms must be positive")]
    ZeroTimeout,
    #[error("max_output_tokens and max_in_flight must be positive")]
    ZeroLimit,
}

impl TranslatorConfig {
    pub fn validate(&self) -> Result<(), TranslatorConfigError> {
        match (self.mode, &self.endpoint_url) {
            (TranslatorMode::ModelEndpoint, None) => return Err(TranslatorConfigError::MissingEndpointUrl),
            (TranslatorMode::RuleBased, Some(_)) => return Err(TranslatorConfigError::UnexpectedEndpointUrl),
            _ => {}
        }
        if self.timeout_ms == 0 {
            return Err(TranslatorConfigError::ZeroTimeout);
        }
        if self.max_output_tokens == 0 || self.max_in_flight == 0 {
            return Err(TranslatorConfigError::ZeroLimit);
        }
        Ok(())
    }
}

/// A successful translation: canonical text plus the parsed form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translation {
    pub text: String,
    pub form: LogicalForm,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum TranslateError {
    #[error("the question is empty")]
    EmptyQuestion,
    #[error("no question pattern matched: {detail}")]
    NoPatternMatched { detail: String },
    #[error("model endpoint unavailable: {message}")]
    EndpointUnavailable { message: String },
    #[error("model endpoint did not answer within {timeout_ms} ms")]
    EndpointTimeout { timeout_ms: u64 },
    /// The raw output is kept so template retrieval can still correct it.
    #[error("model output does not parse: {error}")]
    MalformedModelOutput { raw: String, error: String },
}

impl TranslateError {
    pub fn code(&self) -> &'static str {
        match self {
            TranslateError::EmptyQuestion => "EmptyQuestion",
            TranslateError::NoPatternMatched { .. } => "NoPatternMatched",
            TranslateError::EndpointUnavailable { .. } => "EndpointUnavailable",
            TranslateError::EndpointTimeout { .. } => "EndpointTimeout",
            TranslateError::MalformedModelOutput { .. } => "MalformedModelOutput",
        }
    }

    /// Token text that can still feed template correction.
    pub fn raw_output(&self) -> Option<&str> {
        match self {
            TranslateError::MalformedModelOutput { raw, .. } => Some(raw),
            _ => None,
        }
    }

    pub(crate) fn malformed(raw: String, error: &ParseError) -> Self {
        TranslateError::MalformedModelOutput {
            raw,
            error: error.to_string(),
        }
    }
}

#[async_trait]
pub trait Translator: Send + Sync {
    async fn translate(&self, question: &str) -> Result<Translation, TranslateError>;

    /// Introspection for documentation and tests; empty for model-backed
    /// translators.
    fn list_patterns(&self) -> Vec<PatternInfo> {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_invariants() {
        assert!(TranslatorConfig::default().validate().is_ok());
        let model = TranslatorConfig {
            mode: TranslatorMode::ModelEndpoint,
            ..Default::default()
        };
        assert_eq!(model.validate(), Err(TranslatorConfigError::MissingEndpointUrl));
        let rules_with_url = TranslatorConfig {
            endpoint_url: Some("http://x".into()),
            ..Default::default()
        };
        assert_eq!(rules_with_url.validate(), Err(TranslatorConfigError::UnexpectedEndpointUrl));
        let zero = TranslatorConfig {
            timeout_ms: 0,
            ..Default::default()
        };
        assert_eq!(zero.validate(), Err(TranslatorConfigError::ZeroTimeout));
    }
}
