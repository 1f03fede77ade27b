//! Service configuration, loaded from TOML. Relative paths are resolved
//! against the directory of the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::Datelike;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linker::{DblpSearchClient, LinkerConfig};
use crate::logical_form::{ManifestError, Vocabulary};
use crate::session::{Pipeline, SessionSettings};
use crate::sparql::{ClientConfigError, EndpointConfig, SparqlClient};
use crate::templates::{TemplateBase, TemplateStoreError, DEFAULT_TOP_K};
use crate::translator::{
    ModelEndpointTranslator, ModelSetupError, PatternError, RuleBasedTranslator, Translator, TranslatorConfig,
    TranslatorConfigError, TranslatorMode,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemplatesConfig {
    /// Template base file written by `build-templates`.
    pub path: Option<PathBuf>,
    pub k: usize,
}

impl Default for TemplatesConfig {
    fn default() -> Self {
        Self {
            path: None,
            k: DEFAULT_TOP_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    /// Schema manifest; the bundled DBLP manifest when absent.
    pub schema: Option<PathBuf>,
    pub translator: TranslatorConfig,
    pub linker: LinkerConfig,
    pub endpoint: EndpointConfig,
    pub templates: TemplatesConfig,
    pub session: SessionSettings,
    pub server: ServerConfig,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Schema(#[from] ManifestError),
    #[error(transparent)]
    Translator(#[from] TranslatorConfigError),
    #[error(transparent)]
    Patterns(#[from] PatternError),
    #[error(transparent)]
    Model(#[from] ModelSetupError),
    #[error(transparent)]
    Client(#[from] ClientConfigError),
    #[error(transparent)]
    Templates(#[from] TemplateStoreError),
    #[error("templates.k and linker.display_count must be positive")]
    ZeroCount,
}

impl AppConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: AppConfig = toml::from_str(text)?;
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut() {
                if path.is_relative() {
                    *path = base_dir.join(&*path);
                }
            }
        };
        resolve(&mut cfg.schema);
        resolve(&mut cfg.translator.patterns);
        resolve(&mut cfg.linker.fixture_dir);
        resolve(&mut cfg.endpoint.fixture_dir);
        resolve(&mut cfg.templates.path);
        cfg.translator.validate()?;
        if cfg.templates.k == 0 || cfg.linker.display_count == 0 {
            return Err(ConfigError::ZeroCount);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, dir)
    }

    pub fn vocabulary(&self) -> Result<Vocabulary, ConfigError> {
        Ok(match &self.schema {
            Some(p) => Vocabulary::load(p)?,
            None => Vocabulary::dblp(),
        })
    }

    pub fn reference_year(&self) -> i64 {
        self.translator
            .reference_year
            .unwrap_or_else(|| chrono::Local::now().year() as i64)
    }

    pub fn translator(&self, vocab: Arc<Vocabulary>) -> Result<Arc<dyn Translator>, ConfigError> {
        Ok(match self.translator.mode {
            TranslatorMode::RuleBased => {
                let year = self.reference_year();
                Arc::new(match &self.translator.patterns {
                    Some(p) => RuleBasedTranslator::load(p, vocab, year)?,
                    None => RuleBasedTranslator::bundled(vocab, year),
                })
            }
            TranslatorMode::ModelEndpoint => Arc::new(ModelEndpointTranslator::new(&self.translator, vocab)?),
        })
    }

    pub fn template_base(&self, vocab: &Vocabulary) -> Result<TemplateBase, ConfigError> {
        Ok(match &self.templates.path {
            Some(p) => TemplateBase::load(p, vocab)?,
            None => TemplateBase::default(),
        })
    }

    /// Wires the live clients described by this config.
    pub fn pipeline(&self) -> Result<Pipeline, ConfigError> {
        let vocab = Arc::new(self.vocabulary()?);
        Ok(Pipeline {
            translator: self.translator(vocab.clone())?,
            search: Arc::new(DblpSearchClient::new(self.linker.clone())?),
            executor: Arc::new(SparqlClient::new(self.endpoint.clone(), vocab.clone())?),
            templates: Arc::new(self.template_base(&vocab)?),
            top_k: self.templates.k,
            candidates_per_mention: self.linker.display_count,
            vocab,
        })
    }
}
