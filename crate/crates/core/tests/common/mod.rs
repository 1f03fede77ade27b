#![allow(dead_code)]

pub mod fakes;

use std::path::PathBuf;
use std::sync::Arc;

use dblpqa::config::AppConfig;
use dblpqa::session::{Pipeline, SessionService, SessionSettings};

pub const BERT_TITLE: &str = "BERT: Pre-training of Deep Bidirectional Transformers for Language Understanding";
pub const BERT_TOKEN: &str = "BERT:_Pre-training_of_Deep_Bidirectional_Transformers_for_Language_Understanding";
pub const BERT_FORMAL: &str = "https://dblp.org/rec/conf/naacl/DevlinCLT19";
pub const BERT_PREPRINT: &str = "https://dblp.org/rec/journals/corr/abs-1810-04805";
pub const DEVLIN: &str = "https://dblp.org/pid/69/4618";
pub const TIM_BERNERS_LEE: &str = "https://dblp.org/pid/b/TimBernersLee";

pub const WALKTHROUGH_QUESTION: &str = "please enumerate the authors of 'BERT: Pre-training of Deep Bidirectional Transformers for Language Understanding' along with the venues where they have published other papers.";
pub const RECENT_QUESTION: &str = "what papers has Tim Berners-Lee published in the last 5 years?";

/// The walkthrough logical form as printed, with its short mention.
pub const WALKTHROUGH_BLOCK: &str = "SELECT DISTINCT ?firstanswer ?secondanswer WHERE
{
    the_BERT_paper <authoredBy> ?firstanswer <dot>
    ?x <authoredBy> ?firstanswer <dot>
    ?x <publishedIn> ?secondanswer FILTER
    ( ?x <isnot> the_BERT_paper )
}";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn replay_config() -> AppConfig {
    AppConfig::load(&fixtures().join("replay.toml")).expect("replay config loads")
}

pub fn replay_pipeline() -> Arc<Pipeline> {
    Arc::new(replay_config().pipeline().expect("replay pipeline builds"))
}

pub fn replay_service() -> SessionService {
    SessionService::new(replay_pipeline(), SessionSettings::default())
}
