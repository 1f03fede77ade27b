//! Regenerates the recorded fixtures under `crates/core/tests/fixtures`:
//! datasets, the template base, and search/SPARQL exchanges captured in
//! record mode against the local fake DBLP.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{ensure, Context, Result};

use dblpqa::config::AppConfig;
use dblpqa::eval::{evaluate, EvalMode};
use dblpqa::fixture::FixtureMode;
use dblpqa::logical_form::{parse_sparql, Vocabulary};
use dblpqa::query::{QueryOrigin, SparqlQuery};
use dblpqa::session::{default_examples, SessionService, SessionSettings};
use dblpqa::templates::TemplateBase;
use dblpqa_testkit::corpus::{dataset_json, CorpusItem, Generator, PREFIX};
use dblpqa_testkit::kg::{Kg, BERT_FORMAL, BERT_TITLE, DEFAULT_SEED, TIM_BERNERS_LEE};
use dblpqa_testkit::server::{FakeDblp, World};

const TRAIN_SIZE: usize = 2000;
const EVAL_SIZE: usize = 50;

const REPLAY_CONFIG: &str = r#"# Offline configuration: every external call is answered from the
# recorded fixtures next to this file.

[translator]
mode = "rule-based"
reference_year = 2024

[linker]
fixture_mode = "replay"
fixture_dir = "search"

[endpoint]
fixture_mode = "replay"
fixture_dir = "sparql"

[templates]
path = "templates.json"
k = 5
"#;

pub const WALKTHROUGH_QUESTION: &str = "please enumerate the authors of 'BERT: Pre-training of Deep Bidirectional Transformers for Language Understanding' along with the venues where they have published other papers.";
pub const RECENT_QUESTION: &str = "what papers has Tim Berners-Lee published in the last 5 years?";

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// The two example questions with hand-written gold queries; answers come
/// from executing those queries through the recording client.
fn example_items(kg: &Kg) -> Vec<(String, String, String)> {
    let _ = kg;
    vec![
        (
            "X0001".to_string(),
            WALKTHROUGH_QUESTION.to_string(),
            format!("{PREFIX}SELECT DISTINCT ?firstanswer ?secondanswer WHERE {{ <{BERT_FORMAL}> dblp:authoredBy ?firstanswer . ?x dblp:authoredBy ?firstanswer . ?x dblp:publishedIn ?secondanswer FILTER(?x != <{BERT_FORMAL}>) }}"),
        ),
        (
            "X0002".to_string(),
            RECENT_QUESTION.to_string(),
            format!("{PREFIX}SELECT DISTINCT ?answer WHERE {{ ?answer dblp:authoredBy <{TIM_BERNERS_LEE}> . ?answer dblp:yearOfPublication ?year FILTER(?year >= 2019) }}"),
        ),
    ]
}

#[tokio::main]
async fn main() -> Result<()> {
    let root: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures"));
    let datasets = root.join("datasets");
    for sub in ["search", "sparql"] {
        let dir = root.join(sub);
        if dir.exists() {
            std::fs::remove_dir_all(&dir).with_context(|| format!("clearing {}", dir.display()))?;
        }
        std::fs::create_dir_all(&dir)?;
    }
    std::fs::create_dir_all(&datasets)?;

    let kg = Kg::new(DEFAULT_SEED);
    let vocab = Vocabulary::dblp();
    let train = Generator::new(&kg, 1).generate("T", TRAIN_SIZE);
    let eval50 = Generator::new(&kg, 2).generate("E", EVAL_SIZE);
    write(&datasets.join("train.json"), &dataset_json(&train))?;
    write(&datasets.join("eval50.json"), &dataset_json(&eval50))?;

    let (base, report) = TemplateBase::build(
        "datasets/train.json",
        train.iter().map(|i| (i.id.as_str(), i.gold_query.as_str())),
        &vocab,
    );
    base.save(&root.join("templates.json"))?;
    println!(
        "train: {} items, {} templates, {} skipped",
        report.items,
        report.templates,
        report.skipped.len()
    );
    write(&root.join("replay.toml"), REPLAY_CONFIG)?;

    let world = Arc::new(World {
        kg: Kg::new(DEFAULT_SEED),
        vocab: Vocabulary::dblp(),
    });
    let fake = FakeDblp::start(world).await?;
    let mut cfg = AppConfig::load(&root.join("replay.toml"))?;
    cfg.linker.fixture_mode = FixtureMode::Record;
    cfg.linker.base_url = fake.base_url();
    cfg.endpoint.fixture_mode = FixtureMode::Record;
    cfg.endpoint.url = fake.sparql_url();
    let pipeline = Arc::new(cfg.pipeline()?);

    // Example questions with gold answers from the recording endpoint.
    let mut examples = Vec::new();
    for (id, question, gold) in example_items(&kg) {
        parse_sparql(&gold, &vocab)?;
        let table = pipeline
            .executor
            .execute(&SparqlQuery {
                text: gold.clone(),
                origin: QueryOrigin::UserEdited,
            })
            .await?;
        examples.push(CorpusItem {
            id,
            family: "example",
            question,
            gold_query: gold,
            answers: table,
        });
    }
    write(&datasets.join("examples.json"), &dataset_json(&examples))?;

    let svc = SessionService::new(pipeline.clone(), SessionSettings::default());

    // Walkthrough and the interactions the tests replay.
    let s = svc.create_session(WALKTHROUGH_QUESTION).await?;
    ensure!(s.stage_errors.is_clean(), "walkthrough failed: {:?}", s.stage_errors);
    let generated = s.query.clone().context("walkthrough query")?.text;
    svc.select_entity(&s.id, 0, 1).await?;
    svc.select_entity(&s.id, 0, 0).await?;
    for t in 0..s.template_matches.len() {
        svc.select_template(&s.id, t).await?;
    }
    svc.select_template(&s.id, 0).await?;
    svc.run_query(&s.id, &format!("{generated} LIMIT 1")).await?;
    svc.run_query(&s.id, "garbage").await?;
    svc.regenerate(&s.id).await?;

    for q in [
        RECENT_QUESTION.to_string(),
        format!("Was '{BERT_TITLE}' published in 2017?"),
        "Who are the authors of 'zzqx qqzw'?".to_string(),
    ] {
        svc.create_session(&q).await?;
    }
    for ex in default_examples() {
        svc.create_session(&ex.text).await?;
    }

    let eval_items: Vec<_> = eval50.iter().map(CorpusItem::to_dataset_item).collect();
    let gold = evaluate(&pipeline, &eval_items, EvalMode::GoldLogicalForm, 4).await;
    println!("gold-lf on eval50: macro F1 {:.4}, {} deviations", gold.macro_f1, gold.deviations().count());
    let example_items: Vec<_> = examples.iter().map(CorpusItem::to_dataset_item).collect();
    let full = evaluate(&pipeline, &example_items, EvalMode::Full, 2).await;
    println!("full on examples: macro F1 {:.4}", full.macro_f1);

    let count = |d: &str| std::fs::read_dir(root.join(d)).map(|r| r.count()).unwrap_or(0);
    println!("recorded {} search and {} SPARQL fixtures", count("search"), count("sparql"));
    Ok(())
}
