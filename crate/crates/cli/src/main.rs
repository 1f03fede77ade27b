mod render;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use dblpqa::config::AppConfig;
use dblpqa::eval::{evaluate, load_dataset, EvalMode};
use dblpqa::session::{router, SessionService};
use dblpqa::templates::TemplateBase;

#[derive(Parser)]
#[command(name = "dblpqa", version, about = "Question answering over the DBLP knowledge graph")]
struct Cli {
    /// TOML configuration; built-in defaults (live DBLP services) when absent.
    #[arg(long, global = true, env = "DBLPQA_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the JSON API.
    Serve {
        /// Overrides `server.bind`.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Run the whole pipeline once and print every stage.
    Ask {
        question: String,
        /// Print the session state as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Build a template base from a dataset's gold queries.
    BuildTemplates {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the pipeline against a dataset.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "full")]
        mode: EvalMode,
        /// Where to write the JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Items evaluated concurrently.
        #[arg(long, default_value_t = 4)]
        parallelism: usize,
    },
}

fn load_config(path: Option<&Path>) -> Result<AppConfig> {
    match path {
        Some(p) => AppConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(AppConfig::default()),
    }
}

async fn serve(cfg: AppConfig, bind: Option<String>) -> Result<()> {
    let pipeline = Arc::new(cfg.pipeline()?);
    let service = Arc::new(SessionService::new(pipeline, cfg.session));
    let addr = bind.unwrap_or(cfg.server.bind);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

async fn ask(cfg: AppConfig, question: &str, json: bool) -> Result<()> {
    let service = SessionService::new(Arc::new(cfg.pipeline()?), cfg.session);
    let state = service.create_session(question).await?;
    if json {
        println!("{}", serde_json::to_string_pretty(&state)?);
    } else {
        print!("{}", render::session(&state));
    }
    Ok(())
}

fn build_templates(cfg: AppConfig, dataset: &Path, out: &Path) -> Result<()> {
    let vocab = cfg.vocabulary()?;
    let items = load_dataset(dataset)?;
    let (base, report) = TemplateBase::build(
        &dataset.display().to_string(),
        items.iter().map(|i| (i.id.as_str(), i.gold_query.as_str())),
        &vocab,
    );
    base.save(out)?;
    println!(
        "{} items, {} templates, {} skipped -> {}",
        report.items,
        report.templates,
        report.skipped.len(),
        out.display()
    );
    for s in &report.skipped {
        println!("  skipped {}: {}", s.id, s.message);
    }
    Ok(())
}

async fn eval(cfg: AppConfig, dataset: &Path, mode: EvalMode, report: Option<&Path>, parallelism: usize) -> Result<()> {
    let items = load_dataset(dataset)?;
    let pipeline = cfg.pipeline()?;
    let result = evaluate(&pipeline, &items, mode, parallelism).await;
    if let Some(path) = report {
        std::fs::write(path, result.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", result.table());
    Ok(())
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Serve { bind } => serve(cfg, bind).await,
        Command::Ask { question, json } => ask(cfg, &question, json).await,
        Command::BuildTemplates { dataset, out } => build_templates(cfg, &dataset, &out),
        Command::Eval {
            dataset,
            mode,
            report,
            parallelism,
        } => eval(cfg, &dataset, mode, report.as_deref(), parallelism).await,
    }
}
