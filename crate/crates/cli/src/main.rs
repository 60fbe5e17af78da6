use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use newsdesk_core::features::FeatureMode;
use newsdesk_core::service::{fixtures, router, serve, AppState, Desk, LabelSource, RunOptions, ServiceError};

#[derive(Parser)]
#[command(name = "newsdesk", version, about = "Ingest, classify and translate diaspora-desk news")]
struct Cli {
    /// Desk configuration file.
    #[arg(long, short, global = true, default_value = "fixtures/config.json")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Poll every permitted source, store new articles and classify them.
    Ingest {
        /// Train on the fixture labels after ingesting.
        #[arg(long)]
        train: bool,
        /// Store articles without assigning predicted labels.
        #[arg(long)]
        skip_classify: bool,
    },
    /// Train the classifier on labeled articles in the store.
    Train {
        #[arg(long)]
        mode: Option<FeatureMode>,
        #[arg(long, default_value = "fixture")]
        labels: LabelSource,
    },
    /// Predict labels for stored articles that have none.
    Classify,
    /// Translate one stored article into Bangla.
    Translate {
        article_id: String,
        #[arg(long)]
        backend: Option<String>,
    },
    /// Record an operator label for an article.
    Label { article_id: String, class_label: String },
    /// Write the article × feature matrix as CSV.
    Matrix {
        #[arg(long)]
        mode: Option<FeatureMode>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the JSON API (and the dashboard bundle when configured).
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
    /// Synthetic fixture corpus.
    Fixtures {
        #[command(subcommand)]
        action: FixturesCommand,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    Generate {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

fn coded(e: ServiceError) -> anyhow::Error {
    anyhow!("{}: {e}", e.code())
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn open(config: &PathBuf) -> Result<Desk> {
    Desk::open_path(config)
        .map_err(coded)
        .with_context(|| format!("opening desk from {}", config.display()))
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "newsdesk_core=info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();

    match cli.command {
        Command::Fixtures {
            action: FixturesCommand::Generate { seed, out },
        } => {
            let summary = fixtures::generate(seed, &out).map_err(coded)?;
            eprintln!("wrote {} files to {}", summary.files.len(), out.display());
        }
        Command::Ingest { train, skip_classify } => {
            let mut desk = open(&cli.config)?;
            let run = desk
                .run_pipeline(RunOptions {
                    train,
                    classify: !skip_classify,
                })
                .map_err(coded)?;
            print_json(&run)?;
        }
        Command::Train { mode, labels } => {
            let mut desk = open(&cli.config)?;
            let report = desk.train_from_store(labels, mode).map_err(coded)?;
            eprintln!(
                "trained on {} articles ({} held out), {} epochs, final loss {:.6}",
                report.n_train, report.n_holdout, report.model.training_meta.epochs_run, report.model.training_meta.final_loss
            );
            match &report.holdout {
                Some(eval) => print_json(eval)?,
                None => eprintln!("no held-out articles; nothing to evaluate"),
            }
        }
        Command::Classify => {
            let mut desk = open(&cli.config)?;
            let n = desk.classify_unlabeled().map_err(coded)?;
            println!("{}", serde_json::json!({ "classified": n }));
        }
        Command::Translate { article_id, backend } => {
            let mut desk = open(&cli.config)?;
            let job = desk.translate_article(&article_id, backend.as_deref()).map_err(coded)?;
            print_json(&job)?;
            if let Some(err) = &job.error {
                return Err(anyhow!("{}: {}", err.code, err.message));
            }
        }
        Command::Label { article_id, class_label } => {
            let mut desk = open(&cli.config)?;
            let rec = desk.annotate(&article_id, &class_label).map_err(coded)?;
            print_json(&rec)?;
        }
        Command::Matrix { mode, out } => {
            let mut desk = open(&cli.config)?;
            let x = desk.feature_matrix(mode).map_err(coded)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).with_context(|| path.display().to_string())?;
                    x.write_csv(file)?;
                }
                None => x.write_csv(std::io::stdout().lock())?,
            }
        }
        Command::Serve { port, bind } => {
            let desk = open(&cli.config)?;
            let app = router(AppState::new(desk));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((bind.as_str(), port))
                    .await
                    .with_context(|| format!("binding {bind}:{port}"))?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                serve(listener, app).await.context("serving")
            })?;
        }
    }
    Ok(())
}
