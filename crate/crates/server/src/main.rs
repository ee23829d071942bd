use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use coexplore_server::export::ExportFormat;
use coexplore_server::{api, scenario, AppConfig, Services};

#[derive(Parser)]
#[command(name = "coexplore", version, about = "Exploratory literature search service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
    /// Run create, generate, select-all, explore-all and export without a server.
    Explore {
        #[arg(long)]
        topic: String,
        #[arg(long, default_value_t = 6)]
        max_fields: usize,
        #[arg(long)]
        out: PathBuf,
        /// Replay recorded completions from this directory and search its corpus.json.
        #[arg(long)]
        scripted: Option<PathBuf>,
        /// json or markdown; inferred from the --out extension when omitted.
        #[arg(long)]
        format: Option<ExportFormat>,
        /// Export without turning themes into collections.
        #[arg(long)]
        no_collect: bool,
        /// Keep session files here instead of a temporary directory.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    #[command(hide = true)]
    RecordFixtures {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn infer_format(out: &std::path::Path) -> ExportFormat {
    match out.extension().and_then(|e| e.to_str()) {
        Some("md") | Some("markdown") => ExportFormat::Markdown,
        _ => ExportFormat::Json,
    }
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Serve { bind } => {
            let mut config = AppConfig::from_env()?;
            if let Some(b) = bind {
                config.bind_addr = b;
            }
            let addr = config.bind_addr.clone();
            let services = Services::build(config)?;
            let listener = tokio::net::TcpListener::bind(&addr)
                .await
                .with_context(|| format!("binding {addr}"))?;
            tracing::info!(%addr, "listening");
            axum::serve(listener, api::router(services))
                .with_graceful_shutdown(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
        }
        Command::Explore { topic, max_fields, out, scripted, format, no_collect, data_dir } => {
            let mut config = AppConfig::from_env()?;
            if let Some(dir) = scripted {
                config.use_scripted(dir);
            }
            let tmp = tempfile::tempdir()?;
            config.data_dir = data_dir.unwrap_or_else(|| tmp.path().to_path_buf());
            let format = format.unwrap_or_else(|| infer_format(&out));
            let services = Services::build(config)?;
            let doc = services
                .headless(&topic, max_fields, !no_collect, format)
                .await
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            std::fs::write(&out, doc).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::RecordFixtures { script, corpus, out } => {
            let script = scenario::Script::load(&script)?;
            print!("{}", scenario::record(&script, &corpus, &out).await?);
        }
    }
    Ok(())
}
