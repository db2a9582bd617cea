//! `formsense remote`: session commands against a running service.

use std::path::PathBuf;

use clap::Subcommand;
use formsense_client::Client;
use formsense_core::api::{AnalyzeRequest, CreateSession};
use formsense_core::model::Rule;

use crate::commands::{emit, session_tables, to_json, write_file, Context};
use crate::error::CliError;
use crate::inputs;

#[derive(Debug, Subcommand)]
pub enum RemoteCommand {
    /// Create a session; product dimensions come from rules.csv.
    Create {
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Print a session.
    Show { id: String },
    /// Record a dissimilarity judgment (0 identical .. 3 very different).
    Compare { id: String, i: usize, j: usize, value: u8 },
    /// Per-product comparison counts against the minimum of 3.
    Coverage { id: String },
    /// Close stage 1 (fails while a product has fewer than 3 comparisons).
    CompleteStage1 { id: String },
    /// Upload stage-2 scores from appeal.csv.
    Appeal {
        id: String,
        #[arg(long)]
        appeal: Option<PathBuf>,
    },
    /// Upload stage-3 codes from rules.csv.
    Rules {
        id: String,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Run the analysis on the server and print the report.
    Analyze {
        id: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a local session.json into the service.
    Upload { session: PathBuf },
    /// Save a session as session.json (readable by `report --session`).
    Download {
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write dissim.csv, appeal.csv and rules.csv into this directory.
        #[arg(long)]
        tables: Option<PathBuf>,
    },
    /// Fetch a product profile SVG.
    Profile {
        product: usize,
        #[arg(long)]
        rule: Option<String>,
        #[arg(long, requires = "rule")]
        delta: Option<f64>,
        #[arg(long)]
        session: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(ctx: &Context, url: &str, command: RemoteCommand) -> Result<(), CliError> {
    let client = Client::new(url).map_err(|e| CliError::validation("remote", e.to_string()))?;
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    runtime.block_on(execute(ctx, &client, command))
}

async fn execute(ctx: &Context, client: &Client, command: RemoteCommand) -> Result<(), CliError> {
    let text = match command {
        RemoteCommand::Create { id, rules } => {
            let (_, dims) = ctx.resolver.rules(rules.as_deref())?;
            let req = CreateSession { id, dims: dims.into_values().collect(), labels: None };
            to_json(&client.create_session(&req).await?)
        }
        RemoteCommand::Show { id } => to_json(&client.session(&id).await?),
        RemoteCommand::Compare { id, i, j, value } => to_json(&client.record_comparison(&id, i, j, value).await?),
        RemoteCommand::Coverage { id } => to_json(&client.coverage(&id).await?),
        RemoteCommand::CompleteStage1 { id } => to_json(&client.complete_stage1(&id).await?),
        RemoteCommand::Appeal { id, appeal } => {
            to_json(&client.set_appeal(&id, &ctx.resolver.appeal(appeal.as_deref())?).await?)
        }
        RemoteCommand::Rules { id, rules } => {
            let (codes, _) = ctx.resolver.rules(rules.as_deref())?;
            to_json(&client.set_rules(&id, &codes).await?)
        }
        RemoteCommand::Analyze { id, k, out } => {
            let report = client.analyze(&id, AnalyzeRequest { k, seed: ctx.seed }).await?;
            return emit(out.as_deref(), &report.to_json());
        }
        RemoteCommand::Upload { session } => to_json(&client.upload(&inputs::load_session(&session)?).await?),
        RemoteCommand::Download { id, out, tables } => {
            let session = client.session(&id).await?;
            if let Some(dir) = tables {
                std::fs::create_dir_all(&dir)?;
                for (name, text) in session_tables(&session) {
                    write_file(&dir.join(name), &text)?;
                }
            }
            let mut text = session.to_json()?;
            text.push('\n');
            return emit(out.as_deref(), &text);
        }
        RemoteCommand::Profile { product, rule, delta, session, out } => {
            let rule = rule
                .map(|r| r.parse::<Rule>().map_err(|e| CliError::validation("remote", e)))
                .transpose()?
                .map(|r| (r, delta));
            let svg = client.profile_svg(product, rule, session.as_deref()).await?;
            return emit(out.as_deref(), &svg);
        }
    };
    print!("{text}");
    Ok(())
}
