//! `formsense`: pipeline runner, figure emitter and service launcher.
//!
//! Exit status is 0 on success, 1 when an input fails validation and 2 on a
//! runtime error. Errors go to stderr as one JSON object per line.

mod commands;
mod error;
mod inputs;
mod remote;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;
use crate::inputs::Resolver;

#[derive(Debug, Parser)]
#[command(name = "formsense", version, about = "Staged subjective evaluation of parametric glass forms")]
struct Cli {
    /// Directory holding dissim.csv, appeal.csv and rules.csv; the bundled
    /// tables are used when unset.
    #[arg(long, global = true, env = "FORMSENSE_FIXTURES")]
    fixtures: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Input tables; each falls back to the fixture directory, then the bundled copy.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long)]
    dissim: Option<PathBuf>,
    #[arg(long)]
    appeal: Option<PathBuf>,
    /// rules.csv: id,d1,d2,d3,R1,R2,R3.
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, default_value_t = 50)]
    starts: usize,
    /// Constrain the proportionality factors k to be non-negative.
    #[arg(long)]
    k_nonneg: bool,
    /// Use the literal derivative form, which scales the cross terms by the
    /// differentiation variable, instead of the exact gradient.
    #[arg(long = "eq4-as-printed")]
    as_printed: bool,
    /// Ridge weight on the quadratic coefficients.
    #[arg(long, default_value_t = 1e-6)]
    ridge: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check input files; exits 1 when any violates its rules.
    Validate {
        #[command(flatten)]
        data: DataArgs,
        /// Validate a session.json instead of the tables.
        #[arg(long)]
        session: Option<PathBuf>,
    },
    /// Embed the dissimilarities with sparse metric MDS.
    Mds {
        #[arg(long)]
        dissim: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Write the configuration here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the perceptual-map SVG (2 dimensions only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Regress appeal onto a 2-D configuration (vector model).
    Prefmap {
        /// Configuration CSV from `mds`; computed from the dissimilarities when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        dissim: Option<PathBuf>,
        #[arg(long)]
        appeal: Option<PathBuf>,
        /// Significance levels to test (repeatable).
        #[arg(long = "p-level")]
        p_levels: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Also write the appeal-vector SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Fit the quadratic appeal model to the scores and rule judgments.
    Fit {
        #[arg(long)]
        appeal: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Response surface at fixed d1: colormap and iso-appeal lines.
    Surface {
        /// Model JSON (a bare model, a `fit` result or a report); the bundled
        /// reference coefficients when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 8.0)]
        d1: f64,
        #[arg(long, default_value = "3:7")]
        d2_range: String,
        #[arg(long, default_value = "6:9.5")]
        d3_range: String,
        /// Comma-separated appeal levels; five evenly spaced levels when absent.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long, default_value_t = 50)]
        resolution: usize,
        /// Write surface.csv, colormap.svg, iso_lines.csv and iso_lines.svg here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Render a glass profile (SVG) and optionally its revolved mesh (STL).
    Render {
        /// Profile template JSON; the bundled template when absent.
        #[arg(long)]
        template: Option<PathBuf>,
        /// Product whose dimensions come from rules.csv.
        #[arg(long, conflicts_with = "dims")]
        product: Option<usize>,
        /// Explicit dimensions `d1,d2,d3` in cm.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<f64>>,
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Apply this rule (R1, R2 or R3) first.
        #[arg(long)]
        rule: Option<String>,
        /// Rule step in cm; 10% of the dimension when absent.
        #[arg(long, requires = "rule")]
        delta: Option<f64>,
        #[arg(long, default_value_t = formsense_core::geometry::DEFAULT_SAMPLES_PER_SEGMENT)]
        samples: usize,
        /// Write the SVG here; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        stl: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        segments: usize,
    },
    /// Full pipeline: report JSON plus every figure.
    Report {
        #[command(flatten)]
        data: DataArgs,
        /// Read all three stages from a session.json.
        #[arg(long, conflicts_with_all = ["dissim", "appeal", "rules"])]
        session: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value = "report")]
        out_dir: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "sessions")]
        data_dir: PathBuf,
        /// Static assets (the built assessment UI) served under `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Talk to a running service.
    Remote {
        #[arg(long, env = "FORMSENSE_URL", default_value = "http://127.0.0.1:8080")]
        url: String,
        #[command(subcommand)]
        command: remote::RemoteCommand,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let resolver = Resolver { fixtures: cli.fixtures };
    let ctx = commands::Context { resolver, format: cli.format, seed: cli.seed };
    match cli.command {
        Command::Validate { data, session } => commands::validate(&ctx, &data, session.as_deref()),
        Command::Mds { dissim, k, restarts, out, svg } => {
            commands::mds(&ctx, dissim.as_deref(), k, restarts, out.as_deref(), svg.as_deref())
        }
        Command::Prefmap { config, dissim, appeal, p_levels, restarts, svg } => commands::prefmap(
            &ctx,
            config.as_deref(),
            dissim.as_deref(),
            appeal.as_deref(),
            &p_levels,
            restarts,
            svg.as_deref(),
        ),
        Command::Fit { appeal, rules, fit, out } => {
            commands::fit(&ctx, appeal.as_deref(), rules.as_deref(), &fit, out.as_deref())
        }
        Command::Surface { model, d1, d2_range, d3_range, levels, resolution, out_dir } => commands::surface(
            &ctx,
            model.as_deref(),
            d1,
            &d2_range,
            &d3_range,
            levels,
            resolution,
            out_dir.as_deref(),
        ),
        Command::Render { template, product, dims, rules, rule, delta, samples, out, stl, segments } => {
            commands::render(
                &ctx,
                &commands::RenderArgs {
                    template,
                    product,
                    dims,
                    rules,
                    rule,
                    delta,
                    samples,
                    out,
                    stl,
                    segments,
                },
            )
        }
        Command::Report { data, session, restarts, fit, out_dir } => {
            commands::report(&ctx, &data, session.as_deref(), restarts, &fit, &out_dir)
        }
        Command::Serve { host, port, data_dir, static_dir } => serve(&host, port, data_dir, static_dir),
        Command::Remote { url, command } => remote::run(&ctx, &url, command),
    }
}

fn serve(host: &str, port: u16, data_dir: PathBuf, static_dir: Option<PathBuf>) -> Result<(), CliError> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        formsense_service::serve(listener, &formsense_service::Config { data_dir, static_dir }).await
    })?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
