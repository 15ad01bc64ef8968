use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ranklabel::dataset::{ColumnKind, Dataset, Normalization};
use ranklabel::label::{render_html, render_json};
use ranklabel::request::RankingRequest;
use ranklabel::scoring::{ScoringSpec, DEFAULT_K};
use ranklabel::service::{serve, ServiceConfig, DEFAULT_BINS, DEFAULT_PORT};
use ranklabel::Error;

#[derive(Parser)]
#[command(name = "ranklabel", version, about = "Nutritional labels for score-based rankings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Html,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    None,
    Minmax,
    Zscore,
}

impl From<NormalizeArg> for Normalization {
    fn from(n: NormalizeArg) -> Self {
        match n {
            NormalizeArg::None => Normalization::None,
            NormalizeArg::Minmax => Normalization::Minmax,
            NormalizeArg::Zscore => Normalization::Zscore,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rank a CSV file and write its label.
    Label {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated `attribute=weight` pairs.
        #[arg(long)]
        weights: String,
        #[arg(long, value_enum, default_value = "none")]
        normalize: NormalizeArg,
        /// Binary categorical attribute tested for fairness.
        #[arg(long)]
        sensitive: String,
        /// Extra categorical attributes for the diversity widget.
        #[arg(long, value_delimiter = ',')]
        diversity: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Protected proportion; estimated from the data when omitted.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the inferred schema and per-attribute statistics as JSON.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        attr: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "RANKLABEL_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "RANKLABEL_DATA_DIR", default_value = "ranklabel-data")]
        data_dir: PathBuf,
        /// Directory of static UI assets served at `/`.
        #[arg(long, env = "RANKLABEL_UI_DIR")]
        ui_dir: Option<PathBuf>,
    },
}

fn read_input(path: &PathBuf) -> Result<Dataset, Error> {
    let bytes = std::fs::read(path)?;
    Dataset::load_csv(&bytes)
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn stats_json(ds: &Dataset, attr: Option<&str>, bins: usize) -> Result<serde_json::Value, Error> {
    let columns: Vec<_> = match attr {
        Some(name) => vec![ds.column(name)?],
        None => ds.columns().iter().collect(),
    };
    let attributes = columns
        .into_iter()
        .map(|c| {
            let mut entry = json!({
                "name": c.name(),
                "kind": c.kind(),
                "missing": c.missing_count(),
            });
            match c.kind() {
                ColumnKind::Numeric => {
                    if let Ok(stats) = ds.column_stats(c.name(), None) {
                        entry["stats"] = json!(stats);
                        entry["histogram"] = json!(ds.histogram(c.name(), bins)?);
                    }
                }
                ColumnKind::Categorical => entry["categories"] = json!(c.categories()),
            }
            Ok(entry)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(json!({
        "row_count": ds.row_count(),
        "source_digest": ds.source_digest(),
        "attributes": attributes,
    }))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Label {
            input,
            weights,
            normalize,
            sensitive,
            diversity,
            k,
            alpha,
            p,
            format,
            out,
        } => {
            let dataset = read_input(&input)?;
            let request = RankingRequest {
                weights: ScoringSpec::parse_weights(&weights)?,
                normalization: normalize.into(),
                sensitive_attribute: sensitive,
                diversity_attributes: diversity,
                k,
                alpha,
                p,
            };
            let (_, label) = request.evaluate(&dataset)?;
            let bytes = match format {
                Format::Json => render_json(&label),
                Format::Html => render_html(&label),
            };
            emit(out.as_ref(), &bytes)
        }
        Command::Stats { input, attr, bins } => {
            let dataset = read_input(&input)?;
            let value = stats_json(&dataset, attr.as_deref(), bins)?;
            let mut bytes = serde_json::to_vec_pretty(&value)?;
            bytes.push(b'\n');
            emit(None, &bytes)
        }
        Command::Serve {
            port,
            data_dir,
            ui_dir,
        } => {
            tracing_subscriber::fmt()
                .with_writer(std::io::stderr)
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .init();
            let config = ServiceConfig {
                port,
                data_dir,
                ui_dir,
                ..Default::default()
            };
            tokio::runtime::Runtime::new()?.block_on(serve(config))
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("ranklabel: error[{}]: {err}", err.code());
            ExitCode::from(1)
        }
    }
}
