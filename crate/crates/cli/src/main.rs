use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use geoglyph::designspace::ValidationReport;
use geoglyph::pipeline::Engine;
use geoglyph_cli::{load_engine, router};
use serde_json::Value;

/// Deterministic geo-infographic renderer.
#[derive(Parser)]
#[command(name = "geoglyph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a spec and dataset to SVG.
    Render(RenderArgs),
    /// Print the validation report.
    Validate(Inputs),
    /// Print the validation report with ranked alternative channel sets.
    Suggest(Inputs),
    /// Run the HTTP render service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct Inputs {
    /// Spec JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Data JSON file (array of objects).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    boundaries: Boundaries,
}

#[derive(Args)]
struct Boundaries {
    /// GeoJSON boundaries; the bundled world fixture when absent.
    #[arg(long = "boundaries", env = "GEOGLYPH_BOUNDARIES")]
    path: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[command(flatten)]
    boundaries: Boundaries,
}

const INVALID: u8 = 2;

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn engine(b: &Boundaries) -> anyhow::Result<Engine> {
    load_engine(b.path.as_deref()).map_err(anyhow::Error::msg)
}

/// Sets `seed` on a spec that parses as a JSON object; anything else is
/// passed through for the engine to report.
fn with_seed(spec: String, seed: Option<u64>) -> String {
    let Some(seed) = seed else { return spec };
    match serde_json::from_str::<Value>(&spec) {
        Ok(Value::Object(mut map)) => {
            map.insert("seed".into(), seed.into());
            Value::Object(map).to_string()
        }
        _ => spec,
    }
}

fn verdict_code(report: &ValidationReport) -> ExitCode {
    if report.is_valid() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(INVALID)
    }
}

fn render(args: RenderArgs) -> anyhow::Result<ExitCode> {
    let spec = with_seed(read(&args.inputs.spec)?, args.seed);
    let data = read(&args.inputs.data)?;
    let out = engine(&args.inputs.boundaries)?.render(&spec, &data);
    let Some(svg) = out.svg else {
        eprintln!("{}", out.report.to_json());
        return Ok(ExitCode::from(INVALID));
    };
    match &args.out {
        Some(path) => std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{svg}"),
    }
    if out.report.issues.iter().any(|i| !i.is_error()) {
        eprintln!("{}", out.report.to_json());
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(args: Inputs, with_suggestions: bool) -> anyhow::Result<ExitCode> {
    let (spec, data) = (read(&args.spec)?, read(&args.data)?);
    let engine = engine(&args.boundaries)?;
    let mut report = engine.validate(&spec, &data);
    if with_suggestions && report.suggestions.is_empty() {
        if let Ok(list) = engine.suggest(&spec, &data) {
            report.suggestions = list;
        }
    }
    println!("{}", report.to_json());
    Ok(verdict_code(&report))
}

fn serve(args: ServeArgs) -> anyhow::Result<ExitCode> {
    let engine = Arc::new(engine(&args.boundaries)?);
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(engine))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(ExitCode::SUCCESS)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Render(args) => render(args),
        Command::Validate(args) => validate(args, false),
        Command::Suggest(args) => validate(args, true),
        Command::Serve(args) => serve(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
