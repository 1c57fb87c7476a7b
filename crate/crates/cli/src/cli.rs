use std::fs::OpenOptions;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wia_core::demo::{run_demo, DemoReport};
use wia_core::store::{load_allowlist, save_allowlist, AllowlistError};
use wia_core::textlog::LineSink;
use wia_core::{parse_mac, Allowlist, AuthPolicy, LinkConfig, System, SystemClock, SystemConfig};

use crate::api::{self, ApiConfig, AppState, ADMIN_TOKEN_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "wia",
    version,
    about = "Allowlist-gated device control over a simulated LoRa link"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the gateway, simulated radio and node behind the HTTP API.
    Serve(ServeArgs),
    /// Edit an allowlist file offline.
    Allowlist {
        #[command(subcommand)]
        action: AllowlistAction,
    },
    /// Replay the four-command demo script on a lossless link.
    Demo,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, value_name = "PATH")]
    pub allowlist: PathBuf,
    /// JSON-lines audit log, appended to.
    #[arg(long, value_name = "PATH")]
    pub audit: PathBuf,
    #[arg(long, default_value_t = 0.0, value_parser = parse_probability)]
    pub loss: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub propagation_ms: f64,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    #[arg(long, default_value_t = wia_core::auth::DEFAULT_LOCK_SECS)]
    pub lock_secs: u64,
    /// File holding the admin token. Falls back to the WIA_ADMIN_TOKEN variable.
    #[arg(long, value_name = "PATH")]
    pub admin_token_file: Option<PathBuf>,
    /// Browser origin allowed to call the API. Repeatable.
    #[arg(long = "cors-origin", value_name = "ORIGIN")]
    pub cors_origins: Vec<String>,
    /// Also append the transmitter log to this file.
    #[arg(long, value_name = "PATH")]
    pub transmitter_log: Option<PathBuf>,
    /// Also append the receiver log to this file.
    #[arg(long, value_name = "PATH")]
    pub receiver_log: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AllowlistAction {
    /// Add an entry or relabel an existing one.
    Add {
        #[arg(long, value_name = "PATH")]
        file: PathBuf,
        mac: String,
        label: Option<String>,
    },
    /// Remove an entry.
    Rm {
        #[arg(long, value_name = "PATH")]
        file: PathBuf,
        mac: String,
    },
    /// Print entries in canonical form.
    List {
        #[arg(long, value_name = "PATH")]
        file: PathBuf,
    },
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("must be within [0, 1], got {p}"))
    }
}

/// Runs a parsed command. Returns the process exit code on success.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Serve(args) => serve(args).map(|()| 0),
        Command::Allowlist { action } => allowlist(action, &mut std::io::stdout()).map(|()| 0),
        Command::Demo => {
            let report = run_demo()?;
            print_demo(&report, &mut std::io::stdout())?;
            Ok(if report.matches() { 0 } else { 1 })
        }
    }
}

pub fn print_demo(report: &DemoReport, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "--- transmitter ---")?;
    for line in &report.transmitter {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "--- receiver ---")?;
    for line in &report.receiver {
        writeln!(out, "{line}")?;
    }
    if !report.matches() {
        writeln!(out, "--- MISMATCH against reference transcript ---")?;
    }
    Ok(())
}

fn load_or_empty(path: &Path) -> Result<Allowlist> {
    match load_allowlist(path) {
        Ok(a) => Ok(a),
        Err(AllowlistError::FileMissing(_)) => Ok(Allowlist::new()),
        Err(e) => Err(e.into()),
    }
}

pub fn allowlist(action: AllowlistAction, out: &mut impl Write) -> Result<()> {
    match action {
        AllowlistAction::Add { file, mac, label } => {
            let mac = parse_mac(&mac)?;
            let label = label.unwrap_or_default();
            let label = label.trim();
            if !wia_core::store::is_valid_label(label) {
                bail!("label contains control characters");
            }
            let mut al = load_or_empty(&file)?;
            al.insert(mac, label);
            save_allowlist(&al, &file)?;
            writeln!(out, "added {mac}")?;
        }
        AllowlistAction::Rm { file, mac } => {
            let mac = parse_mac(&mac)?;
            let mut al = load_allowlist(&file)?;
            if al.remove(&mac).is_none() {
                bail!("{mac} is not in {}", file.display());
            }
            save_allowlist(&al, &file)?;
            writeln!(out, "removed {mac}")?;
        }
        AllowlistAction::List { file } => {
            for (mac, label) in load_allowlist(&file)?.iter() {
                if label.is_empty() {
                    writeln!(out, "{mac}")?;
                } else {
                    writeln!(out, "{mac} {label}")?;
                }
            }
        }
    }
    Ok(())
}

fn admin_token(file: Option<&Path>) -> Result<Option<String>> {
    let token = match file {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .with_context(|| format!("reading admin token from {}", p.display()))?,
        ),
        None => std::env::var(ADMIN_TOKEN_ENV).ok(),
    };
    Ok(token
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty()))
}

fn append_sink(path: &Path) -> Result<LineSink> {
    let f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    Ok(Box::new(f))
}

fn serve(args: ServeArgs) -> Result<()> {
    let allowlist = load_allowlist(&args.allowlist)?;
    let api_config = ApiConfig {
        listen_address: args.listen,
        admin_token: admin_token(args.admin_token_file.as_deref())?,
        cors_origins: args.cors_origins,
    };
    if args.lock_secs == 0 {
        bail!("--lock-secs must be positive");
    }

    let mut transmitter_mirrors: Vec<LineSink> = vec![Box::new(std::io::stdout())];
    if let Some(p) = &args.transmitter_log {
        transmitter_mirrors.push(append_sink(p)?);
    }
    let mut receiver_mirrors: Vec<LineSink> = vec![Box::new(std::io::stdout())];
    if let Some(p) = &args.receiver_log {
        receiver_mirrors.push(append_sink(p)?);
    }

    let config = SystemConfig {
        link: LinkConfig {
            loss_probability: args.loss,
            propagation_delay_ms: args.propagation_ms,
            rng_seed: args.seed,
            ..LinkConfig::default()
        },
        auth: AuthPolicy::with_lock_secs(args.lock_secs),
        allowlist,
        allowlist_path: Some(args.allowlist),
        audit_path: Some(args.audit),
        transmitter_mirrors,
        receiver_mirrors,
        ..SystemConfig::default()
    };
    let system = System::build(config, Arc::new(SystemClock))?;
    let running = system.spawn();

    if api_config.admin_token.is_none() {
        eprintln!(
            "warning: no admin token configured; allowlist endpoints will refuse all requests"
        );
    }
    let state = AppState {
        gateway: running.gateway().clone(),
        node: running.node().clone(),
        admin_token: api_config.admin_token.as_deref().map(Arc::from),
    };
    let app = api::router(state, &api_config.cors_origins);

    let rt = tokio::runtime::Runtime::new()?;
    let result = rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(api_config.listen_address)
            .await
            .with_context(|| format!("binding {}", api_config.listen_address))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .context("server error")
    });
    running.stop();
    result
}
