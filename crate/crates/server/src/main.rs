use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use debate_arena_server::{build_state, serve, ServeOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

/// Debate arena HTTP server.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// TOML or JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Require a bearer token on API routes.
    #[arg(long, value_enum, default_value_t = Switch::Off)]
    auth: Switch,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let args = Args::parse();
    let options = ServeOptions {
        host: args.host,
        port: args.port,
        config: args.config,
        data_dir: args.data_dir,
        auth: matches!(args.auth, Switch::On),
    };
    let addr: SocketAddr = match format!("{}:{}", options.host, options.port).parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("invalid address: {e}");
            return ExitCode::from(2);
        }
    };
    let state = match build_state(&options) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("startup failed: {e}");
            return ExitCode::from(1);
        }
    };
    match serve(state, addr).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("server error: {e}");
            ExitCode::from(1)
        }
    }
}
