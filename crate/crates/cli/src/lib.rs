//! The `debate-arena` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use debate_arena_core::config::AppConfig;
use debate_arena_core::gateway::{Gateway, ProviderConfig};
use debate_arena_core::par::Execution;
use debate_arena_core::selfplay::{
    evolution_csv, export_evolution, export_metrics, metrics_csv, run_evolution_experiment, run_selfplay, summarize,
    EvolutionConfig, FitnessProfile, SelfPlayConfig,
};
use debate_arena_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "debate-arena", version, about = "Offline experiments for the debate arena")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProviderChoice {
    Stub,
    Http,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Profile {
    Margin,
    #[value(name = "pathos_favoring", alias = "pathos-favoring")]
    PathosFavoring,
    #[value(name = "logos_favoring", alias = "logos-favoring")]
    LogosFavoring,
}

impl From<Profile> for FitnessProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Margin => FitnessProfile::Margin,
            Profile::PathosFavoring => FitnessProfile::PathosFavoring,
            Profile::LogosFavoring => FitnessProfile::LogosFavoring,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Play engine-vs-engine debates and export per-debate metrics.
    Selfplay {
        #[arg(long)]
        debates: usize,
        #[arg(long, default_value_t = 3)]
        rounds: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ProviderChoice::Stub)]
        provider: ProviderChoice,
        /// CSV destination; without it the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Provider and engine settings for `--provider http`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Play debates one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Evolve a population under a synthetic fitness profile.
    Evolve {
        #[arg(long)]
        generations: u64,
        #[arg(long, default_value_t = 20)]
        population: usize,
        #[arg(long, value_enum, default_value_t = Profile::Margin)]
        profile: Profile,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print debate topics.
    Topics {
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Storage(e)
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> debate_arena_core::Result<()> {
    match command {
        Command::Selfplay {
            debates,
            rounds,
            seed,
            provider,
            out: path,
            config,
            sequential,
        } => {
            let app = AppConfig::resolve(config.as_deref())?;
            let providers = match provider {
                ProviderChoice::Stub => ProviderConfig::all_stub(),
                ProviderChoice::Http => app.providers.clone(),
            };
            let run = SelfPlayConfig {
                debates,
                seed,
                rounds,
                providers,
                engine: app.engine.clone(),
                execution: if sequential {
                    Execution::Sequential
                } else {
                    Execution::default()
                },
            };
            let rows = run_selfplay(&run)?;
            let summary = summarize(&rows)?;
            match path {
                Some(p) => {
                    export_metrics(&rows, &p)?;
                    writeln!(out, "{summary}").map_err(io)?;
                }
                None => {
                    write!(out, "{}", metrics_csv(&rows)?).map_err(io)?;
                    writeln!(err, "{summary}").map_err(io)?;
                }
            }
        }
        Command::Evolve {
            generations,
            population,
            profile,
            seed,
            out: path,
        } => {
            let cfg = EvolutionConfig::new(generations, population, profile.into(), seed);
            let rows = run_evolution_experiment(&cfg)?;
            let last = rows.last().expect("at least one generation");
            match path {
                Some(p) => export_evolution(&rows, &p)?,
                None => write!(out, "{}", evolution_csv(&rows)?).map_err(io)?,
            }
            writeln!(
                err,
                "final mean weights: ethos {:.3}, pathos {:.3}, logos {:.3}; best fitness {:.3}",
                last.mean_ethos, last.mean_pathos, last.mean_logos, last.best_fitness
            )
            .map_err(io)?;
        }
        Command::Topics { count, seed, config } => {
            let app = AppConfig::resolve(config.as_deref())?;
            let gateway = Gateway::new(&app.providers)?;
            for topic in gateway.generate_topics(count, seed)? {
                writeln!(out, "{topic}").map_err(io)?;
            }
        }
    }
    Ok(())
}
