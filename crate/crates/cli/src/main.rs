mod args;
mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::Parser;

use args::{Cli, Command};
use commands::Ctx;
use config::{Layers, Resolver};

fn init_logging(level: &str) -> Result<()> {
    let filter: log::LevelFilter = level
        .parse()
        .map_err(|_| anyhow!("invalid log level {level:?} (off, error, warn, info, debug, trace)"))?;
    env_logger::Builder::new()
        .filter_level(filter)
        .format(|buf, record| writeln!(buf, "[{}] {}", record.level().as_str().to_lowercase(), record.args()))
        .target(env_logger::Target::Stderr)
        .init();
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let layers = Layers::load(cli.config.as_deref())?;
    let r = Resolver::new(&layers);
    let level: String = r.or("log_level", cli.log_level.as_deref(), "info".to_string())?;
    init_logging(&level)?;
    let seed: u64 = r.or("seed", cli.seed.as_deref(), 1)?;
    let workers: usize = r.or("workers", cli.workers.as_deref(), 1)?;
    let ctx = Ctx { r, seed, workers };

    match &cli.command {
        Command::BuildShuffled(a) => commands::build_shuffled(&ctx, a),
        Command::TrainEmbed(a) => commands::train_embed(&ctx, a),
        Command::Nearest(a) => commands::nearest(&ctx, a),
        Command::InduceLexicon(a) => commands::induce(&ctx, a),
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Romanize(a) => commands::romanize(&ctx, a),
        Command::Clean(a) => commands::clean(&ctx, a),
        Command::Dedup(a) => commands::dedup(&ctx, a),
        Command::Split(a) => commands::split(&ctx, a),
        Command::ScoreBleu(a) => commands::score_bleu(&ctx, a),
        Command::Stats(a) => commands::stats(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
