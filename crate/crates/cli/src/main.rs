mod args;
mod commands;
mod config;

use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::CommandFactory;
use trashwatch::data::DataError;
use trashwatch::detector::DetectError;
use trashwatch::netcore::NetError;

use crate::args::{Cli, Command};

/// Bad flags, bad config values or missing required settings.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Input that exists but cannot be used: unreadable images, labels,
/// datasets or checkpoints.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn classify_net(e: &NetError) -> Option<u8> {
    match e {
        NetError::Config(_) | NetError::Architecture(_) => Some(EXIT_USAGE),
        NetError::BadMagic { .. }
        | NetError::Truncated { .. }
        | NetError::CheckpointShape { .. }
        | NetError::TrailingBytes { .. }
        | NetError::CheckpointLayerCount { .. } => Some(EXIT_DATA),
        _ => None,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<clap::Error>() {
            return EXIT_USAGE;
        }
        if cause.is::<InputError>() || cause.is::<DataError>() || cause.is::<DetectError>() {
            return EXIT_DATA;
        }
        if let Some(code) = cause.downcast_ref::<NetError>().and_then(classify_net) {
            return code;
        }
        if let Some(e) = cause.downcast_ref::<trashwatch::Error>() {
            match e {
                trashwatch::Error::Data(_) | trashwatch::Error::Detect(_) => return EXIT_DATA,
                trashwatch::Error::Net(n) => {
                    if let Some(code) = classify_net(n) {
                        return code;
                    }
                }
                _ => {}
            }
        }
    }
    EXIT_RUNTIME
}

static STOP: AtomicBool = AtomicBool::new(false);

fn install_interrupt_handler() {
    let result = ctrlc::set_handler(|| {
        if STOP.swap(true, Ordering::SeqCst) {
            eprintln!("second interrupt, exiting immediately");
            std::process::exit(130);
        }
        eprintln!("interrupt received, finishing up (press again to abort)");
    });
    if let Err(e) = result {
        log::warn!("cannot install interrupt handler: {e}");
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Train(a) => commands::train::run(&cli, a, &STOP),
        Command::Detect(a) => commands::detect::run(&cli, a),
        Command::Eval(a) => commands::eval::run(&cli, a),
        Command::Watch(a) => commands::watch::run(&cli, a, &STOP),
        Command::Synth(a) => commands::synth::run(&cli, a),
        Command::Bench(a) => commands::bench::run(&cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match config::parse_with_config::<Cli>(Cli::command(), std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                // Help and version requests also arrive here, with exit code 0.
                let _ = clap_err.print();
                return ExitCode::from(if clap_err.use_stderr() { EXIT_USAGE } else { 0 });
            }
            eprintln!("error: {err:#}");
            return ExitCode::from(exit_code(&err));
        }
    };
    install_interrupt_handler();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
